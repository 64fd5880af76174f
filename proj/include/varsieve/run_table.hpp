#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace varsieve {

/// Toolkit-wide error type. Everything user-facing throws this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ColumnKind { Variable, NumericObjective, CategoricalObjective };

/// One named column of a run table. Variables and numeric objectives hold
/// `numeric`; categorical objectives hold class indices into `alphabet`.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Variable;
  std::vector<double> numeric;
  std::vector<int> classes;
  std::vector<std::string> alphabet;

  bool is_objective() const { return kind != ColumnKind::Variable; }
  bool is_categorical() const { return kind == ColumnKind::CategoricalObjective; }
  std::size_t size() const {
    return is_categorical() ? classes.size() : numeric.size();
  }
};

/// How to bin a continuous objective into classes.
struct DiscretizationSpec {
  enum class Method { EqualWidth, EqualFrequency, Thresholds };
  Method method = Method::EqualWidth;
  int k = 2;                          // class count (EqualWidth / EqualFrequency)
  std::vector<double> thresholds;     // Thresholds method; strictly ascending
  std::vector<std::string> labels;    // optional; defaults to a, b, c, ...
};

DiscretizationSpec::Method parse_discretization_method(const std::string& name);
std::string to_string(DiscretizationSpec::Method method);

/// Default class labels a, b, ..., z, aa, ab, ... for `k` bins.
std::vector<std::string> default_class_labels(std::size_t k);

/// Immutable table of simulation runs: named continuous variable columns plus
/// objective columns (continuous or already discretized). Safe to share across
/// concurrent trainings once constructed.
class RunTable {
 public:
  explicit RunTable(std::vector<Column> columns);

  std::size_t n_runs() const { return n_runs_; }
  const std::vector<Column>& columns() const { return columns_; }

  bool has_column(const std::string& name) const;
  std::size_t column_index(const std::string& name) const;
  const Column& column(const std::string& name) const;

  std::size_t variable_count() const;
  std::size_t objective_count() const;
  std::vector<std::string> variable_names() const;
  std::vector<std::string> objective_names() const;

  /// Thresholds actually used by discretize_objective, keyed by objective.
  const std::map<std::string, std::vector<double>>& discretization_cuts() const {
    return cuts_;
  }
  /// Non-fatal issues recorded during load/discretize (e.g. empty classes).
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend RunTable discretize_objective(const RunTable& table,
                                       const std::string& objective,
                                       const DiscretizationSpec& spec);
  friend RunTable drop_run(const RunTable& table, std::size_t row);

  std::vector<Column> columns_;
  std::map<std::string, std::size_t> index_;
  std::size_t n_runs_ = 0;
  std::map<std::string, std::vector<double>> cuts_;
  std::vector<std::string> warnings_;
};

/// Load a CSV run table. Columns named in `objective_names` become objectives;
/// an objective column with any non-numeric token is treated as categorical
/// with a sorted alphabet of its distinct tokens. All other columns must be
/// fully numeric.
RunTable load_csv(const std::string& path,
                  const std::vector<std::string>& objective_names);

/// Load an ARFF file: numeric attributes become variables, nominal attributes
/// become categorical objectives. Attribute order is preserved.
RunTable load_arff(const std::string& path);

void save_csv(const RunTable& table, const std::string& path);
void save_arff(const RunTable& table, const std::string& path,
               const std::string& relation = "runs");

/// Replace a continuous objective by a class-label column. The cut points
/// actually used are recorded in the result's discretization_cuts().
/// Values below a cut fall in the lower bin; values at or above it in the
/// upper bin.
RunTable discretize_objective(const RunTable& table, const std::string& objective,
                              const DiscretizationSpec& spec);

/// Copy of `table` without row `row`. Class alphabets are kept as-is so fold
/// tables stay dimension-compatible with the full table.
RunTable drop_run(const RunTable& table, std::size_t row);

}  // namespace varsieve
