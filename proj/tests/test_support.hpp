#pragma once

#include <string>
#include <vector>

#include "varsieve/run_table.hpp"
#include "varsieve/synthbench.hpp"

namespace vtest {

inline varsieve::Column num_col(std::string name, std::vector<double> values,
                                bool objective = false) {
  varsieve::Column col;
  col.name = std::move(name);
  col.kind = objective ? varsieve::ColumnKind::NumericObjective
                       : varsieve::ColumnKind::Variable;
  col.numeric = std::move(values);
  return col;
}

inline varsieve::Column class_col(std::string name, std::vector<int> classes,
                                  std::vector<std::string> alphabet) {
  varsieve::Column col;
  col.name = std::move(name);
  col.kind = varsieve::ColumnKind::CategoricalObjective;
  col.classes = std::move(classes);
  col.alphabet = std::move(alphabet);
  return col;
}

/// Four separable runs: v1 in {1,2,8,9}, classes {a,a,b,b}.
inline varsieve::RunTable separable4() {
  return varsieve::RunTable(
      {num_col("v1", {1, 2, 8, 9}), class_col("O1", {0, 0, 1, 1}, {"a", "b"})});
}

inline bool tables_equal(const varsieve::RunTable& a, const varsieve::RunTable& b) {
  if (a.n_runs() != b.n_runs()) return false;
  if (a.columns().size() != b.columns().size()) return false;
  for (std::size_t i = 0; i < a.columns().size(); ++i) {
    const varsieve::Column& ca = a.columns()[i];
    const varsieve::Column& cb = b.columns()[i];
    if (ca.name != cb.name || ca.kind != cb.kind) return false;
    if (ca.numeric != cb.numeric) return false;
    if (ca.classes != cb.classes || ca.alphabet != cb.alphabet) return false;
  }
  return true;
}

/// Random table with uniform variables and uniformly random class labels,
/// ensuring at least two classes actually occur.
inline varsieve::RunTable random_table(varsieve::Xorshift64Star& rng,
                                       std::size_t n_rows, std::size_t n_vars,
                                       std::size_t k) {
  std::vector<varsieve::Column> columns;
  for (std::size_t v = 0; v < n_vars; ++v) {
    std::vector<double> values(n_rows);
    for (double& x : values) x = rng.uniform();
    columns.push_back(num_col("v" + std::to_string(v + 1), std::move(values)));
  }
  std::vector<int> classes(n_rows);
  for (int& c : classes) c = static_cast<int>(rng.below(k));
  classes[0] = 0;
  classes[n_rows - 1] = 1;
  columns.push_back(
      class_col("O1", std::move(classes), varsieve::default_class_labels(k)));
  return varsieve::RunTable(std::move(columns));
}

}  // namespace vtest
