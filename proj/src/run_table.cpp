#include "varsieve/run_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace varsieve {

namespace {

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, out, std::chars_format::general);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// One CSV record, RFC-4180 quoting.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // tolerate CRLF input
    } else {
      field += c;
    }
  }
  if (quoted) throw Error("unterminated quote on line " + std::to_string(lineno));
  fields.push_back(field);
  return fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::vector<std::string> default_class_labels(std::size_t k) {
  std::vector<std::string> labels;
  labels.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::string label;
    std::size_t n = i;
    do {
      label.insert(label.begin(), static_cast<char>('a' + n % 26));
      n = n / 26;
    } while (n-- > 0);
    labels.push_back(label);
  }
  return labels;
}

DiscretizationSpec::Method parse_discretization_method(const std::string& name) {
  if (name == "equal-width") return DiscretizationSpec::Method::EqualWidth;
  if (name == "equal-frequency") return DiscretizationSpec::Method::EqualFrequency;
  if (name == "explicit-thresholds" || name == "thresholds")
    return DiscretizationSpec::Method::Thresholds;
  throw Error("unknown discretization method '" + name + "'");
}

std::string to_string(DiscretizationSpec::Method method) {
  switch (method) {
    case DiscretizationSpec::Method::EqualWidth: return "equal-width";
    case DiscretizationSpec::Method::EqualFrequency: return "equal-frequency";
    case DiscretizationSpec::Method::Thresholds: return "explicit-thresholds";
  }
  throw Error("bad discretization method");
}

RunTable::RunTable(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw Error("run table has no columns");
  n_runs_ = columns_.front().size();
  if (n_runs_ < 2) throw Error("run table needs at least 2 runs, got " +
                               std::to_string(n_runs_));
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const Column& col = columns_[i];
    if (col.size() != n_runs_)
      throw Error("column '" + col.name + "' has " + std::to_string(col.size()) +
                  " entries, expected " + std::to_string(n_runs_));
    if (!index_.emplace(col.name, i).second)
      throw Error("duplicate column name '" + col.name + "'");
    if (col.is_categorical()) {
      if (col.alphabet.size() < 2)
        throw Error("categorical objective '" + col.name +
                    "' needs at least 2 classes");
      std::set<std::string> distinct(col.alphabet.begin(), col.alphabet.end());
      if (distinct.size() != col.alphabet.size())
        throw Error("duplicate class label in objective '" + col.name + "'");
      for (int cls : col.classes) {
        if (cls < 0 || static_cast<std::size_t>(cls) >= col.alphabet.size())
          throw Error("class index out of range in objective '" + col.name + "'");
      }
    }
  }
}

bool RunTable::has_column(const std::string& name) const {
  return index_.count(name) > 0;
}

std::size_t RunTable::column_index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("no column named '" + name + "'");
  return it->second;
}

const Column& RunTable::column(const std::string& name) const {
  return columns_[column_index(name)];
}

std::size_t RunTable::variable_count() const {
  return static_cast<std::size_t>(
      std::count_if(columns_.begin(), columns_.end(),
                    [](const Column& c) { return !c.is_objective(); }));
}

std::size_t RunTable::objective_count() const {
  return columns_.size() - variable_count();
}

std::vector<std::string> RunTable::variable_names() const {
  std::vector<std::string> names;
  for (const Column& c : columns_)
    if (!c.is_objective()) names.push_back(c.name);
  return names;
}

std::vector<std::string> RunTable::objective_names() const {
  std::vector<std::string> names;
  for (const Column& c : columns_)
    if (c.is_objective()) names.push_back(c.name);
  return names;
}

RunTable load_csv(const std::string& path,
                  const std::vector<std::string>& objective_names) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw Error("'" + path + "' is empty");
  std::vector<std::string> header = split_csv_line(line, 1);

  std::set<std::string> objectives(objective_names.begin(), objective_names.end());
  for (const std::string& name : objective_names) {
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw Error("objective column '" + name + "' not found in '" + path + "'");
  }

  std::vector<std::vector<std::string>> cells(header.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line, lineno);
    if (fields.size() != header.size())
      throw Error("line " + std::to_string(lineno) + " has " +
                  std::to_string(fields.size()) + " fields, expected " +
                  std::to_string(header.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::string field(trim(fields[i]));
      if (field.empty())
        throw Error("missing value at line " + std::to_string(lineno) +
                    ", column '" + header[i] + "'");
      cells[i].push_back(std::move(field));
    }
  }

  std::vector<Column> columns;
  columns.reserve(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) {
    Column col;
    col.name = header[i];
    bool objective = objectives.count(col.name) > 0;
    bool numeric = true;
    std::vector<double> values(cells[i].size());
    for (std::size_t r = 0; r < cells[i].size(); ++r) {
      if (!parse_double(cells[i][r], values[r])) {
        numeric = false;
        break;
      }
    }
    if (numeric) {
      col.kind = objective ? ColumnKind::NumericObjective : ColumnKind::Variable;
      col.numeric = std::move(values);
    } else {
      if (!objective)
        throw Error("non-numeric token in variable column '" + col.name + "'");
      col.kind = ColumnKind::CategoricalObjective;
      std::set<std::string> alphabet(cells[i].begin(), cells[i].end());
      col.alphabet.assign(alphabet.begin(), alphabet.end());
      for (const std::string& token : cells[i]) {
        auto it = std::lower_bound(col.alphabet.begin(), col.alphabet.end(), token);
        col.classes.push_back(static_cast<int>(it - col.alphabet.begin()));
      }
    }
    columns.push_back(std::move(col));
  }
  return RunTable(std::move(columns));
}

RunTable load_arff(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");

  std::vector<Column> columns;
  bool in_data = false;
  bool saw_relation = false;
  std::string line;
  std::size_t lineno = 0;
  std::size_t n_rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '%') continue;
    if (!in_data && sv.front() == '@') {
      std::string head = lower(sv.substr(0, sv.find_first_of(" \t")));
      if (head == "@relation") {
        saw_relation = true;
      } else if (head == "@attribute") {
        std::string_view rest = trim(sv.substr(10));
        std::string name;
        if (!rest.empty() && (rest.front() == '\'' || rest.front() == '"')) {
          char quote = rest.front();
          std::size_t close = rest.find(quote, 1);
          if (close == std::string_view::npos)
            throw Error("malformed attribute name on line " + std::to_string(lineno));
          name = std::string(rest.substr(1, close - 1));
          rest = trim(rest.substr(close + 1));
        } else {
          std::size_t space = rest.find_first_of(" \t");
          if (space == std::string_view::npos)
            throw Error("attribute without type on line " + std::to_string(lineno));
          name = std::string(rest.substr(0, space));
          rest = trim(rest.substr(space));
        }
        Column col;
        col.name = name;
        std::string type = lower(rest);
        if (type == "numeric" || type == "real" || type == "integer") {
          col.kind = ColumnKind::Variable;
        } else if (!rest.empty() && rest.front() == '{' && rest.back() == '}') {
          col.kind = ColumnKind::CategoricalObjective;
          std::string body(rest.substr(1, rest.size() - 2));
          std::stringstream ss(body);
          std::string token;
          while (std::getline(ss, token, ',')) {
            std::string value(trim(token));
            if (value.empty())
              throw Error("empty nominal value on line " + std::to_string(lineno));
            col.alphabet.push_back(value);
          }
          if (col.alphabet.size() < 2)
            throw Error("nominal attribute '" + name + "' needs >= 2 values");
        } else {
          throw Error("unsupported attribute type '" + std::string(rest) +
                      "' on line " + std::to_string(lineno));
        }
        columns.push_back(std::move(col));
      } else if (head == "@data") {
        if (!saw_relation) throw Error("@data before @relation");
        if (columns.empty()) throw Error("@data with no attributes");
        in_data = true;
      } else {
        throw Error("unknown ARFF declaration on line " + std::to_string(lineno));
      }
      continue;
    }
    if (!in_data)
      throw Error("data before @data section on line " + std::to_string(lineno));

    std::vector<std::string> fields = split_csv_line(std::string(sv), lineno);
    if (fields.size() != columns.size())
      throw Error("line " + std::to_string(lineno) + " has " +
                  std::to_string(fields.size()) + " values, expected " +
                  std::to_string(columns.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::string value(trim(fields[i]));
      Column& col = columns[i];
      if (col.is_categorical()) {
        auto it = std::find(col.alphabet.begin(), col.alphabet.end(), value);
        if (it == col.alphabet.end())
          throw Error("undeclared nominal value '" + value + "' on line " +
                      std::to_string(lineno));
        col.classes.push_back(static_cast<int>(it - col.alphabet.begin()));
      } else {
        double parsed;
        if (!parse_double(value, parsed))
          throw Error("non-numeric value '" + value + "' on line " +
                      std::to_string(lineno));
        col.numeric.push_back(parsed);
      }
    }
    ++n_rows;
  }
  if (!in_data) throw Error("'" + path + "' has no @data section");
  if (n_rows == 0) throw Error("'" + path + "' has no data rows");
  return RunTable(std::move(columns));
}

void save_csv(const RunTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  const auto& cols = table.columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(cols[i].name);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.n_runs(); ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ',';
      if (cols[i].is_categorical())
        out << csv_escape(cols[i].alphabet[cols[i].classes[r]]);
      else
        out << format_double(cols[i].numeric[r]);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

void save_arff(const RunTable& table, const std::string& path,
               const std::string& relation) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "@relation " << relation << '\n';
  for (const Column& col : table.columns()) {
    out << "@attribute " << col.name << ' ';
    if (col.is_categorical()) {
      out << '{';
      for (std::size_t i = 0; i < col.alphabet.size(); ++i) {
        if (i) out << ',';
        out << col.alphabet[i];
      }
      out << '}';
    } else {
      out << "numeric";
    }
    out << '\n';
  }
  out << "@data\n";
  for (std::size_t r = 0; r < table.n_runs(); ++r) {
    const auto& cols = table.columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ',';
      if (cols[i].is_categorical())
        out << cols[i].alphabet[cols[i].classes[r]];
      else
        out << format_double(cols[i].numeric[r]);
    }
    out << '\n';
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

RunTable discretize_objective(const RunTable& table, const std::string& objective,
                              const DiscretizationSpec& spec) {
  const Column& src = table.column(objective);
  if (!src.is_objective())
    throw Error("'" + objective + "' is a variable, not an objective");
  if (src.is_categorical())
    throw Error("objective '" + objective + "' is already categorical");

  const std::vector<double>& values = src.numeric;
  const std::size_t n = values.size();
  std::vector<double> cuts;

  switch (spec.method) {
    case DiscretizationSpec::Method::EqualWidth: {
      if (spec.k < 2) throw Error("class count must be >= 2");
      double lo = *std::min_element(values.begin(), values.end());
      double hi = *std::max_element(values.begin(), values.end());
      if (lo == hi)
        throw Error("all values of '" + objective +
                    "' are identical; equal-width bins have zero width");
      for (int i = 1; i < spec.k; ++i)
        cuts.push_back(lo + (hi - lo) * i / spec.k);
      break;
    }
    case DiscretizationSpec::Method::EqualFrequency: {
      if (spec.k < 2) throw Error("class count must be >= 2");
      if (static_cast<std::size_t>(spec.k) > n)
        throw Error("equal-frequency needs k <= n_runs");
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      for (int i = 1; i < spec.k; ++i) {
        std::size_t cut = i * n / spec.k;
        cuts.push_back((sorted[cut - 1] + sorted[cut]) / 2.0);
      }
      cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
      break;
    }
    case DiscretizationSpec::Method::Thresholds: {
      if (spec.thresholds.size() < 1) throw Error("need at least one threshold");
      for (std::size_t i = 1; i < spec.thresholds.size(); ++i)
        if (!(spec.thresholds[i - 1] < spec.thresholds[i]))
          throw Error("thresholds must be strictly ascending");
      cuts = spec.thresholds;
      break;
    }
  }

  const std::size_t k = cuts.size() + 1;
  std::vector<std::string> labels =
      spec.labels.empty() ? default_class_labels(k) : spec.labels;
  if (labels.size() != k)
    throw Error("got " + std::to_string(labels.size()) + " labels for " +
                std::to_string(k) + " bins");

  Column out;
  out.name = src.name;
  out.kind = ColumnKind::CategoricalObjective;
  out.alphabet = labels;
  out.classes.reserve(n);
  std::vector<std::size_t> bin_counts(k, 0);
  for (double v : values) {
    // value < cut goes to the lower bin, value >= cut to the upper
    int cls = static_cast<int>(
        std::upper_bound(cuts.begin(), cuts.end(), v,
                         [](double value, double cut) { return value < cut; }) -
        cuts.begin());
    out.classes.push_back(cls);
    ++bin_counts[cls];
  }

  std::vector<Column> columns = table.columns();
  columns[table.column_index(objective)] = std::move(out);
  RunTable result(std::move(columns));
  result.cuts_ = table.cuts_;
  result.cuts_[objective] = cuts;
  result.warnings_ = table.warnings_;
  for (std::size_t i = 0; i < k; ++i) {
    if (bin_counts[i] == 0)
      result.warnings_.push_back("objective '" + objective + "': class '" +
                                 labels[i] + "' is empty");
  }
  return result;
}

RunTable drop_run(const RunTable& table, std::size_t row) {
  if (row >= table.n_runs()) throw Error("row index out of range");
  if (table.n_runs() < 3) throw Error("cannot drop a run from a 2-run table");
  std::vector<Column> columns = table.columns();
  for (Column& col : columns) {
    if (col.is_categorical())
      col.classes.erase(col.classes.begin() + row);
    else
      col.numeric.erase(col.numeric.begin() + row);
  }
  RunTable result(std::move(columns));
  result.cuts_ = table.cuts_;
  return result;
}

}  // namespace varsieve
