#include "varsieve/trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace varsieve {

namespace {

// Gains closer than this are treated as ties and resolved by the
// deterministic tie-break chain (lower variable index, lower threshold).
constexpr double kGainTol = 1e-12;

struct VariableColumn {
  const Column* column;
  int index;  // position among variable columns
};

std::vector<VariableColumn> variable_columns(const RunTable& table) {
  std::vector<VariableColumn> vars;
  int idx = 0;
  for (const Column& col : table.columns())
    if (!col.is_objective()) vars.push_back({&col, idx++});
  return vars;
}

double entropy(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (std::size_t c : counts) {
    double p = static_cast<double>(c) / total;
    g -= p * p;
  }
  return g;
}

double sd_from_sums(double sum, double sumsq, std::size_t n) {
  if (n < 2) return 0.0;
  double var = (sumsq - sum * sum / n) / (n - 1);
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

struct TargetView {
  const Column* column = nullptr;
  bool categorical = false;
  std::size_t k = 0;

  double numeric_at(std::size_t row) const {
    return categorical ? static_cast<double>(column->classes[row])
                       : column->numeric[row];
  }
  int class_at(std::size_t row) const { return column->classes[row]; }
};

TargetView target_view(const RunTable& table, const std::string& objective) {
  const Column& col = table.column(objective);
  if (!col.is_objective())
    throw Error("'" + objective + "' is a variable, not an objective");
  TargetView view;
  view.column = &col;
  view.categorical = col.is_categorical();
  view.k = col.alphabet.size();
  return view;
}

TargetView categorical_target(const RunTable& table, const std::string& objective) {
  TargetView view = target_view(table, objective);
  if (!view.categorical)
    throw Error("objective '" + objective +
                "' is continuous; discretize it first");
  return view;
}

std::vector<double> class_counts(const TargetView& target,
                                 const std::vector<std::size_t>& rows) {
  std::vector<double> counts(target.k, 0.0);
  for (std::size_t r : rows) counts[target.class_at(r)] += 1.0;
  return counts;
}

bool is_pure(const TargetView& target, const std::vector<std::size_t>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (target.class_at(rows[i]) != target.class_at(rows[0])) return false;
  return true;
}

// Lowest-index variable / lowest-threshold split with non-empty children,
// regardless of gain. Used when a learner must split a zero-gain impure node.
std::optional<SplitTest> first_valid_split(
    const std::vector<VariableColumn>& vars,
    const std::vector<std::size_t>& rows) {
  for (const VariableColumn& var : vars) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (std::size_t r : rows) values.push_back(var.column->numeric[r]);
    std::sort(values.begin(), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      if (values[i] != values[i + 1])
        return SplitTest{var.column->name, var.index,
                         (values[i] + values[i + 1]) / 2.0};
    }
  }
  return std::nullopt;
}

void partition_rows(const Column& variable, double threshold,
                    const std::vector<std::size_t>& rows,
                    std::vector<std::size_t>& left,
                    std::vector<std::size_t>& right) {
  for (std::size_t r : rows) {
    if (variable.numeric[r] < threshold)
      left.push_back(r);
    else
      right.push_back(r);
  }
}

std::string node_kind_name(TreeNode::Kind kind) {
  switch (kind) {
    case TreeNode::Kind::Split: return "split";
    case TreeNode::Kind::Leaf: return "leaf";
    case TreeNode::Kind::Prediction: return "prediction";
    case TreeNode::Kind::Splitter: return "splitter";
  }
  throw Error("bad node kind");
}

TreeNode::Kind parse_node_kind(const std::string& name) {
  if (name == "split") return TreeNode::Kind::Split;
  if (name == "leaf") return TreeNode::Kind::Leaf;
  if (name == "prediction") return TreeNode::Kind::Prediction;
  if (name == "splitter") return TreeNode::Kind::Splitter;
  throw Error("unknown node kind '" + name + "'");
}

}  // namespace

double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double sum = std::accumulate(values.begin(), values.end(), 0.0);
  double sumsq = 0.0;
  for (double v : values) sumsq += v * v;
  return sd_from_sums(sum, sumsq, values.size());
}

Criterion parse_criterion(const std::string& name) {
  if (name == "sdr") return Criterion::Sdr;
  if (name == "info-gain-ratio") return Criterion::InfoGainRatio;
  if (name == "gini") return Criterion::Gini;
  throw Error("unknown criterion '" + name + "'");
}

std::string to_string(Criterion criterion) {
  switch (criterion) {
    case Criterion::Sdr: return "sdr";
    case Criterion::InfoGainRatio: return "info-gain-ratio";
    case Criterion::Gini: return "gini";
  }
  throw Error("bad criterion");
}

LearnerKind parse_learner_kind(const std::string& name) {
  if (name == "sdr") return LearnerKind::Sdr;
  if (name == "info-gain") return LearnerKind::InfoGain;
  if (name == "best-first") return LearnerKind::BestFirst;
  if (name == "ladtree") return LearnerKind::LadTree;
  throw Error("unknown learner '" + name + "'");
}

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Sdr: return "sdr";
    case LearnerKind::InfoGain: return "info-gain";
    case LearnerKind::BestFirst: return "best-first";
    case LearnerKind::LadTree: return "ladtree";
  }
  throw Error("bad learner kind");
}

std::optional<SplitCandidate> best_split(const RunTable& table,
                                         const std::vector<std::size_t>& rows,
                                         const std::string& objective,
                                         Criterion criterion) {
  if (rows.empty()) throw Error("best_split on zero rows");
  TargetView target = target_view(table, objective);
  if (criterion != Criterion::Sdr && !target.categorical)
    throw Error(to_string(criterion) + " requires a categorical target");

  const std::size_t n = rows.size();
  std::optional<SplitCandidate> best;

  // Parent statistics.
  std::vector<std::size_t> parent_counts;
  double parent_impurity = 0.0;
  double parent_sd = 0.0;
  if (criterion == Criterion::Sdr) {
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t r : rows) {
      double y = target.numeric_at(r);
      sum += y;
      sumsq += y * y;
    }
    parent_sd = sd_from_sums(sum, sumsq, n);
  } else {
    parent_counts.assign(target.k, 0);
    for (std::size_t r : rows) ++parent_counts[target.class_at(r)];
    parent_impurity = criterion == Criterion::InfoGainRatio
                          ? entropy(parent_counts, n)
                          : gini(parent_counts, n);
  }

  for (const VariableColumn& var : variable_columns(table)) {
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(n);
    for (std::size_t r : rows) order.emplace_back(var.column->numeric[r], r);
    std::sort(order.begin(), order.end());

    std::vector<std::size_t> left_counts(target.categorical ? target.k : 0, 0);
    double left_sum = 0.0, left_sumsq = 0.0;
    double total_sum = 0.0, total_sumsq = 0.0;
    if (criterion == Criterion::Sdr) {
      for (std::size_t r : rows) {
        double y = target.numeric_at(r);
        total_sum += y;
        total_sumsq += y * y;
      }
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
      std::size_t r = order[i].second;
      if (criterion == Criterion::Sdr) {
        double y = target.numeric_at(r);
        left_sum += y;
        left_sumsq += y * y;
      } else {
        ++left_counts[target.class_at(r)];
      }
      if (order[i].first == order[i + 1].first) continue;  // not a boundary

      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      double gain;
      if (criterion == Criterion::Sdr) {
        double sd_l = sd_from_sums(left_sum, left_sumsq, nl);
        double sd_r =
            sd_from_sums(total_sum - left_sum, total_sumsq - left_sumsq, nr);
        gain = parent_sd - (static_cast<double>(nl) / n) * sd_l -
               (static_cast<double>(nr) / n) * sd_r;
      } else {
        std::vector<std::size_t> right_counts(target.k);
        for (std::size_t c = 0; c < target.k; ++c)
          right_counts[c] = parent_counts[c] - left_counts[c];
        double wl = static_cast<double>(nl) / n;
        double wr = static_cast<double>(nr) / n;
        if (criterion == Criterion::InfoGainRatio) {
          double info_gain = parent_impurity - wl * entropy(left_counts, nl) -
                             wr * entropy(right_counts, nr);
          if (info_gain <= kGainTol) continue;
          double intrinsic = -wl * std::log2(wl) - wr * std::log2(wr);
          gain = info_gain / intrinsic;
        } else {
          gain = parent_impurity - wl * gini(left_counts, nl) -
                 wr * gini(right_counts, nr);
        }
      }
      if (gain <= kGainTol) continue;
      if (!best || gain > best->gain + kGainTol) {
        double threshold = (order[i].first + order[i + 1].first) / 2.0;
        best = SplitCandidate{{var.column->name, var.index, threshold}, gain};
      }
    }
  }
  return best;
}

namespace {

int add_leaf(TreeModel& model, const TargetView& target,
             const std::vector<std::size_t>& rows) {
  TreeNode leaf;
  leaf.kind = TreeNode::Kind::Leaf;
  if (target.categorical) {
    leaf.counts = class_counts(target, rows);
  } else {
    double sum = 0.0;
    for (std::size_t r : rows) sum += target.numeric_at(r);
    leaf.mean = rows.empty() ? 0.0 : sum / rows.size();
  }
  model.nodes.push_back(std::move(leaf));
  return static_cast<int>(model.nodes.size()) - 1;
}

}  // namespace

TreeModel train_sdr_tree(const RunTable& table, const std::string& objective,
                         double sd_fraction, int min_instances, int max_splits) {
  TargetView target = target_view(table, objective);

  TreeModel model;
  model.kind = LearnerKind::Sdr;
  model.objective = objective;
  model.continuous_target = !target.categorical;
  if (target.categorical) model.class_alphabet = target.column->alphabet;
  model.training_meta = {{"sd_fraction", sd_fraction},
                         {"min_instances", min_instances},
                         {"max_splits", max_splits},
                         {"target_coding", target.categorical
                                               ? "class-index"
                                               : "continuous"}};

  std::vector<std::size_t> all_rows(table.n_runs());
  std::iota(all_rows.begin(), all_rows.end(), 0);

  std::vector<double> root_targets;
  root_targets.reserve(all_rows.size());
  for (std::size_t r : all_rows) root_targets.push_back(target.numeric_at(r));
  const double root_sd = sample_sd(root_targets);
  const double sd_stop = sd_fraction * root_sd;

  int splits_used = 0;
  std::function<int(const std::vector<std::size_t>&)> grow =
      [&](const std::vector<std::size_t>& rows) -> int {
    std::vector<double> targets;
    targets.reserve(rows.size());
    for (std::size_t r : rows) targets.push_back(target.numeric_at(r));
    bool stop = sample_sd(targets) < sd_stop ||
                rows.size() < static_cast<std::size_t>(min_instances) ||
                (max_splits >= 0 && splits_used >= max_splits);
    std::optional<SplitCandidate> split;
    if (!stop) split = best_split(table, rows, objective, Criterion::Sdr);
    if (!split) return add_leaf(model, target, rows);

    ++splits_used;
    model.gain_log.push_back({splits_used, split->test.variable,
                              split->test.variable_index, split->test.threshold,
                              split->gain});
    int id = static_cast<int>(model.nodes.size());
    TreeNode node;
    node.kind = TreeNode::Kind::Split;
    node.test = split->test;
    model.nodes.push_back(node);

    std::vector<std::size_t> left, right;
    partition_rows(table.column(split->test.variable), split->test.threshold,
                   rows, left, right);
    int l = grow(left);
    int r = grow(right);
    model.nodes[id].children = {l, r};
    return id;
  };
  grow(all_rows);
  return model;
}

TreeModel train_info_gain_tree(const RunTable& table, const std::string& objective,
                               int min_leaf, int max_splits) {
  TargetView target = categorical_target(table, objective);

  TreeModel model;
  model.kind = LearnerKind::InfoGain;
  model.objective = objective;
  model.class_alphabet = target.column->alphabet;
  model.training_meta = {{"min_leaf", min_leaf}, {"max_splits", max_splits}};

  std::vector<VariableColumn> vars = variable_columns(table);

  int splits_used = 0;
  std::function<int(const std::vector<std::size_t>&)> grow =
      [&](const std::vector<std::size_t>& rows) -> int {
    bool stop = is_pure(target, rows) ||
                rows.size() < 2 * static_cast<std::size_t>(min_leaf) ||
                (max_splits >= 0 && splits_used >= max_splits);
    std::optional<SplitCandidate> split;
    if (!stop) {
      split = best_split(table, rows, objective, Criterion::InfoGainRatio);
      if (!split) {
        // Impure node where every split has zero gain (e.g. XOR structure):
        // take the first legal split so deeper levels can separate it.
        if (auto fallback = first_valid_split(vars, rows))
          split = SplitCandidate{*fallback, 0.0};
      }
    }
    if (!split) return add_leaf(model, target, rows);

    ++splits_used;
    model.gain_log.push_back({splits_used, split->test.variable,
                              split->test.variable_index, split->test.threshold,
                              split->gain});
    int id = static_cast<int>(model.nodes.size());
    TreeNode node;
    node.kind = TreeNode::Kind::Split;
    node.test = split->test;
    model.nodes.push_back(node);

    std::vector<std::size_t> left, right;
    partition_rows(table.column(split->test.variable), split->test.threshold,
                   rows, left, right);
    int l = grow(left);
    int r = grow(right);
    model.nodes[id].children = {l, r};
    return id;
  };
  std::vector<std::size_t> all_rows(table.n_runs());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  grow(all_rows);
  return model;
}

TreeModel train_best_first_tree(const RunTable& table, const std::string& objective,
                                int max_expansions) {
  TargetView target = categorical_target(table, objective);

  TreeModel model;
  model.kind = LearnerKind::BestFirst;
  model.objective = objective;
  model.class_alphabet = target.column->alphabet;
  model.training_meta = {{"max_expansions", max_expansions}};

  struct FrontierLeaf {
    int node_id;
    std::vector<std::size_t> rows;
    std::optional<SplitCandidate> candidate;
    int order;
  };

  std::vector<std::size_t> all_rows(table.n_runs());
  std::iota(all_rows.begin(), all_rows.end(), 0);

  std::vector<FrontierLeaf> frontier;
  int next_order = 0;
  auto push_leaf = [&](std::vector<std::size_t> rows) {
    int id = add_leaf(model, target, rows);
    std::optional<SplitCandidate> candidate =
        best_split(table, rows, objective, Criterion::Gini);
    frontier.push_back({id, std::move(rows), candidate, next_order++});
  };
  push_leaf(all_rows);

  for (int expansion = 0; expansion < max_expansions; ++expansion) {
    // Globally best expandable leaf; ties go to the older leaf.
    int pick = -1;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      if (!frontier[i].candidate) continue;
      if (pick < 0 ||
          frontier[i].candidate->gain > frontier[pick].candidate->gain + kGainTol)
        pick = static_cast<int>(i);
    }
    if (pick < 0) break;

    FrontierLeaf leaf = std::move(frontier[pick]);
    frontier.erase(frontier.begin() + pick);
    const SplitCandidate& split = *leaf.candidate;
    model.gain_log.push_back({expansion + 1, split.test.variable,
                              split.test.variable_index, split.test.threshold,
                              split.gain});

    TreeNode& node = model.nodes[leaf.node_id];
    node.kind = TreeNode::Kind::Split;
    node.test = split.test;
    node.counts.clear();

    std::vector<std::size_t> left, right;
    partition_rows(table.column(split.test.variable), split.test.threshold,
                   leaf.rows, left, right);
    std::size_t base = model.nodes.size();
    push_leaf(std::move(left));
    push_leaf(std::move(right));
    model.nodes[leaf.node_id].children = {static_cast<int>(base),
                                          static_cast<int>(base) + 1};
  }
  return model;
}

TreeModel train(const RunTable& table, const std::string& objective,
                const LearnerSpec& spec) {
  switch (spec.kind) {
    case LearnerKind::Sdr:
      return train_sdr_tree(table, objective, spec.sd_fraction,
                            spec.min_instances, spec.max_splits);
    case LearnerKind::InfoGain:
      return train_info_gain_tree(table, objective, spec.min_leaf,
                                  spec.max_splits);
    case LearnerKind::BestFirst:
      return train_best_first_tree(table, objective, spec.max_expansions);
    case LearnerKind::LadTree:
      return train_ladtree(table, objective, spec.lad);
  }
  throw Error("bad learner kind");
}

namespace {

std::vector<double> softmax(const std::vector<double>& scores) {
  double peak = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - peak);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

void accumulate_adt(const TreeModel& model, int node_id,
                    const std::function<double(const SplitTest&)>& value_of,
                    std::vector<double>& scores) {
  const TreeNode& node = model.nodes[node_id];
  for (std::size_t c = 0; c < node.scores.size(); ++c) scores[c] += node.scores[c];
  for (int splitter_id : node.children) {
    const TreeNode& splitter = model.nodes[splitter_id];
    int side = value_of(splitter.test) < splitter.test.threshold ? 0 : 1;
    accumulate_adt(model, splitter.children[side], value_of, scores);
  }
}

std::vector<double> predict_with(
    const TreeModel& model,
    const std::function<double(const SplitTest&)>& value_of) {
  if (model.continuous_target)
    throw Error("model has a continuous target; no class distribution");
  const std::size_t k = model.n_classes();
  if (model.kind == LearnerKind::LadTree) {
    std::vector<double> scores(k, 0.0);
    accumulate_adt(model, 0, value_of, scores);
    return softmax(scores);
  }
  int node_id = 0;
  while (model.nodes[node_id].kind == TreeNode::Kind::Split) {
    const TreeNode& node = model.nodes[node_id];
    node_id = value_of(node.test) < node.test.threshold ? node.children[0]
                                                        : node.children[1];
  }
  const std::vector<double>& counts = model.nodes[node_id].counts;
  double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  std::vector<double> dist(k);
  for (std::size_t c = 0; c < k; ++c) dist[c] = (counts[c] + 1.0) / (total + k);
  return dist;
}

}  // namespace

std::vector<double> predict_class_distribution(
    const TreeModel& model, const std::map<std::string, double>& run) {
  return predict_with(model, [&](const SplitTest& test) {
    auto it = run.find(test.variable);
    if (it == run.end())
      throw Error("run is missing variable '" + test.variable + "'");
    return it->second;
  });
}

std::vector<double> predict_class_distribution(const TreeModel& model,
                                               const RunTable& table,
                                               std::size_t row) {
  return predict_with(model, [&](const SplitTest& test) {
    return table.column(test.variable).numeric[row];
  });
}

nlohmann::ordered_json model_to_json(const TreeModel& model) {
  nlohmann::ordered_json doc;
  doc["kind"] = to_string(model.kind);
  doc["objective"] = model.objective;
  doc["class_alphabet"] = model.class_alphabet;
  doc["continuous_target"] = model.continuous_target;
  doc["parameters"] = model.training_meta;
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    const TreeNode& node = model.nodes[i];
    nlohmann::ordered_json n;
    n["id"] = i;
    n["kind"] = node_kind_name(node.kind);
    if (node.kind == TreeNode::Kind::Split || node.kind == TreeNode::Kind::Splitter) {
      n["variable"] = node.test.variable;
      n["variable_index"] = node.test.variable_index;
      n["threshold"] = node.test.threshold;
    }
    if (node.kind == TreeNode::Kind::Leaf) {
      if (model.continuous_target)
        n["mean"] = node.mean;
      else
        n["counts"] = node.counts;
    }
    if (node.kind == TreeNode::Kind::Prediction) n["scores"] = node.scores;
    if (!node.children.empty()) n["children"] = node.children;
    nodes.push_back(std::move(n));
  }
  doc["nodes"] = std::move(nodes);
  nlohmann::ordered_json log = nlohmann::ordered_json::array();
  for (const GainLogEntry& entry : model.gain_log) {
    log.push_back({{"iteration", entry.iteration},
                   {"variable", entry.variable},
                   {"variable_index", entry.variable_index},
                   {"threshold", entry.threshold},
                   {"gain", entry.gain}});
  }
  doc["gain_log"] = std::move(log);
  return doc;
}

TreeModel model_from_json(const nlohmann::ordered_json& doc) {
  TreeModel model;
  model.kind = parse_learner_kind(doc.at("kind").get<std::string>());
  model.objective = doc.at("objective").get<std::string>();
  model.class_alphabet = doc.at("class_alphabet").get<std::vector<std::string>>();
  model.continuous_target = doc.at("continuous_target").get<bool>();
  model.training_meta = doc.at("parameters");
  for (const auto& n : doc.at("nodes")) {
    TreeNode node;
    node.kind = parse_node_kind(n.at("kind").get<std::string>());
    if (n.contains("variable")) {
      node.test.variable = n.at("variable").get<std::string>();
      node.test.variable_index = n.at("variable_index").get<int>();
      node.test.threshold = n.at("threshold").get<double>();
    }
    if (n.contains("counts")) node.counts = n.at("counts").get<std::vector<double>>();
    if (n.contains("mean")) node.mean = n.at("mean").get<double>();
    if (n.contains("scores")) node.scores = n.at("scores").get<std::vector<double>>();
    if (n.contains("children")) node.children = n.at("children").get<std::vector<int>>();
    model.nodes.push_back(std::move(node));
  }
  for (const auto& e : doc.at("gain_log")) {
    model.gain_log.push_back({e.at("iteration").get<int>(),
                              e.at("variable").get<std::string>(),
                              e.at("variable_index").get<int>(),
                              e.at("threshold").get<double>(),
                              e.at("gain").get<double>()});
  }
  return model;
}

}  // namespace varsieve
