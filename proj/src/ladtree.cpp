#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "varsieve/trees.hpp"

namespace varsieve {

namespace {

constexpr double kGainTol = 1e-12;

struct PredictionSite {
  int node_id;
  std::vector<std::size_t> rows;
  int order;  // creation order, used as the final tie-break
};

struct SplitterChoice {
  int site = -1;
  int variable_index = -1;
  std::string variable;
  double threshold = 0.0;
  double gain = -1.0;
  int site_order = 0;
};

}  // namespace

TreeModel train_ladtree(const RunTable& table, const std::string& objective,
                        const LadTreeParams& params) {
  const Column& target = table.column(objective);
  if (!target.is_categorical())
    throw Error("objective '" + objective +
                "' is continuous; discretize it first");
  const std::size_t k = target.alphabet.size();
  if (k < 2) throw Error("ladtree needs at least 2 classes");
  if (params.iterations < 1) throw Error("ladtree needs iterations >= 1");
  if (params.z_clip <= 0.0) throw Error("z_clip must be positive");
  if (params.weight_floor <= 0.0) throw Error("weight_floor must be positive");

  const std::size_t n = table.n_runs();

  std::vector<const Column*> vars;
  for (const Column& col : table.columns())
    if (!col.is_objective()) vars.push_back(&col);

  TreeModel model;
  model.kind = LearnerKind::LadTree;
  model.objective = objective;
  model.class_alphabet = target.alphabet;
  model.training_meta = {{"iterations", params.iterations},
                         {"z_clip", params.z_clip},
                         {"weight_floor", params.weight_floor}};

  TreeNode root;
  root.kind = TreeNode::Kind::Prediction;
  root.scores.assign(k, 0.0);
  model.nodes.push_back(std::move(root));

  std::vector<PredictionSite> sites;
  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);
  sites.push_back({0, std::move(all_rows), 0});
  int next_order = 1;

  // Additive scores per instance; the model is refit against these each round.
  std::vector<std::vector<double>> scores(n, std::vector<double>(k, 0.0));
  std::vector<std::vector<double>> prob(n, std::vector<double>(k));
  std::vector<std::vector<double>> weight(n, std::vector<double>(k));
  std::vector<std::vector<double>> response(n, std::vector<double>(k));

  auto log_loss = [&]() {
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      loss -= std::log(prob[i][target.classes[i]]);
    return loss / n;
  };

  auto refresh_probabilities = [&]() {
    for (std::size_t i = 0; i < n; ++i) {
      double peak = *std::max_element(scores[i].begin(), scores[i].end());
      double total = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        prob[i][j] = std::exp(scores[i][j] - peak);
        total += prob[i][j];
      }
      for (std::size_t j = 0; j < k; ++j) prob[i][j] /= total;
    }
  };

  refresh_probabilities();
  std::vector<double> loss_trace{log_loss()};

  int performed = 0;
  for (int iter = 1; iter <= params.iterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        double p = prob[i][j];
        double y = target.classes[i] == static_cast<int>(j) ? 1.0 : 0.0;
        weight[i][j] = p * (1.0 - p);
        double z = (y - p) / std::max(weight[i][j], params.weight_floor);
        response[i][j] = std::clamp(z, -params.z_clip, params.z_clip);
      }
    }

    // Search every (prediction site, variable, midpoint) triple for the
    // splitter that most reduces weighted squared error on the responses.
    SplitterChoice best;
    for (const PredictionSite& site : sites) {
      const std::vector<std::size_t>& rows = site.rows;
      if (rows.size() < 2) continue;
      for (std::size_t v = 0; v < vars.size(); ++v) {
        std::vector<std::pair<double, std::size_t>> order;
        order.reserve(rows.size());
        for (std::size_t r : rows) order.emplace_back(vars[v]->numeric[r], r);
        std::sort(order.begin(), order.end());

        std::vector<double> wl(k, 0.0), wzl(k, 0.0), wt(k, 0.0), wzt(k, 0.0);
        for (std::size_t r : rows) {
          for (std::size_t j = 0; j < k; ++j) {
            wt[j] += weight[r][j];
            wzt[j] += weight[r][j] * response[r][j];
          }
        }
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          std::size_t r = order[i].second;
          for (std::size_t j = 0; j < k; ++j) {
            wl[j] += weight[r][j];
            wzl[j] += weight[r][j] * response[r][j];
          }
          if (order[i].first == order[i + 1].first) continue;
          double gain = 0.0;
          for (std::size_t j = 0; j < k; ++j) {
            if (wl[j] > 0.0) gain += wzl[j] * wzl[j] / wl[j];
            double wr = wt[j] - wl[j];
            double wzr = wzt[j] - wzl[j];
            if (wr > 0.0) gain += wzr * wzr / wr;
          }
          double threshold = (order[i].first + order[i + 1].first) / 2.0;
          bool take;
          if (best.site < 0) {
            take = true;
          } else if (gain > best.gain + kGainTol) {
            take = true;
          } else if (gain < best.gain - kGainTol) {
            take = false;
          } else {
            take = std::make_tuple(static_cast<int>(v), threshold,
                                   site.order) <
                   std::make_tuple(best.variable_index, best.threshold,
                                   best.site_order);
          }
          if (take) {
            best.site = site.node_id;
            best.variable_index = static_cast<int>(v);
            best.variable = vars[v]->name;
            best.threshold = threshold;
            best.gain = gain;
            best.site_order = site.order;
          }
        }
      }
    }
    if (best.site < 0 || best.gain <= kGainTol) break;

    // Fit the two prediction values: centered weighted means of the working
    // responses, scaled by (k-1)/k.
    const PredictionSite* chosen = nullptr;
    for (const PredictionSite& site : sites)
      if (site.node_id == best.site && site.order == best.site_order)
        chosen = &site;
    std::vector<std::size_t> left, right;
    for (std::size_t r : chosen->rows) {
      if (vars[best.variable_index]->numeric[r] < best.threshold)
        left.push_back(r);
      else
        right.push_back(r);
    }
    auto fit_values = [&](const std::vector<std::size_t>& side) {
      std::vector<double> zbar(k, 0.0);
      for (std::size_t j = 0; j < k; ++j) {
        double w_sum = 0.0, wz_sum = 0.0;
        for (std::size_t r : side) {
          w_sum += weight[r][j];
          wz_sum += weight[r][j] * response[r][j];
        }
        zbar[j] = w_sum > 0.0 ? wz_sum / w_sum : 0.0;
      }
      double mean = std::accumulate(zbar.begin(), zbar.end(), 0.0) / k;
      std::vector<double> value(k);
      for (std::size_t j = 0; j < k; ++j)
        value[j] = (static_cast<double>(k) - 1.0) / k * (zbar[j] - mean);
      return value;
    };
    std::vector<double> left_value = fit_values(left);
    std::vector<double> right_value = fit_values(right);

    int splitter_id = static_cast<int>(model.nodes.size());
    TreeNode splitter;
    splitter.kind = TreeNode::Kind::Splitter;
    splitter.test = {best.variable, best.variable_index, best.threshold};
    model.nodes.push_back(std::move(splitter));

    TreeNode left_node, right_node;
    left_node.kind = right_node.kind = TreeNode::Kind::Prediction;
    left_node.scores = left_value;
    right_node.scores = right_value;
    int left_id = static_cast<int>(model.nodes.size());
    model.nodes.push_back(std::move(left_node));
    int right_id = static_cast<int>(model.nodes.size());
    model.nodes.push_back(std::move(right_node));
    model.nodes[splitter_id].children = {left_id, right_id};
    model.nodes[best.site].children.push_back(splitter_id);

    for (std::size_t r : left)
      for (std::size_t j = 0; j < k; ++j) scores[r][j] += left_value[j];
    for (std::size_t r : right)
      for (std::size_t j = 0; j < k; ++j) scores[r][j] += right_value[j];

    sites.push_back({left_id, std::move(left), next_order++});
    sites.push_back({right_id, std::move(right), next_order++});

    model.gain_log.push_back(
        {iter, best.variable, best.variable_index, best.threshold, best.gain});
    refresh_probabilities();
    loss_trace.push_back(log_loss());
    performed = iter;
  }

  model.training_meta["iterations_performed"] = performed;
  model.training_meta["log_loss"] = loss_trace;
  return model;
}

}  // namespace varsieve
