#include "varsieve/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace varsieve {

Xorshift64Star::Xorshift64Star(std::uint64_t seed)
    : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

std::uint64_t Xorshift64Star::next() {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545f4914f6cdd1dULL;
}

double Xorshift64Star::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t Xorshift64Star::below(std::uint64_t bound) {
  // modulo bias is irrelevant at benchmark scales
  return next() % bound;
}

PlantedFamily parse_planted_family(const std::string& name) {
  if (name == "linear-threshold") return PlantedFamily::LinearThreshold;
  if (name == "interaction-xor") return PlantedFamily::InteractionXor;
  if (name == "quadratic-radial") return PlantedFamily::QuadraticRadial;
  throw Error("unknown planted family '" + name + "'");
}

std::string to_string(PlantedFamily family) {
  switch (family) {
    case PlantedFamily::LinearThreshold: return "linear-threshold";
    case PlantedFamily::InteractionXor: return "interaction-xor";
    case PlantedFamily::QuadraticRadial: return "quadratic-radial";
  }
  throw Error("bad planted family");
}

PlantedTable generate(const PlantedSpec& spec, std::size_t n_runs) {
  if (n_runs < 2) throw Error("need at least 2 runs");
  if (spec.n_vars < 1) throw Error("need at least 1 variable");
  if (spec.k < 2) throw Error("need at least 2 classes");
  if (static_cast<std::size_t>(spec.k) > n_runs)
    throw Error("class count exceeds run count");
  if (spec.noise_rate < 0.0 || spec.noise_rate >= 0.5)
    throw Error("noise_rate must be in [0, 0.5)");
  if (spec.effective.empty()) throw Error("effective set is empty");
  for (int idx : spec.effective)
    if (idx < 1 || idx > spec.n_vars)
      throw Error("effective index " + std::to_string(idx) + " out of range");

  Xorshift64Star rng(spec.seed);

  std::vector<std::vector<double>> values(
      spec.n_vars, std::vector<double>(n_runs));
  for (std::size_t r = 0; r < n_runs; ++r)
    for (int v = 0; v < spec.n_vars; ++v) values[v][r] = rng.uniform();

  std::vector<double> score(n_runs, 0.0);
  switch (spec.family) {
    case PlantedFamily::LinearThreshold:
      for (std::size_t r = 0; r < n_runs; ++r)
        for (int idx : spec.effective) score[r] += values[idx - 1][r];
      break;
    case PlantedFamily::InteractionXor: {
      std::vector<double> medians;
      for (int idx : spec.effective) {
        std::vector<double> sorted = values[idx - 1];
        std::sort(sorted.begin(), sorted.end());
        std::size_t mid = sorted.size() / 2;
        medians.push_back(sorted.size() % 2 ? sorted[mid]
                                            : (sorted[mid - 1] + sorted[mid]) / 2);
      }
      for (std::size_t r = 0; r < n_runs; ++r) {
        int parity = 0;
        for (std::size_t e = 0; e < spec.effective.size(); ++e)
          parity ^= values[spec.effective[e] - 1][r] > medians[e] ? 1 : 0;
        score[r] = parity;
      }
      break;
    }
    case PlantedFamily::QuadraticRadial:
      for (std::size_t r = 0; r < n_runs; ++r)
        for (int idx : spec.effective) {
          double d = values[idx - 1][r] - 0.5;
          score[r] += d * d;
        }
      break;
  }

  // Discretize the score. Indicator-like families can have fewer distinct
  // values than k; then each distinct value is its own class.
  std::vector<double> distinct = score;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<int> labels(n_runs);
  std::size_t k;
  if (distinct.size() <= static_cast<std::size_t>(spec.k)) {
    k = distinct.size();
    if (k < 2)
      throw Error("objective score is constant; nothing to classify");
    for (std::size_t r = 0; r < n_runs; ++r)
      labels[r] = static_cast<int>(
          std::lower_bound(distinct.begin(), distinct.end(), score[r]) -
          distinct.begin());
  } else {
    k = spec.k;
    std::vector<double> sorted = score;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> cuts;
    for (std::size_t i = 1; i < k; ++i) {
      std::size_t cut = i * n_runs / k;
      cuts.push_back((sorted[cut - 1] + sorted[cut]) / 2.0);
    }
    for (std::size_t r = 0; r < n_runs; ++r) {
      int cls = 0;
      for (double cut : cuts)
        if (score[r] >= cut) ++cls;
      labels[r] = cls;
    }
  }

  // Flip a noise_rate fraction of labels to a uniformly random other class.
  std::size_t flips = static_cast<std::size_t>(
      std::llround(spec.noise_rate * static_cast<double>(n_runs)));
  if (flips > 0) {
    std::vector<std::size_t> order(n_runs);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < flips; ++i) {
      std::size_t j = i + rng.below(n_runs - i);
      std::swap(order[i], order[j]);
      std::size_t row = order[i];
      labels[row] = static_cast<int>(
          (labels[row] + 1 + rng.below(k - 1)) % k);
    }
  }

  std::vector<Column> columns;
  for (int v = 0; v < spec.n_vars; ++v) {
    Column col;
    col.name = "v" + std::to_string(v + 1);
    col.kind = ColumnKind::Variable;
    col.numeric = std::move(values[v]);
    columns.push_back(std::move(col));
  }
  Column objective;
  objective.name = "O1";
  objective.kind = ColumnKind::CategoricalObjective;
  objective.alphabet = default_class_labels(k);
  objective.classes = std::move(labels);
  columns.push_back(std::move(objective));

  std::vector<std::string> truth;
  for (int idx : spec.effective) truth.push_back("v" + std::to_string(idx));
  return PlantedTable{RunTable(std::move(columns)), std::move(truth)};
}

namespace {

constexpr double kGainTol = 1e-12;

double oracle_entropy(const std::vector<int>& classes, std::size_t k) {
  const std::size_t n = classes.size();
  std::vector<std::size_t> counts(k, 0);
  for (int c : classes) ++counts[c];
  double acc = 0.0;
  for (std::size_t c : counts)
    if (c > 0) acc += static_cast<double>(c) * std::log2(static_cast<double>(c));
  return std::log2(static_cast<double>(n)) - acc / static_cast<double>(n);
}

double oracle_gini(const std::vector<int>& classes, std::size_t k) {
  const std::size_t n = classes.size();
  std::vector<std::size_t> counts(k, 0);
  for (int c : classes) ++counts[c];
  double sum = 0.0;
  for (std::size_t c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(n);
    sum += p * p;
  }
  return 1.0 - sum;
}

double oracle_sd(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / (n - 1));
}

}  // namespace

std::optional<SplitCandidate> oracle_best_split(
    const RunTable& table, const std::vector<std::size_t>& rows,
    const std::string& objective, Criterion criterion) {
  if (rows.empty()) throw Error("oracle_best_split on zero rows");
  if (rows.size() > 20) throw Error("oracle is bounded to 20 rows");

  const Column& target = table.column(objective);
  if (!target.is_objective())
    throw Error("'" + objective + "' is not an objective");
  bool categorical = target.is_categorical();
  if (criterion != Criterion::Sdr && !categorical)
    throw Error("criterion needs a categorical target");
  const std::size_t k = categorical ? target.alphabet.size() : 0;

  std::vector<const Column*> vars;
  for (const Column& col : table.columns())
    if (!col.is_objective()) vars.push_back(&col);
  if (vars.size() > 8) throw Error("oracle is bounded to 8 variables");

  auto target_value = [&](std::size_t r) {
    return categorical ? static_cast<double>(target.classes[r])
                       : target.numeric[r];
  };

  std::optional<SplitCandidate> best;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    std::vector<double> sorted;
    for (std::size_t r : rows) sorted.push_back(vars[v]->numeric[r]);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    for (std::size_t b = 0; b + 1 < sorted.size(); ++b) {
      double threshold = (sorted[b] + sorted[b + 1]) / 2.0;
      std::vector<std::size_t> left, right;
      for (std::size_t r : rows) {
        if (vars[v]->numeric[r] < threshold)
          left.push_back(r);
        else
          right.push_back(r);
      }
      if (left.empty() || right.empty()) continue;

      double gain;
      const double n = static_cast<double>(rows.size());
      const double wl = left.size() / n;
      const double wr = right.size() / n;
      if (criterion == Criterion::Sdr) {
        std::vector<double> py, ly, ry;
        for (std::size_t r : rows) py.push_back(target_value(r));
        for (std::size_t r : left) ly.push_back(target_value(r));
        for (std::size_t r : right) ry.push_back(target_value(r));
        gain = oracle_sd(py) - wl * oracle_sd(ly) - wr * oracle_sd(ry);
      } else {
        std::vector<int> pc, lc, rc;
        for (std::size_t r : rows) pc.push_back(target.classes[r]);
        for (std::size_t r : left) lc.push_back(target.classes[r]);
        for (std::size_t r : right) rc.push_back(target.classes[r]);
        if (criterion == Criterion::InfoGainRatio) {
          double info_gain = oracle_entropy(pc, k) - wl * oracle_entropy(lc, k) -
                             wr * oracle_entropy(rc, k);
          if (info_gain <= kGainTol) continue;
          double intrinsic = -wl * std::log2(wl) - wr * std::log2(wr);
          gain = info_gain / intrinsic;
        } else {
          gain = oracle_gini(pc, k) - wl * oracle_gini(lc, k) -
                 wr * oracle_gini(rc, k);
        }
      }
      if (gain <= kGainTol) continue;
      if (!best || gain > best->gain + kGainTol)
        best = SplitCandidate{
            {vars[v]->name, static_cast<int>(v), threshold}, gain};
    }
  }
  return best;
}

double recovery_score(const ImportanceRanking& ranking,
                      const std::set<std::string>& truth) {
  if (truth.empty()) throw Error("empty ground-truth set");
  std::size_t hits = 0;
  std::size_t top = std::min(truth.size(), ranking.entries.size());
  for (std::size_t i = 0; i < top; ++i)
    if (truth.count(ranking.entries[i].variable)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace varsieve
