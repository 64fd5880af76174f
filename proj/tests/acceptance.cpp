// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance and budget is pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "varsieve/evaluation.hpp"
#include "varsieve/run_table.hpp"
#include "varsieve/screening.hpp"
#include "varsieve/synthbench.hpp"
#include "varsieve/trees.hpp"

using namespace varsieve;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

// ---- 1. oracle split equivalence ------------------------------------------

Check oracle_equivalence() {
  Check check{"1 oracle split equivalence (500 instances x 3 criteria)"};
  auto start = Clock::now();
  Xorshift64Star rng(1001);
  for (Criterion criterion :
       {Criterion::Sdr, Criterion::InfoGainRatio, Criterion::Gini}) {
    for (int trial = 0; trial < 500; ++trial) {
      RunTable table = vtest::random_table(rng, 3 + rng.below(10),
                                           1 + rng.below(6), 2 + rng.below(3));
      std::vector<std::size_t> rows(table.n_runs());
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
      auto lib = best_split(table, rows, "O1", criterion);
      auto oracle = oracle_best_split(table, rows, "O1", criterion);
      if (lib.has_value() != oracle.has_value()) {
        check.detail = "presence mismatch, criterion " + to_string(criterion);
        return check;
      }
      if (!lib) continue;
      if (lib->test.variable != oracle->test.variable ||
          lib->test.threshold != oracle->test.threshold ||
          std::abs(lib->gain - oracle->gain) > 1e-12) {
        check.detail = "split mismatch, criterion " + to_string(criterion);
        return check;
      }
    }
  }
  double elapsed = seconds_since(start);
  if (elapsed >= 5.0) {
    check.detail = "took " + std::to_string(elapsed) + " s (budget 5 s)";
    return check;
  }
  check.passed = true;
  return check;
}

// ---- 2. closed-form errors -------------------------------------------------

Check closed_form_errors() {
  Check check{"2 closed-form class-probability errors"};
  auto [abs_u, sq_u] = instance_error({0.25, 0.25, 0.25, 0.25}, 0);
  if (std::abs(abs_u - 0.375) > 1e-9 ||
      std::abs(std::sqrt(sq_u) - 0.4330127) > 1e-7 ||
      std::abs(std::sqrt(sq_u) - std::sqrt(3.0) / 4.0) > 1e-9) {
    check.detail = "uniform 4-class predictor off";
    return check;
  }
  auto [abs_p, sq_p] = instance_error({0.0, 1.0, 0.0, 0.0}, 1);
  if (abs_p != 0.0 || sq_p != 0.0) {
    check.detail = "perfect predictor not exactly zero";
    return check;
  }
  check.passed = true;
  return check;
}

// ---- 3. planted-variable recovery ------------------------------------------

Check planted_recovery() {
  Check check{"3 planted-variable recovery (42 vars, 8 effective, 50 seeds)"};
  auto start = Clock::now();
  const std::set<int> truth_idx{3, 8, 13, 18, 23, 28, 33, 38};
  double total = 0.0;
  int found_seven = 0;
  const int seeds = 50;
  for (int seed = 1; seed <= seeds; ++seed) {
    PlantedSpec spec;
    spec.n_vars = 42;
    spec.effective.assign(truth_idx.begin(), truth_idx.end());
    spec.family = PlantedFamily::LinearThreshold;
    spec.noise_rate = 0.05;
    spec.k = 2;
    spec.seed = static_cast<std::uint64_t>(seed);
    PlantedTable planted = generate(spec, 200);
    LadTreeParams params;
    params.iterations = 20;
    TreeModel model = train_ladtree(planted.table, "O1", params);
    std::set<std::string> truth(planted.effective.begin(),
                                planted.effective.end());
    ImportanceRanking ranking = rank_variables(model);
    total += recovery_score(ranking, truth);
    int found = 0;
    for (const ImportanceEntry& entry : ranking.entries)
      if (truth.count(entry.variable)) ++found;
    if (found >= 7) ++found_seven;
  }
  double mean = total / seeds;
  double fraction = static_cast<double>(found_seven) / seeds;
  double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "mean score " << mean << ", 7+ of 8 found in " << 100.0 * fraction
         << "% of seeds, " << elapsed << " s";
  check.detail = detail.str();
  check.passed = mean >= 0.85 && fraction >= 0.90 && elapsed < 60.0;
  return check;
}

// ---- 4. small-table budget ---------------------------------------------------

Check small_table_budget() {
  Check check{"4 full pipeline on 12 runs x 42 variables"};
  PlantedSpec spec;
  spec.n_vars = 42;
  spec.effective = {5, 11, 17};
  spec.k = 2;
  spec.seed = 404;
  PlantedTable planted = generate(spec, 12);
  std::string path =
      (std::filesystem::temp_directory_path() / "varsieve_accept12.csv").string();
  save_csv(planted.table, path);

  auto start = Clock::now();
  RunTable table = load_csv(path, {"O1"});
  LearnerSpec learner;
  learner.kind = LearnerKind::LadTree;
  ImportanceRanking ranking = select_variables(table, "O1", learner, 0.5, 0.6, 20);
  RunTable reduced = reduce_dataset(table, {ranking});
  ScreeningReport report =
      build_report(table, {ranking}, seconds_since(start));
  double elapsed = seconds_since(start);
  std::filesystem::remove(path);

  check.detail = std::to_string(elapsed) + " s (budget 1 s), union " +
                 std::to_string(report.union_variables.size());
  check.passed = elapsed < 1.0 && !report.union_variables.empty() &&
                 reduced.variable_count() == report.union_variables.size();
  return check;
}

// ---- 5. report-shape reproduction ------------------------------------------

// Round after which the boosted model has used exactly `want` distinct
// variables, read off the gain log of one deep training run.
int round_with_distinct(const TreeModel& model, std::size_t want) {
  std::set<std::string> seen;
  for (const GainLogEntry& entry : model.gain_log) {
    seen.insert(entry.variable);
    if (seen.size() == want) {
      // make sure the count holds through the end of this iteration
      for (const GainLogEntry& later : model.gain_log)
        if (later.iteration == entry.iteration) seen.insert(later.variable);
      if (seen.size() == want) return entry.iteration;
      return -1;
    }
  }
  return -1;
}

Check report_shape() {
  Check check{"5 two-objective report shape and reduction arithmetic"};

  // Same seed => identical variable draws, so the two generated tables can be
  // merged into one 42-variable, two-objective problem.
  PlantedSpec first;
  first.n_vars = 42;
  first.effective = {2, 6, 10, 14, 18, 22, 26, 30};
  first.k = 2;
  first.noise_rate = 0.05;
  first.seed = 505;
  PlantedSpec second = first;
  second.effective = {4, 12, 20, 28, 34, 38, 41};
  PlantedTable a = generate(first, 60);
  PlantedTable b = generate(second, 60);

  std::vector<Column> columns = a.table.columns();
  Column o2 = b.table.column("O1");
  o2.name = "O2";
  columns.push_back(o2);
  RunTable table(std::move(columns));

  LearnerSpec learner;
  learner.kind = LearnerKind::LadTree;

  std::vector<ImportanceRanking> rankings;
  const std::vector<std::pair<std::string, std::size_t>> wanted{{"O1", 8},
                                                                {"O2", 7}};
  for (const auto& [objective, count] : wanted) {
    LadTreeParams deep;
    deep.iterations = 60;
    int round = round_with_distinct(train_ladtree(table, objective, deep), count);
    if (round < 1) {
      check.detail = objective + ": no round with exactly " +
                     std::to_string(count) + " variables";
      return check;
    }
    ImportanceRanking ranking =
        select_variables(table, objective, learner, 1e-9, 1e-9, round);
    if (ranking.entries.size() != count) {
      check.detail = objective + ": selected " +
                     std::to_string(ranking.entries.size()) + " variables, wanted " +
                     std::to_string(count);
      return check;
    }
    if (!(ranking.mae > 0.0) || !(ranking.rmse > 0.0)) {
      check.detail = objective + ": missing error estimates";
      return check;
    }
    rankings.push_back(std::move(ranking));
  }

  ScreeningReport report = build_report(table, rankings, 1.0);
  std::set<std::string> expected_union;
  for (const ImportanceRanking& ranking : rankings)
    for (const ImportanceEntry& entry : ranking.entries)
      expected_union.insert(entry.variable);
  double expected_percent =
      100.0 * (1.0 - static_cast<double>(expected_union.size()) / 42.0);
  if (report.objectives.size() != 2 ||
      report.objectives[0].effective_variables.size() != 8 ||
      report.objectives[1].effective_variables.size() != 7 ||
      report.union_variables.size() != expected_union.size() ||
      std::abs(report.reduction_percent - expected_percent) > 1e-12) {
    check.detail = "report structure mismatch";
    return check;
  }

  // 50% arithmetic: a 21-variable union over the same 42-variable table.
  ImportanceRanking half;
  half.objective = "O1";
  for (int v = 1; v <= 21; ++v)
    half.entries.push_back({"v" + std::to_string(v), 1.0, v});
  ScreeningReport fifty = build_report(table, {half}, 1.0);
  if (fifty.reduction_percent != 50.0) {
    check.detail = "21-of-42 union did not report exactly 50.0%";
    return check;
  }

  check.detail = "8 + 7 variables, union " +
                 std::to_string(report.union_variables.size()) + ", reduction " +
                 std::to_string(report.reduction_percent) + "%";
  check.passed = true;
  return check;
}

// ---- 6. LogitBoost monotonicity --------------------------------------------

Check logitboost_monotonicity() {
  Check check{"6 log-loss non-increasing on 100 random datasets"};
  Xorshift64Star rng(606);
  for (int trial = 0; trial < 100; ++trial) {
    RunTable table = vtest::random_table(rng, 5 + rng.below(12),
                                         1 + rng.below(5), 2 + rng.below(3));
    LadTreeParams params;
    params.iterations = 12;
    TreeModel model = train_ladtree(table, "O1", params);
    auto losses = model.training_meta.at("log_loss").get<std::vector<double>>();
    for (std::size_t i = 1; i < losses.size(); ++i) {
      if (losses[i] > losses[i - 1] + 1e-9) {
        check.detail = "loss increased on trial " + std::to_string(trial);
        return check;
      }
    }
  }
  check.passed = true;
  return check;
}

// ---- 7. determinism and invariance -----------------------------------------

std::string canonical_report(const RunTable& table) {
  LearnerSpec learner;
  learner.kind = LearnerKind::LadTree;
  std::vector<ImportanceRanking> rankings;
  for (const std::string& objective : table.objective_names())
    rankings.push_back(
        select_variables(table, objective, learner, 0.45, 0.55, 10));
  return report_to_json(build_report(table, rankings, 12.3), true).dump();
}

Check determinism_invariance() {
  Check check{"7 determinism and invariance suite"};

  PlantedSpec spec;
  spec.n_vars = 10;
  spec.effective = {2, 7};
  spec.seed = 707;
  RunTable table = generate(spec, 40).table;

  if (canonical_report(table) != canonical_report(table)) {
    check.detail = "repeat runs differ";
    return check;
  }

  // strictly increasing per-variable transform: same topology, thresholds move
  std::vector<Column> warped = table.columns();
  for (Column& col : warped)
    if (!col.is_objective())
      for (double& x : col.numeric) x = x * x * x + 2.0 * x;
  RunTable transformed(std::move(warped));
  for (LearnerKind kind : {LearnerKind::Sdr, LearnerKind::InfoGain,
                           LearnerKind::BestFirst, LearnerKind::LadTree}) {
    LearnerSpec learner;
    learner.kind = kind;
    learner.lad.iterations = 6;
    TreeModel base = train(table, "O1", learner);
    TreeModel warped_model = train(transformed, "O1", learner);
    if (base.gain_log.size() != warped_model.gain_log.size()) {
      check.detail = "transform changed split count for " + to_string(kind);
      return check;
    }
    for (std::size_t i = 0; i < base.gain_log.size(); ++i) {
      if (base.gain_log[i].variable != warped_model.gain_log[i].variable) {
        check.detail = "transform changed structure for " + to_string(kind);
        return check;
      }
    }
  }

  // constant column: rankings unchanged
  std::vector<Column> padded = table.columns();
  Column constant;
  constant.name = "v_pad";
  constant.numeric.assign(table.n_runs(), 1.0);
  padded.insert(padded.begin(), constant);
  RunTable with_const(std::move(padded));
  for (LearnerKind kind : {LearnerKind::Sdr, LearnerKind::InfoGain,
                           LearnerKind::BestFirst, LearnerKind::LadTree}) {
    LearnerSpec learner;
    learner.kind = kind;
    learner.lad.iterations = 6;
    auto base = rank_variables(train(table, "O1", learner));
    auto shifted = rank_variables(train(with_const, "O1", learner));
    if (base.entries.size() != shifted.entries.size()) {
      check.detail = "constant column changed ranking size for " + to_string(kind);
      return check;
    }
    for (std::size_t i = 0; i < base.entries.size(); ++i) {
      if (base.entries[i].variable != shifted.entries[i].variable) {
        check.detail = "constant column changed ranking for " + to_string(kind);
        return check;
      }
    }
  }

  // duplicate column: selected set unchanged up to the twin alias
  std::vector<Column> doubled = table.columns();
  Column twin = table.column("v7");
  twin.name = "v7_twin";
  doubled.push_back(twin);
  std::swap(doubled[doubled.size() - 2], doubled[doubled.size() - 1]);
  RunTable with_twin(std::move(doubled));
  for (LearnerKind kind : {LearnerKind::InfoGain, LearnerKind::BestFirst,
                           LearnerKind::LadTree}) {
    LearnerSpec learner;
    learner.kind = kind;
    learner.lad.iterations = 6;
    std::set<std::string> base, twinned;
    for (const auto& e : rank_variables(train(table, "O1", learner)).entries)
      base.insert(e.variable);
    for (const auto& e : rank_variables(train(with_twin, "O1", learner)).entries)
      twinned.insert(e.variable == "v7_twin" ? "v7" : e.variable);
    if (base != twinned) {
      check.detail = "duplicate column changed the selected set for " +
                     to_string(kind);
      return check;
    }
  }

  check.passed = true;
  return check;
}

// ---- 8. format round-trips -------------------------------------------------

Check format_round_trips() {
  Check check{"8 CSV and ARFF round trips on 50 generated files"};
  Xorshift64Star rng(808);
  auto dir = std::filesystem::temp_directory_path();
  for (int trial = 0; trial < 50; ++trial) {
    RunTable table = vtest::random_table(rng, 3 + rng.below(20),
                                         1 + rng.below(8), 2 + rng.below(4));
    std::string csv = (dir / ("varsieve_rt" + std::to_string(trial) + ".csv")).string();
    std::string arff = (dir / ("varsieve_rt" + std::to_string(trial) + ".arff")).string();

    save_csv(table, csv);
    RunTable from_csv = load_csv(csv, {"O1"});
    save_csv(from_csv, csv);
    RunTable again_csv = load_csv(csv, {"O1"});
    bool csv_ok = vtest::tables_equal(from_csv, again_csv);

    save_arff(table, arff);
    RunTable from_arff = load_arff(arff);
    bool arff_ok = vtest::tables_equal(table, from_arff) &&
                   from_arff.column("O1").alphabet == table.column("O1").alphabet;
    save_arff(from_arff, arff);
    arff_ok = arff_ok && vtest::tables_equal(from_arff, load_arff(arff));

    std::filesystem::remove(csv);
    std::filesystem::remove(arff);
    if (!csv_ok || !arff_ok) {
      check.detail = "trial " + std::to_string(trial) + " lost data";
      return check;
    }
  }
  check.passed = true;
  return check;
}

}  // namespace

int main() {
  std::vector<Check> checks{
      oracle_equivalence(),    closed_form_errors(),
      planted_recovery(),      small_table_budget(),
      report_shape(),          logitboost_monotonicity(),
      determinism_invariance(), format_round_trips(),
  };
  int failures = 0;
  for (const Check& check : checks) {
    std::cout << (check.passed ? "[PASS] " : "[FAIL] ") << check.name;
    if (!check.detail.empty()) std::cout << "  (" << check.detail << ")";
    std::cout << "\n";
    if (!check.passed) ++failures;
  }
  if (failures != 0) std::cout << failures << " criterion/criteria failed\n";
  return failures == 0 ? 0 : 1;
}
