#pragma once

#include <string>
#include <vector>

#include "varsieve/evaluation.hpp"
#include "varsieve/run_table.hpp"
#include "varsieve/trees.hpp"

#include "json.hpp"

namespace varsieve {

struct ImportanceEntry {
  std::string variable;
  double score = 0.0;  // summed criterion gain (trees) or WLS reduction (ladtree)
  int first_use = 0;   // first split ordinal / boosting iteration
};

struct ImportanceRanking {
  std::string objective;
  LearnerKind learner = LearnerKind::LadTree;
  std::vector<ImportanceEntry> entries;  // descending by the ranking key
  double mae = 0.0;   // achieved errors when produced by select_variables
  double rmse = 0.0;
  bool threshold_met = false;
  int rounds_used = 0;

  std::vector<std::string> variable_names() const;
};

struct ObjectiveScreening {
  std::string objective;
  LearnerKind learner = LearnerKind::LadTree;
  double mae = 0.0;
  double rmse = 0.0;
  std::vector<std::string> effective_variables;
  bool threshold_met = false;
};

struct ScreeningReport {
  std::vector<ObjectiveScreening> objectives;
  std::vector<std::string> union_variables;
  std::size_t original_count = 0;
  double reduction_percent = 0.0;
  double duration_seconds = 0.0;
};

/// Importance ranking of the variables a trained model actually uses.
/// Gain-based trees rank by total criterion gain; the ladtree ranks by first
/// boosting iteration (earlier = more important), then total gain.
ImportanceRanking rank_variables(const TreeModel& model);

/// Threshold-driven selection: train models of increasing capacity, scoring
/// each round with leave-one-out MAE/RMSE, and stop at the first round that
/// meets both thresholds (or at max_rounds with threshold_met=false).
ImportanceRanking select_variables(const RunTable& table,
                                   const std::string& objective,
                                   const LearnerSpec& spec, double mae_threshold,
                                   double rmse_threshold, int max_rounds = 20);

/// Project the table onto the union of effective variables, keeping every
/// objective column and the original column order.
RunTable reduce_dataset(const RunTable& table,
                        const std::vector<ImportanceRanking>& rankings);

ScreeningReport build_report(const RunTable& table,
                             const std::vector<ImportanceRanking>& rankings,
                             double duration_seconds);

nlohmann::ordered_json ranking_to_json(const ImportanceRanking& ranking);
ImportanceRanking ranking_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json report_to_json(const ScreeningReport& report,
                                      bool canonical = false);

/// Plain-text rendering: one line per objective with learner, errors
/// and the ordered effective-variable list.
std::string report_to_text(const ScreeningReport& report);

}  // namespace varsieve
