#include "varsieve/screening.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace varsieve {

std::vector<std::string> ImportanceRanking::variable_names() const {
  std::vector<std::string> names;
  names.reserve(entries.size());
  for (const ImportanceEntry& e : entries) names.push_back(e.variable);
  return names;
}

ImportanceRanking rank_variables(const TreeModel& model) {
  ImportanceRanking ranking;
  ranking.objective = model.objective;
  ranking.learner = model.kind;

  struct Accum {
    double total_gain = 0.0;
    int first_use = 0;
    int variable_index = 0;
  };
  std::map<std::string, Accum> by_variable;
  for (const GainLogEntry& entry : model.gain_log) {
    auto [it, inserted] = by_variable.try_emplace(entry.variable);
    if (inserted) {
      it->second.first_use = entry.iteration;
      it->second.variable_index = entry.variable_index;
    }
    it->second.total_gain += entry.gain;
  }

  for (const auto& [name, acc] : by_variable)
    ranking.entries.push_back({name, acc.total_gain, acc.first_use});

  auto index_of = [&](const ImportanceEntry& e) {
    return by_variable.at(e.variable).variable_index;
  };
  if (model.kind == LearnerKind::LadTree) {
    // Boosting adds its most useful splitter earliest.
    std::sort(ranking.entries.begin(), ranking.entries.end(),
              [&](const ImportanceEntry& a, const ImportanceEntry& b) {
                if (a.first_use != b.first_use) return a.first_use < b.first_use;
                if (a.score != b.score) return a.score > b.score;
                return index_of(a) < index_of(b);
              });
  } else {
    std::sort(ranking.entries.begin(), ranking.entries.end(),
              [&](const ImportanceEntry& a, const ImportanceEntry& b) {
                if (a.score != b.score) return a.score > b.score;
                return index_of(a) < index_of(b);
              });
  }
  return ranking;
}

ImportanceRanking select_variables(const RunTable& table,
                                   const std::string& objective,
                                   const LearnerSpec& spec, double mae_threshold,
                                   double rmse_threshold, int max_rounds) {
  if (mae_threshold <= 0.0 || rmse_threshold <= 0.0)
    throw Error("MAE/RMSE thresholds must be positive");
  if (max_rounds < 1) throw Error("max_rounds must be >= 1");

  ImportanceRanking ranking;
  for (int round = 1; round <= max_rounds; ++round) {
    LearnerSpec capped = spec;
    if (spec.kind == LearnerKind::LadTree)
      capped.lad.iterations = round;
    else if (spec.kind == LearnerKind::BestFirst)
      capped.max_expansions = round;
    else
      capped.max_splits = round;

    TreeModel model = train(table, objective, capped);
    EvaluationResult loo = evaluate_loo(capped, table, objective);

    ranking = rank_variables(model);
    ranking.mae = loo.mae;
    ranking.rmse = loo.rmse;
    ranking.rounds_used = round;
    ranking.threshold_met = loo.mae <= mae_threshold && loo.rmse <= rmse_threshold;
    if (ranking.threshold_met) break;
  }
  return ranking;
}

RunTable reduce_dataset(const RunTable& table,
                        const std::vector<ImportanceRanking>& rankings) {
  std::set<std::string> keep;
  for (const ImportanceRanking& ranking : rankings) {
    for (const ImportanceEntry& entry : ranking.entries) {
      const Column& col = table.column(entry.variable);
      if (col.is_objective())
        throw Error("ranked column '" + entry.variable + "' is an objective");
      keep.insert(entry.variable);
    }
  }
  if (keep.empty()) throw Error("no effective variables; lower thresholds");

  std::vector<Column> columns;
  for (const Column& col : table.columns())
    if (col.is_objective() || keep.count(col.name)) columns.push_back(col);
  return RunTable(std::move(columns));
}

ScreeningReport build_report(const RunTable& table,
                             const std::vector<ImportanceRanking>& rankings,
                             double duration_seconds) {
  if (rankings.empty()) throw Error("report needs at least one objective result");
  ScreeningReport report;
  report.duration_seconds = duration_seconds;
  report.original_count = table.variable_count();

  std::set<std::string> union_set;
  for (const ImportanceRanking& ranking : rankings) {
    ObjectiveScreening entry;
    entry.objective = ranking.objective;
    entry.learner = ranking.learner;
    entry.mae = ranking.mae;
    entry.rmse = ranking.rmse;
    entry.effective_variables = ranking.variable_names();
    entry.threshold_met = ranking.threshold_met;
    for (const std::string& name : entry.effective_variables)
      union_set.insert(name);
    report.objectives.push_back(std::move(entry));
  }

  // Union listed in original column order.
  for (const Column& col : table.columns())
    if (!col.is_objective() && union_set.count(col.name))
      report.union_variables.push_back(col.name);
  // Ranked variables missing from the table would be a caller bug; keep them
  // visible at the end rather than dropping silently.
  for (const std::string& name : union_set)
    if (!table.has_column(name)) report.union_variables.push_back(name);

  report.reduction_percent =
      report.original_count == 0
          ? 0.0
          : 100.0 * (1.0 - static_cast<double>(report.union_variables.size()) /
                               report.original_count);
  return report;
}

nlohmann::ordered_json ranking_to_json(const ImportanceRanking& ranking) {
  nlohmann::ordered_json doc;
  doc["objective"] = ranking.objective;
  doc["learner"] = to_string(ranking.learner);
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const ImportanceEntry& e : ranking.entries)
    entries.push_back({{"variable", e.variable},
                       {"score", e.score},
                       {"first_use", e.first_use}});
  doc["entries"] = std::move(entries);
  doc["mae"] = ranking.mae;
  doc["rmse"] = ranking.rmse;
  doc["threshold_met"] = ranking.threshold_met;
  doc["rounds_used"] = ranking.rounds_used;
  return doc;
}

ImportanceRanking ranking_from_json(const nlohmann::ordered_json& doc) {
  ImportanceRanking ranking;
  ranking.objective = doc.at("objective").get<std::string>();
  ranking.learner = parse_learner_kind(doc.at("learner").get<std::string>());
  for (const auto& e : doc.at("entries"))
    ranking.entries.push_back({e.at("variable").get<std::string>(),
                               e.at("score").get<double>(),
                               e.at("first_use").get<int>()});
  ranking.mae = doc.at("mae").get<double>();
  ranking.rmse = doc.at("rmse").get<double>();
  ranking.threshold_met = doc.at("threshold_met").get<bool>();
  ranking.rounds_used = doc.at("rounds_used").get<int>();
  return ranking;
}

nlohmann::ordered_json report_to_json(const ScreeningReport& report,
                                      bool canonical) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json objectives = nlohmann::ordered_json::array();
  for (const ObjectiveScreening& entry : report.objectives) {
    objectives.push_back({{"name", entry.objective},
                          {"learner", to_string(entry.learner)},
                          {"mae", entry.mae},
                          {"rmse", entry.rmse},
                          {"effective_variables", entry.effective_variables},
                          {"threshold_met", entry.threshold_met}});
  }
  doc["objectives"] = std::move(objectives);
  doc["union"] = report.union_variables;
  doc["original_count"] = report.original_count;
  doc["reduction_percent"] = report.reduction_percent;
  if (!canonical) doc["duration_seconds"] = report.duration_seconds;
  return doc;
}

std::string report_to_text(const ScreeningReport& report) {
  std::ostringstream out;
  out << "Classification  MAE     RMSE    Effective Variables            Objective\n";
  for (const ObjectiveScreening& entry : report.objectives) {
    char line[64];
    std::snprintf(line, sizeof(line), "%-15s %-7.3f %-7.3f ",
                  to_string(entry.learner).c_str(), entry.mae, entry.rmse);
    out << line;
    std::string joined;
    for (std::size_t i = 0; i < entry.effective_variables.size(); ++i) {
      if (i) joined += ',';
      joined += entry.effective_variables[i];
    }
    out << joined;
    if (joined.size() < 30) out << std::string(30 - joined.size(), ' ');
    out << ' ' << entry.objective << '\n';
  }
  out << "Union: " << report.union_variables.size() << " of "
      << report.original_count << " variables (reduction ";
  char pct[16];
  std::snprintf(pct, sizeof(pct), "%.1f%%)", report.reduction_percent);
  out << pct << '\n';
  return out.str();
}

}  // namespace varsieve
