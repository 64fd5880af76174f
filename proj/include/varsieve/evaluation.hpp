#pragma once

#include <string>
#include <vector>

#include "varsieve/run_table.hpp"
#include "varsieve/trees.hpp"

#include "json.hpp"

namespace varsieve {

enum class Protocol { Training, LeaveOneOut };

Protocol parse_protocol(const std::string& name);
std::string to_string(Protocol protocol);

struct PerInstanceError {
  std::size_t run = 0;
  int true_class = 0;
  std::vector<double> predicted;
  double abs_mean = 0.0;  // mean over classes of |p_j - y_j|
  double sq_mean = 0.0;   // mean over classes of (p_j - y_j)^2
};

struct EvaluationResult {
  Protocol protocol = Protocol::Training;
  double mae = 0.0;   // mean of per-instance abs means
  double rmse = 0.0;  // sqrt of mean of per-instance sq means
  std::vector<PerInstanceError> per_instance;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<std::string> class_alphabet;
};

/// Per-instance class-probability error against a one-hot target.
/// Returns (mean absolute difference, mean squared difference) over classes.
std::pair<double, double> instance_error(const std::vector<double>& predicted,
                                         int true_class);

/// Resubstitution: score the model on the table it was trained on.
EvaluationResult evaluate_training(const TreeModel& model, const RunTable& table,
                                   const std::string& objective);

/// Leave-one-out: retrain once per run with identical parameters, score the
/// held-out run. The class alphabet is frozen from the full table.
EvaluationResult evaluate_loo(const LearnerSpec& spec, const RunTable& table,
                              const std::string& objective);

EvaluationResult evaluate(const LearnerSpec& spec, const RunTable& table,
                          const std::string& objective, Protocol protocol);

struct LearnerScore {
  LearnerKind kind = LearnerKind::LadTree;
  bool failed = false;
  std::string error;
  EvaluationResult result;
  bool winner = false;
};

/// Evaluate every learner under one protocol and rank ascending by RMSE,
/// ties by MAE, then by kind name. Failed learners sort last and never win.
std::vector<LearnerScore> compare_learners(const RunTable& table,
                                           const std::string& objective,
                                           const std::vector<LearnerSpec>& specs,
                                           Protocol protocol = Protocol::LeaveOneOut);

nlohmann::ordered_json evaluation_to_json(const EvaluationResult& result);

}  // namespace varsieve
