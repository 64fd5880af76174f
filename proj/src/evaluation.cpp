#include "varsieve/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace varsieve {

Protocol parse_protocol(const std::string& name) {
  if (name == "training") return Protocol::Training;
  if (name == "loo" || name == "leave-one-out") return Protocol::LeaveOneOut;
  throw Error("unknown protocol '" + name + "'");
}

std::string to_string(Protocol protocol) {
  return protocol == Protocol::Training ? "training" : "leave-one-out";
}

std::pair<double, double> instance_error(const std::vector<double>& predicted,
                                         int true_class) {
  const std::size_t k = predicted.size();
  if (k < 2) throw Error("probability vector needs at least 2 classes");
  if (true_class < 0 || static_cast<std::size_t>(true_class) >= k)
    throw Error("true class index out of range");
  double total = std::accumulate(predicted.begin(), predicted.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9)
    throw Error("predicted distribution does not sum to 1");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double diff = predicted[j] - (static_cast<int>(j) == true_class ? 1.0 : 0.0);
    abs_sum += std::abs(diff);
    sq_sum += diff * diff;
  }
  return {abs_sum / k, sq_sum / k};
}

namespace {

int argmax(const std::vector<double>& values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) -
                          values.begin());
}

const Column& categorical_objective(const RunTable& table,
                                    const std::string& objective) {
  const Column& col = table.column(objective);
  if (!col.is_categorical())
    throw Error("objective '" + objective + "' is not categorical");
  return col;
}

EvaluationResult aggregate(std::vector<PerInstanceError> records,
                           const std::vector<std::string>& alphabet,
                           Protocol protocol) {
  EvaluationResult result;
  result.protocol = protocol;
  result.class_alphabet = alphabet;
  const std::size_t k = alphabet.size();
  result.confusion.assign(k, std::vector<std::size_t>(k, 0));
  double abs_total = 0.0, sq_total = 0.0;
  for (const PerInstanceError& rec : records) {
    abs_total += rec.abs_mean;
    sq_total += rec.sq_mean;
    ++result.confusion[rec.true_class][argmax(rec.predicted)];
  }
  if (!records.empty()) {
    result.mae = abs_total / records.size();
    result.rmse = std::sqrt(sq_total / records.size());
  }
  result.per_instance = std::move(records);
  return result;
}

}  // namespace

EvaluationResult evaluate_training(const TreeModel& model, const RunTable& table,
                                   const std::string& objective) {
  const Column& target = categorical_objective(table, objective);
  if (model.class_alphabet != target.alphabet)
    throw Error("model alphabet does not match objective '" + objective + "'");

  std::vector<PerInstanceError> records;
  records.reserve(table.n_runs());
  for (std::size_t r = 0; r < table.n_runs(); ++r) {
    PerInstanceError rec;
    rec.run = r;
    rec.true_class = target.classes[r];
    rec.predicted = predict_class_distribution(model, table, r);
    std::tie(rec.abs_mean, rec.sq_mean) = instance_error(rec.predicted, rec.true_class);
    records.push_back(std::move(rec));
  }
  return aggregate(std::move(records), target.alphabet, Protocol::Training);
}

EvaluationResult evaluate_loo(const LearnerSpec& spec, const RunTable& table,
                              const std::string& objective) {
  if (table.n_runs() < 3)
    throw Error("leave-one-out needs at least 3 runs");
  const Column& target = categorical_objective(table, objective);

  std::vector<PerInstanceError> records;
  records.reserve(table.n_runs());
  for (std::size_t r = 0; r < table.n_runs(); ++r) {
    RunTable fold = drop_run(table, r);
    TreeModel model = train(fold, objective, spec);
    PerInstanceError rec;
    rec.run = r;
    rec.true_class = target.classes[r];
    rec.predicted = predict_class_distribution(model, table, r);
    std::tie(rec.abs_mean, rec.sq_mean) = instance_error(rec.predicted, rec.true_class);
    records.push_back(std::move(rec));
  }
  return aggregate(std::move(records), target.alphabet, Protocol::LeaveOneOut);
}

EvaluationResult evaluate(const LearnerSpec& spec, const RunTable& table,
                          const std::string& objective, Protocol protocol) {
  if (protocol == Protocol::LeaveOneOut)
    return evaluate_loo(spec, table, objective);
  TreeModel model = train(table, objective, spec);
  return evaluate_training(model, table, objective);
}

std::vector<LearnerScore> compare_learners(const RunTable& table,
                                           const std::string& objective,
                                           const std::vector<LearnerSpec>& specs,
                                           Protocol protocol) {
  if (specs.size() < 2) throw Error("compare_learners needs >= 2 learner specs");
  std::vector<LearnerScore> scores;
  for (const LearnerSpec& spec : specs) {
    LearnerScore score;
    score.kind = spec.kind;
    try {
      score.result = evaluate(spec, table, objective, protocol);
    } catch (const std::exception& e) {
      score.failed = true;
      score.error = e.what();
    }
    scores.push_back(std::move(score));
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const LearnerScore& a, const LearnerScore& b) {
                     if (a.failed != b.failed) return !a.failed;
                     if (a.failed) return to_string(a.kind) < to_string(b.kind);
                     if (a.result.rmse != b.result.rmse)
                       return a.result.rmse < b.result.rmse;
                     if (a.result.mae != b.result.mae)
                       return a.result.mae < b.result.mae;
                     return to_string(a.kind) < to_string(b.kind);
                   });
  if (!scores.empty() && !scores.front().failed) scores.front().winner = true;
  return scores;
}

nlohmann::ordered_json evaluation_to_json(const EvaluationResult& result) {
  nlohmann::ordered_json doc;
  doc["protocol"] = to_string(result.protocol);
  doc["mae"] = result.mae;
  doc["rmse"] = result.rmse;
  doc["class_alphabet"] = result.class_alphabet;
  nlohmann::ordered_json confusion = nlohmann::ordered_json::array();
  for (const auto& row : result.confusion)
    for (std::size_t count : row) confusion.push_back(count);
  doc["confusion"] = std::move(confusion);
  nlohmann::ordered_json instances = nlohmann::ordered_json::array();
  for (const PerInstanceError& rec : result.per_instance) {
    instances.push_back({{"run", rec.run},
                         {"true_class", result.class_alphabet[rec.true_class]},
                         {"predicted", rec.predicted},
                         {"abs_mean", rec.abs_mean},
                         {"sq_mean", rec.sq_mean}});
  }
  doc["per_instance"] = std::move(instances);
  return doc;
}

}  // namespace varsieve
