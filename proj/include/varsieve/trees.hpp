#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "varsieve/run_table.hpp"

#include "json.hpp"

namespace varsieve {

enum class Criterion { Sdr, InfoGainRatio, Gini };
enum class LearnerKind { Sdr, InfoGain, BestFirst, LadTree };

Criterion parse_criterion(const std::string& name);
std::string to_string(Criterion criterion);
LearnerKind parse_learner_kind(const std::string& name);
std::string to_string(LearnerKind kind);

/// Binary test on a continuous variable: left branch iff value < threshold.
struct SplitTest {
  std::string variable;
  int variable_index = -1;  // position among the table's variable columns
  double threshold = 0.0;
};

struct SplitCandidate {
  SplitTest test;
  double gain = 0.0;
};

struct LadTreeParams {
  int iterations = 10;
  double z_clip = 4.0;
  double weight_floor = 1e-12;
};

struct TreeNode {
  enum class Kind { Split, Leaf, Prediction, Splitter };
  Kind kind = Kind::Leaf;
  SplitTest test;               // Split / Splitter
  std::vector<double> counts;   // Leaf: per-class training counts
  double mean = 0.0;            // Leaf with continuous target
  std::vector<double> scores;   // Prediction: additive per-class scores
  std::vector<int> children;    // Split/Splitter: [left, right]; Prediction: splitter ids
};

struct GainLogEntry {
  int iteration = 0;  // split ordinal (trees) or boosting iteration (ladtree)
  std::string variable;
  int variable_index = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

/// A trained classifier. Node 0 is the root. Immutable after training.
struct TreeModel {
  LearnerKind kind = LearnerKind::InfoGain;
  std::string objective;
  std::vector<std::string> class_alphabet;  // empty for continuous targets
  bool continuous_target = false;
  std::vector<TreeNode> nodes;
  std::vector<GainLogEntry> gain_log;
  nlohmann::ordered_json training_meta;

  std::size_t n_classes() const { return class_alphabet.size(); }
};

/// Uniform handle on the four learners plus their hyperparameters.
/// `max_splits` / ladtree iterations double as the capacity knob for the
/// threshold-driven screening sweep (negative = unlimited).
struct LearnerSpec {
  LearnerKind kind = LearnerKind::LadTree;
  double sd_fraction = 0.05;  // sdr
  int min_instances = 4;      // sdr
  int min_leaf = 2;           // info-gain
  int max_expansions = 8;     // best-first
  LadTreeParams lad;          // ladtree
  int max_splits = -1;        // sdr / info-gain capacity cap
};

/// Best (variable, midpoint) split of `rows` under `criterion`, or nullopt if
/// no split has strictly positive gain. Ties break to the lower variable
/// index, then the lower threshold.
std::optional<SplitCandidate> best_split(const RunTable& table,
                                         const std::vector<std::size_t>& rows,
                                         const std::string& objective,
                                         Criterion criterion);

TreeModel train_sdr_tree(const RunTable& table, const std::string& objective,
                         double sd_fraction = 0.05, int min_instances = 4,
                         int max_splits = -1);
TreeModel train_info_gain_tree(const RunTable& table, const std::string& objective,
                               int min_leaf = 2, int max_splits = -1);
TreeModel train_best_first_tree(const RunTable& table, const std::string& objective,
                                int max_expansions = 8);
TreeModel train_ladtree(const RunTable& table, const std::string& objective,
                        const LadTreeParams& params = {});

TreeModel train(const RunTable& table, const std::string& objective,
                const LearnerSpec& spec);

/// Class-probability prediction for one run. Leaf-frequency trees apply
/// Laplace +1 smoothing; the ladtree takes a softmax of accumulated scores.
std::vector<double> predict_class_distribution(
    const TreeModel& model, const std::map<std::string, double>& run);
std::vector<double> predict_class_distribution(const TreeModel& model,
                                               const RunTable& table,
                                               std::size_t row);

nlohmann::ordered_json model_to_json(const TreeModel& model);
TreeModel model_from_json(const nlohmann::ordered_json& doc);

// Shared by training and the synthbench oracle checks.
double sample_sd(const std::vector<double>& values);

}  // namespace varsieve
