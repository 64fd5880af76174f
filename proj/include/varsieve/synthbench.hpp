#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "varsieve/run_table.hpp"
#include "varsieve/screening.hpp"
#include "varsieve/trees.hpp"

namespace varsieve {

/// xorshift64* — pinned so generated tables are reproducible across
/// platforms and language ports.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed);
  std::uint64_t next();
  double uniform();  // [0, 1)
  /// Uniform integer in [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

enum class PlantedFamily { LinearThreshold, InteractionXor, QuadraticRadial };

PlantedFamily parse_planted_family(const std::string& name);
std::string to_string(PlantedFamily family);

struct PlantedSpec {
  int n_vars = 10;
  std::vector<int> effective;  // 1-based variable indices
  PlantedFamily family = PlantedFamily::LinearThreshold;
  double noise_rate = 0.0;  // label-flip fraction, < 0.5
  int k = 2;
  std::uint64_t seed = 1;
};

struct PlantedTable {
  RunTable table;
  std::vector<std::string> effective;  // ground-truth variable names
};

/// Variables v1..vN uniform in [0,1); objective "O1" computed from the family
/// formula on the effective variables, discretized into k classes, then a
/// noise_rate fraction of labels flipped. Byte-identical for identical inputs.
PlantedTable generate(const PlantedSpec& spec, std::size_t n_runs);

/// Exhaustive re-derivation of best_split: every (variable, midpoint) pair is
/// scored by direct formula, sharing no code with the trees module. Bounded to
/// 20 rows x 8 variables.
std::optional<SplitCandidate> oracle_best_split(
    const RunTable& table, const std::vector<std::size_t>& rows,
    const std::string& objective, Criterion criterion);

/// Fraction of the planted variables found in the top-|truth| ranked entries.
double recovery_score(const ImportanceRanking& ranking,
                      const std::set<std::string>& truth);

}  // namespace varsieve
