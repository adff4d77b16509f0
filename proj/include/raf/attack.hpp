#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "raf/image.hpp"
#include "raf/landmarks.hpp"
#include "raf/oracle.hpp"
#include "raf/warp.hpp"

namespace raf {

enum class Goal { Dodge, Impersonation, Either };
enum class Composition { Cumulative, Fresh };
enum class AttackStatus { Dodge, Impersonation, Failed };

std::string_view to_string(Goal g);
std::string_view to_string(Composition c);
std::string_view to_string(AttackStatus s);
Goal parse_goal(std::string_view s);
Composition parse_composition(std::string_view s);

struct AttackConfig {
  std::vector<WarpFunction> order = {WarpFunction::StretchNose, WarpFunction::Smile,
                                     WarpFunction::RaiseEyebrow};
  /// Ascending scales tried for every function. When empty, the ladder is
  /// step, 2*step, ... up to the 0.5 cap.
  std::vector<double> scales = {0.1, 0.2, 0.3};
  std::size_t budget = 3;
  Goal goal = Goal::Either;
  Composition composition = Composition::Cumulative;
  double step = 0.1;

  /// Throws InvalidInput on an empty or repeating order, a non-ascending or
  /// out-of-range scale ladder, or a zero budget.
  void validate() const;
  std::vector<double> scale_ladder() const;
};

/// Depth-first order: every scale of the first function, then the next function,
/// truncated to the budget.
std::vector<WarpSpec> schedule(const AttackConfig& config);

/// Root mean square of per-sample differences; within [0, 1] for valid images.
double l2_distance(const Image& x, const Image& xw);

bool is_dodge(const OracleResponse& resp, std::string_view true_id);
bool is_impersonation(const OracleResponse& resp, std::string_view true_id);
bool satisfies(Goal goal, const OracleResponse& resp, std::string_view true_id);

struct TraceEntry {
  WarpSpec spec;
  std::optional<OracleResponse> response;  ///< absent when the query failed in transport
  std::string error;
  double delta = 0.0;  ///< L2 distance to the original image
};

struct SkippedSpec {
  WarpSpec spec;
  std::string reason;
};

struct AttackOutcome {
  AttackStatus status = AttackStatus::Failed;
  std::size_t queries_used = 0;
  std::vector<TraceEntry> trace;
  std::vector<SkippedSpec> skipped;  ///< warps that could not be built; no query spent
  Image final_image;
  LandmarkSet final_landmarks;
  double final_delta = 0.0;

  bool succeeded() const { return status != AttackStatus::Failed; }
};

/// Recursive query-budgeted warping search. Uses a ledger of config.budget queries.
AttackOutcome raf_attack(const Image& img, const LandmarkSet& lm, const std::string& true_id,
                         Oracle& oracle, const AttackConfig& config,
                         const ReferenceSpace& ref = ReferenceSpace::canonical());

/// Same, charging an existing ledger.
AttackOutcome raf_attack(const Image& img, const LandmarkSet& lm, const std::string& true_id,
                         Oracle& oracle, QueryLedger& ledger, const AttackConfig& config,
                         const ReferenceSpace& ref = ReferenceSpace::canonical());

/// Dominant term of the recursive-decomposition cost recurrence
///   T(n) = xi * k * T(n / k),  T(d) = base_cost,
/// i.e. (k * xi)^(log_k(n / d)) * base_cost.
///
/// n is the total number of variables, d the block optimised per level, k the number
/// of independent sub-problems per split and xi the restarts per level. Throws
/// InvalidInput unless n >= d >= 1, k >= 2 and n / d is an integer power of k.
double complexity_bound(std::uint64_t n, std::uint64_t d, std::uint64_t k, double xi,
                        double base_cost);

}  // namespace raf
