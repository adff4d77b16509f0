#include "raf/attack.hpp"

#include <algorithm>
#include <cmath>

#include "raf/error.hpp"

namespace raf {

std::string_view to_string(Goal g) {
  switch (g) {
    case Goal::Dodge: return "dodge";
    case Goal::Impersonation: return "impersonation";
    case Goal::Either: return "either";
  }
  return "unknown";
}

std::string_view to_string(Composition c) {
  return c == Composition::Cumulative ? "cumulative" : "fresh";
}

std::string_view to_string(AttackStatus s) {
  switch (s) {
    case AttackStatus::Dodge: return "dodge";
    case AttackStatus::Impersonation: return "impersonation";
    case AttackStatus::Failed: return "failed";
  }
  return "unknown";
}

Goal parse_goal(std::string_view s) {
  if (s == "dodge") return Goal::Dodge;
  if (s == "impersonation") return Goal::Impersonation;
  if (s == "either") return Goal::Either;
  throw InvalidInput("unknown goal '" + std::string(s) + "'");
}

Composition parse_composition(std::string_view s) {
  if (s == "cumulative") return Composition::Cumulative;
  if (s == "fresh") return Composition::Fresh;
  throw InvalidInput("unknown composition '" + std::string(s) + "'");
}

void AttackConfig::validate() const {
  if (budget < 1) throw InvalidInput("query budget must be at least 1");
  if (order.empty()) throw InvalidInput("warping function order is empty");
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (order[i] == order[j]) {
        throw InvalidInput("warping function '" + std::string(to_string(order[i])) +
                           "' appears twice in the order");
      }
    }
  }
  if (scales.empty() && !(step > 0.0 && step <= kMaxWarpScale)) {
    throw InvalidInput("scale step must be within (0, 0.5]");
  }
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0 && scales[i] <= kMaxWarpScale)) {
      throw InvalidInput("scales must be within (0, 0.5]");
    }
    if (i > 0 && !(scales[i] > scales[i - 1])) throw InvalidInput("scales must be ascending");
  }
}

std::vector<double> AttackConfig::scale_ladder() const {
  if (!scales.empty()) return scales;
  std::vector<double> ladder;
  for (int i = 1; i * step <= kMaxWarpScale + 1e-12; ++i) {
    ladder.push_back(std::min(i * step, kMaxWarpScale));
  }
  return ladder;
}

std::vector<WarpSpec> schedule(const AttackConfig& config) {
  config.validate();
  const auto ladder = config.scale_ladder();
  std::vector<WarpSpec> out;
  for (WarpFunction wf : config.order) {
    for (double s : ladder) {
      if (out.size() == config.budget) return out;
      out.emplace_back(wf, s);
    }
  }
  return out;
}

double l2_distance(const Image& x, const Image& xw) {
  if (!x.same_shape(xw)) throw InvalidInput("l2_distance: image shapes differ");
  const auto a = x.samples(), b = xw.samples();
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(a.size()));
}

bool is_dodge(const OracleResponse& resp, std::string_view) { return !resp.identity.has_value(); }

bool is_impersonation(const OracleResponse& resp, std::string_view true_id) {
  return resp.identity.has_value() && *resp.identity != true_id;
}

bool satisfies(Goal goal, const OracleResponse& resp, std::string_view true_id) {
  switch (goal) {
    case Goal::Dodge: return is_dodge(resp, true_id);
    case Goal::Impersonation: return is_impersonation(resp, true_id);
    case Goal::Either: return is_dodge(resp, true_id) || is_impersonation(resp, true_id);
  }
  return false;
}

namespace {

struct SearchState {
  const Image& original_image;
  const LandmarkSet& original_landmarks;
  const std::string& true_id;
  Oracle& oracle;
  QueryLedger& ledger;
  const AttackConfig& config;
  const ReferenceSpace& ref;
  const std::vector<WarpSpec>& specs;
  Image working_image;
  LandmarkSet working_landmarks;
  AttackOutcome outcome;
};

// One node of the depth-first walk: warp, submit, stop on success, else recurse on
// the warped face with the next (function, scale).
void search(SearchState& s, std::size_t node) {
  if (node >= s.specs.size() || s.ledger.exhausted()) return;
  const WarpSpec& spec = s.specs[node];

  const bool cumulative = s.config.composition == Composition::Cumulative;
  const Image& base_image = cumulative ? s.working_image : s.original_image;
  const LandmarkSet& base_landmarks = cumulative ? s.working_landmarks : s.original_landmarks;

  WarpResult warped;
  try {
    warped = warp_face(base_image, base_landmarks, spec, s.ref);
  } catch (const InvalidInput& e) {
    s.outcome.skipped.push_back({spec, e.what()});
    return search(s, node + 1);
  } catch (const NumericError& e) {
    s.outcome.skipped.push_back({spec, e.what()});
    return search(s, node + 1);
  }

  TraceEntry entry{spec, std::nullopt, {}, l2_distance(s.original_image, warped.image)};
  try {
    entry.response = identify(s.oracle, warped.image, s.ledger);
  } catch (const TransportError& e) {
    entry.error = e.what();
  }
  s.working_image = std::move(warped.image);
  s.working_landmarks = warped.landmarks;
  s.outcome.trace.push_back(entry);

  if (entry.response && satisfies(s.config.goal, *entry.response, s.true_id)) {
    s.outcome.status = is_dodge(*entry.response, s.true_id) ? AttackStatus::Dodge
                                                             : AttackStatus::Impersonation;
    return;
  }
  search(s, node + 1);
}

}  // namespace

AttackOutcome raf_attack(const Image& img, const LandmarkSet& lm, const std::string& true_id,
                         Oracle& oracle, const AttackConfig& config, const ReferenceSpace& ref) {
  QueryLedger ledger(config.budget);
  return raf_attack(img, lm, true_id, oracle, ledger, config, ref);
}

AttackOutcome raf_attack(const Image& img, const LandmarkSet& lm, const std::string& true_id,
                         Oracle& oracle, QueryLedger& ledger, const AttackConfig& config,
                         const ReferenceSpace& ref) {
  const auto specs = schedule(config);
  const std::size_t used_before = ledger.used();
  SearchState state{img, lm, true_id, oracle, ledger, config, ref, specs, img, lm, {}};
  search(state, 0);

  AttackOutcome out = std::move(state.outcome);
  out.queries_used = ledger.used() - used_before;
  if (out.trace.empty()) {
    out.final_image = img;
    out.final_landmarks = lm;
    out.final_delta = 0.0;
  } else {
    out.final_image = std::move(state.working_image);
    out.final_landmarks = state.working_landmarks;
    out.final_delta = out.trace.back().delta;
  }
  return out;
}

double complexity_bound(std::uint64_t n, std::uint64_t d, std::uint64_t k, double xi,
                        double base_cost) {
  if (d < 1 || n < d) throw InvalidInput("complexity_bound needs n >= d >= 1");
  if (k < 2) throw InvalidInput("complexity_bound needs k >= 2");
  if (n % d != 0) throw InvalidInput("n / d must be an integer power of k");
  std::uint64_t ratio = n / d;
  while (ratio % k == 0) ratio /= k;
  if (ratio != 1) throw InvalidInput("n / d must be an integer power of k");

  if (n == d) return base_cost;
  return xi * (static_cast<double>(k) * complexity_bound(n / k, d, k, xi, base_cost));
}

}  // namespace raf
