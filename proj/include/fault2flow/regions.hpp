#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fault2flow/error.hpp"
#include "fault2flow/fault_tree.hpp"

namespace fault2flow {

/// Which point of a region's per-parameter interval a witness sits on.
/// Low and High hug the closed bound itself or come within a small offset of
/// an open one; Interior keeps clear of every bound.
enum class WitnessBias { Interior, Low, High };

/// Midpoint of the declared plausible range, else 1.0 (never a zero denominator).
inline double neutral_value(const ParamSpec& spec) {
  if (spec.range) return spec.range->low + (spec.range->high - spec.range->low) / 2;
  return 1.0;
}

namespace region_detail {

// Distance kept from an open bound: epsilon, shrunk for small thresholds so
// the witness still lies inside a 10% band around the bound.
inline double tight_offset(double bound, double eps) {
  double rel = std::abs(bound) * 1e-2;
  return bound != 0.0 && rel < eps ? rel : eps;
}

inline double interior(const Interval& iv) {
  if (iv.bounded_below() && iv.bounded_above()) return iv.low == iv.high ? iv.low : iv.low + (iv.high - iv.low) / 2;
  if (iv.bounded_above()) return iv.high > 0 ? iv.high / 2 : iv.high - std::max(1.0, std::abs(iv.high));
  if (iv.bounded_below()) return iv.low + std::max(1.0, std::abs(iv.low));
  return 1.0;
}

inline std::optional<double> pick(const Interval& iv, WitnessBias bias, double eps) {
  if (iv.empty()) return std::nullopt;
  double v = interior(iv);
  if (bias == WitnessBias::Low && iv.bounded_below()) {
    v = iv.low_closed ? iv.low : iv.low + tight_offset(iv.low, eps);
  } else if (bias == WitnessBias::High && iv.bounded_above()) {
    v = iv.high_closed ? iv.high : iv.high - tight_offset(iv.high, eps);
  }
  if (!iv.contains(v)) v = interior(iv);
  if (!iv.contains(v)) return std::nullopt;
  return v;
}

// Searches a few ulps around `guess` for x with f(x) == target, falling back
// to any x with f(x) inside the interval.
template <class F>
std::optional<double> nudge(double guess, double target, const Interval& iv, F f) {
  if (!std::isfinite(guess)) return std::nullopt;
  std::optional<double> inside;
  double up = guess;
  double down = guess;
  for (int step = 0; step < 8; ++step) {
    for (double x : {up, down}) {
      double y = f(x);
      if (y == target) return x;
      if (!inside && iv.contains(y)) inside = x;
    }
    up = std::nextafter(up, HUGE_VAL);
    down = std::nextafter(down, -HUGE_VAL);
  }
  return inside;
}

}  // namespace region_detail

/// Builds an assignment in which every constrained parameter lies in its
/// interval. Measured parameters are placed first, then ratios are realized
/// through whichever operand is still free (denominator 1 when both are).
/// Parameters with no constraint take their neutral value. Greedy: nullopt
/// can also mean the realization did not find a point.
inline std::optional<Assignment> realize(const FaultTree& tree, const std::map<std::string, Interval>& constraints,
                                         WitnessBias bias, double eps) {
  using namespace region_detail;
  Assignment out;
  for (const auto& spec : tree.schema) {
    if (spec.kind != ParamKind::Measured) continue;
    auto it = constraints.find(spec.name);
    if (it == constraints.end()) continue;
    auto v = pick(it->second, bias, eps);
    if (!v) return std::nullopt;
    out[spec.name] = *v;
  }
  for (const auto& spec : tree.schema) {
    if (spec.kind != ParamKind::Derived) continue;
    auto it = constraints.find(spec.name);
    if (it == constraints.end()) continue;
    const Interval& iv = it->second;
    auto v = pick(iv, bias, eps);
    if (!v) return std::nullopt;
    bool num_set = out.contains(spec.numerator);
    bool den_set = out.contains(spec.denominator);
    if (!den_set) {
      if (!num_set) {
        out[spec.denominator] = 1.0;
        out[spec.numerator] = *v;
        continue;
      }
      double a = out[spec.numerator];
      std::optional<double> den;
      if (*v != 0.0) den = nudge(a / *v, *v, iv, [a](double d) { return d == 0.0 ? NAN : a / d; });
      if (!den && iv.contains(a)) den = 1.0;
      if (!den || *den == 0.0) return std::nullopt;
      out[spec.denominator] = *den;
      continue;
    }
    double d = out[spec.denominator];
    if (d == 0.0) return std::nullopt;
    if (!num_set) {
      auto num = nudge(*v * d, *v, iv, [d](double n) { return n / d; });
      if (!num) return std::nullopt;
      out[spec.numerator] = *num;
    } else if (!iv.contains(out[spec.numerator] / d)) {
      return std::nullopt;
    }
  }
  for (const auto& spec : tree.schema) {
    if (spec.kind == ParamKind::Measured && !out.contains(spec.name)) out[spec.name] = neutral_value(spec);
  }
  return out;
}

/// A satisfiable leaf-truth combination and the witnesses realizing it.
struct Region {
  std::vector<bool> truth;             // indexed like leaf_events(tree)
  Assignment representative;           // interior witness when one exists
  std::vector<Assignment> boundaries;  // distinct low/high-biased witnesses
};

/// Enumerates leaf-truth combinations (leaf 0 is the most significant bit of
/// the counter, all-true first) and keeps the first `cap` that can be
/// realized. Each kept region carries witnesses that reproduce its truth
/// values exactly.
inline std::vector<Region> enumerate_regions(const FaultTree& tree, std::size_t cap, double eps) {
  auto leaves = leaf_events(tree);
  if (leaves.size() > 62) {
    throw Error(ErrorKind::LeafCapExceeded, std::to_string(leaves.size()) + " leaves cannot be enumerated");
  }
  std::vector<const Condition*> conds;
  for (const auto& leaf : leaves) conds.push_back(&std::get<BasicEvent>(tree.at(leaf)).condition);

  auto reproduces = [&](const Assignment& a, const std::vector<bool>& truth) {
    try {
      for (std::size_t i = 0; i < conds.size(); ++i) {
        if (conds[i]->holds(parameter_value(tree, a, conds[i]->parameter)) != truth[i]) return false;
      }
      return true;
    } catch (const Error&) {
      return false;
    }
  };

  std::vector<Region> regions;
  const std::uint64_t total = std::uint64_t{1} << leaves.size();
  for (std::uint64_t counter = 0; counter < total && regions.size() < cap; ++counter) {
    std::vector<bool> truth(leaves.size());
    std::map<std::string, Interval> constraints;
    bool feasible = true;
    for (std::size_t i = 0; i < leaves.size() && feasible; ++i) {
      truth[i] = ((counter >> (leaves.size() - 1 - i)) & 1U) == 0;
      CompareOp op = truth[i] ? conds[i]->op : negate(conds[i]->op);
      Interval& iv = constraints[conds[i]->parameter];
      iv.restrict(op, conds[i]->threshold);
      feasible = !iv.empty();
    }
    if (!feasible) continue;

    Region region;
    region.truth = truth;
    std::optional<Assignment> rep;
    for (auto bias : {WitnessBias::Interior, WitnessBias::Low, WitnessBias::High}) {
      auto a = realize(tree, constraints, bias, eps);
      if (!a || !reproduces(*a, truth)) continue;
      if (!rep) rep = *a;
      if (bias != WitnessBias::Interior &&
          std::find(region.boundaries.begin(), region.boundaries.end(), *a) == region.boundaries.end()) {
        region.boundaries.push_back(*a);
      }
    }
    if (!rep) continue;
    region.representative = std::move(*rep);
    if (region.boundaries.empty()) region.boundaries.push_back(region.representative);
    regions.push_back(std::move(region));
  }
  return regions;
}

}  // namespace fault2flow
