#pragma once

#include <string>
#include <vector>

#include "drscreen/rng.hpp"
#include "drscreen/strategy.hpp"

namespace drscreen::test {

// Grader profiles consistent with the published strategy-level operating
// points; used wherever a realistic registry is needed without config IO.
inline GraderRegistry reference_registry() {
  GraderRegistry reg;
  reg.add({"AI", GraderKind::Ai, 0.9615, 0.8074, 6.0, 0.0,
           FilterParams{0.005, 0.35}});
  reg.add({"M", GraderKind::Human, 0.908, 0.9205, 8.0, 0.0, std::nullopt});
  reg.add({"M2", GraderKind::Human, 0.9696, 0.99347, 16.0, 0.0, std::nullopt});
  return reg;
}

inline const std::vector<std::string>& reference_strategies() {
  static const std::vector<std::string> names = {
      "AI",          "AI+M",      "AI+M2",    "AI+M[Se]",    "AI+M2[Se]",
      "AI\xC2\xB7M+M2", "AI+M+M2", "AI+M\xC2\xB7M+M2", "M\xC2\xB7M+M2"};
  return names;
}

inline GraderRegistry random_registry(Rng& rng, int n_graders) {
  GraderRegistry reg;
  for (int i = 0; i < n_graders; ++i) {
    GraderProfile p;
    p.id = "G" + std::to_string(i);
    p.kind = rng.uniform01() < 0.4 ? GraderKind::Ai : GraderKind::Human;
    p.sensitivity = rng.uniform(0.05, 0.99);
    p.specificity = rng.uniform(0.05, 0.99);
    p.cost_per_read = rng.uniform(0.5, 40.0);
    p.ungradable_rate = rng.uniform01() < 0.3 ? rng.uniform(0.0, 0.2) : 0.0;
    if (p.kind == GraderKind::Ai)
      p.filter = FilterParams{rng.uniform(0.0, 1.0 - p.sensitivity),
                              rng.uniform(0.0, 1.0)};
    reg.add(std::move(p));
  }
  return reg;
}

inline StrategyTree random_tree(Rng& rng, const GraderRegistry& reg, int leaf_budget) {
  auto random_leaf = [&]() -> StrategyTree {
    const auto& profiles = reg.profiles();
    const auto& p = profiles[static_cast<std::size_t>(
        rng.uniform(0.0, static_cast<double>(profiles.size())))];
    if (p.kind == GraderKind::Ai && p.filter && rng.uniform01() < 0.3)
      return make_filtered(p.id, *p.filter);
    return make_leaf(p.id);
  };
  if (leaf_budget <= 1) return random_leaf();
  const double pick = rng.uniform01();
  if (pick < 0.35) return random_leaf();
  if (pick < 0.70 || leaf_budget < 3) {
    const int up = 1 + static_cast<int>(rng.uniform(0.0, leaf_budget - 1));
    return make_sequential(random_tree(rng, reg, up),
                           random_tree(rng, reg, leaf_budget - up));
  }
  const int a = 1 + static_cast<int>(rng.uniform(0.0, leaf_budget - 2));
  const int b = 1 + static_cast<int>(rng.uniform(0.0, leaf_budget - a - 1));
  return make_consensus(random_tree(rng, reg, a), random_tree(rng, reg, b),
                        random_tree(rng, reg, leaf_budget - a - b));
}

}  // namespace drscreen::test
