#include "drscreen/cea.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace drscreen {

namespace {

IcerResult incremental_ratio(double delta_cost, double delta_effect) {
  IcerResult r;
  if (delta_effect == 0.0) {
    r.kind = IcerKind::Undefined;
    return r;
  }
  if (delta_cost < 0.0 && delta_effect > 0.0) {
    r.kind = IcerKind::Dominant;
    return r;
  }
  if (delta_cost > 0.0 && delta_effect < 0.0) {
    r.kind = IcerKind::Dominated;
    return r;
  }
  r.kind = IcerKind::Ratio;
  r.value = delta_cost / delta_effect;
  if (r.value == 0.0) r.value = 0.0;  // normalize -0
  r.effect_gained = delta_effect > 0.0;
  return r;
}

}  // namespace

IcerResult icer(double delta_cost, double delta_qalys) {
  return incremental_ratio(delta_cost, delta_qalys);
}

IcerResult cost_per_blindness_year_averted(double delta_cost,
                                           double delta_blindfree_years) {
  return incremental_ratio(delta_cost, delta_blindfree_years);
}

std::string to_string(const IcerResult& r) {
  switch (r.kind) {
    case IcerKind::Dominated: return "Dominated";
    case IcerKind::Dominant: return "Dominant";
    case IcerKind::Undefined: return "Undefined";
    case IcerKind::Ratio: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.12g", r.value);
      return buf;
    }
  }
  return "?";
}

double nmb(double delta_cost, double delta_qalys, double wtp) {
  if (wtp < 0.0) throw DomainError("willingness-to-pay must be non-negative");
  return wtp * delta_qalys - delta_cost;
}

std::optional<double> nmb_crossing_wtp(double dc1, double dq1, double dc2, double dq2) {
  if (dq1 == dq2) return std::nullopt;
  return (dc1 - dc2) / (dq1 - dq2);
}

const char* to_string(CeClass c) {
  switch (c) {
    case CeClass::VeryCostEffective: return "very cost-effective";
    case CeClass::CostEffective: return "cost-effective";
    case CeClass::NotCostEffective: return "not cost-effective";
    case CeClass::Dominated: return "dominated";
    case CeClass::Dominant: return "dominant";
    case CeClass::Undefined: return "undefined";
  }
  return "?";
}

CeClass classify(const IcerResult& r, const WtpPolicy& policy) {
  switch (r.kind) {
    case IcerKind::Dominated: return CeClass::Dominated;
    case IcerKind::Dominant: return CeClass::Dominant;
    case IcerKind::Undefined: return CeClass::Undefined;
    case IcerKind::Ratio: break;
  }
  if (r.effect_gained) {
    if (r.value < policy.wtp_1x()) return CeClass::VeryCostEffective;
    if (r.value <= policy.wtp_3x()) return CeClass::CostEffective;
    return CeClass::NotCostEffective;
  }
  // SW quadrant: the saving per QALY forgone must beat the QALY's value.
  if (r.value > policy.wtp_3x()) return CeClass::VeryCostEffective;
  if (r.value > policy.wtp_1x()) return CeClass::CostEffective;
  return CeClass::NotCostEffective;
}

CeaRecord make_cea_record(const ScenarioResult& scenario,
                          const ScenarioResult& comparator, const WtpPolicy& policy) {
  CeaRecord rec;
  rec.scenario_id = scenario.scenario_id;
  rec.comparator_id = comparator.scenario_id;
  rec.delta_cost = scenario.total_cost - comparator.total_cost;
  rec.delta_qalys = scenario.qalys - comparator.qalys;
  rec.delta_blindfree_years = scenario.blindfree_years - comparator.blindfree_years;
  rec.icer = icer(rec.delta_cost, rec.delta_qalys);
  rec.cost_per_blindness_year =
      cost_per_blindness_year_averted(rec.delta_cost, rec.delta_blindfree_years);
  rec.nmb_1x = nmb(rec.delta_cost, rec.delta_qalys, policy.wtp_1x());
  rec.nmb_3x = nmb(rec.delta_cost, rec.delta_qalys, policy.wtp_3x());
  rec.ce_class = classify(rec.icer, policy);
  return rec;
}

const char* to_string(DominanceLabel d) {
  switch (d) {
    case DominanceLabel::OnFrontier: return "frontier";
    case DominanceLabel::StrictlyDominated: return "strictly-dominated";
    case DominanceLabel::ExtendedlyDominated: return "extendedly-dominated";
    case DominanceLabel::Duplicate: return "duplicate";
  }
  return "?";
}

FrontierResult frontier(std::vector<FrontierPoint> points, bool extended_dominance) {
  const std::size_t n = points.size();
  std::vector<DominanceLabel> label(n, DominanceLabel::OnFrontier);

  // exact duplicates collapse to the first id (stable ordering)
  {
    std::map<std::pair<double, double>, std::size_t> seen;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return points[a].id < points[b].id;
    });
    for (std::size_t i : order) {
      auto key = std::make_pair(points[i].cost, points[i].qalys);
      auto [it, inserted] = seen.emplace(key, i);
      if (!inserted) label[i] = DominanceLabel::Duplicate;
    }
  }

  auto alive = [&](std::size_t i) { return label[i] == DominanceLabel::OnFrontier; };

  // strict dominance: another point with <= cost and >= qalys, one strict
  for (std::size_t i = 0; i < n; ++i) {
    if (!alive(i)) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || label[j] == DominanceLabel::Duplicate) continue;
      const bool weakly = points[j].cost <= points[i].cost &&
                          points[j].qalys >= points[i].qalys;
      const bool strictly = points[j].cost < points[i].cost ||
                            points[j].qalys > points[i].qalys;
      if (weakly && strictly) {
        label[i] = DominanceLabel::StrictlyDominated;
        break;
      }
    }
  }

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < n; ++i)
    if (alive(i)) members.push_back(i);
  std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].cost != points[b].cost) return points[a].cost < points[b].cost;
    return points[a].id < points[b].id;
  });

  if (extended_dominance) {
    // drop middle points until adjacent ICERs increase strictly with cost
    bool changed = true;
    while (changed && members.size() >= 3) {
      changed = false;
      for (std::size_t k = 1; k + 1 < members.size(); ++k) {
        const auto& lo = points[members[k - 1]];
        const auto& mid = points[members[k]];
        const auto& hi = points[members[k + 1]];
        const double icer_in = (mid.cost - lo.cost) / (mid.qalys - lo.qalys);
        const double icer_out = (hi.cost - mid.cost) / (hi.qalys - mid.qalys);
        if (icer_in >= icer_out) {
          label[members[k]] = DominanceLabel::ExtendedlyDominated;
          members.erase(members.begin() + static_cast<std::ptrdiff_t>(k));
          changed = true;
          break;
        }
      }
    }
  }

  FrontierResult result;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& p = points[members[k]];
    FrontierMember m{p.id, p.cost, p.qalys, std::nullopt};
    if (k > 0) {
      const auto& prev = points[members[k - 1]];
      m.icer_from_prev = (p.cost - prev.cost) / (p.qalys - prev.qalys);
    }
    result.frontier.push_back(std::move(m));
  }
  for (std::size_t i = 0; i < n; ++i)
    result.labels.emplace_back(points[i].id, label[i]);
  return result;
}

}  // namespace drscreen
