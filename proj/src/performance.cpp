#include "drscreen/performance.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace drscreen {

namespace {

// P(node output is positive | true state), the node's only decision channel.
struct PosProb {
  double given_diseased = 0.0;
  double given_healthy = 0.0;
};

// Ungradable images route to the positive pathway.
PosProb leaf_positive_prob(const GraderProfile& p) {
  const double u = p.ungradable_rate;
  return {p.sensitivity + u * (1.0 - p.sensitivity),
          1.0 - p.specificity * (1.0 - u)};
}

PosProb filtered_positive_prob(const FilterParams& f) {
  // "positive" = flagged for downstream review (did not pass the filter).
  return {1.0 - f.p_pass_given_positive, 1.0 - f.p_pass_given_negative};
}

struct CostAccumulator {
  double cost_diseased = 0.0;
  double cost_healthy = 0.0;
  double human_reads_diseased = 0.0;
  double human_reads_healthy = 0.0;
  double ai_reads_diseased = 0.0;
  double ai_reads_healthy = 0.0;

  void read(const GraderProfile& p, double reach_d, double reach_h) {
    cost_diseased += reach_d * p.cost_per_read;
    cost_healthy += reach_h * p.cost_per_read;
    if (p.kind == GraderKind::Ai) {
      ai_reads_diseased += reach_d;
      ai_reads_healthy += reach_h;
    } else {
      human_reads_diseased += reach_d;
      human_reads_healthy += reach_h;
    }
  }
};

PosProb compose(const StrategyNodePtr& n, const GraderRegistry& registry,
                double reach_d, double reach_h, CostAccumulator& acc) {
  struct Visitor {
    const GraderRegistry& reg;
    double reach_d, reach_h;
    CostAccumulator& acc;

    PosProb operator()(const LeafNode& l) const {
      const GraderProfile& p = reg.at(l.grader_id);
      acc.read(p, reach_d, reach_h);
      return leaf_positive_prob(p);
    }
    PosProb operator()(const FilteredNode& f) const {
      const GraderProfile& p = reg.at(f.grader_id);
      acc.read(p, reach_d, reach_h);  // the AI still reads every arriving case
      return filtered_positive_prob(f.filter);
    }
    PosProb operator()(const SequentialNode& s) const {
      PosProb up = compose(s.upstream, reg, reach_d, reach_h, acc);
      PosProb rev = compose(s.reviewer, reg, reach_d * up.given_diseased,
                            reach_h * up.given_healthy, acc);
      return {up.given_diseased * rev.given_diseased,
              up.given_healthy * rev.given_healthy};
    }
    PosProb operator()(const ConsensusNode& c) const {
      PosProb a = compose(c.a, reg, reach_d, reach_h, acc);
      PosProb b = compose(c.b, reg, reach_d, reach_h, acc);
      double dis_d = a.given_diseased * (1.0 - b.given_diseased) +
                     (1.0 - a.given_diseased) * b.given_diseased;
      double dis_h = a.given_healthy * (1.0 - b.given_healthy) +
                     (1.0 - a.given_healthy) * b.given_healthy;
      PosProb adj =
          compose(c.adjudicator, reg, reach_d * dis_d, reach_h * dis_h, acc);
      return {a.given_diseased * b.given_diseased + dis_d * adj.given_diseased,
              a.given_healthy * b.given_healthy + dis_h * adj.given_healthy};
    }
  };
  return std::visit(Visitor{registry, reach_d, reach_h, acc}, n->v);
}

DiagnosticPerformance assemble(const PosProb& final_pos, const CostAccumulator& acc,
                               double prevalence) {
  DiagnosticPerformance perf;
  perf.sensitivity = final_pos.given_diseased;
  perf.specificity = 1.0 - final_pos.given_healthy;
  const double q = 1.0 - prevalence;
  perf.expected_cost_per_case = prevalence * acc.cost_diseased + q * acc.cost_healthy;
  perf.human_reads_per_case =
      prevalence * acc.human_reads_diseased + q * acc.human_reads_healthy;
  perf.ai_reads_per_case = prevalence * acc.ai_reads_diseased + q * acc.ai_reads_healthy;
  return perf;
}

}  // namespace

DiagnosticPerformance closed_form_performance(const StrategyTree& tree,
                                              const GraderRegistry& registry,
                                              double prevalence) {
  if (!(prevalence > 0.0 && prevalence < 1.0))
    throw DomainError("prevalence must lie strictly inside (0,1)");
  if (!tree.root) throw DomainError("empty strategy tree");
  CostAccumulator acc;
  PosProb final_pos = compose(tree.root, registry, 1.0, 1.0, acc);
  return assemble(final_pos, acc, prevalence);
}

namespace {

constexpr int kMaxInstances = 8;

struct Instance {
  PosProb pos;
  const GraderProfile* profile;
};

void collect_instances(const StrategyNodePtr& n, const GraderRegistry& registry,
                       std::vector<Instance>& out) {
  struct Visitor {
    const GraderRegistry& reg;
    std::vector<Instance>& out;
    void operator()(const LeafNode& l) const {
      const GraderProfile& p = reg.at(l.grader_id);
      out.push_back({leaf_positive_prob(p), &p});
    }
    void operator()(const FilteredNode& f) const {
      const GraderProfile& p = reg.at(f.grader_id);
      out.push_back({filtered_positive_prob(f.filter), &p});
    }
    void operator()(const SequentialNode& s) const {
      collect_instances(s.upstream, reg, out);
      collect_instances(s.reviewer, reg, out);
    }
    void operator()(const ConsensusNode& c) const {
      collect_instances(c.a, reg, out);
      collect_instances(c.b, reg, out);
      collect_instances(c.adjudicator, reg, out);
    }
  };
  std::visit(Visitor{registry, out}, n->v);
}

struct RouteOutcome {
  bool positive = false;
  double cost = 0.0;
  double human_reads = 0.0;
  double ai_reads = 0.0;
};

// Walks the tree for one fixed verdict combination. The cursor advances past
// every instance in collection order; only graders a case actually reaches
// contribute cost and reads.
bool route(const StrategyNodePtr& n, const std::vector<Instance>& instances,
           std::uint32_t verdicts, int& cursor, bool active, RouteOutcome& out) {
  struct Visitor {
    const std::vector<Instance>& instances;
    std::uint32_t verdicts;
    int& cursor;
    bool active;
    RouteOutcome& out;

    bool leaf() const {
      int idx = cursor++;
      if (active) {
        const GraderProfile& p = *instances[idx].profile;
        out.cost += p.cost_per_read;
        if (p.kind == GraderKind::Ai)
          out.ai_reads += 1.0;
        else
          out.human_reads += 1.0;
      }
      return ((verdicts >> idx) & 1u) != 0u;
    }
    bool operator()(const LeafNode&) const { return leaf(); }
    bool operator()(const FilteredNode&) const { return leaf(); }
    bool operator()(const SequentialNode& s) const {
      bool up = route(s.upstream, instances, verdicts, cursor, active, out);
      bool rev = route(s.reviewer, instances, verdicts, cursor, active && up, out);
      return up && rev;
    }
    bool operator()(const ConsensusNode& c) const {
      bool a = route(c.a, instances, verdicts, cursor, active, out);
      bool b = route(c.b, instances, verdicts, cursor, active, out);
      bool adj = route(c.adjudicator, instances, verdicts, cursor,
                       active && (a != b), out);
      return a == b ? a : adj;
    }
  };
  return std::visit(Visitor{instances, verdicts, cursor, active, out}, n->v);
}

}  // namespace

DiagnosticPerformance enumerate_performance(const StrategyTree& tree,
                                            const GraderRegistry& registry,
                                            double prevalence) {
  if (!(prevalence >= 0.0 && prevalence <= 1.0))
    throw DomainError("prevalence must lie within [0,1]");
  if (!tree.root) throw DomainError("empty strategy tree");
  std::vector<Instance> instances;
  collect_instances(tree.root, registry, instances);
  const int n = static_cast<int>(instances.size());
  if (n > kMaxInstances)
    throw DomainError("enumeration refused: tree has more than 8 grader instances");

  PosProb final_pos;
  CostAccumulator acc;
  const std::uint32_t combos = 1u << n;
  for (int state = 0; state < 2; ++state) {
    const bool diseased = state == 0;
    double p_pos = 0.0, cost = 0.0, human = 0.0, ai = 0.0;
    for (std::uint32_t mask = 0; mask < combos; ++mask) {
      double w = 1.0;
      for (int i = 0; i < n; ++i) {
        double p1 = diseased ? instances[i].pos.given_diseased
                             : instances[i].pos.given_healthy;
        w *= ((mask >> i) & 1u) ? p1 : 1.0 - p1;
      }
      if (w == 0.0) continue;
      RouteOutcome outc;
      int cursor = 0;
      bool positive = route(tree.root, instances, mask, cursor, true, outc);
      if (positive) p_pos += w;
      cost += w * outc.cost;
      human += w * outc.human_reads;
      ai += w * outc.ai_reads;
    }
    if (diseased) {
      final_pos.given_diseased = p_pos;
      acc.cost_diseased = cost;
      acc.human_reads_diseased = human;
      acc.ai_reads_diseased = ai;
    } else {
      final_pos.given_healthy = p_pos;
      acc.cost_healthy = cost;
      acc.human_reads_healthy = human;
      acc.ai_reads_healthy = ai;
    }
  }
  return assemble(final_pos, acc, prevalence);
}

double accuracy(const DiagnosticPerformance& perf, double prevalence) {
  if (!(prevalence > 0.0 && prevalence < 1.0))
    throw DomainError("prevalence must lie strictly inside (0,1)");
  return prevalence * perf.sensitivity + (1.0 - prevalence) * perf.specificity;
}

std::optional<double> implied_prevalence(double acc, double se, double sp) {
  if (se == sp) return std::nullopt;
  return (acc - sp) / (se - sp);
}

}  // namespace drscreen
