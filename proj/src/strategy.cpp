#include "drscreen/strategy.hpp"

#include <algorithm>
#include <cctype>

namespace drscreen {

namespace {

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void GraderProfile::validate() const {
  if (id.empty()) throw DomainError("grader id must be non-empty");
  if (!is_probability(sensitivity))
    throw DomainError("grader '" + id + "': sensitivity must be within [0,1]");
  if (!is_probability(specificity))
    throw DomainError("grader '" + id + "': specificity must be within [0,1]");
  if (!is_probability(ungradable_rate))
    throw DomainError("grader '" + id + "': ungradable_rate must be within [0,1]");
  if (cost_per_read < 0.0)
    throw DomainError("grader '" + id + "': cost_per_read must be non-negative");
  if (filter) {
    if (kind != GraderKind::Ai)
      throw DomainError("grader '" + id + "': filter parameters only apply to AI graders");
    if (!is_probability(filter->p_pass_given_positive) ||
        !is_probability(filter->p_pass_given_negative))
      throw DomainError("grader '" + id + "': filter pass probabilities must be within [0,1]");
    // Filtering can only tighten the negative channel relative to the raw AI.
    if (filter->p_pass_given_positive > 1.0 - sensitivity + 1e-12)
      throw DomainError("grader '" + id +
                        "': filter.p_pass_given_positive exceeds 1 - sensitivity");
  }
}

void GraderRegistry::add(GraderProfile profile) {
  profile.validate();
  if (find(profile.id) != nullptr)
    throw DomainError("duplicate grader id '" + profile.id + "'");
  profiles_.push_back(std::move(profile));
}

const GraderProfile* GraderRegistry::find(const std::string& id) const {
  for (const auto& p : profiles_)
    if (p.id == id) return &p;
  return nullptr;
}

const GraderProfile& GraderRegistry::at(const std::string& id) const {
  const GraderProfile* p = find(id);
  if (p == nullptr) throw DomainError("unknown grader id '" + id + "'");
  return *p;
}

namespace {

constexpr int kMaxDepth = 8;

StrategyNodePtr node_of(StrategyTree t) { return t.root; }

int depth_of(const StrategyNodePtr& n) {
  struct Visitor {
    int operator()(const LeafNode&) const { return 1; }
    int operator()(const FilteredNode&) const { return 1; }
    int operator()(const SequentialNode& s) const {
      return 1 + std::max(depth_of(s.upstream), depth_of(s.reviewer));
    }
    int operator()(const ConsensusNode& c) const {
      return 1 + std::max({depth_of(c.a), depth_of(c.b), depth_of(c.adjudicator)});
    }
  };
  return std::visit(Visitor{}, n->v);
}

int instances_of(const StrategyNodePtr& n) {
  struct Visitor {
    int operator()(const LeafNode&) const { return 1; }
    int operator()(const FilteredNode&) const { return 1; }
    int operator()(const SequentialNode& s) const {
      return instances_of(s.upstream) + instances_of(s.reviewer);
    }
    int operator()(const ConsensusNode& c) const {
      return instances_of(c.a) + instances_of(c.b) + instances_of(c.adjudicator);
    }
  };
  return std::visit(Visitor{}, n->v);
}

}  // namespace

int StrategyTree::depth() const { return root ? depth_of(root) : 0; }
int StrategyTree::grader_instances() const { return root ? instances_of(root) : 0; }

StrategyTree make_leaf(std::string grader_id) {
  auto n = std::make_shared<StrategyNode>();
  n->v = LeafNode{std::move(grader_id)};
  return StrategyTree{n};
}

StrategyTree make_filtered(std::string grader_id, FilterParams filter) {
  auto n = std::make_shared<StrategyNode>();
  n->v = FilteredNode{std::move(grader_id), filter};
  return StrategyTree{n};
}

StrategyTree make_sequential(StrategyTree upstream, StrategyTree reviewer) {
  auto n = std::make_shared<StrategyNode>();
  n->v = SequentialNode{node_of(upstream), node_of(reviewer)};
  return StrategyTree{n};
}

StrategyTree make_consensus(StrategyTree a, StrategyTree b, StrategyTree adjudicator) {
  auto n = std::make_shared<StrategyNode>();
  n->v = ConsensusNode{node_of(a), node_of(b), node_of(adjudicator)};
  return StrategyTree{n};
}

namespace {

struct Unit {
  std::string id;
  bool se_suffix = false;
  bool filtered = false;  // resolved during [Se] attachment
};

struct Stage {
  std::vector<Unit> units;
};

bool is_id_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Splits the expression into '+'-separated stages of '·'-separated units.
std::vector<Stage> tokenize(const std::string& expr) {
  std::vector<Stage> stages;
  stages.emplace_back();
  stages.back().units.emplace_back();
  bool unit_started = false;

  auto current = [&]() -> Unit& { return stages.back().units.back(); };
  auto finish_unit = [&](const char* where) {
    if (!unit_started || current().id.empty())
      throw ParseError(std::string("empty stage in strategy expression near '") + where + "'");
  };

  std::size_t i = 0;
  while (i < expr.size()) {
    char c = expr[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '+') {
      finish_unit("+");
      stages.emplace_back();
      stages.back().units.emplace_back();
      unit_started = false;
      ++i;
      continue;
    }
    // '·' (U+00B7, bytes C2 B7) or '.' both separate parallel units.
    bool parallel = false;
    if (c == '.') {
      parallel = true;
      ++i;
    } else if (static_cast<unsigned char>(c) == 0xC2 && i + 1 < expr.size() &&
               static_cast<unsigned char>(expr[i + 1]) == 0xB7) {
      parallel = true;
      i += 2;
    }
    if (parallel) {
      finish_unit("\xC2\xB7");
      stages.back().units.emplace_back();
      unit_started = false;
      continue;
    }
    if (c == '[') {
      if (expr.compare(i, 4, "[Se]") != 0)
        throw ParseError("unrecognized suffix at '" + expr.substr(i) + "' (expected \"[Se]\")");
      finish_unit("[Se]");
      if (current().se_suffix)
        throw ParseError("repeated [Se] suffix on '" + current().id + "'");
      current().se_suffix = true;
      i += 4;
      continue;
    }
    if (is_id_char(c)) {
      if (current().se_suffix)
        throw ParseError("unexpected token after [Se] suffix: '" + expr.substr(i) + "'");
      current().id.push_back(c);
      unit_started = true;
      ++i;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "' in strategy expression");
  }
  finish_unit("end of expression");
  return stages;
}

StrategyTree unit_tree(const Unit& u, const GraderRegistry& registry) {
  const GraderProfile& p = registry.at(u.id);
  if (u.filtered) {
    if (!p.filter)
      throw ParseError("grader '" + u.id + "' used as '" + u.id +
                       "[Se]' but has no filter parameters configured");
    return make_filtered(u.id, *p.filter);
  }
  return make_leaf(u.id);
}

}  // namespace

StrategyTree parse_strategy(const std::string& expr, const GraderRegistry& registry) {
  if (expr.empty()) throw ParseError("empty strategy expression");
  std::vector<Stage> stages = tokenize(expr);

  // Resolve grader ids and attach [Se] suffixes. A suffix on an AI grader
  // filters that grader directly; the published names instead write the
  // suffix on the trailing human grader, in which case it attaches to the
  // expression's unique AI grader.
  std::vector<Unit*> units;
  for (auto& stage : stages)
    for (auto& u : stage.units) units.push_back(&u);

  std::vector<Unit*> ai_units;
  for (Unit* u : units) {
    const GraderProfile* p = registry.find(u->id);
    if (p == nullptr)
      throw ParseError("unknown grader id '" + u->id + "' in strategy '" + expr + "'");
    if (p->kind == GraderKind::Ai) ai_units.push_back(u);
  }
  for (std::size_t k = 0; k < units.size(); ++k) {
    Unit* u = units[k];
    if (!u->se_suffix) continue;
    if (registry.at(u->id).kind == GraderKind::Ai) {
      u->filtered = true;
      continue;
    }
    if (k + 1 != units.size())
      throw ParseError("[Se] suffix on non-AI grader '" + u->id + "'");
    if (ai_units.size() != 1)
      throw ParseError("[Se] suffix on non-AI grader '" + u->id + "' " +
                       (ai_units.empty() ? "and the expression has no AI grader"
                                         : "is ambiguous: several AI graders present"));
    ai_units.front()->filtered = true;
  }

  // Resolve stages: consensus stages consume the following single-unit stage
  // as adjudicator; whatever remains folds left as Sequential.
  std::vector<StrategyTree> resolved;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const Stage& stage = stages[s];
    if (stage.units.size() == 1) {
      resolved.push_back(unit_tree(stage.units[0], registry));
      continue;
    }
    if (stage.units.size() != 2)
      throw ParseError("a parallel stage must contain exactly two graders in '" + expr + "'");
    if (s + 1 >= stages.size())
      throw ParseError("parallel stage '" + stage.units[0].id + "\xC2\xB7" +
                       stage.units[1].id + "' has no following adjudicator stage");
    const Stage& adj = stages[s + 1];
    if (adj.units.size() != 1)
      throw ParseError("adjudicator stage after '" + stage.units[0].id + "\xC2\xB7" +
                       stage.units[1].id + "' must be a single grader");
    resolved.push_back(make_consensus(unit_tree(stage.units[0], registry),
                                      unit_tree(stage.units[1], registry),
                                      unit_tree(adj.units[0], registry)));
    ++s;  // adjudicator stage consumed
  }

  StrategyTree tree = resolved.front();
  for (std::size_t k = 1; k < resolved.size(); ++k)
    tree = make_sequential(tree, resolved[k]);

  if (tree.depth() > kMaxDepth)
    throw ParseError("strategy tree deeper than practical bound of 8: '" + expr + "'");
  return tree;
}

namespace {

void count_se_style(const StrategyNodePtr& n, const GraderRegistry& registry,
                    int& filtered_leaves, int& ai_leaves) {
  struct Visitor {
    const GraderRegistry& reg;
    int& filtered;
    int& ai;
    void operator()(const LeafNode& l) const {
      const GraderProfile* p = reg.find(l.grader_id);
      if (p != nullptr && p->kind == GraderKind::Ai) ++ai;
    }
    void operator()(const FilteredNode&) const {
      ++filtered;
      ++ai;
    }
    void operator()(const SequentialNode& s) const {
      count_se_style(s.upstream, reg, filtered, ai);
      count_se_style(s.reviewer, reg, filtered, ai);
    }
    void operator()(const ConsensusNode& c) const {
      count_se_style(c.a, reg, filtered, ai);
      count_se_style(c.b, reg, filtered, ai);
      count_se_style(c.adjudicator, reg, filtered, ai);
    }
  };
  std::visit(Visitor{registry, filtered_leaves, ai_leaves}, n->v);
}

void format_node(const StrategyNodePtr& n, bool inline_se, std::string& out) {
  struct Visitor {
    bool inline_se;
    std::string& out;
    void operator()(const LeafNode& l) const { out += l.grader_id; }
    void operator()(const FilteredNode& f) const {
      out += f.grader_id;
      if (inline_se) out += "[Se]";
    }
    void operator()(const SequentialNode& s) const {
      format_node(s.upstream, inline_se, out);
      out += '+';
      format_node(s.reviewer, inline_se, out);
    }
    void operator()(const ConsensusNode& c) const {
      format_node(c.a, inline_se, out);
      out += "\xC2\xB7";
      format_node(c.b, inline_se, out);
      out += '+';
      format_node(c.adjudicator, inline_se, out);
    }
  };
  std::visit(Visitor{inline_se, out}, n->v);
}

}  // namespace

std::string format_strategy(const StrategyTree& tree, const GraderRegistry& registry) {
  if (!tree.root) return "";
  int filtered = 0, ai = 0;
  count_se_style(tree.root, registry, filtered, ai);
  // Trailing suffix (the published style) is unambiguous only when the
  // filtered grader is the expression's sole AI grader.
  bool trailing = (filtered == 1 && ai == 1);
  std::string out;
  format_node(tree.root, !trailing, out);
  if (trailing) out += "[Se]";
  return out;
}

}  // namespace drscreen
