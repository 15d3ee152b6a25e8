#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace drscreen {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class GraderKind { Human, Ai };

// Pass-through probabilities induced by AI score-threshold filtering.
// A "pass" means the case is confidently classified negative and leaves the
// pipeline; everything else is flagged and continues downstream. The two
// probabilities are terminal: ungradable handling is already folded into them.
struct FilterParams {
  double p_pass_given_positive = 0.0;  // truly diseased case leaks out as negative
  double p_pass_given_negative = 0.0;  // truly healthy case cleared without review
};

struct GraderProfile {
  std::string id;
  GraderKind kind = GraderKind::Human;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double cost_per_read = 0.0;     // USD per image set
  double ungradable_rate = 0.0;   // ungradable images route to the positive pathway
  std::optional<FilterParams> filter;  // required before the grader can appear as X[Se]

  // Throws DomainError naming the offending field.
  void validate() const;
};

class GraderRegistry {
 public:
  void add(GraderProfile profile);
  const GraderProfile* find(const std::string& id) const;
  const GraderProfile& at(const std::string& id) const;
  const std::vector<GraderProfile>& profiles() const { return profiles_; }
  std::vector<GraderProfile>& mutable_profiles() { return profiles_; }
  bool empty() const { return profiles_.empty(); }

 private:
  std::vector<GraderProfile> profiles_;
};

struct StrategyNode;
using StrategyNodePtr = std::shared_ptr<const StrategyNode>;

struct LeafNode {
  std::string grader_id;
};

// AI grader run in threshold-filtering mode; behaves as a triage step whose
// negative channel is described by FilterParams.
struct FilteredNode {
  std::string grader_id;
  FilterParams filter;
};

// reviewer re-grades only upstream-positive cases; final positive requires both.
struct SequentialNode {
  StrategyNodePtr upstream;
  StrategyNodePtr reviewer;
};

// a and b grade all cases independently; adjudicator resolves disagreements.
struct ConsensusNode {
  StrategyNodePtr a;
  StrategyNodePtr b;
  StrategyNodePtr adjudicator;
};

struct StrategyNode {
  std::variant<LeafNode, FilteredNode, SequentialNode, ConsensusNode> v;
};

struct StrategyTree {
  StrategyNodePtr root;

  int depth() const;
  int grader_instances() const;  // number of leaf positions (M·M counts twice)
};

StrategyTree make_leaf(std::string grader_id);
StrategyTree make_filtered(std::string grader_id, FilterParams filter);
StrategyTree make_sequential(StrategyTree upstream, StrategyTree reviewer);
StrategyTree make_consensus(StrategyTree a, StrategyTree b, StrategyTree adjudicator);

/* Strategy expression grammar (tokens over grader ids, '+', '·', "[Se]"):
 *
 *   expr      ::= stage { "+" stage }
 *   stage     ::= unit | unit "·" unit        ('.' accepted as alias for '·')
 *   unit      ::= id [ "[Se]" ]
 *
 * Stages are resolved left to right. A two-unit stage forms a Consensus whose
 * adjudicator is the NEXT stage (which it consumes; that stage must be a
 * single unit). Remaining stages fold left as Sequential. "[Se]" on an AI
 * grader produces a Filtered leaf. Published strategy names write the suffix
 * at the end of the expression ("AI+M[Se]"); a trailing "[Se]" on a human
 * grader therefore attaches to the expression's unique AI grader. Identical
 * ids in one expression ("M·M") denote independent graders sharing a profile.
 */
StrategyTree parse_strategy(const std::string& expr, const GraderRegistry& registry);

// Canonical form: '·' separators, and "[Se]" printed at the end of the
// expression whenever the tree holds exactly one filtered leaf and no other
// AI grader (the published naming convention); inline otherwise.
std::string format_strategy(const StrategyTree& tree, const GraderRegistry& registry);

}  // namespace drscreen
