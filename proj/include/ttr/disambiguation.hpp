#pragma once

// Relevance pruning, object/caption redundancy suppression with attribute
// merging, and classification of the grounding situation into one of the
// seven ambiguity states.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttr/config.hpp"
#include "ttr/embeddings.hpp"
#include "ttr/instruction.hpp"
#include "ttr/scene.hpp"

namespace ttr {

enum class AmbiguityState { NQ, AA, IMA, AM, ANF, AOA, NF };

inline constexpr std::array<AmbiguityState, 7> kAmbiguityStates = {
    AmbiguityState::NQ,  AmbiguityState::AA,  AmbiguityState::IMA, AmbiguityState::AM,
    AmbiguityState::ANF, AmbiguityState::AOA, AmbiguityState::NF};

std::string_view to_string(AmbiguityState s);
std::optional<AmbiguityState> ambiguity_state_from_string(std::string_view s);

struct CandidateSet {
  std::vector<SceneCaption> candidates;
  ArgumentPhrase argument;
};

struct AmbiguityOutcome {
  AmbiguityState state = AmbiguityState::NF;
  std::vector<SceneCaption> matched_candidates;
  /// Slots: attribute-1, attribute-2, attribute, object, #num.
  std::map<std::string, std::string> slot_values;
};

/// One kept caption and the lower-ranked captions it absorbed.
struct SuppressionGroup {
  std::size_t kept = 0;
  BoundingBox box;
  std::vector<std::size_t> merged;   // same object: attributes merged, box unioned
  std::vector<std::size_t> dropped;  // different object: discarded
};

/// Pairwise caption similarity f(c_i, c_j) by rank index.
using PairSimilarity = std::function<double(std::size_t, std::size_t)>;

/// Index-level suppression over captions in rank order, with their
/// relevance to the argument. Captions with relevance <= alpha are pruned;
/// then each unconsumed caption, in rank order, absorbs every later one
/// whose IoU with its (growing) box exceeds beta and whose similarity to it
/// exceeds alpha. Kept groups are merged further until no pair of groups
/// meets both cutoffs.
std::vector<SuppressionGroup> suppress_groups(std::span<const SceneCaption* const> ranked,
                                              std::span<const double> relevance,
                                              const Cutoffs& cutoffs,
                                              const PairSimilarity& similarity);

/// Builds the candidate captions (merged attributes, unioned boxes).
CandidateSet materialize(std::span<const SceneCaption* const> ranked,
                         const std::vector<SuppressionGroup>& groups,
                         const ArgumentPhrase& argument);

/// `ranked` must be sorted by relevance, descending, with relevance set.
CandidateSet suppress_redundancy(std::span<const SceneCaption> ranked,
                                 const ArgumentPhrase& argument, const Cutoffs& cutoffs,
                                 const EmbeddingTable& table, const ClassWeights& weights);

/// Decision procedure over object matches and attribute containment.
AmbiguityOutcome identify_state(const CandidateSet& candidates);

}  // namespace ttr
