#include "ttr/disambiguation.hpp"

#include <algorithm>
#include <set>

#include "ttr/similarity.hpp"

namespace ttr {

namespace {

constexpr std::array<std::string_view, 7> kStateNames = {"NQ", "AA", "IMA", "AM",
                                                         "ANF", "AOA", "NF"};

using AttributeSet = std::set<std::string>;

AttributeSet attribute_set(const LabeledPhrase& p) {
  return AttributeSet(p.attribute_tokens.begin(), p.attribute_tokens.end());
}

bool contains_all(const AttributeSet& big, const AttributeSet& small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

bool shares_object(const SceneCaption& kept, const SceneCaption& other) {
  for (const auto& t : kept.object_tokens) {
    if (std::find(other.object_tokens.begin(), other.object_tokens.end(), t) !=
        other.object_tokens.end()) {
      return true;
    }
  }
  return false;
}

void absorb(SuppressionGroup& into, const SuppressionGroup& other,
            std::span<const SceneCaption* const> ranked) {
  if (shares_object(*ranked[into.kept], *ranked[other.kept])) {
    into.box = box_union(into.box, other.box);
    into.merged.push_back(other.kept);
    into.merged.insert(into.merged.end(), other.merged.begin(), other.merged.end());
  } else {
    into.dropped.push_back(other.kept);
    into.dropped.insert(into.dropped.end(), other.merged.begin(), other.merged.end());
  }
  into.dropped.insert(into.dropped.end(), other.dropped.begin(), other.dropped.end());
}

std::string attribute_text(const SceneCaption& c) { return join(c.attribute_tokens, " "); }

}  // namespace

std::string_view to_string(AmbiguityState s) { return kStateNames[static_cast<std::size_t>(s)]; }

std::optional<AmbiguityState> ambiguity_state_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kStateNames.size(); ++i) {
    if (kStateNames[i] == s) return static_cast<AmbiguityState>(i);
  }
  return std::nullopt;
}

std::vector<SuppressionGroup> suppress_groups(std::span<const SceneCaption* const> ranked,
                                              std::span<const double> relevance,
                                              const Cutoffs& cutoffs,
                                              const PairSimilarity& similarity) {
  std::vector<std::size_t> relevant;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (relevance[i] > cutoffs.alpha) relevant.push_back(i);
  }

  std::vector<SuppressionGroup> groups;
  std::vector<bool> consumed(ranked.size(), false);
  for (std::size_t a = 0; a < relevant.size(); ++a) {
    const std::size_t i = relevant[a];
    if (consumed[i]) continue;
    SuppressionGroup g;
    g.kept = i;
    g.box = ranked[i]->box;
    for (std::size_t b = a + 1; b < relevant.size(); ++b) {
      const std::size_t j = relevant[b];
      if (consumed[j]) continue;
      if (iou(g.box, ranked[j]->box) > cutoffs.beta && similarity(i, j) > cutoffs.alpha) {
        consumed[j] = true;
        absorb(g, SuppressionGroup{j, ranked[j]->box, {}, {}}, ranked);
      }
    }
    groups.push_back(std::move(g));
  }

  // Unioned boxes can grow into later kept groups; merge to a fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < groups.size() && !changed; ++a) {
      for (std::size_t b = a + 1; b < groups.size(); ++b) {
        if (iou(groups[a].box, groups[b].box) > cutoffs.beta &&
            similarity(groups[a].kept, groups[b].kept) > cutoffs.alpha) {
          absorb(groups[a], groups[b], ranked);
          groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(b));
          changed = true;
          break;
        }
      }
    }
  }
  return groups;
}

CandidateSet materialize(std::span<const SceneCaption* const> ranked,
                         const std::vector<SuppressionGroup>& groups,
                         const ArgumentPhrase& argument) {
  CandidateSet out;
  out.argument = argument;
  for (const auto& g : groups) {
    SceneCaption c = *ranked[g.kept];
    c.box = g.box;
    for (std::size_t m : g.merged) {
      for (const auto& attr : ranked[m]->attribute_tokens) {
        if (std::find(c.attribute_tokens.begin(), c.attribute_tokens.end(), attr) ==
            c.attribute_tokens.end()) {
          c.attribute_tokens.push_back(attr);
        }
      }
    }
    out.candidates.push_back(std::move(c));
  }
  return out;
}

CandidateSet suppress_redundancy(std::span<const SceneCaption> ranked,
                                 const ArgumentPhrase& argument, const Cutoffs& cutoffs,
                                 const EmbeddingTable& table, const ClassWeights& weights) {
  std::vector<const SceneCaption*> order;
  std::vector<double> relevance;
  for (const auto& c : ranked) {
    order.push_back(&c);
    relevance.push_back(c.relevance.value_or(0.0));
  }
  std::vector<std::optional<PhraseVector>> cache(ranked.size());
  auto vec = [&](std::size_t i) -> const PhraseVector& {
    if (!cache[i]) cache[i] = encode_phrase(ranked[i], table, weights);
    return *cache[i];
  };
  auto groups = suppress_groups(order, relevance, cutoffs, [&](std::size_t i, std::size_t j) {
    return cosine(vec(i), vec(j));
  });
  return materialize(order, groups, argument);
}

AmbiguityOutcome identify_state(const CandidateSet& set) {
  const ArgumentPhrase& arg = set.argument;
  const std::string object = arg.object_key();
  const AttributeSet arg_attrs = attribute_set(arg);
  const std::string arg_attr_text = join(arg.attribute_tokens, " ");

  std::vector<const SceneCaption*> matched;
  if (!object.empty()) {
    for (const auto& c : set.candidates) {
      if (c.object_key() == object) matched.push_back(&c);
    }
  }

  AmbiguityOutcome out;
  out.slot_values["object"] = object;
  auto finish = [&](AmbiguityState s, const std::vector<const SceneCaption*>& chosen) {
    out.state = s;
    for (const auto* c : chosen) out.matched_candidates.push_back(*c);
    return out;
  };

  if (matched.empty()) {
    out.slot_values["attribute"] = arg_attr_text;
    return finish(AmbiguityState::NF, {});
  }

  if (matched.size() == 1) {
    const SceneCaption& c = *matched.front();
    const AttributeSet cand = attribute_set(c);
    if (arg_attrs.empty()) {
      out.slot_values["attribute"] = attribute_text(c);
      return finish(cand.empty() ? AmbiguityState::NQ : AmbiguityState::IMA, matched);
    }
    if (cand.empty()) {
      out.slot_values["attribute"] = arg_attr_text;
      return finish(AmbiguityState::ANF, matched);
    }
    out.slot_values["attribute"] = attribute_text(c);
    return finish(contains_all(cand, arg_attrs) ? AmbiguityState::NQ : AmbiguityState::AM,
                  matched);
  }

  // Distinct nonempty attribute sets among the matches, in rank order.
  std::vector<const SceneCaption*> distinct;
  std::vector<AttributeSet> seen;
  for (const auto* c : matched) {
    auto s = attribute_set(*c);
    if (s.empty() || std::find(seen.begin(), seen.end(), s) != seen.end()) continue;
    seen.push_back(std::move(s));
    distinct.push_back(c);
  }
  auto ambiguous_attribute = [&] {
    out.slot_values["attribute-1"] = attribute_text(*distinct[0]);
    out.slot_values["attribute-2"] = attribute_text(*distinct[1]);
    return finish(AmbiguityState::AA, matched);
  };
  auto ambiguous_object = [&](const std::vector<const SceneCaption*>& group) {
    out.slot_values["#num"] = std::to_string(group.size());
    out.slot_values["attribute"] = arg_attr_text;
    return finish(AmbiguityState::AOA, group);
  };

  if (arg_attrs.empty()) {
    return distinct.size() >= 2 ? ambiguous_attribute() : ambiguous_object(matched);
  }

  std::vector<const SceneCaption*> satisfying;
  for (const auto* c : matched) {
    if (contains_all(attribute_set(*c), arg_attrs)) satisfying.push_back(c);
  }
  if (satisfying.size() == 1) {
    out.slot_values["attribute"] = attribute_text(*satisfying.front());
    return finish(AmbiguityState::NQ, satisfying);
  }
  if (satisfying.size() >= 2) return ambiguous_object(satisfying);
  return distinct.size() >= 2 ? ambiguous_attribute() : ambiguous_object(matched);
}

}  // namespace ttr
