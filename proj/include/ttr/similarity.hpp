#pragma once

// Class-weighted convex combination of token embeddings and the cosine
// relevance between an argument phrase and a caption.

#include <array>
#include <span>
#include <vector>

#include "ttr/config.hpp"
#include "ttr/embeddings.hpp"
#include "ttr/instruction.hpp"
#include "ttr/scene.hpp"

namespace ttr {

/// sum_i lambda_i E(t_i) with lambda_i = weights[label_i] renormalized over
/// tokens that have an embedding and a nonzero class weight.
PhraseVector encode_phrase(std::span<const TokenRow> tokens,
                           std::span<const SemanticClass> labels, const EmbeddingTable& table,
                           const ClassWeights& weights);
inline PhraseVector encode_phrase(const LabeledPhrase& phrase, const EmbeddingTable& table,
                                  const ClassWeights& weights) {
  return encode_phrase(phrase.tokens, phrase.semantic_labels, table, weights);
}

/// f(A, c): cosine of the two composed vectors.
double relevance(const ArgumentPhrase& argument, const SceneCaption& caption,
                 const EmbeddingTable& table, const ClassWeights& weights);

/// Captions sorted by relevance, descending; ties keep scene order.
std::vector<SceneCaption> rank_captions(const ArgumentPhrase& argument, const Scene& scene,
                                        const EmbeddingTable& table, const ClassWeights& weights);

/// Unweighted per-class embedding sums of one phrase. Because the composed
/// vector is proportional to sum_c w_c * sums[c], cosines for any weight
/// setting follow from the 4x4 Gram matrices of these sums.
struct ClassSums {
  std::array<std::vector<float>, kNumSemanticClasses> sums;
};

using ClassGram = std::array<double, kNumSemanticClasses * kNumSemanticClasses>;

ClassSums decompose(const LabeledPhrase& phrase, const EmbeddingTable& table);
/// gram[c * 4 + d] = sums_a[c] . sums_b[d]
ClassGram class_gram(const ClassSums& a, const ClassSums& b);
/// Cosine of the weighted compositions, from precomputed Gram matrices.
double weighted_cosine(const ClassGram& ab, const ClassGram& aa, const ClassGram& bb,
                       const ClassWeights& weights);

}  // namespace ttr
