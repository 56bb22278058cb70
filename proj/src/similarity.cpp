#include "ttr/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "ttr/error.hpp"
#include "ttr/kernels.hpp"

namespace ttr {

PhraseVector encode_phrase(std::span<const TokenRow> tokens,
                           std::span<const SemanticClass> labels, const EmbeddingTable& table,
                           const ClassWeights& weights) {
  if (tokens.size() != labels.size()) throw UsageError("encode_phrase: tokens/labels mismatch");
  PhraseVector out = PhraseVector::zero(table.dimension());
  std::vector<std::span<const float>> vectors;
  std::vector<double> raw;
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double w = weights[labels[i]];
    if (w <= 0.0) continue;
    auto v = table.lookup(tokens[i].surface);
    if (!v) continue;
    vectors.push_back(*v);
    raw.push_back(w);
    total += w;
  }
  if (vectors.empty()) return out;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    kernels::axpy(static_cast<float>(raw[i] / total), vectors[i], out.components);
  }
  out.coverage = vectors.size();
  return out;
}

double relevance(const ArgumentPhrase& argument, const SceneCaption& caption,
                 const EmbeddingTable& table, const ClassWeights& weights) {
  return cosine(encode_phrase(argument, table, weights), encode_phrase(caption, table, weights));
}

std::vector<SceneCaption> rank_captions(const ArgumentPhrase& argument, const Scene& scene,
                                        const EmbeddingTable& table, const ClassWeights& weights) {
  const PhraseVector arg = encode_phrase(argument, table, weights);
  std::vector<SceneCaption> ranked = scene.captions;
  for (auto& c : ranked) c.relevance = cosine(arg, encode_phrase(c, table, weights));
  std::stable_sort(ranked.begin(), ranked.end(), [](const SceneCaption& a, const SceneCaption& b) {
    return *a.relevance > *b.relevance;
  });
  return ranked;
}

ClassSums decompose(const LabeledPhrase& phrase, const EmbeddingTable& table) {
  ClassSums out;
  for (auto& s : out.sums) s.assign(table.dimension(), 0.0f);
  for (std::size_t i = 0; i < phrase.tokens.size(); ++i) {
    auto v = table.lookup(phrase.tokens[i].surface);
    if (!v) continue;
    kernels::axpy(1.0f, *v, out.sums[static_cast<std::size_t>(phrase.semantic_labels[i])]);
  }
  return out;
}

ClassGram class_gram(const ClassSums& a, const ClassSums& b) {
  ClassGram g{};
  for (std::size_t c = 0; c < kNumSemanticClasses; ++c) {
    for (std::size_t d = 0; d < kNumSemanticClasses; ++d) {
      g[c * kNumSemanticClasses + d] = kernels::dot(a.sums[c], b.sums[d]);
    }
  }
  return g;
}

double weighted_cosine(const ClassGram& ab, const ClassGram& aa, const ClassGram& bb,
                       const ClassWeights& weights) {
  double num = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t c = 0; c < kNumSemanticClasses; ++c) {
    for (std::size_t d = 0; d < kNumSemanticClasses; ++d) {
      const double w = weights.values[c] * weights.values[d];
      num += w * ab[c * kNumSemanticClasses + d];
      na += w * aa[c * kNumSemanticClasses + d];
      nb += w * bb[c * kNumSemanticClasses + d];
    }
  }
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::clamp(num / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace ttr
