#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ttr {

/// Word vectors of a fixed dimension, keyed by lowercased token.
/// Immutable once loaded; concurrent reads are safe.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return index_.size(); }
  /// Lines rejected during load because their width did not match.
  std::size_t skipped_lines() const { return skipped_; }

  /// Inserts a vector unless the token is already present (first wins).
  /// Returns false for a duplicate; throws UsageError on a width mismatch.
  bool insert(std::string_view token, std::span<const float> vector);
  std::optional<std::span<const float>> lookup(std::string_view token) const;
  bool contains(std::string_view token) const { return lookup(token).has_value(); }

 private:
  friend EmbeddingTable load_embeddings(const std::filesystem::path&, std::size_t);

  std::size_t dimension_;
  std::size_t skipped_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
};

/// Reads the GloVe text format (token then `dimension` reals per line).
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim);

/// A composed phrase vector and how many of its tokens had embeddings.
struct PhraseVector {
  std::vector<float> components;
  std::size_t coverage = 0;

  static PhraseVector zero(std::size_t dimension) {
    return PhraseVector{std::vector<float>(dimension, 0.0f), 0};
  }
};

/// dot(a,b) / (|a| |b|), or 0 when either norm is zero. Clamped to [-1, 1].
double cosine(std::span<const float> a, std::span<const float> b);
inline double cosine(const PhraseVector& a, const PhraseVector& b) {
  return cosine(a.components, b.components);
}

}  // namespace ttr
