#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ttr {

/// One token plus the optional pre-annotated columns the CRF can consume.
struct TokenRow {
  std::string surface;
  std::optional<std::string> lemma;
  std::optional<std::string> pos;
  std::optional<std::string> dep;

  TokenRow() = default;
  explicit TokenRow(std::string s) : surface(std::move(s)) {}
};

/// Semantic classes used to weight embeddings and compare phrases.
enum class SemanticClass { Object = 0, Attribute = 1, SpatialLandmark = 2, Other = 3 };

inline constexpr std::size_t kNumSemanticClasses = 4;
inline constexpr std::array<SemanticClass, kNumSemanticClasses> kSemanticClasses = {
    SemanticClass::Object, SemanticClass::Attribute, SemanticClass::SpatialLandmark,
    SemanticClass::Other};

std::string_view to_string(SemanticClass c);
std::optional<SemanticClass> semantic_class_from_string(std::string_view s);
/// Label alphabet of the semantic CRF, in tie-break order.
std::vector<std::string> semantic_label_alphabet();

std::string to_lower(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> split_whitespace(std::string_view s);
std::string_view trim(std::string_view s);

/// Splits on whitespace and punctuation; punctuation is dropped, case is kept.
/// Apostrophes and hyphens inside a word stay with the word ("don't").
std::vector<TokenRow> tokenize(std::string_view text);

std::vector<std::string> surfaces(const std::vector<TokenRow>& rows);

/// A token sequence with semantic-class labels and the derived entity lists.
struct LabeledPhrase {
  std::vector<TokenRow> tokens;
  std::vector<SemanticClass> semantic_labels;
  std::vector<std::string> object_tokens;
  std::vector<std::string> attribute_tokens;
  std::vector<std::string> landmark_tokens;

  /// Recomputes the derived lists (lowercased) from tokens and labels.
  void derive_entities();
  /// Object tokens joined by a single space, used for object matching.
  std::string object_key() const { return join(object_tokens, " "); }
  std::string text() const;
};

LabeledPhrase make_labeled_phrase(std::vector<TokenRow> tokens,
                                  std::vector<SemanticClass> labels);

}  // namespace ttr
