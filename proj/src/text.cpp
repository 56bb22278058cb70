#include "ttr/text.hpp"

#include <algorithm>
#include <cctype>

#include "ttr/error.hpp"

namespace ttr {

namespace {

bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c == '\'' || c == '-' || c == '_' || c >= 0x80;
}

bool has_alnum(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
  });
}

}  // namespace

std::string_view to_string(SemanticClass c) {
  switch (c) {
    case SemanticClass::Object:
      return "object";
    case SemanticClass::Attribute:
      return "attribute";
    case SemanticClass::SpatialLandmark:
      return "spatial_landmark";
    case SemanticClass::Other:
      return "other";
  }
  return "other";
}

std::optional<SemanticClass> semantic_class_from_string(std::string_view s) {
  for (auto c : kSemanticClasses) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::vector<std::string> semantic_label_alphabet() {
  std::vector<std::string> out;
  for (auto c : kSemanticClasses) out.emplace_back(to_string(c));
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<TokenRow> tokenize(std::string_view text) {
  std::vector<TokenRow> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_char(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
    std::string_view word = text.substr(i, j - i);
    while (!word.empty() && (word.front() == '\'' || word.front() == '-')) word.remove_prefix(1);
    while (!word.empty() && (word.back() == '\'' || word.back() == '-')) word.remove_suffix(1);
    if (!word.empty() && has_alnum(word)) out.emplace_back(std::string(word));
    i = j;
  }
  return out;
}

std::vector<std::string> surfaces(const std::vector<TokenRow>& rows) {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.surface);
  return out;
}

void LabeledPhrase::derive_entities() {
  if (tokens.size() != semantic_labels.size()) {
    throw UsageError("phrase has " + std::to_string(tokens.size()) + " tokens but " +
                     std::to_string(semantic_labels.size()) + " labels");
  }
  object_tokens.clear();
  attribute_tokens.clear();
  landmark_tokens.clear();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto word = to_lower(tokens[i].surface);
    switch (semantic_labels[i]) {
      case SemanticClass::Object:
        object_tokens.push_back(std::move(word));
        break;
      case SemanticClass::Attribute:
        attribute_tokens.push_back(std::move(word));
        break;
      case SemanticClass::SpatialLandmark:
        landmark_tokens.push_back(std::move(word));
        break;
      case SemanticClass::Other:
        break;
    }
  }
}

std::string LabeledPhrase::text() const { return join(surfaces(tokens), " "); }

LabeledPhrase make_labeled_phrase(std::vector<TokenRow> tokens,
                                  std::vector<SemanticClass> labels) {
  LabeledPhrase p;
  p.tokens = std::move(tokens);
  p.semantic_labels = std::move(labels);
  p.derive_entities();
  return p;
}

}  // namespace ttr
