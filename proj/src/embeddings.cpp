#include "ttr/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>

#include "ttr/error.hpp"
#include "ttr/kernels.hpp"
#include "ttr/text.hpp"

namespace ttr {

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw UsageError("embedding dimension must be positive");
}

bool EmbeddingTable::insert(std::string_view token, std::span<const float> vector) {
  if (vector.size() != dimension_) {
    throw UsageError("embedding for '" + std::string(token) + "' has " +
                     std::to_string(vector.size()) + " components, expected " +
                     std::to_string(dimension_));
  }
  auto key = to_lower(token);
  if (index_.contains(key)) return false;
  index_.emplace(std::move(key), data_.size() / dimension_);
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

std::optional<std::span<const float>> EmbeddingTable::lookup(std::string_view token) const {
  auto it = index_.find(to_lower(token));
  if (it == index_.end()) return std::nullopt;
  return std::span<const float>(data_.data() + it->second * dimension_, dimension_);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t expected_dim) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read embeddings file '" + path.string() + "'");
  EmbeddingTable table(expected_dim);
  std::string line;
  std::vector<float> values;
  while (std::getline(in, line)) {
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    values.clear();
    bool ok = fields.size() == expected_dim + 1;
    for (std::size_t i = 1; ok && i < fields.size(); ++i) {
      float v = 0.0f;
      const auto& f = fields[i];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      ok = ec == std::errc() && ptr == f.data() + f.size() && std::isfinite(v);
      values.push_back(v);
    }
    if (!ok) {
      ++table.skipped_;
      continue;
    }
    table.insert(fields[0], values);
  }
  if (table.skipped_ > 0) {
    std::cerr << "warning: skipped " << table.skipped_ << " malformed line(s) in "
              << path.string() << "\n";
  }
  return table;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  const double na = kernels::squared_norm(a);
  const double nb = kernels::squared_norm(b);
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  const double c = kernels::dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace ttr
