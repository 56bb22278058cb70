#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <unistd.h>

#include "ttr/corpus.hpp"
#include "ttr/pipeline.hpp"

namespace ttr::testing {

namespace fs = std::filesystem;

inline fs::path fixture(std::string_view name) { return fs::path(TTR_FIXTURE_DIR) / name; }

/// Fresh per-process scratch directory.
inline fs::path scratch_dir(std::string_view tag) {
  fs::path p = fs::temp_directory_path() /
               ("ttr-" + std::string(tag) + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

inline constexpr std::size_t kDim = 50;

/// Taggers trained on the default synthetic corpus plus matching vectors.
struct World {
  ModelBundle models;
  EmbeddingTable table;
};

inline const World& world() {
  static const World w = [] {
    const SyntheticCorpus c = generate_synthetic_corpus(1, 7);
    return World{train_models(c.instructions.task, c.instructions.argument, c.semantic),
                 make_table(synthetic_word_vectors(1, kDim), kDim)};
  }();
  return w;
}

inline LabeledPhrase phrase(std::string_view annotated) { return parse_annotation(annotated); }

}  // namespace ttr::testing
