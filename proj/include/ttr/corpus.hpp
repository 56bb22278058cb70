#pragma once

// Seeded template expansion of small object/attribute/landmark lexicons
// into labeled descriptions, labeled instructions, scenes with gold
// ambiguity states, and clustered word vectors covering the vocabulary.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ttr/crf.hpp"
#include "ttr/embeddings.hpp"
#include "ttr/eval.hpp"

namespace ttr {

struct InstructionCorpus {
  /// Same token sequences, labeled with task types and with argument roles.
  std::vector<crf::LabeledSequence> task;
  std::vector<crf::LabeledSequence> argument;
};

struct SyntheticCorpus {
  std::vector<crf::LabeledSequence> semantic;
  InstructionCorpus instructions;
  StateDataset states;
};

/// Captions and argument phrases labeled with semantic classes.
std::vector<crf::LabeledSequence> generate_semantic_corpus(std::uint64_t seed, std::size_t size);
InstructionCorpus generate_instruction_corpus(std::uint64_t seed, std::size_t size);
/// `size` examples cycling through the seven states, so counts per state
/// differ by at most one. Scenes are held in memory.
StateDataset generate_state_dataset(std::uint64_t seed, std::size_t size);

inline constexpr std::size_t kDefaultSemanticSequences = 500;
inline constexpr std::size_t kDefaultInstructionSequences = 600;

/// A state dataset of `size` examples plus default-sized tagger corpora.
SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, std::size_t size);

/// Every token the generators can emit.
std::vector<std::string> synthetic_vocabulary();

using WordVectors = std::vector<std::pair<std::string, std::vector<float>>>;

/// Clustered vectors: colours, materials, objects, furniture, places and
/// function words each share a centroid; near-synonyms are close.
WordVectors synthetic_word_vectors(std::uint64_t seed, std::size_t dimension);
EmbeddingTable make_table(const WordVectors& vectors, std::size_t dimension);
void write_word_vectors(std::ostream& out, const WordVectors& vectors);

/// Writes semantic.tsv, task.tsv, argument.tsv, states.tsv and
/// scenes/NNNN.json under `dir`, pointing the dataset at the scene files.
void write_corpus(const std::filesystem::path& dir, SyntheticCorpus& corpus);

}  // namespace ttr
