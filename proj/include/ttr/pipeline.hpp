#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ttr/config.hpp"
#include "ttr/crf.hpp"
#include "ttr/disambiguation.hpp"
#include "ttr/embeddings.hpp"
#include "ttr/instruction.hpp"
#include "ttr/scene.hpp"

namespace ttr {

/// The three taggers, stored as task.crf / argument.crf / semantic.crf.
struct ModelBundle {
  crf::CrfModel task;
  crf::CrfModel argument;
  crf::CrfModel semantic;

  static ModelBundle load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;
  InstructionModels view() const { return {task, argument, semantic}; }
};

/// Trains the three taggers with their fixed label alphabets.
ModelBundle train_models(std::span<const crf::LabeledSequence> task,
                         std::span<const crf::LabeledSequence> argument,
                         std::span<const crf::LabeledSequence> semantic,
                         const crf::TrainConfig& config = {});

struct GroundingResult {
  std::vector<SceneCaption> ranked;
  CandidateSet candidates;
  AmbiguityOutcome outcome;
};

/// rank -> suppress -> identify for one argument over a parsed scene.
GroundingResult ground_argument(const ArgumentPhrase& argument, const Scene& scene,
                                const EmbeddingTable& table, const PipelineConfig& config);

}  // namespace ttr
