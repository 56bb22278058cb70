#include "ttr/pipeline.hpp"

#include "ttr/similarity.hpp"

namespace ttr {

ModelBundle ModelBundle::load(const std::filesystem::path& dir) {
  return ModelBundle{crf::CrfModel::load(dir / "task.crf"), crf::CrfModel::load(dir / "argument.crf"),
                     crf::CrfModel::load(dir / "semantic.crf")};
}

void ModelBundle::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  task.save(dir / "task.crf");
  argument.save(dir / "argument.crf");
  semantic.save(dir / "semantic.crf");
}

ModelBundle train_models(std::span<const crf::LabeledSequence> task,
                         std::span<const crf::LabeledSequence> argument,
                         std::span<const crf::LabeledSequence> semantic,
                         const crf::TrainConfig& config) {
  auto with = [&](std::vector<std::string> labels) {
    crf::TrainConfig c = config;
    c.labels = std::move(labels);
    return c;
  };
  return ModelBundle{crf::train(task, with(task_label_alphabet())),
                     crf::train(argument, with(role_label_alphabet())),
                     crf::train(semantic, with(semantic_label_alphabet()))};
}

GroundingResult ground_argument(const ArgumentPhrase& argument, const Scene& scene,
                                const EmbeddingTable& table, const PipelineConfig& config) {
  GroundingResult r;
  r.ranked = rank_captions(argument, scene, table, config.weights);
  r.candidates = suppress_redundancy(r.ranked, argument, config.cutoffs, table, config.weights);
  r.outcome = identify_state(r.candidates);
  return r;
}

}  // namespace ttr
