#pragma once

// Metrics, state datasets, and the grid search over class weights and
// cutoffs.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttr/config.hpp"
#include "ttr/disambiguation.hpp"
#include "ttr/embeddings.hpp"
#include "ttr/pipeline.hpp"
#include "ttr/scene.hpp"

namespace ttr {

struct LabelScore {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold count
};

struct F1Report {
  /// `label_order` labels first, then any others in sorted order.
  std::vector<LabelScore> labels;
  /// Unweighted mean F1 over labels present in gold.
  double macro_f1 = 0.0;
  double accuracy = 0.0;

  const LabelScore* find(std::string_view label) const;
};

/// One-vs-rest precision, recall and F1 per label. Throws UsageError on a
/// length mismatch or empty input.
F1Report f1_report(std::span<const std::string> predictions, std::span<const std::string> gold,
                   std::span<const std::string> label_order = {});

/// Aligned plain-text table.
std::string format_f1_table(const F1Report& report, std::string_view title);

/// Prediction recorded when the instruction cannot be parsed.
inline constexpr std::string_view kParseErrorLabel = "ERR";

struct StateExample {
  std::filesystem::path scene_path;
  /// Generated examples carry their scene in memory.
  std::optional<Scene> scene;
  std::string instruction;
  AmbiguityState gold = AmbiguityState::NF;
  /// Gold semantic parse of the grounding argument, if annotated.
  std::optional<LabeledPhrase> annotated_argument;
};

struct StateDataset {
  std::vector<StateExample> examples;
};

/// Tab-separated lines: scene path, instruction, gold state, and an
/// optional annotation "tok/label tok/label ...". Relative scene paths are
/// resolved against `base_dir`. Blank lines and '#' comments are skipped.
StateDataset read_state_dataset(std::istream& in, const std::filesystem::path& base_dir,
                                std::string_view source = "dataset");
StateDataset load_state_dataset(const std::filesystem::path& path);
void write_state_dataset(std::ostream& out, const StateDataset& dataset);

std::string format_annotation(const LabeledPhrase& phrase);
LabeledPhrase parse_annotation(std::string_view text);

/// Where semantic labels come from when preparing examples.
enum class LabelSource { Tagger, Oracle };

/// An example reduced to what grounding needs.
struct PreparedExample {
  AmbiguityState gold = AmbiguityState::NF;
  bool parse_failed = false;
  ArgumentPhrase argument;
  Scene scene;
};

/// Loads the scene and produces the grounding argument and caption labels,
/// from the taggers or from the annotations. `models` may be null in
/// oracle mode.
PreparedExample prepare_example(const StateExample& example, const ModelBundle* models,
                                LabelSource source);
std::vector<PreparedExample> prepare_dataset(const StateDataset& dataset,
                                             const ModelBundle* models, LabelSource source);

/// Predicted state names (kParseErrorLabel for parse failures).
std::vector<std::string> predict_states(std::span<const PreparedExample> examples,
                                        const EmbeddingTable& table, const PipelineConfig& config);
std::vector<std::string> gold_states(std::span<const PreparedExample> examples);
/// The seven state names in table order.
std::vector<std::string> state_labels();

struct GridConfig {
  std::array<std::vector<double>, kNumSemanticClasses> weight_grid;
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;

  /// step, 2*step, ... strictly inside (0, 1) on every axis.
  static GridConfig uniform(double step = 0.1);
  /// Throws UsageError on an empty axis or a value outside (0, 1).
  void validate() const;
  std::size_t size() const;
};

struct TuningResult {
  PipelineConfig config;
  double accuracy = 0.0;
  std::size_t points = 0;
};

/// Exhaustive search in lexicographic order (object, attribute,
/// spatial_landmark, other, alpha, beta); the first point with the highest
/// state accuracy wins. Throws UsageError on an empty validation set.
TuningResult grid_search(std::span<const PreparedExample> validation, const EmbeddingTable& table,
                         const GridConfig& grid);

namespace detail {

/// A candidate reduced to whether its object matches the argument and its
/// attribute set as a bitmask.
struct CandidateBits {
  bool object_match = false;
  std::uint64_t attributes = 0;
};

/// State decision over attribute bitmasks, equivalent to identify_state.
AmbiguityState decide_state(std::span<const CandidateBits> candidates, bool argument_has_object,
                            std::uint64_t argument_mask);

}  // namespace detail

}  // namespace ttr
