#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>

#include "ttr/text.hpp"

namespace ttr {

/// Per-semantic-class interpolation weights for phrase composition.
struct ClassWeights {
  std::array<double, kNumSemanticClasses> values{0.7, 0.2, 0.05, 0.05};

  double operator[](SemanticClass c) const { return values[static_cast<std::size_t>(c)]; }
  double& operator[](SemanticClass c) { return values[static_cast<std::size_t>(c)]; }
  /// Throws UsageError unless all weights are finite, >= 0, and one is > 0.
  void validate() const;
};

/// Semantic-similarity (alpha) and IoU (beta) cutoffs, both in (0, 1).
struct Cutoffs {
  double alpha = 0.5;
  double beta = 0.5;

  void validate() const;
};

struct PipelineConfig {
  ClassWeights weights;
  Cutoffs cutoffs;
};

/// key=value lines: object, attribute, spatial_landmark, other, alpha, beta.
PipelineConfig read_pipeline_config(std::istream& in, std::string_view source = "config");
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
void write_pipeline_config(std::ostream& out, const PipelineConfig& config);
void save_pipeline_config(const std::filesystem::path& path, const PipelineConfig& config);

}  // namespace ttr
