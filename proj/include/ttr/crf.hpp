#pragma once

// Linear-chain CRF: feature extraction, L2-regularized maximum-likelihood
// training with forward-backward expectations, and Viterbi decoding. The
// same engine backs the task-type, argument-role and semantic-class taggers.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ttr/text.hpp"

namespace ttr::crf {

struct LabeledSequence {
  std::vector<TokenRow> rows;
  std::vector<std::string> labels;
};

/// Feature strings for one position: lowercased word, 1-3 char affixes,
/// shape flags, a +/-2 word window with <BOS>/<EOS> sentinels, and the
/// lemma/pos/dep columns of the token and its neighbours when present.
std::vector<std::string> extract_features(std::span<const TokenRow> rows, std::size_t position);

class CrfModel {
 public:
  explicit CrfModel(std::vector<std::string> label_alphabet);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t num_labels() const { return labels_.size(); }
  std::optional<std::size_t> label_index(std::string_view label) const;

  std::size_t num_features() const { return features_.size(); }
  std::optional<std::size_t> feature_index(std::string_view feature) const;
  const std::string& feature_name(std::size_t index) const { return features_[index]; }
  /// Adds the feature with zero weights if it is new; returns its index.
  std::size_t intern_feature(std::string_view feature);

  double feature_weight(std::string_view feature, std::string_view label) const;
  void set_feature_weight(std::string_view feature, std::string_view label, double weight);
  double transition_weight(std::string_view prev, std::string_view cur) const;
  void set_transition_weight(std::string_view prev, std::string_view cur, double weight);

  /// Row-major [feature][label] weights.
  std::span<double> feature_weights() { return feature_weights_; }
  std::span<const double> feature_weights() const { return feature_weights_; }
  /// Row-major [prev][cur] weights.
  std::span<double> transition_weights() { return transition_weights_; }
  std::span<const double> transition_weights() const { return transition_weights_; }

  /// Unnormalized log-score of a label sequence (sum of active weights).
  double score(std::span<const TokenRow> rows, std::span<const std::string> labels) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static CrfModel load(std::istream& in);
  static CrfModel load(const std::filesystem::path& path);

 private:
  std::size_t require_label(std::string_view label) const;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> label_index_;
  std::vector<std::string> features_;
  std::unordered_map<std::string, std::size_t> feature_index_;
  std::vector<double> feature_weights_;
  std::vector<double> transition_weights_;
};

/// Argmax label sequence; ties go to the earlier label in the alphabet.
std::vector<std::string> viterbi(const CrfModel& model, std::span<const TokenRow> rows);

struct TrainConfig {
  double l2 = 1e-3;
  int epochs = 30;
  double learning_rate = 0.5;
  std::uint64_t seed = 1;
  std::size_t batch_size = 8;
  /// Fixed label alphabet; when empty, labels are taken in order of first
  /// appearance in the data.
  std::vector<std::string> labels;
};

struct TrainLog {
  /// objective[0] is the initial value, objective[k] the value after epoch k.
  std::vector<double> objective;
  /// Number of epochs whose step size had to be halved to avoid a decrease.
  int backtracks = 0;
};

/// Mini-batch gradient ascent on the mean conditional log-likelihood minus
/// (l2/2)|w|^2. An epoch that would lower the full-data objective is
/// retried from its starting point with half the step size, so the logged
/// objective never decreases. Deterministic for a given seed.
CrfModel train(std::span<const LabeledSequence> data, const TrainConfig& config,
               TrainLog* log = nullptr);

/// A model with every feature seen in `data` interned and all weights zero.
CrfModel make_untrained_model(std::span<const LabeledSequence> data,
                              std::vector<std::string> labels = {});

struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> feature_gradient;     // same layout as feature_weights()
  std::vector<double> transition_gradient;  // same layout as transition_weights()
};

/// Mean log-likelihood minus the L2 penalty, with its exact gradient.
ObjectiveValue objective(const CrfModel& model, std::span<const LabeledSequence> data, double l2);

/// Tab-separated sequences: `surface[\tlemma\tpos\tdep]\tlabel` per token,
/// blank line between sequences, `_` for an absent optional column.
std::vector<LabeledSequence> read_sequences(std::istream& in, std::string_view source = "input");
std::vector<LabeledSequence> read_sequences(const std::filesystem::path& path);
void write_sequences(std::ostream& out, std::span<const LabeledSequence> data);

}  // namespace ttr::crf
