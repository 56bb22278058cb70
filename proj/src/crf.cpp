#include "ttr/crf.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "ttr/error.hpp"

namespace ttr::crf {

namespace {

constexpr std::string_view kModelMagic = "ttr-crf";
constexpr int kModelVersion = 1;

std::string word_at(std::span<const TokenRow> rows, std::ptrdiff_t i) {
  if (i < 0) return "<BOS>";
  if (i >= static_cast<std::ptrdiff_t>(rows.size())) return "<EOS>";
  return to_lower(rows[static_cast<std::size_t>(i)].surface);
}

void add_column_features(std::vector<std::string>& out, std::span<const TokenRow> rows,
                         std::size_t position, std::string_view name,
                         const std::optional<std::string> TokenRow::*column) {
  const auto& self = rows[position].*column;
  if (self) out.push_back(std::string(name) + "=" + *self);
  if (position > 0) {
    if (const auto& prev = rows[position - 1].*column) {
      out.push_back(std::string(name) + "-1=" + *prev);
    }
  }
  if (position + 1 < rows.size()) {
    if (const auto& next = rows[position + 1].*column) {
      out.push_back(std::string(name) + "+1=" + *next);
    }
  }
}

double log_sum_exp(const double* v, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

// A sequence with features resolved to model indices.
struct Compiled {
  std::vector<std::vector<std::size_t>> features;
  std::vector<std::size_t> labels;
};

Compiled compile(const CrfModel& model, std::span<const TokenRow> rows) {
  Compiled c;
  c.features.resize(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (const auto& f : extract_features(rows, t)) {
      if (auto idx = model.feature_index(f)) c.features[t].push_back(*idx);
    }
  }
  return c;
}

Compiled compile_labeled(const CrfModel& model, const LabeledSequence& seq, std::size_t ordinal) {
  if (seq.rows.size() != seq.labels.size()) {
    throw InputError("sequence " + std::to_string(ordinal) + " has " +
                     std::to_string(seq.rows.size()) + " tokens but " +
                     std::to_string(seq.labels.size()) + " labels");
  }
  Compiled c = compile(model, seq.rows);
  c.labels.reserve(seq.labels.size());
  for (const auto& label : seq.labels) {
    auto idx = model.label_index(label);
    if (!idx) {
      throw InputError("sequence " + std::to_string(ordinal) + " (\"" +
                       join(surfaces(seq.rows), " ") + "\") has unknown label '" + label + "'");
    }
    c.labels.push_back(*idx);
  }
  return c;
}

std::vector<double> emissions(const CrfModel& model, const Compiled& c) {
  const std::size_t L = model.num_labels();
  const auto w = model.feature_weights();
  std::vector<double> e(c.features.size() * L, 0.0);
  for (std::size_t t = 0; t < c.features.size(); ++t) {
    double* row = e.data() + t * L;
    for (std::size_t f : c.features[t]) {
      const double* wf = w.data() + f * L;
      for (std::size_t y = 0; y < L; ++y) row[y] += wf[y];
    }
  }
  return e;
}

// Forward pass; returns log Z and fills alpha ([t][y], log-space).
double forward(const CrfModel& model, const std::vector<double>& e, std::size_t T,
               std::vector<double>& alpha) {
  const std::size_t L = model.num_labels();
  const auto trans = model.transition_weights();
  alpha.assign(T * L, 0.0);
  std::vector<double> tmp(L);
  for (std::size_t y = 0; y < L; ++y) alpha[y] = e[y];
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t p = 0; p < L; ++p) tmp[p] = alpha[(t - 1) * L + p] + trans[p * L + y];
      alpha[t * L + y] = e[t * L + y] + log_sum_exp(tmp.data(), L);
    }
  }
  return log_sum_exp(alpha.data() + (T - 1) * L, L);
}

void backward(const CrfModel& model, const std::vector<double>& e, std::size_t T,
              std::vector<double>& beta) {
  const std::size_t L = model.num_labels();
  const auto trans = model.transition_weights();
  beta.assign(T * L, 0.0);
  std::vector<double> tmp(L);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t y = 0; y < L; ++y) {
      for (std::size_t n = 0; n < L; ++n) {
        tmp[n] = trans[y * L + n] + e[(t + 1) * L + n] + beta[(t + 1) * L + n];
      }
      beta[t * L + y] = log_sum_exp(tmp.data(), L);
    }
  }
}

double gold_score(const CrfModel& model, const std::vector<double>& e, const Compiled& c) {
  const std::size_t L = model.num_labels();
  const auto trans = model.transition_weights();
  double s = 0.0;
  for (std::size_t t = 0; t < c.labels.size(); ++t) {
    s += e[t * L + c.labels[t]];
    if (t > 0) s += trans[c.labels[t - 1] * L + c.labels[t]];
  }
  return s;
}

double log_likelihood(const CrfModel& model, const Compiled& c) {
  if (c.labels.empty()) return 0.0;
  auto e = emissions(model, c);
  std::vector<double> alpha;
  const double log_z = forward(model, e, c.labels.size(), alpha);
  return gold_score(model, e, c) - log_z;
}

// Adds scale * d(log p(y|x))/dw into the gradient arrays; returns log p.
double accumulate_gradient(const CrfModel& model, const Compiled& c, double scale,
                           std::vector<double>& grad_f, std::vector<double>& grad_t) {
  const std::size_t T = c.labels.size();
  if (T == 0) return 0.0;
  const std::size_t L = model.num_labels();
  const auto trans = model.transition_weights();
  auto e = emissions(model, c);
  std::vector<double> alpha;
  std::vector<double> beta;
  const double log_z = forward(model, e, T, alpha);
  backward(model, e, T, beta);

  std::vector<double> marginal(L);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      marginal[y] = std::exp(alpha[t * L + y] + beta[t * L + y] - log_z);
    }
    for (std::size_t f : c.features[t]) {
      double* g = grad_f.data() + f * L;
      for (std::size_t y = 0; y < L; ++y) g[y] -= scale * marginal[y];
      g[c.labels[t]] += scale;
    }
    if (t > 0) {
      for (std::size_t p = 0; p < L; ++p) {
        for (std::size_t y = 0; y < L; ++y) {
          const double pair = std::exp(alpha[(t - 1) * L + p] + trans[p * L + y] +
                                       e[t * L + y] + beta[t * L + y] - log_z);
          grad_t[p * L + y] -= scale * pair;
        }
      }
      grad_t[c.labels[t - 1] * L + c.labels[t]] += scale;
    }
  }
  return gold_score(model, e, c) - log_z;
}

double squared_norm(const CrfModel& model) {
  double s = 0.0;
  for (double w : model.feature_weights()) s += w * w;
  for (double w : model.transition_weights()) s += w * w;
  return s;
}

double regularized_mean(const CrfModel& model, const std::vector<Compiled>& data, double l2) {
  double ll = 0.0;
  for (const auto& c : data) ll += log_likelihood(model, c);
  return ll / static_cast<double>(data.size()) - 0.5 * l2 * squared_norm(model);
}

std::optional<std::string> optional_column(const std::string& field) {
  if (field.empty() || field == "_") return std::nullopt;
  return field;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::vector<std::string> extract_features(std::span<const TokenRow> rows, std::size_t position) {
  std::vector<std::string> out;
  if (position >= rows.size()) return out;
  const std::string& raw = rows[position].surface;
  const std::string word = to_lower(raw);
  const auto pos = static_cast<std::ptrdiff_t>(position);

  out.emplace_back("bias");
  out.push_back("w=" + word);
  for (std::size_t k = 1; k <= 3 && k <= word.size(); ++k) {
    out.push_back("pre" + std::to_string(k) + "=" + word.substr(0, k));
    out.push_back("suf" + std::to_string(k) + "=" + word.substr(word.size() - k));
  }
  if (!raw.empty() && std::isupper(static_cast<unsigned char>(raw.front()))) {
    out.emplace_back("is_cap");
  }
  if (!raw.empty() && std::all_of(raw.begin(), raw.end(), [](unsigned char ch) {
        return std::isdigit(ch);
      })) {
    out.emplace_back("is_digit");
  }
  out.push_back("w-1=" + word_at(rows, pos - 1));
  out.push_back("w+1=" + word_at(rows, pos + 1));
  out.push_back("w-2=" + word_at(rows, pos - 2));
  out.push_back("w+2=" + word_at(rows, pos + 2));
  out.push_back("w-1|w=" + word_at(rows, pos - 1) + "|" + word);

  add_column_features(out, rows, position, "lem", &TokenRow::lemma);
  add_column_features(out, rows, position, "pos", &TokenRow::pos);
  add_column_features(out, rows, position, "dep", &TokenRow::dep);
  return out;
}

CrfModel::CrfModel(std::vector<std::string> label_alphabet) : labels_(std::move(label_alphabet)) {
  if (labels_.empty()) throw UsageError("CRF label alphabet must be non-empty");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!label_index_.emplace(labels_[i], i).second) {
      throw UsageError("duplicate CRF label '" + labels_[i] + "'");
    }
  }
  transition_weights_.assign(labels_.size() * labels_.size(), 0.0);
}

std::optional<std::size_t> CrfModel::label_index(std::string_view label) const {
  auto it = label_index_.find(std::string(label));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t CrfModel::require_label(std::string_view label) const {
  auto idx = label_index(label);
  if (!idx) throw UsageError("unknown CRF label '" + std::string(label) + "'");
  return *idx;
}

std::optional<std::size_t> CrfModel::feature_index(std::string_view feature) const {
  auto it = feature_index_.find(std::string(feature));
  if (it == feature_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t CrfModel::intern_feature(std::string_view feature) {
  auto [it, inserted] = feature_index_.emplace(std::string(feature), features_.size());
  if (inserted) {
    features_.emplace_back(feature);
    feature_weights_.resize(feature_weights_.size() + labels_.size(), 0.0);
  }
  return it->second;
}

double CrfModel::feature_weight(std::string_view feature, std::string_view label) const {
  auto f = feature_index(feature);
  if (!f) return 0.0;
  return feature_weights_[*f * labels_.size() + require_label(label)];
}

void CrfModel::set_feature_weight(std::string_view feature, std::string_view label,
                                  double weight) {
  const std::size_t y = require_label(label);
  const std::size_t f = intern_feature(feature);
  feature_weights_[f * labels_.size() + y] = weight;
}

double CrfModel::transition_weight(std::string_view prev, std::string_view cur) const {
  return transition_weights_[require_label(prev) * labels_.size() + require_label(cur)];
}

void CrfModel::set_transition_weight(std::string_view prev, std::string_view cur, double weight) {
  transition_weights_[require_label(prev) * labels_.size() + require_label(cur)] = weight;
}

double CrfModel::score(std::span<const TokenRow> rows, std::span<const std::string> labels) const {
  if (rows.size() != labels.size()) throw UsageError("score: rows/labels length mismatch");
  const std::size_t L = labels_.size();
  Compiled c = compile(*this, rows);
  double s = 0.0;
  std::size_t prev = 0;
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const std::size_t y = require_label(labels[t]);
    for (std::size_t f : c.features[t]) s += feature_weights_[f * L + y];
    if (t > 0) s += transition_weights_[prev * L + y];
    prev = y;
  }
  return s;
}

void CrfModel::save(std::ostream& out) const {
  const std::size_t L = labels_.size();
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "labels " << L << '\n';
  for (const auto& l : labels_) out << l << '\n';
  out << std::setprecision(17);
  out << "transitions\n";
  for (std::size_t p = 0; p < L; ++p) {
    for (std::size_t y = 0; y < L; ++y) {
      out << labels_[p] << '\t' << labels_[y] << '\t' << transition_weights_[p * L + y] << '\n';
    }
  }
  std::size_t nonzero = 0;
  for (double w : feature_weights_) nonzero += (w != 0.0);
  out << "features " << features_.size() << ' ' << nonzero << '\n';
  for (std::size_t f = 0; f < features_.size(); ++f) {
    for (std::size_t y = 0; y < L; ++y) {
      const double w = feature_weights_[f * L + y];
      if (w != 0.0) out << features_[f] << '\t' << labels_[y] << '\t' << w << '\n';
    }
  }
  out << "end\n";
}

void CrfModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model file '" + path.string() + "'");
  save(out);
}

CrfModel CrfModel::load(std::istream& in) {
  auto fail = [](const std::string& why) -> InputError {
    return InputError("malformed model file: " + why);
  };
  std::string line;
  if (!std::getline(in, line)) throw fail("empty");
  {
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != kModelMagic) throw fail("bad header '" + line + "'");
    if (version != kModelVersion) throw fail("unsupported version " + std::to_string(version));
  }
  std::size_t L = 0;
  if (!std::getline(in, line) || std::sscanf(line.c_str(), "labels %zu", &L) != 1 || L == 0) {
    throw fail("missing label count");
  }
  std::vector<std::string> labels(L);
  for (auto& l : labels) {
    if (!std::getline(in, l)) throw fail("truncated label list");
  }
  CrfModel model(std::move(labels));
  if (!std::getline(in, line) || line != "transitions") throw fail("missing transitions");
  for (std::size_t i = 0; i < L * L; ++i) {
    if (!std::getline(in, line)) throw fail("truncated transitions");
    auto cols = split_tabs(line);
    if (cols.size() != 3) throw fail("bad transition line '" + line + "'");
    model.set_transition_weight(cols[0], cols[1], std::stod(cols[2]));
  }
  std::size_t num_features = 0;
  std::size_t nonzero = 0;
  if (!std::getline(in, line) ||
      std::sscanf(line.c_str(), "features %zu %zu", &num_features, &nonzero) != 2) {
    throw fail("missing feature header");
  }
  for (std::size_t i = 0; i < nonzero; ++i) {
    if (!std::getline(in, line)) throw fail("truncated feature weights");
    auto cols = split_tabs(line);
    if (cols.size() != 3) throw fail("bad feature line '" + line + "'");
    if (!model.label_index(cols[1])) throw fail("unknown label '" + cols[1] + "'");
    model.set_feature_weight(cols[0], cols[1], std::stod(cols[2]));
  }
  if (!std::getline(in, line) || line != "end") throw fail("missing end marker");
  return model;
}

CrfModel CrfModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read model file '" + path.string() + "'");
  return load(in);
}

std::vector<std::string> viterbi(const CrfModel& model, std::span<const TokenRow> rows) {
  const std::size_t T = rows.size();
  const std::size_t L = model.num_labels();
  if (T == 0) return {};
  Compiled c = compile(model, rows);
  auto e = emissions(model, c);
  const auto trans = model.transition_weights();
  std::vector<double> delta(T * L);
  std::vector<std::size_t> back(T * L, 0);
  for (std::size_t y = 0; y < L; ++y) delta[y] = e[y];
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t y = 0; y < L; ++y) {
      std::size_t best = 0;
      double best_score = delta[(t - 1) * L] + trans[y];
      for (std::size_t p = 1; p < L; ++p) {
        const double s = delta[(t - 1) * L + p] + trans[p * L + y];
        if (s > best_score) {
          best_score = s;
          best = p;
        }
      }
      delta[t * L + y] = best_score + e[t * L + y];
      back[t * L + y] = best;
    }
  }
  std::size_t last = 0;
  for (std::size_t y = 1; y < L; ++y) {
    if (delta[(T - 1) * L + y] > delta[(T - 1) * L + last]) last = y;
  }
  std::vector<std::string> out(T);
  for (std::size_t t = T; t-- > 0;) {
    out[t] = model.labels()[last];
    last = back[t * L + last];
  }
  return out;
}

CrfModel make_untrained_model(std::span<const LabeledSequence> data,
                              std::vector<std::string> labels) {
  if (labels.empty()) {
    for (const auto& seq : data) {
      for (const auto& l : seq.labels) {
        if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
      }
    }
  }
  if (labels.empty()) throw InputError("training data contains no labels");
  CrfModel model(std::move(labels));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& seq = data[i];
    for (const auto& l : seq.labels) {
      if (!model.label_index(l)) {
        throw InputError("sequence " + std::to_string(i) + " (\"" +
                         join(surfaces(seq.rows), " ") + "\") has unknown label '" + l + "'");
      }
    }
    for (std::size_t t = 0; t < seq.rows.size(); ++t) {
      for (const auto& f : extract_features(seq.rows, t)) model.intern_feature(f);
    }
  }
  return model;
}

ObjectiveValue objective(const CrfModel& model, std::span<const LabeledSequence> data, double l2) {
  if (data.empty()) throw UsageError("objective over empty data");
  ObjectiveValue out;
  out.feature_gradient.assign(model.feature_weights().size(), 0.0);
  out.transition_gradient.assign(model.transition_weights().size(), 0.0);
  const double scale = 1.0 / static_cast<double>(data.size());
  double ll = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Compiled c = compile_labeled(model, data[i], i);
    ll += accumulate_gradient(model, c, scale, out.feature_gradient, out.transition_gradient);
  }
  const auto wf = model.feature_weights();
  const auto wt = model.transition_weights();
  for (std::size_t k = 0; k < wf.size(); ++k) out.feature_gradient[k] -= l2 * wf[k];
  for (std::size_t k = 0; k < wt.size(); ++k) out.transition_gradient[k] -= l2 * wt[k];
  out.value = ll * scale - 0.5 * l2 * squared_norm(model);
  return out;
}

CrfModel train(std::span<const LabeledSequence> data, const TrainConfig& config, TrainLog* log) {
  if (data.empty()) throw InputError("cannot train a CRF on empty data");
  if (config.epochs < 0) throw UsageError("epochs must be non-negative");
  if (config.learning_rate <= 0.0) throw UsageError("learning rate must be positive");
  if (config.l2 < 0.0) throw UsageError("l2 must be non-negative");

  CrfModel model = make_untrained_model(data, config.labels);
  std::vector<Compiled> compiled;
  compiled.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) compiled.push_back(compile_labeled(model, data[i], i));

  const std::size_t batch = std::max<std::size_t>(1, config.batch_size);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  double current = regularized_mean(model, compiled, config.l2);
  if (log) {
    log->objective.assign(1, current);
    log->backtracks = 0;
  }
  double lr = config.learning_rate;
  std::vector<double> grad_f(model.feature_weights().size());
  std::vector<double> grad_t(model.transition_weights().size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<double> start_f(model.feature_weights().begin(), model.feature_weights().end());
    const std::vector<double> start_t(model.transition_weights().begin(),
                                      model.transition_weights().end());
    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t b = 0; b < order.size(); b += batch) {
        const std::size_t end = std::min(order.size(), b + batch);
        std::fill(grad_f.begin(), grad_f.end(), 0.0);
        std::fill(grad_t.begin(), grad_t.end(), 0.0);
        const double scale = 1.0 / static_cast<double>(end - b);
        for (std::size_t k = b; k < end; ++k) {
          accumulate_gradient(model, compiled[order[k]], scale, grad_f, grad_t);
        }
        auto wf = model.feature_weights();
        auto wt = model.transition_weights();
        for (std::size_t k = 0; k < wf.size(); ++k) wf[k] += lr * (grad_f[k] - config.l2 * wf[k]);
        for (std::size_t k = 0; k < wt.size(); ++k) wt[k] += lr * (grad_t[k] - config.l2 * wt[k]);
      }
      const double next = regularized_mean(model, compiled, config.l2);
      if (std::isfinite(next) && next >= current) {
        current = next;
        accepted = true;
      } else {
        std::copy(start_f.begin(), start_f.end(), model.feature_weights().begin());
        std::copy(start_t.begin(), start_t.end(), model.transition_weights().begin());
        lr *= 0.5;
        if (log) ++log->backtracks;
      }
    }
    if (log) log->objective.push_back(current);
    if (!accepted) break;
  }
  return model;
}

std::vector<LabeledSequence> read_sequences(std::istream& in, std::string_view source) {
  std::vector<LabeledSequence> out;
  LabeledSequence current;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.rows.empty()) out.push_back(std::move(current));
    current = {};
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      flush();
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 2 && cols.size() != 5) {
      throw InputError(std::string(source) + ":" + std::to_string(line_no) +
                       ": expected 2 or 5 tab-separated columns, got " +
                       std::to_string(cols.size()));
    }
    if (cols.front().empty() || cols.back().empty()) {
      throw InputError(std::string(source) + ":" + std::to_string(line_no) +
                       ": empty surface or label");
    }
    TokenRow row(cols.front());
    if (cols.size() == 5) {
      row.lemma = optional_column(cols[1]);
      row.pos = optional_column(cols[2]);
      row.dep = optional_column(cols[3]);
    }
    current.rows.push_back(std::move(row));
    current.labels.push_back(cols.back());
  }
  flush();
  return out;
}

std::vector<LabeledSequence> read_sequences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read training data '" + path.string() + "'");
  return read_sequences(in, path.string());
}

void write_sequences(std::ostream& out, std::span<const LabeledSequence> data) {
  for (const auto& seq : data) {
    for (std::size_t t = 0; t < seq.rows.size(); ++t) {
      const auto& r = seq.rows[t];
      out << r.surface;
      if (r.lemma || r.pos || r.dep) {
        out << '\t' << r.lemma.value_or("_") << '\t' << r.pos.value_or("_") << '\t'
            << r.dep.value_or("_");
      }
      out << '\t' << seq.labels[t] << '\n';
    }
    out << '\n';
  }
}

}  // namespace ttr::crf
