#include "ttr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "ttr/error.hpp"
#include "ttr/instruction.hpp"
#include "ttr/similarity.hpp"

namespace ttr {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Everything the grid search needs from one example, independent of the
// weights: class-sum Gram matrices, object matches, attribute masks.
struct CompiledExample {
  AmbiguityState gold = AmbiguityState::NF;
  bool parse_failed = false;
  std::size_t n = 0;
  std::vector<const SceneCaption*> captions;
  ClassGram aa{};
  std::vector<ClassGram> ac;
  std::vector<ClassGram> cc;  // n * n
  std::vector<bool> object_match;
  std::vector<std::uint64_t> masks;
  bool argument_has_object = false;
  std::uint64_t argument_mask = 0;
};

CompiledExample compile(const PreparedExample& ex, const EmbeddingTable& table) {
  CompiledExample c;
  c.gold = ex.gold;
  c.parse_failed = ex.parse_failed;
  if (c.parse_failed) return c;

  c.n = ex.scene.captions.size();
  const ClassSums arg = decompose(ex.argument, table);
  c.aa = class_gram(arg, arg);
  std::vector<ClassSums> sums;
  for (const auto& cap : ex.scene.captions) {
    c.captions.push_back(&cap);
    sums.push_back(decompose(cap, table));
    c.ac.push_back(class_gram(arg, sums.back()));
  }
  c.cc.resize(c.n * c.n);
  for (std::size_t i = 0; i < c.n; ++i) {
    for (std::size_t j = i; j < c.n; ++j) {
      c.cc[i * c.n + j] = class_gram(sums[i], sums[j]);
      if (i != j) {
        ClassGram t{};
        for (std::size_t a = 0; a < kNumSemanticClasses; ++a) {
          for (std::size_t b = 0; b < kNumSemanticClasses; ++b) {
            t[a * kNumSemanticClasses + b] = c.cc[i * c.n + j][b * kNumSemanticClasses + a];
          }
        }
        c.cc[j * c.n + i] = t;
      }
    }
  }

  std::map<std::string, std::size_t> vocab;
  auto mask_of = [&](const LabeledPhrase& p) {
    std::uint64_t m = 0;
    for (const auto& a : p.attribute_tokens) {
      auto [it, inserted] = vocab.emplace(a, vocab.size());
      if (it->second >= 64) {
        throw UsageError("more than 64 distinct attribute tokens in one example");
      }
      m |= std::uint64_t{1} << it->second;
    }
    return m;
  };
  const std::string key = ex.argument.object_key();
  c.argument_has_object = !key.empty();
  c.argument_mask = mask_of(ex.argument);
  for (const auto& cap : ex.scene.captions) {
    c.object_match.push_back(c.argument_has_object && cap.object_key() == key);
    c.masks.push_back(mask_of(cap));
  }
  return c;
}

}  // namespace

const LabelScore* F1Report::find(std::string_view label) const {
  for (const auto& l : labels) {
    if (l.label == label) return &l;
  }
  return nullptr;
}

F1Report f1_report(std::span<const std::string> predictions, std::span<const std::string> gold,
                   std::span<const std::string> label_order) {
  if (predictions.size() != gold.size()) {
    throw UsageError("f1_report: " + std::to_string(predictions.size()) + " predictions for " +
                     std::to_string(gold.size()) + " gold labels");
  }
  if (gold.empty()) throw UsageError("f1_report: no examples");

  std::vector<std::string> labels(label_order.begin(), label_order.end());
  std::set<std::string> rest;
  for (const auto& l : gold) rest.insert(l);
  for (const auto& l : predictions) rest.insert(l);
  for (const auto& l : rest) {
    if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
  }

  F1Report report;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += predictions[i] == gold[i];
  report.accuracy = ratio(correct, gold.size());

  double macro = 0.0;
  std::size_t present = 0;
  for (const auto& label : labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool p = predictions[i] == label;
      const bool g = gold[i] == label;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
    LabelScore s;
    s.label = label;
    s.precision = ratio(tp, tp + fp);
    s.recall = ratio(tp, tp + fn);
    s.f1 = s.precision + s.recall > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    s.support = tp + fn;
    if (s.support > 0) {
      macro += s.f1;
      ++present;
    }
    report.labels.push_back(std::move(s));
  }
  report.macro_f1 = macro / static_cast<double>(present);
  return report;
}

std::string format_f1_table(const F1Report& report, std::string_view title) {
  std::size_t width = 8;
  for (const auto& l : report.labels) width = std::max(width, l.label.size() + 2);
  std::ostringstream out;
  out << title << '\n' << std::fixed << std::setprecision(3);
  out << std::left << std::setw(static_cast<int>(width)) << "label" << std::setw(11) << "precision"
      << std::setw(8) << "recall" << std::setw(8) << "f1" << "support\n";
  for (const auto& l : report.labels) {
    out << std::setw(static_cast<int>(width)) << l.label << std::setw(11) << l.precision
        << std::setw(8) << l.recall << std::setw(8) << l.f1 << l.support << '\n';
  }
  out << std::setw(static_cast<int>(width) + 19) << "macro avg" << report.macro_f1 << '\n';
  out << std::setw(static_cast<int>(width) + 19) << "accuracy" << report.accuracy << '\n';
  return out.str();
}

std::string format_annotation(const LabeledPhrase& phrase) {
  std::string out;
  for (std::size_t i = 0; i < phrase.tokens.size(); ++i) {
    if (i) out += ' ';
    out += phrase.tokens[i].surface;
    out += '/';
    out += to_string(phrase.semantic_labels[i]);
  }
  return out;
}

LabeledPhrase parse_annotation(std::string_view text) {
  std::vector<TokenRow> tokens;
  std::vector<SemanticClass> labels;
  for (const auto& item : split_whitespace(text)) {
    auto slash = item.rfind('/');
    if (slash == std::string::npos || slash == 0) {
      throw InputError("annotation item '" + item + "' is not token/label");
    }
    auto cls = semantic_class_from_string(std::string_view(item).substr(slash + 1));
    if (!cls) throw InputError("annotation item '" + item + "' has an unknown label");
    tokens.emplace_back(item.substr(0, slash));
    labels.push_back(*cls);
  }
  return make_labeled_phrase(std::move(tokens), std::move(labels));
}

StateDataset read_state_dataset(std::istream& in, const std::filesystem::path& base_dir,
                                std::string_view source) {
  StateDataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto where = [&] { return std::string(source) + ":" + std::to_string(lineno) + ": "; };
    auto fields = split_tabs(line);
    if (fields.size() != 3 && fields.size() != 4) {
      throw InputError(where() + "expected 3 or 4 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    StateExample ex;
    std::filesystem::path p = std::string(trim(fields[0]));
    ex.scene_path = p.is_absolute() ? p : base_dir / p;
    ex.instruction = std::string(trim(fields[1]));
    auto state = ambiguity_state_from_string(trim(fields[2]));
    if (!state) throw InputError(where() + "unknown state '" + fields[2] + "'");
    ex.gold = *state;
    if (fields.size() == 4 && !trim(fields[3]).empty()) {
      try {
        ex.annotated_argument = parse_annotation(fields[3]);
      } catch (const InputError& e) {
        throw InputError(where() + e.what());
      }
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

StateDataset load_state_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset " + path.string());
  return read_state_dataset(in, path.parent_path(), path.string());
}

void write_state_dataset(std::ostream& out, const StateDataset& dataset) {
  for (const auto& ex : dataset.examples) {
    out << ex.scene_path.generic_string() << '\t' << ex.instruction << '\t' << to_string(ex.gold);
    if (ex.annotated_argument) out << '\t' << format_annotation(*ex.annotated_argument);
    out << '\n';
  }
}

PreparedExample prepare_example(const StateExample& example, const ModelBundle* models,
                                LabelSource source) {
  PreparedExample p;
  p.gold = example.gold;
  p.scene = example.scene ? *example.scene : load_scene(example.scene_path);
  if (source == LabelSource::Oracle) {
    if (!example.annotated_argument) {
      throw InputError("example '" + example.instruction + "' has no argument annotation");
    }
    apply_annotated_labels(p.scene);
    p.argument = *example.annotated_argument;
    return p;
  }
  if (!models) throw UsageError("tagger labels requested without models");
  try {
    TaskFrame frame = parse_instruction(example.instruction, models->view());
    const ArgumentPhrase* arg = frame.grounding_argument();
    if (!arg) {
      p.parse_failed = true;
      return p;
    }
    p.argument = *arg;
  } catch (const ParseError&) {
    p.parse_failed = true;
    return p;
  }
  parse_captions(p.scene, models->semantic);
  return p;
}

std::vector<PreparedExample> prepare_dataset(const StateDataset& dataset,
                                             const ModelBundle* models, LabelSource source) {
  std::vector<PreparedExample> out;
  out.reserve(dataset.examples.size());
  for (const auto& ex : dataset.examples) out.push_back(prepare_example(ex, models, source));
  return out;
}

std::vector<std::string> predict_states(std::span<const PreparedExample> examples,
                                        const EmbeddingTable& table,
                                        const PipelineConfig& config) {
  std::vector<std::string> out;
  for (const auto& ex : examples) {
    if (ex.parse_failed) {
      out.emplace_back(kParseErrorLabel);
    } else {
      out.emplace_back(to_string(ground_argument(ex.argument, ex.scene, table, config).outcome.state));
    }
  }
  return out;
}

std::vector<std::string> gold_states(std::span<const PreparedExample> examples) {
  std::vector<std::string> out;
  for (const auto& ex : examples) out.emplace_back(to_string(ex.gold));
  return out;
}

std::vector<std::string> state_labels() {
  std::vector<std::string> out;
  for (auto s : kAmbiguityStates) out.emplace_back(to_string(s));
  return out;
}

GridConfig GridConfig::uniform(double step) {
  if (!(step > 0.0 && step < 1.0)) throw UsageError("grid step must be in (0, 1)");
  std::vector<double> axis;
  for (int k = 1; k * step < 1.0 - 1e-9; ++k) axis.push_back(std::round(k * step * 1e9) / 1e9);
  GridConfig g;
  for (auto& w : g.weight_grid) w = axis;
  g.alpha_grid = axis;
  g.beta_grid = axis;
  return g;
}

void GridConfig::validate() const {
  auto check = [](const std::vector<double>& axis, std::string_view name) {
    if (axis.empty()) throw UsageError("grid axis '" + std::string(name) + "' is empty");
    for (double v : axis) {
      if (!(v > 0.0 && v < 1.0)) {
        throw UsageError("grid axis '" + std::string(name) + "' has value outside (0, 1)");
      }
    }
  };
  for (std::size_t c = 0; c < kNumSemanticClasses; ++c) {
    check(weight_grid[c], to_string(kSemanticClasses[c]));
  }
  check(alpha_grid, "alpha");
  check(beta_grid, "beta");
}

std::size_t GridConfig::size() const {
  std::size_t n = alpha_grid.size() * beta_grid.size();
  for (const auto& w : weight_grid) n *= w.size();
  return n;
}

namespace detail {

AmbiguityState decide_state(std::span<const CandidateBits> candidates, bool argument_has_object,
                            std::uint64_t argument_mask) {
  std::vector<std::uint64_t> matched_masks;
  if (argument_has_object) {
    for (const auto& c : candidates) {
      if (c.object_match) matched_masks.push_back(c.attributes);
    }
  }
  const std::size_t m = matched_masks.size();
  if (m == 0) return AmbiguityState::NF;
  auto contains = [](std::uint64_t big, std::uint64_t small) { return (big & small) == small; };
  if (m == 1) {
    const std::uint64_t c = matched_masks[0];
    if (argument_mask == 0) return c == 0 ? AmbiguityState::NQ : AmbiguityState::IMA;
    if (c == 0) return AmbiguityState::ANF;
    return contains(c, argument_mask) ? AmbiguityState::NQ : AmbiguityState::AM;
  }
  std::size_t distinct = 0;
  std::uint64_t first = 0;
  for (std::size_t i = 0; i < m && distinct < 2; ++i) {
    if (matched_masks[i] == 0) continue;
    if (distinct == 0) {
      first = matched_masks[i];
      distinct = 1;
    } else if (matched_masks[i] != first) {
      distinct = 2;
    }
  }
  if (argument_mask == 0) return distinct >= 2 ? AmbiguityState::AA : AmbiguityState::AOA;
  std::size_t satisfying = 0;
  for (std::size_t i = 0; i < m; ++i) satisfying += contains(matched_masks[i], argument_mask);
  if (satisfying == 1) return AmbiguityState::NQ;
  if (satisfying >= 2) return AmbiguityState::AOA;
  return distinct >= 2 ? AmbiguityState::AA : AmbiguityState::AOA;
}

}  // namespace detail

TuningResult grid_search(std::span<const PreparedExample> validation, const EmbeddingTable& table,
                         const GridConfig& grid) {
  if (validation.empty()) throw UsageError("grid_search: empty validation set");
  grid.validate();

  std::vector<CompiledExample> compiled;
  compiled.reserve(validation.size());
  for (const auto& ex : validation) compiled.push_back(compile(ex, table));

  const auto& wg = grid.weight_grid;
  const std::size_t na = grid.alpha_grid.size();
  const std::size_t nb = grid.beta_grid.size();
  TuningResult best;
  best.accuracy = -1.0;
  best.points = grid.size();

  std::vector<std::size_t> correct(na * nb);
  std::vector<double> rel, rel_ranked, sim;
  std::vector<std::size_t> order;
  std::vector<const SceneCaption*> ranked;
  std::vector<detail::CandidateBits> bits;

  std::array<std::size_t, kNumSemanticClasses> idx{};
  while (true) {
    ClassWeights w;
    for (std::size_t c = 0; c < kNumSemanticClasses; ++c) w.values[c] = wg[c][idx[c]];
    std::fill(correct.begin(), correct.end(), 0);

    for (const auto& ex : compiled) {
      if (ex.parse_failed) continue;
      const std::size_t n = ex.n;
      rel.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        rel[i] = weighted_cosine(ex.ac[i], ex.aa, ex.cc[i * n + i], w);
      }
      order.resize(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return rel[a] > rel[b]; });
      ranked.resize(n);
      rel_ranked.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        ranked[r] = ex.captions[order[r]];
        rel_ranked[r] = rel[order[r]];
      }
      sim.assign(n * n, 0.0);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          const std::size_t i = order[a], j = order[b];
          const double f =
              weighted_cosine(ex.cc[i * n + j], ex.cc[i * n + i], ex.cc[j * n + j], w);
          sim[a * n + b] = sim[b * n + a] = f;
        }
      }
      const PairSimilarity similarity = [&](std::size_t a, std::size_t b) { return sim[a * n + b]; };

      for (std::size_t ai = 0; ai < na; ++ai) {
        for (std::size_t bi = 0; bi < nb; ++bi) {
          const Cutoffs cut{grid.alpha_grid[ai], grid.beta_grid[bi]};
          const auto groups = suppress_groups(ranked, rel_ranked, cut, similarity);
          bits.clear();
          for (const auto& g : groups) {
            const std::size_t k = order[g.kept];
            std::uint64_t m = ex.masks[k];
            for (std::size_t r : g.merged) m |= ex.masks[order[r]];
            bits.push_back({ex.object_match[k], m});
          }
          if (detail::decide_state(bits, ex.argument_has_object, ex.argument_mask) == ex.gold) {
            ++correct[ai * nb + bi];
          }
        }
      }
    }

    for (std::size_t ai = 0; ai < na; ++ai) {
      for (std::size_t bi = 0; bi < nb; ++bi) {
        const double acc = ratio(correct[ai * nb + bi], compiled.size());
        if (acc > best.accuracy) {
          best.accuracy = acc;
          best.config.weights = w;
          best.config.cutoffs = {grid.alpha_grid[ai], grid.beta_grid[bi]};
        }
      }
    }

    // Odometer over the weight axes, last axis fastest.
    std::size_t c = kNumSemanticClasses;
    while (c > 0) {
      --c;
      if (++idx[c] < wg[c].size()) break;
      idx[c] = 0;
      if (c == 0) return best;
    }
  }
}

}  // namespace ttr
