#include "ttr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "ttr/config.hpp"
#include "ttr/corpus.hpp"
#include "ttr/crf.hpp"
#include "ttr/dialogue.hpp"
#include "ttr/embeddings.hpp"
#include "ttr/error.hpp"
#include "ttr/eval.hpp"
#include "ttr/instruction.hpp"
#include "ttr/pipeline.hpp"
#include "ttr/planner.hpp"
#include "ttr/scene.hpp"

namespace ttr {

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kMaxPlanDepth = 16;

struct Options {
  std::string embeddings;
  std::size_t dim = 50;
  std::string models_dir = "models";
  std::string weights;
  std::uint64_t seed = 1;
  std::string transcript;
  std::string knowledge = (fs::path(TTR_DATA_DIR) / "knowledge.txt").string();
  std::string domain = (fs::path(TTR_DATA_DIR) / "domain.txt").string();
  bool oracle = false;
};

struct TrainOptions {
  std::string kind;
  std::string data;
  crf::TrainConfig config;
};

struct GroundOptions {
  std::string instruction;
  std::string scene;
};

struct DatasetOptions {
  std::string dataset;
  double step = 0.1;
  std::vector<double> object_grid, attribute_grid, landmark_grid, other_grid, alpha_grid,
      beta_grid;
  std::string output = "weights.cfg";
};

struct CorpusOptions {
  std::string dir;
  std::size_t size = 210;
};

void require_file(const std::string& path, std::string_view what) {
  if (path.empty()) throw InputError("missing --" + std::string(what));
  if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " file not found: " + path);
}

// Everything the grounding commands need, loaded before any pipeline work.
struct Context {
  ModelBundle models;
  EmbeddingTable table;
  PipelineConfig config;
  planner::Knowledge knowledge;
  planner::Domain domain;
};

Context load_context(const Options& o) {
  require_file(o.embeddings, "embeddings");
  for (const char* name : {"task.crf", "argument.crf", "semantic.crf"}) {
    require_file((fs::path(o.models_dir) / name).string(), "models-dir");
  }
  if (!o.weights.empty()) require_file(o.weights, "weights");
  require_file(o.knowledge, "knowledge");
  require_file(o.domain, "domain");
  return Context{ModelBundle::load(o.models_dir), load_embeddings(o.embeddings, o.dim),
                 o.weights.empty() ? PipelineConfig{} : load_pipeline_config(o.weights),
                 planner::load_knowledge(fs::path(o.knowledge)),
                 planner::load_domain(fs::path(o.domain))};
}

Scene load_parsed_scene(const std::string& path, const Options& o, const ModelBundle& models) {
  require_file(path, "scene");
  Scene scene = load_scene(path);
  if (o.oracle) {
    apply_annotated_labels(scene);
  } else {
    parse_captions(scene, models.semantic);
  }
  return scene;
}

std::string format_box(const BoundingBox& b) {
  std::ostringstream s;
  s << '[' << b.x << ", " << b.y << ", " << b.w << ", " << b.h << ']';
  return s.str();
}

void print_frame(std::ostream& out, const TaskFrame& frame) {
  out << "task: " << to_string(frame.task_type) << '\n';
  for (const auto& role : argument_roles()) {
    if (const auto* a = frame.argument(role)) out << "  " << role << ": " << a->text() << '\n';
  }
}

void print_plan(std::ostream& out, const planner::Plan& plan, const planner::Knowledge& k) {
  out << "plan:" << (plan.aborted ? " (aborted)" : "") << '\n';
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    out << "  " << i + 1 << ". " << planner::format_step(plan.steps[i], &k)
        << (plan.steps[i].grounded ? "" : "  (awaiting grounding)") << '\n';
  }
}

planner::Plan make_plan(const TaskFrame& frame, const Context& ctx) {
  const planner::Problem problem = planner::encode_problem(frame, ctx.knowledge, ctx.domain);
  return planner::forward_search(problem.initial, problem.goal, ctx.domain.actions, kMaxPlanDepth);
}

int cmd_train(const Options& o, const TrainOptions& t, std::ostream& out) {
  std::vector<std::pair<std::string, fs::path>> jobs;
  if (t.kind == "all") {
    for (const char* k : {"task", "argument", "semantic"}) {
      jobs.emplace_back(k, fs::path(t.data) / (std::string(k) + ".tsv"));
    }
  } else {
    jobs.emplace_back(t.kind, t.data);
  }
  for (const auto& [kind, path] : jobs) require_file(path.string(), "data");
  for (const auto& [kind, path] : jobs) {
    const auto data = crf::read_sequences(path);
    crf::TrainConfig cfg = t.config;
    cfg.seed = o.seed;
    cfg.labels = kind == "task" ? task_label_alphabet()
                 : kind == "argument" ? role_label_alphabet()
                                      : semantic_label_alphabet();
    crf::TrainLog log;
    const crf::CrfModel model = crf::train(data, cfg, &log);
    for (std::size_t e = 0; e < log.objective.size(); ++e) {
      out << kind << " epoch " << e << " objective " << std::setprecision(10) << log.objective[e]
          << '\n';
    }
    fs::create_directories(o.models_dir);
    const fs::path target = fs::path(o.models_dir) / (kind + ".crf");
    model.save(target);
    out << "wrote " << target.string() << " (" << data.size() << " sequences, "
        << model.num_features() << " features)\n";
  }
  return exit_code::kSuccess;
}

int cmd_ground(const Options& o, const GroundOptions& g, std::ostream& out) {
  const Context ctx = load_context(o);
  const Scene scene = load_parsed_scene(g.scene, o, ctx.models);
  const TaskFrame frame = parse_instruction(g.instruction, ctx.models.view());
  print_frame(out, frame);
  print_plan(out, make_plan(frame, ctx), ctx.knowledge);

  const ArgumentPhrase* arg = frame.grounding_argument();
  if (!arg) {
    out << kAcknowledgment << '\n';
    return exit_code::kSuccess;
  }
  const GroundingResult r = ground_argument(*arg, scene, ctx.table, ctx.config);
  out << "ranked captions:\n";
  for (const auto& c : r.ranked) {
    out << "  " << std::fixed << std::setprecision(4) << *c.relevance << std::defaultfloat << "  "
        << c.caption << "  " << format_box(c.box) << '\n';
  }
  out << "candidates:\n";
  for (const auto& c : r.candidates.candidates) {
    out << "  " << c.object_key() << " {" << join(c.attribute_tokens, ", ") << "}  "
        << format_box(c.box) << '\n';
  }
  out << "state: " << to_string(r.outcome.state) << '\n';
  out << (r.outcome.state == AmbiguityState::NQ ? std::string(kAcknowledgment)
                                                : generate_question(r.outcome))
      << '\n';
  return exit_code::kSuccess;
}

int cmd_dialogue(const Options& o, const GroundOptions& g, std::istream& in, std::ostream& out) {
  const Context ctx = load_context(o);
  Scene scene = load_parsed_scene(g.scene, o, ctx.models);
  Transcript transcript;
  transcript.add("user", g.instruction);
  auto finish = [&](int code) {
    if (!o.transcript.empty()) {
      std::ofstream t(o.transcript);
      if (!t) throw InputError("cannot write transcript " + o.transcript);
      transcript.write(t);
    }
    return code;
  };
  auto say = [&](const std::string& text) {
    out << "robot: " << text << '\n';
    transcript.add("robot", text);
  };

  const TaskFrame frame = parse_instruction(g.instruction, ctx.models.view());
  print_frame(out, frame);
  planner::Plan plan = make_plan(frame, ctx);
  print_plan(out, plan, ctx.knowledge);

  const DialogueContext dctx{ctx.models.semantic, ctx.table, ctx.config};
  Session s = start_session(frame, std::move(plan), std::move(scene), dctx);
  say(s.message);
  std::string line;
  while (s.status == SessionStatus::Asking) {
    out << "> " << std::flush;
    if (!std::getline(in, line)) {
      out << '\n';
      transcript.add("user", "<end of input>");
      s = dialogue_step(std::move(s), Answer{Answer::Kind::Abort, {}, std::nullopt}, dctx);
      say(s.message);
      break;
    }
    if (trim(line).empty()) continue;
    transcript.add("user", line);
    const Answer answer = parse_answer(line, s.pending);
    s = dialogue_step(std::move(s), answer, dctx);
    say(s.message);
  }

  if (s.status == SessionStatus::Grounded) {
    if (s.grounded) {
      const std::string text =
          "grounded: " + s.grounded->caption + " " + format_box(s.grounded->box);
      out << text << '\n';
      transcript.add("robot", text);
    }
    print_plan(out, s.plan, ctx.knowledge);
    return finish(exit_code::kSuccess);
  }
  print_plan(out, s.plan, ctx.knowledge);
  return finish(exit_code::kAborted);
}

std::vector<PreparedExample> prepare(const Options& o, const DatasetOptions& d,
                                     std::optional<ModelBundle>& models) {
  require_file(d.dataset, "dataset");
  const StateDataset ds = load_state_dataset(d.dataset);
  if (ds.examples.empty()) throw InputError("dataset " + d.dataset + " has no examples");
  if (!o.oracle) {
    for (const char* name : {"task.crf", "argument.crf", "semantic.crf"}) {
      require_file((fs::path(o.models_dir) / name).string(), "models-dir");
    }
    models = ModelBundle::load(o.models_dir);
  }
  return prepare_dataset(ds, models ? &*models : nullptr,
                         o.oracle ? LabelSource::Oracle : LabelSource::Tagger);
}

int cmd_eval(const Options& o, const DatasetOptions& d, std::ostream& out) {
  require_file(o.embeddings, "embeddings");
  if (!o.weights.empty()) require_file(o.weights, "weights");
  const EmbeddingTable table = load_embeddings(o.embeddings, o.dim);
  const PipelineConfig config = o.weights.empty() ? PipelineConfig{} : load_pipeline_config(o.weights);
  std::optional<ModelBundle> models;
  const auto examples = prepare(o, d, models);
  const auto predictions = predict_states(examples, table, config);
  const auto gold = gold_states(examples);
  const auto labels = state_labels();
  out << format_f1_table(f1_report(predictions, gold, labels), "Ambiguity state identification (F1)");
  return exit_code::kSuccess;
}

int cmd_tune(const Options& o, const DatasetOptions& d, std::ostream& out) {
  require_file(o.embeddings, "embeddings");
  const EmbeddingTable table = load_embeddings(o.embeddings, o.dim);
  GridConfig grid = GridConfig::uniform(d.step);
  const std::array<const std::vector<double>*, 4> overrides = {
      &d.object_grid, &d.attribute_grid, &d.landmark_grid, &d.other_grid};
  for (std::size_t c = 0; c < kNumSemanticClasses; ++c) {
    if (!overrides[c]->empty()) grid.weight_grid[c] = *overrides[c];
  }
  if (!d.alpha_grid.empty()) grid.alpha_grid = d.alpha_grid;
  if (!d.beta_grid.empty()) grid.beta_grid = d.beta_grid;
  grid.validate();

  std::optional<ModelBundle> models;
  const auto examples = prepare(o, d, models);
  const TuningResult best = grid_search(examples, table, grid);
  out << "evaluated " << best.points << " grid points on " << examples.size() << " examples\n";
  out << "best accuracy " << std::fixed << std::setprecision(4) << best.accuracy
      << std::defaultfloat << '\n';
  write_pipeline_config(out, best.config);
  save_pipeline_config(d.output, best.config);
  out << "wrote " << d.output << '\n';
  const auto predictions = predict_states(examples, table, best.config);
  out << format_f1_table(f1_report(predictions, gold_states(examples), state_labels()),
                         "Ambiguity state identification (F1), tuned");
  return exit_code::kSuccess;
}

int cmd_gen_corpus(const Options& o, const CorpusOptions& c, std::ostream& out) {
  SyntheticCorpus corpus = generate_synthetic_corpus(o.seed, c.size);
  write_corpus(c.dir, corpus);
  const fs::path emb = fs::path(c.dir) / "embeddings.txt";
  std::ofstream e(emb);
  if (!e) throw InputError("cannot write " + emb.string());
  write_word_vectors(e, synthetic_word_vectors(o.seed, o.dim));
  out << "wrote " << corpus.semantic.size() << " semantic sequences, "
      << corpus.instructions.task.size() << " instructions, " << corpus.states.examples.size()
      << " state examples and " << synthetic_vocabulary().size() << " word vectors to " << c.dir
      << '\n';
  return exit_code::kSuccess;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Ground task instructions in captioned scenes and clarify ambiguity"};
  app.name("ttr");
  app.fallthrough();
  app.require_subcommand(1);

  Options o;
  app.add_option("--embeddings", o.embeddings, "GloVe-format word vectors");
  app.add_option("--dim", o.dim, "Embedding dimension")->capture_default_str();
  app.add_option("--models-dir", o.models_dir, "Directory with task/argument/semantic .crf")
      ->capture_default_str();
  app.add_option("--weights", o.weights, "Class weights and cutoffs (key=value)");
  app.add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app.add_option("--transcript", o.transcript, "Dialogue transcript output file");
  app.add_option("--knowledge", o.knowledge, "Named places")->capture_default_str();
  app.add_option("--domain", o.domain, "Planning domain")->capture_default_str();
  app.add_flag("--oracle-labels", o.oracle, "Use annotated semantic labels instead of the tagger");

  TrainOptions t;
  auto* train = app.add_subcommand("train", "Train a tagger (task, argument, semantic, or all)");
  train->add_option("kind", t.kind)->required()->check(
      CLI::IsMember({"task", "argument", "semantic", "all"}));
  train->add_option("data", t.data, "Sequence file, or corpus directory for 'all'")->required();
  train->add_option("--epochs", t.config.epochs)->capture_default_str();
  train->add_option("--l2", t.config.l2)->capture_default_str();
  train->add_option("--learning-rate", t.config.learning_rate)->capture_default_str();
  train->add_option("--batch-size", t.config.batch_size)->capture_default_str();

  GroundOptions g;
  auto* ground = app.add_subcommand("ground", "Parse, plan and ground one instruction");
  ground->add_option("instruction", g.instruction)->required();
  ground->add_option("scene", g.scene)->required();
  auto* dialogue = app.add_subcommand("dialogue", "Interactive clarification session");
  dialogue->add_option("instruction", g.instruction)->required();
  dialogue->add_option("scene", g.scene)->required();

  DatasetOptions d;
  auto* eval = app.add_subcommand("eval", "Per-state F1 on a state dataset");
  eval->add_option("dataset", d.dataset)->required();
  auto* tune = app.add_subcommand("tune", "Grid search for class weights and cutoffs");
  tune->add_option("dataset", d.dataset)->required();
  tune->add_option("--step", d.step, "Grid step for every axis")->capture_default_str();
  tune->add_option("--object-grid", d.object_grid)->delimiter(',');
  tune->add_option("--attribute-grid", d.attribute_grid)->delimiter(',');
  tune->add_option("--landmark-grid", d.landmark_grid)->delimiter(',');
  tune->add_option("--other-grid", d.other_grid)->delimiter(',');
  tune->add_option("--alpha-grid", d.alpha_grid)->delimiter(',');
  tune->add_option("--beta-grid", d.beta_grid)->delimiter(',');
  tune->add_option("--output", d.output, "Where to write the best configuration")
      ->capture_default_str();

  CorpusOptions c;
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic corpus and word vectors");
  gen->add_option("dir", c.dir)->required();
  gen->add_option("--size", c.size, "State examples")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::kSuccess : exit_code::kInputError;
  }

  try {
    if (train->parsed()) return cmd_train(o, t, out);
    if (ground->parsed()) return cmd_ground(o, g, out);
    if (dialogue->parsed()) return cmd_dialogue(o, g, in, out);
    if (eval->parsed()) return cmd_eval(o, d, out);
    if (tune->parsed()) return cmd_tune(o, d, out);
    if (gen->parsed()) return cmd_gen_corpus(o, c, out);
  } catch (const ParseError& e) {
    err << "parse failure: " << e.what() << '\n';
    return exit_code::kParseFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kInputError;
  }
  return exit_code::kInputError;
}

}  // namespace ttr
