/*
 * Copyright 2026 The LOGNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "lognet/ablation.hpp"
#include "lognet/kernels.hpp"
#include "lognet/manifest.hpp"
#include "lognet/toy_data.hpp"
#include "lognet/trace.hpp"
#include "lognet/training.hpp"

namespace fs = std::filesystem;

namespace lognet::cli {

namespace {

std::uint64_t default_seed() {
  const char* env = std::getenv("LOGNET_SEED");
  if (env == nullptr || *env == '\0') return 1;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("LOGNET_SEED is not an unsigned integer: '") + env + "'");
  }
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * v;
  return os.str();
}

// ---- shared model / optimizer flags ---------------------------------------

struct ConfigFlags {
  std::string preset = "desk";
  std::string config_path;
  int d = 0, word_dim = 0, gcn_layers = 0, heads = 0, descriptor_rows = 0, lexical_types = 0;
  int max_objects = 0, max_question_len = 0;
  std::vector<int> steps;
  bool disable_binding = false, single_head = false, tie_gcn = false, tie_steps = false, no_boxes = false;
  std::string loss;
  double lr = 0.0, clip = 0.0;
  int batch_size = 0, epochs = 0;
  std::uint64_t seed = 0;

  std::map<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

void add_config_flags(CLI::App* app, ConfigFlags& f, bool model_flags = true) {
  f.opts["preset"] = app->add_option("--preset", f.preset, "Base configuration: desk, paper or tiny")
                         ->check(CLI::IsMember({"desk", "paper", "tiny"}));
  f.opts["config"] = app->add_option("--config", f.config_path, "JSON file with \"model\" and/or \"train\" objects");
  f.opts["epochs"] = app->add_option("--epochs", f.epochs, "Training epochs");
  f.opts["seed"] = app->add_option("--seed", f.seed, "Seed (default: LOGNET_SEED or 1)");
  f.opts["lr"] = app->add_option("--lr", f.lr, "Adam learning rate");
  f.opts["batch-size"] = app->add_option("--batch-size", f.batch_size, "Minibatch size");
  f.opts["clip"] = app->add_option("--clip", f.clip, "Gradient-norm clip");
  if (!model_flags) return;
  f.opts["d"] = app->add_option("--d", f.d, "Feature dimension");
  f.opts["word-dim"] = app->add_option("--word-dim", f.word_dim, "Word embedding width");
  f.opts["steps"] = app->add_option("--steps", f.steps, "Reasoning steps T; several values run a sweep")
                        ->delimiter(',');
  f.opts["gcn-layers"] = app->add_option("--gcn-layers", f.gcn_layers, "GCN depth H");
  f.opts["heads"] = app->add_option("--heads", f.heads, "Controlling-signal heads K");
  f.opts["descriptor-rows"] = app->add_option("--descriptor-rows", f.descriptor_rows, "Adjacency rank r");
  f.opts["lexical-types"] = app->add_option("--lexical-types", f.lexical_types, "Lexical types P");
  f.opts["max-objects"] = app->add_option("--max-objects", f.max_objects, "Largest scene the model accepts");
  f.opts["max-question-len"] = app->add_option("--max-question-len", f.max_question_len, "Question truncation");
  f.opts["disable-binding"] = app->add_flag("--disable-binding", f.disable_binding, "Drop language binding");
  f.opts["single-head"] = app->add_flag("--single-head", f.single_head, "One controlling-signal head");
  f.opts["tie-gcn"] = app->add_flag("--tie-gcn", f.tie_gcn, "Share one GCN layer across depth");
  f.opts["tie-steps"] = app->add_flag("--tie-steps", f.tie_steps, "Share step weights across T");
  f.opts["no-boxes"] = app->add_flag("--no-boxes", f.no_boxes, "Ignore bounding boxes");
  f.opts["loss"] = app->add_option("--loss", f.loss, "ce or bce")->check(CLI::IsMember({"ce", "bce"}));
}

struct Resolved {
  ModelConfig model;
  TrainConfig train;
  std::vector<int> steps;  // sweep values (at least one)
};

// flag > config file > LOGNET_SEED / preset defaults
Resolved resolve(const ConfigFlags& f) {
  Resolved r;
  r.model = f.preset == "paper" ? ModelConfig::paper_scale()
            : f.preset == "tiny" ? ModelConfig::gradcheck_tiny()
                                 : ModelConfig::desk();
  r.train.seed = default_seed();
  if (f.given("config")) {
    const auto j = read_json_file(f.config_path);
    try {
      if (j.contains("model")) r.model = model_config_from_json(j.at("model"), r.model);
      if (j.contains("train")) r.train = train_config_from_json(j.at("train"), r.train);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(f.config_path + ": " + e.what());
    }
  }
  auto& m = r.model;
  if (f.given("d")) m.d = f.d;
  if (f.given("word-dim")) m.word_dim = f.word_dim;
  if (f.given("gcn-layers")) m.gcn_layers = f.gcn_layers;
  if (f.given("heads")) m.heads = f.heads;
  if (f.given("descriptor-rows")) m.descriptor_rows = f.descriptor_rows;
  if (f.given("lexical-types")) m.lexical_types = f.lexical_types;
  if (f.given("max-objects")) m.max_objects = f.max_objects;
  if (f.given("max-question-len")) m.max_question_len = f.max_question_len;
  if (f.given("disable-binding")) m.disable_binding = true;
  if (f.given("single-head")) m.single_head = true;
  if (f.given("tie-gcn")) m.tie_gcn = true;
  if (f.given("tie-steps")) m.tie_steps = true;
  if (f.given("no-boxes")) m.use_boxes = false;
  if (f.given("loss")) m.loss = f.loss == "bce" ? LossKind::kBinaryCrossEntropy : LossKind::kCrossEntropy;
  auto& t = r.train;
  if (f.given("epochs")) t.epochs = f.epochs;
  if (f.given("seed")) t.seed = f.seed;
  if (f.given("lr")) t.lr = f.lr;
  if (f.given("batch-size")) t.batch_size = f.batch_size;
  if (f.given("clip")) t.clip_norm = f.clip;
  r.steps = f.given("steps") ? f.steps : std::vector<int>{m.steps};
  m.steps = r.steps.front();
  if (t.epochs < 1) throw ConfigError("--epochs must be positive");
  if (t.batch_size < 2) throw ConfigError("--batch-size must be at least 2 (batch norm needs two samples)");
  if (!(t.lr > 0.0)) throw ConfigError("--lr must be positive");
  if (!(t.clip_norm > 0.0)) throw ConfigError("--clip must be positive");
  for (int s : r.steps)
    if (s < 1) throw ConfigError("--steps values must be positive");
  return r;
}

// ---- datasets --------------------------------------------------------------

struct Dataset {
  Vocabulary vocab;
  std::vector<toy::Sample> train, val;
  fs::path train_path, val_path, vocab_path;
};

Vocabulary load_vocab(const fs::path& dir) {
  const auto path = dir / "vocab.txt";
  return fs::exists(path) ? Vocabulary::load(path) : toy::build_vocabulary();
}

Dataset load_dataset(const fs::path& dir, bool need_train) {
  if (!fs::is_directory(dir)) throw IoError("data directory " + dir.string() + " does not exist");
  Dataset d;
  d.vocab_path = dir / "vocab.txt";
  d.vocab = load_vocab(dir);
  d.train_path = dir / "train.jsonl";
  d.val_path = dir / "val.jsonl";
  if (need_train) d.train = toy::read_jsonl(d.train_path);
  d.val = toy::read_jsonl(d.val_path);
  return d;
}

// A .jsonl file, or a data directory plus split name.
fs::path split_path(const fs::path& data, const std::string& split) {
  return fs::is_directory(data) ? data / (split + ".jsonl") : data;
}

// Fits vocabulary size, answer space and object budget to the data.
void fit_to_data(ModelConfig& m, const Vocabulary& vocab, std::span<const toy::Sample> samples) {
  m.vocab_size = static_cast<int>(vocab.size());
  m.num_answers = static_cast<int>(toy::answer_space().size());
  std::size_t most = 0;
  for (const auto& s : samples) most = std::max(most, s.scene.objects.size());
  if (most > static_cast<std::size_t>(m.max_objects))
    throw ConfigError("dataset has scenes with " + std::to_string(most) + " objects but max_objects is " +
                      std::to_string(m.max_objects) + "; pass --max-objects " + std::to_string(most));
}

void check_vocabulary(const Vocabulary& vocab, std::span<const toy::Sample> samples) {
  for (const auto& s : samples)
    for (const auto& w : s.tokens)
      if (vocab.index(w) == Vocabulary::kUnk && w != vocab.token(Vocabulary::kUnk))
        throw ConfigError("question word '" + w + "' is not in the model vocabulary (\"" + s.text + "\")");
}

void check_checkpoint_answers(const Checkpoint& c) {
  if (c.answers != toy::answer_space()) throw ConfigError("checkpoint answer space differs from the toy answer space");
}

Vocabulary checkpoint_vocabulary(const Checkpoint& c) {
  Vocabulary v;
  for (std::size_t i = 2; i < c.vocabulary.size(); ++i) v.add(c.vocabulary[i]);
  return v;
}

// ---- generate-data ---------------------------------------------------------

struct GenerateArgs {
  std::string out;
  std::uint64_t seed = 0;
  std::size_t train = 5000, val = 1000, test = 1000;
  std::string n_objects = "4-10";
  std::vector<std::string> templates;
  CLI::Option* seed_opt = nullptr;
};

std::pair<int, int> parse_range(const std::string& s) {
  const auto dash = s.find('-');
  try {
    if (dash == std::string::npos) {
      const int n = std::stoi(s);
      return {n, n};
    }
    return {std::stoi(s.substr(0, dash)), std::stoi(s.substr(dash + 1))};
  } catch (const std::exception&) {
    throw ConfigError("--n-objects expects N or MIN-MAX, got '" + s + "'");
  }
}

int cmd_generate(const GenerateArgs& a, const std::vector<std::string>& argv) {
  toy::GeneratorConfig gc;
  std::tie(gc.min_objects, gc.max_objects) = parse_range(a.n_objects);
  if (gc.min_objects < 2 || gc.max_objects < gc.min_objects || gc.max_objects > 10)
    throw ConfigError("--n-objects must satisfy 2 <= MIN <= MAX <= 10");
  if (!a.templates.empty()) {
    gc.families.clear();
    for (const auto& t : a.templates) {
      try {
        gc.families.push_back(toy::family_from_name(t));
      } catch (const std::invalid_argument&) {
        throw ConfigError("unknown template '" + t + "' (use query, exist, count, compare, spatial)");
      }
    }
  }
  if (a.train < 2) throw ConfigError("--train must be at least 2");
  if (a.val < 1) throw ConfigError("--val must be at least 1");
  const std::uint64_t seed = a.seed_opt->count() ? a.seed : default_seed();
  const fs::path out(a.out);
  ensure_dir(out);

  RunManifest m;
  m.command = "generate-data";
  m.argv = argv;
  m.seed = seed;
  std::vector<std::string> families;
  for (auto f : gc.families) families.emplace_back(toy::family_name(f));
  m.config = nlohmann::json{{"seed", seed},
                            {"train", a.train},
                            {"val", a.val},
                            {"test", a.test},
                            {"min_objects", gc.min_objects},
                            {"max_objects", gc.max_objects},
                            {"templates", families}};
  write_text(out / "generator.json", m.config.dump(2) + "\n");

  nlohmann::ordered_json audits;
  const std::pair<toy::Split, std::size_t> splits[] = {
      {toy::Split::kTrain, a.train}, {toy::Split::kVal, a.val}, {toy::Split::kTest, a.test}};
  const char* names[] = {"train", "val", "test"};
  for (int i = 0; i < 3; ++i) {
    const auto samples = toy::generate_split(seed, splits[i].first, splits[i].second, gc);
    const auto path = out / (std::string(names[i]) + ".jsonl");
    toy::write_jsonl(path, samples);
    m.outputs[names[i]] = path.string();
    if (!samples.empty()) {
      const auto au = toy::audit(samples);
      audits[names[i]] = toy::to_json(au);
      std::cout << names[i] << ": " << au.total << " samples, majority answer '" << au.majority_answer << "' "
                << pct(au.majority_baseline) << "%\n";
    }
  }
  toy::build_vocabulary().save(out / "vocab.txt");
  write_text(out / "audit.json", audits.dump(2) + "\n");
  m.outputs["vocab"] = (out / "vocab.txt").string();
  m.outputs["audit"] = (out / "audit.json").string();
  m.results = nlohmann::json{{"train_majority_baseline", audits["train"]["majority_baseline"]}};
  write_manifest(out / "manifest.json", m);
  std::cout << "wrote " << out.string() << "\n";
  return kOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  ConfigFlags flags;
  std::string data, out = "runs/train", resume;
  double fraction = 1.0;
  int workers = 1;
};

int train_one(const TrainArgs& a, Resolved r, const Dataset& data, const fs::path& out,
              const std::vector<std::string>& argv) {
  ensure_dir(out);
  std::optional<Checkpoint> resume;
  if (!a.resume.empty()) {
    resume = load_checkpoint(a.resume);
    check_checkpoint_answers(*resume);
    if (checkpoint_vocabulary(*resume).size() != data.vocab.size() ||
        !(checkpoint_vocabulary(*resume) == data.vocab))
      throw ConfigError("checkpoint vocabulary differs from " + data.vocab_path.string());
    r.model = resume->model;
    const int epochs = a.flags.given("epochs") ? r.train.epochs : resume->train.epochs;
    r.train = resume->train;
    r.train.epochs = epochs;
    if (resume->epoch >= r.train.epochs)
      throw ConfigError("checkpoint is already at epoch " + std::to_string(resume->epoch) +
                        "; pass a larger --epochs to continue");
  } else {
    fit_to_data(r.model, data.vocab, data.train);
    fit_to_data(r.model, data.vocab, data.val);
  }
  r.model.validate();
  check_vocabulary(data.vocab, data.train);
  auto train_set = encode_all(data.train, data.vocab, r.model);
  const auto val_set = encode_all(data.val, data.vocab, r.model);
  if (!(a.fraction > 0.0 && a.fraction <= 1.0)) throw ConfigError("--train-fraction must be in (0, 1]");
  const auto keep = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(a.fraction * static_cast<double>(train_set.size()))));
  train_set.resize(std::min(keep, train_set.size()));

  write_text(out / "config.json",
             nlohmann::json{{"model", to_json(r.model)}, {"train", to_json(r.train)}}.dump(2) + "\n");
  std::cout << "model " << to_json(r.model).dump() << "\n";
  std::cout << "train " << to_json(r.train).dump() << "\n";
  std::cout << "samples: train " << train_set.size() << ", val " << val_set.size() << "; kernels "
            << kernels::active().name << "\n";
  std::cout << " epoch | train loss | train acc | val loss | val acc |   secs\n";
  TrainOptions opts;
  opts.resume = resume ? &*resume : nullptr;
  opts.on_epoch = [](const EpochSummary& s) {
    std::cout << std::setw(6) << s.epoch << " | " << std::setw(10) << std::fixed << std::setprecision(4)
              << s.train_loss << " | " << std::setw(8) << pct(s.train_accuracy) << "% | " << std::setw(8)
              << s.val.loss << " | " << std::setw(6) << pct(s.val.accuracy) << "% | " << std::setw(6)
              << std::setprecision(1) << s.seconds << std::endl;
  };
  TrainResult result = train(r.model, r.train, data.vocab, train_set, val_set, opts);
  save_checkpoint(out / "best.ckpt", result.best);
  save_checkpoint(out / "last.ckpt", result.last);
  write_metrics_csv(out / "metrics.csv", result.metrics);

  RunManifest m;
  m.command = "train";
  m.argv = argv;
  m.seed = r.train.seed;
  m.config = nlohmann::json{{"model", to_json(r.model)},
                            {"train", to_json(r.train)},
                            {"train_fraction", a.fraction},
                            {"train_samples", train_set.size()}};
  m.inputs = {{"train", data.train_path.string()}, {"val", data.val_path.string()}};
  m.input_digests = {{"train", file_digest(data.train_path)}, {"val", file_digest(data.val_path)}};
  if (resume) {
    m.inputs["resume"] = a.resume;
    m.input_digests["resume"] = file_digest(a.resume);
  }
  m.outputs = {{"best", (out / "best.ckpt").string()},
               {"last", (out / "last.ckpt").string()},
               {"metrics", (out / "metrics.csv").string()}};
  m.results = nlohmann::json{{"best_val_accuracy", result.best.best_val_accuracy},
                             {"best_epoch", result.best.epoch},
                             {"last_epoch", result.last.epoch}};
  write_manifest(out / "manifest.json", m);
  std::cout << "best val accuracy " << pct(result.best.best_val_accuracy) << "% at epoch " << result.best.epoch
            << "; checkpoints in " << out.string() << "\n";
  return kOk;
}

int cmd_train(const TrainArgs& a, const std::vector<std::string>& argv) {
  Resolved r = resolve(a.flags);
  const Dataset data = load_dataset(a.data, true);
  if (r.steps.size() == 1) return train_one(a, r, data, a.out, argv);
  if (!a.resume.empty()) throw ConfigError("--resume cannot be combined with a --steps sweep");
  nlohmann::json summary = nlohmann::json::array();
  for (int t : r.steps) {
    Resolved one = r;
    one.model.steps = t;
    const fs::path out = fs::path(a.out) / ("steps-" + std::to_string(t));
    std::cout << "== T=" << t << " ==\n";
    train_one(a, one, data, out, argv);
    summary.push_back({{"steps", t}, {"manifest", (out / "manifest.json").string()}});
  }
  write_text(fs::path(a.out) / "sweep.json", summary.dump(2) + "\n");
  return kOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, data, split = "val", out;
  int workers = 1;
  std::size_t batch_size = 64;
};

int cmd_eval(const EvalArgs& a, const std::vector<std::string>& argv) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  check_checkpoint_answers(ckpt);
  const fs::path path = split_path(a.data, a.split);
  const auto samples = toy::read_jsonl(path);
  if (samples.empty()) throw ConfigError(path.string() + " holds no samples");
  const Vocabulary vocab = checkpoint_vocabulary(ckpt);
  check_vocabulary(vocab, samples);
  Model model = model_from_checkpoint(ckpt);
  const auto data = encode_all(samples, vocab, model.config());
  if (a.workers < 1) throw ConfigError("--workers must be positive");
  const EvalReport rep = evaluate(model, data, a.workers, a.batch_size);
  const auto au = toy::audit(samples);

  nlohmann::ordered_json j;
  j["accuracy"] = rep.accuracy;
  j["loss"] = rep.loss;
  j["count"] = rep.count;
  j["majority_baseline"] = au.majority_baseline;
  j["majority_answer"] = au.majority_answer;
  for (const auto& [type, acc] : rep.type_accuracy) {
    j["types"][type] = {{"accuracy", acc},
                        {"count", rep.type_count.at(type)},
                        {"chance", au.family_chance.count(type) ? au.family_chance.at(type) : 0.0}};
  }
  std::cout << "accuracy " << pct(rep.accuracy) << "% over " << rep.count << " samples (loss " << std::setprecision(6)
            << rep.loss << "; majority baseline " << pct(au.majority_baseline) << "%)\n";
  for (const auto& [type, acc] : rep.type_accuracy)
    std::cout << "  " << std::left << std::setw(8) << type << std::right << " " << std::setw(6) << pct(acc)
              << "%  n=" << rep.type_count.at(type) << "  chance "
              << pct(au.family_chance.count(type) ? au.family_chance.at(type) : 0.0) << "%\n";

  const fs::path out = a.out.empty() ? fs::path(a.checkpoint).parent_path() / ("eval-" + path.stem().string())
                                     : fs::path(a.out);
  ensure_dir(out);
  write_text(out / "report.json", j.dump(2) + "\n");
  RunManifest m;
  m.command = "eval";
  m.argv = argv;
  m.seed = ckpt.train.seed;
  m.config = nlohmann::json{{"model", to_json(ckpt.model)}, {"workers", a.workers}, {"batch_size", a.batch_size}};
  m.inputs = {{"checkpoint", a.checkpoint}, {"data", path.string()}};
  m.input_digests = {{"checkpoint", file_digest(a.checkpoint)}, {"data", file_digest(path)}};
  m.outputs = {{"report", (out / "report.json").string()}};
  m.results = nlohmann::json{{"accuracy", rep.accuracy}, {"loss", rep.loss}};
  write_manifest(out / "manifest.json", m);
  return kOk;
}

// ---- gradcheck -------------------------------------------------------------

struct GradcheckArgs {
  double tolerance = 1e-4, step = 1e-5;
  std::uint64_t seed = 7;
  std::string corrupt, out = "runs/gradcheck";
};

int cmd_gradcheck(const GradcheckArgs& a, const std::vector<std::string>& argv) {
  GradcheckOptions o;
  o.tolerance = a.tolerance;
  o.step = a.step;
  o.seed = a.seed;
  if (!a.corrupt.empty()) o.corrupt_group = a.corrupt;
  const GradcheckReport rep = gradcheck(o);
  nlohmann::ordered_json groups = nlohmann::ordered_json::array();
  std::cout << std::left << std::setw(20) << "group" << std::right << std::setw(7) << "size"
            << "  rel error  abs error\n";
  for (const auto& g : rep.groups) {
    std::cout << std::left << std::setw(20) << g.group << std::right << std::setw(7) << g.elements << "  "
              << std::scientific << std::setprecision(3) << g.max_rel_error << "  " << g.max_abs_error << "  "
              << (g.pass ? "ok" : "FAIL") << "\n";
    groups.push_back({{"group", g.group}, {"elements", g.elements}, {"max_rel_error", g.max_rel_error},
                      {"max_abs_error", g.max_abs_error}, {"pass", g.pass}});
  }
  std::cout << std::defaultfloat << (rep.pass ? "PASS" : "FAIL") << ": max relative error " << rep.max_rel_error
            << " (tolerance " << a.tolerance << "), max absolute difference " << rep.max_abs_error << " in "
            << std::fixed << std::setprecision(2) << rep.seconds << " s\n";
  const fs::path out(a.out);
  ensure_dir(out);
  nlohmann::ordered_json j{{"pass", rep.pass}, {"max_rel_error", rep.max_rel_error},
                           {"max_abs_error", rep.max_abs_error}, {"seconds", rep.seconds},
                           {"groups", groups}};
  write_text(out / "report.json", j.dump(2) + "\n");
  RunManifest m;
  m.command = "gradcheck";
  m.argv = argv;
  m.seed = a.seed;
  m.config = nlohmann::json{{"model", to_json(o.config)}, {"step", a.step}, {"tolerance", a.tolerance},
                            {"batch", o.batch}, {"objects", o.objects}, {"words", o.words}};
  m.outputs = {{"report", (out / "report.json").string()}};
  m.results = nlohmann::json{{"pass", rep.pass}, {"max_rel_error", rep.max_rel_error}};
  write_manifest(out / "manifest.json", m);
  return rep.pass ? kOk : kValidation;
}

// ---- inspect ---------------------------------------------------------------

struct InspectArgs {
  std::string checkpoint, data, split = "val", format = "both", out = "runs/inspect";
  long sample_id = 0;
  double threshold = 0.05;
};

int cmd_inspect(const InspectArgs& a, const std::vector<std::string>& argv) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  check_checkpoint_answers(ckpt);
  const fs::path path = split_path(a.data, a.split);
  const auto samples = toy::read_jsonl(path);
  if (a.sample_id < 0 || static_cast<std::size_t>(a.sample_id) >= samples.size())
    throw ConfigError("--sample-id " + std::to_string(a.sample_id) + " is out of range (" + path.string() + " has " +
                      std::to_string(samples.size()) + " samples)");
  const toy::Sample& sample = samples[static_cast<std::size_t>(a.sample_id)];
  const Vocabulary vocab = checkpoint_vocabulary(ckpt);
  Model model = model_from_checkpoint(ckpt);
  const EncodedSample enc = encode_sample(sample, vocab, model.config());
  const EncodedSample* batch[] = {&enc};
  const BatchForward fw = model.forward(batch, Mode::kEval);
  const int predicted = predictions(fw.logits).front();

  TraceLabels labels;
  for (std::size_t s = 0; s < enc.tokens.size(); ++s) labels.words.push_back(sample.tokens[s]);
  for (std::size_t i = 0; i < sample.scene.objects.size(); ++i) {
    const auto& o = sample.scene.objects[i];
    std::string label = std::to_string(i) + ":";
    for (auto attr : {toy::Attribute::kSize, toy::Attribute::kColor, toy::Attribute::kMaterial,
                      toy::Attribute::kShape})
      label += " " + std::string(toy::attribute_value(attr, o.attr(attr)));
    labels.objects.push_back(label);
  }
  const fs::path out(a.out);
  ensure_dir(out);
  RunManifest m;
  m.command = "inspect";
  m.argv = argv;
  m.seed = ckpt.train.seed;
  m.config = nlohmann::json{{"model", to_json(ckpt.model)}, {"sample_id", a.sample_id}, {"format", a.format},
                            {"threshold", a.threshold}};
  m.inputs = {{"checkpoint", a.checkpoint}, {"data", path.string()}};
  m.input_digests = {{"checkpoint", file_digest(a.checkpoint)}, {"data", file_digest(path)}};
  std::cout << "question: " << sample.text << "\nanswer: " << sample.answer
            << "  predicted: " << toy::answer_space()[static_cast<std::size_t>(predicted)] << "\n";
  std::cout << " step | beta sharpness\n";
  nlohmann::ordered_json sharpness = nlohmann::ordered_json::array();
  const auto& traces = fw.samples.front().traces;
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const int step = static_cast<int>(t) + 1;
    const std::string stem = "step" + std::to_string(step);
    if (a.format == "json" || a.format == "both") {
      write_text(out / (stem + ".json"), trace_to_json(traces[t], step, labels).dump(2) + "\n");
      m.outputs[stem + ".json"] = (out / (stem + ".json")).string();
    }
    if (a.format == "dot" || a.format == "both") {
      write_text(out / (stem + ".dot"), trace_to_dot(traces[t], step, labels, a.threshold));
      m.outputs[stem + ".dot"] = (out / (stem + ".dot")).string();
    }
    const double sharp = beta_sharpness(traces[t].beta);
    sharpness.push_back(sharp);
    std::cout << std::setw(5) << step << " | " << std::fixed << std::setprecision(4) << sharp << "\n";
  }
  nlohmann::ordered_json summary{{"sample_id", a.sample_id},
                                 {"question", sample.text},
                                 {"answer", sample.answer},
                                 {"predicted", toy::answer_space()[static_cast<std::size_t>(predicted)]},
                                 {"beta_sharpness", sharpness}};
  write_text(out / "summary.json", summary.dump(2) + "\n");
  m.outputs["summary"] = (out / "summary.json").string();
  m.results = nlohmann::json{{"beta_sharpness", sharpness}};
  write_manifest(out / "manifest.json", m);
  return kOk;
}

// ---- ablate ----------------------------------------------------------------

struct AblateArgs {
  ConfigFlags flags;
  std::string data, out = "runs/ablate";
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<int> steps{1, 4, 8, 12};
  std::vector<double> fractions{0.1, 0.25, 0.5, 1.0};
  bool no_variants = false, no_data_sweep = false;
};

int cmd_ablate(const AblateArgs& a, const std::vector<std::string>& argv) {
  Resolved r = resolve(a.flags);
  const Dataset data = load_dataset(a.data, true);
  fit_to_data(r.model, data.vocab, data.train);
  fit_to_data(r.model, data.vocab, data.val);
  r.model.validate();
  const auto train_set = encode_all(data.train, data.vocab, r.model);
  const auto val_set = encode_all(data.val, data.vocab, r.model);
  for (double f : a.fractions)
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("--fractions values must be in (0, 1]");
  if (a.seeds.empty()) throw ConfigError("--seeds needs at least one seed");

  AblationOptions o;
  o.base = r.model;
  o.train = r.train;
  o.seeds = a.seeds;
  o.steps = a.steps;
  o.fractions = a.fractions;
  o.variants = !a.no_variants;
  o.data_sweep = !a.no_data_sweep;
  o.out_dir = a.out;
  o.data_dir = a.data;
  o.on_run = [](const AblationRun& run) {
    std::cout << std::left << std::setw(12) << run.label << std::right << " seed " << run.seed << "  val "
              << pct(run.val_accuracy) << "%  (" << std::fixed << std::setprecision(0) << run.seconds << " s)"
              << std::endl;
  };
  ensure_dir(a.out);
  const AblationReport rep = run_ablations(o, data.vocab, train_set, val_set);
  const std::string md = to_markdown(rep);
  std::cout << "\n" << md;
  const fs::path out(a.out);
  write_text(out / "report.md", md);
  write_csv(out / "report.csv", rep);

  RunManifest m;
  m.command = "ablate";
  m.argv = argv;
  m.seed = a.seeds.front();
  m.config = nlohmann::json{{"model", to_json(r.model)}, {"train", to_json(r.train)}, {"seeds", a.seeds},
                            {"steps", a.steps}, {"fractions", a.fractions}, {"variants", o.variants},
                            {"data_sweep", o.data_sweep}};
  m.inputs = {{"train", data.train_path.string()}, {"val", data.val_path.string()}};
  m.input_digests = {{"train", file_digest(data.train_path)}, {"val", file_digest(data.val_path)}};
  m.outputs = {{"report_md", (out / "report.md").string()}, {"report_csv", (out / "report.csv").string()}};
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : rep.verdicts)
    verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"required", v.required}, {"detail", v.detail}});
  m.results = nlohmann::json{{"pass", rep.pass}, {"complete", rep.complete}, {"verdicts", verdicts}};
  write_manifest(out / "manifest.json", m);
  if (!rep.complete) {
    std::cerr << "error: ablation stopped early: " << rep.error << "\n";
    return kValidation;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"LOGNet: language-binding object graph reasoning on a toy VQA task", "lognet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate-data", "Generate toy scenes, questions and answers");
  g->add_option("--out", gen.out, "Output directory")->required();
  gen.seed_opt = g->add_option("--seed", gen.seed, "Seed (default: LOGNET_SEED or 1)");
  g->add_option("--train", gen.train, "Training samples")->capture_default_str();
  g->add_option("--val", gen.val, "Validation samples")->capture_default_str();
  g->add_option("--test", gen.test, "Test samples")->capture_default_str();
  g->add_option("--n-objects", gen.n_objects, "Objects per scene, N or MIN-MAX")->capture_default_str();
  g->add_option("--templates", gen.templates, "Question families to use")->delimiter(',');

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--data", tr.data, "Directory from generate-data")->required();
  t->add_option("--out", tr.out, "Output directory")->capture_default_str();
  t->add_option("--resume", tr.resume, "Continue from a checkpoint");
  t->add_option("--train-fraction", tr.fraction, "Use the first fraction of the training split")
      ->capture_default_str();
  add_config_flags(t, tr.flags);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  e->add_option("--data", ev.data, "JSONL file or data directory")->required();
  e->add_option("--split", ev.split, "Split file used when --data is a directory")->capture_default_str();
  e->add_option("--workers", ev.workers, "Evaluation threads")->capture_default_str();
  e->add_option("--batch-size", ev.batch_size, "Evaluation batch size")->capture_default_str();
  e->add_option("--out", ev.out, "Report directory (default: next to the checkpoint)");

  GradcheckArgs gc;
  auto* c = app.add_subcommand("gradcheck", "Finite-difference gradient check on a tiny model");
  c->add_option("--tolerance", gc.tolerance, "Max relative error")->capture_default_str();
  c->add_option("--step", gc.step, "Central-difference step")->capture_default_str();
  c->add_option("--seed", gc.seed, "Seed")->capture_default_str();
  c->add_option("--corrupt-group", gc.corrupt, "Perturb one group's analytic gradients (negative control)");
  c->add_option("--out", gc.out, "Report directory")->capture_default_str();

  InspectArgs in;
  auto* i = app.add_subcommand("inspect", "Export per-step reasoning traces for one sample");
  i->add_option("--checkpoint", in.checkpoint, "Checkpoint file")->required();
  i->add_option("--data", in.data, "JSONL file or data directory")->required();
  i->add_option("--split", in.split, "Split file used when --data is a directory")->capture_default_str();
  i->add_option("--sample-id", in.sample_id, "Sample index")->capture_default_str();
  i->add_option("--format", in.format, "json, dot or both")
      ->check(CLI::IsMember({"json", "dot", "both"}))
      ->capture_default_str();
  i->add_option("--threshold", in.threshold, "Smallest edge weight drawn in DOT")->capture_default_str();
  i->add_option("--out", in.out, "Output directory")->capture_default_str();

  AblateArgs ab;
  auto* b = app.add_subcommand("ablate", "Ablation grid and data-efficiency sweep over several seeds");
  b->add_option("--data", ab.data, "Directory from generate-data")->required();
  b->add_option("--out", ab.out, "Output directory")->capture_default_str();
  b->add_option("--seeds", ab.seeds, "Seeds")->delimiter(',');
  b->add_option("--depths", ab.steps, "Reasoning depths to compare")->delimiter(',');
  b->add_option("--fractions", ab.fractions, "Training-set fractions")->delimiter(',');
  b->add_flag("--no-variants", ab.no_variants, "Skip the single-head and no-binding rows");
  b->add_flag("--no-data-sweep", ab.no_data_sweep, "Skip the data-efficiency sweep");
  add_config_flags(b, ab.flags);

  std::string manifest_path;
  auto* re = app.add_subcommand("rerun", "Replay the command recorded in a manifest");
  re->add_option("--manifest", manifest_path, "manifest.json")->required();

  std::vector<std::string> argv_storage{"lognet"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& err) {
      const int code = app.exit(err);
      return code == 0 ? kOk : kValidation;
    }
    if (*g) return cmd_generate(gen, args);
    if (*t) return cmd_train(tr, args);
    if (*e) return cmd_eval(ev, args);
    if (*c) return cmd_gradcheck(gc, args);
    if (*i) return cmd_inspect(in, args);
    if (*b) return cmd_ablate(ab, args);
    if (*re) {
      const RunManifest m = read_manifest(manifest_path);
      if (m.argv.empty() || m.argv.front() == "rerun") throw ConfigError("manifest has no replayable command");
      return run(m.argv);
    }
    return kValidation;
  } catch (const TrainingAborted& err) {
    std::cerr << "error: training aborted: " << err.what() << "\n";
    return kNumeric;
  } catch (const NumericError& err) {
    std::cerr << "error: numeric failure: " << err.what() << "\n";
    return kNumeric;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kIo;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kValidation;
  }
}

}  // namespace lognet::cli
