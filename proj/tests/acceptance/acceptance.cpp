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


// Acceptance checks. Each criterion prints one line:
//   [PASS|FAIL] <n> <name>: <measurements>
// Usage: lognet_acceptance --work DIR [--criterion N]...

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli.hpp"
#include "lognet/training.hpp"

namespace fs = std::filesystem;
using namespace lognet;

namespace {

// Training settings used wherever the desk model is trained to convergence.
const std::vector<std::string> kDeskTrain{"--preset", "desk", "--epochs", "30", "--lr", "1e-3", "--batch-size", "32",
                                          "--seed", "1"};
constexpr int kAblationEpochs = 12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

void must(int code, const std::string& what) {
  if (code != 0) throw std::runtime_error(what + " exited with " + std::to_string(code));
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

fs::path dataset(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json"))
    must(cli::run({"generate-data", "--out", dir.string(), "--seed", "1"}), "generate-data");
  return dir;
}

ModelConfig desk_for_toy() {
  ModelConfig c = ModelConfig::desk();
  c.vocab_size = static_cast<int>(toy::build_vocabulary().size());
  c.num_answers = static_cast<int>(toy::answer_space().size());
  return c;
}

EncodedSample random_sample(Rng& rng, const ModelConfig& cfg) {
  EncodedSample s;
  const int words = 1 + rng.below(cfg.max_question_len);
  const int objects = 2 + rng.below(cfg.max_objects - 1);
  for (int i = 0; i < words; ++i) s.tokens.push_back(2 + rng.below(cfg.vocab_size - 2));
  for (int i = 0; i < objects; ++i) {
    RegionFeature r;
    for (int k = 0; k < cfg.appearance_dim; ++k) r.appearance.push_back(rng.uniform(-1.5, 1.5));
    const double x0 = rng.uniform(0.0, 0.8), y0 = rng.uniform(0.0, 0.8);
    r.box = {x0, y0, x0 + rng.uniform(0.05, 0.2), y0 + rng.uniform(0.05, 0.2)};
    s.regions.push_back(r);
  }
  s.label = rng.below(cfg.num_answers);
  return s;
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.values().begin(), t.values().end(), [](double v) { return std::isfinite(v); });
}

double worst_row_sum_error(const Tensor& t) {
  double worst = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < t.cols(); ++c) s += t.at(r, c);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

// ---- 1 ---------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto rep = gradcheck();
  Outcome o;
  o.pass = rep.pass && rep.max_rel_error < 1e-4 && rep.seconds < 60.0;
  o.detail = "max rel error " + fmt(rep.max_rel_error, 3) + " (abs diff " + fmt(rep.max_abs_error, 3) + ") over " +
             std::to_string(rep.groups.size()) + " groups (tol 1e-4), " + fmt(rep.seconds, 3) + " s (limit 60)";
  for (const auto& g : rep.groups)
    if (!g.pass) o.detail += "; failing " + g.group;
  return o;
}

// ---- 2 ---------------------------------------------------------------------

Outcome structural_invariants() {
  ModelConfig cfg = desk_for_toy();
  Model model(cfg, 11);
  Rng rng(12);
  std::size_t steps = 0, non_finite = 0, asym = 0, rank_excess = 0;
  double softmax_err = 0.0, min_eig = 0.0, mass_err = 0.0, beta_excess = 0.0;
  while (steps < 10000) {
    for (auto& p : model.params().all())
      for (auto& v : p.tensor.mutable_values()) v *= rng.uniform(0.5, 1.5);
    const auto s = random_sample(rng, cfg);
    const auto fw = model.forward_sample(s);
    for (std::size_t t = 0; t < fw.traces.size(); ++t, ++steps) {
      const auto& tr = fw.traces[t];
      for (const Tensor* x : {&tr.alpha, &tr.gamma, &tr.adjacency, &tr.beta, &tr.delta, &fw.states[t].memory})
        non_finite += all_finite(*x) ? 0 : 1;
      softmax_err = std::max({softmax_err, worst_row_sum_error(tr.alpha), worst_row_sum_error(transpose(tr.gamma)),
                              worst_row_sum_error(tr.delta)});
      const std::size_t n = tr.adjacency.rows();
      Eigen::MatrixXd A(n, n);
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          A(i, j) = tr.adjacency.at(i, j);
          mass += A(i, j);
          asym += tr.adjacency.at(i, j) == tr.adjacency.at(j, i) ? 0 : 1;
        }
      // descriptor rows are distributions over objects, so the entries of
      // A = ṼᵀṼ sum to Σ_k (Σ_i Ṽ_ki)² = r
      mass_err = std::max(mass_err, std::abs(mass - cfg.descriptor_rows));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
      const auto& ev = eig.eigenvalues();
      min_eig = std::min(min_eig, ev.minCoeff());
      const double tol = 1e-9 * std::max(1.0, ev.maxCoeff());
      const auto rank = static_cast<int>((ev.array() > tol).count());
      rank_excess += rank > cfg.descriptor_rows ? 1 : 0;
      for (double b : tr.beta.values())
        beta_excess = std::max({beta_excess, -b, b - 1.0 * cfg.lexical_types});
    }
    non_finite += all_finite(fw.fused) ? 0 : 1;
  }
  Outcome o;
  o.pass = non_finite == 0 && softmax_err <= 1e-9 && mass_err <= 1e-9 && asym == 0 && min_eig >= -1e-8 &&
           rank_excess == 0 && beta_excess <= 0.0;
  o.detail = std::to_string(steps) + " steps; softmax err " + fmt(softmax_err, 3) + ", descriptor mass err " +
             fmt(mass_err, 3) + ", asymmetric entries " + std::to_string(asym) + ", min eigenvalue " +
             fmt(min_eig, 3) + ", rank > r " + std::to_string(rank_excess) + ", non-finite " +
             std::to_string(non_finite);
  return o;
}

// ---- 3 ---------------------------------------------------------------------

Outcome permutation_invariance() {
  ModelConfig cfg = desk_for_toy();
  Model model(cfg, 21);
  Rng rng(22);
  // populate running statistics so eval mode is not the identity
  {
    std::vector<EncodedSample> warm;
    for (int i = 0; i < 32; ++i) warm.push_back(random_sample(rng, cfg));
    std::vector<const EncodedSample*> ptrs;
    for (const auto& w : warm) ptrs.push_back(&w);
    model.forward(ptrs, Mode::kTrain);
  }
  double logit_diff = 0.0, trace_diff = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto s = random_sample(rng, cfg);
    std::vector<std::size_t> perm(s.regions.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    EncodedSample p = s;
    for (std::size_t i = 0; i < perm.size(); ++i) p.regions[i] = s.regions[perm[i]];
    const EncodedSample* a_ptr = &s;
    const EncodedSample* b_ptr = &p;
    const auto a = model.forward({&a_ptr, 1}, Mode::kEval);
    const auto b = model.forward({&b_ptr, 1}, Mode::kEval);
    for (std::size_t i = 0; i < a.logits.size(); ++i)
      logit_diff = std::max(logit_diff, std::abs(a.logits.values()[i] - b.logits.values()[i]));
    const auto& ta = a.samples[0].traces;
    const auto& tb = b.samples[0].traces;
    for (std::size_t t = 0; t < ta.size(); ++t) {
      const std::size_t n = perm.size(), words = ta[t].beta.cols();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
          trace_diff = std::max(trace_diff, std::abs(tb[t].adjacency.at(i, j) - ta[t].adjacency.at(perm[i], perm[j])));
        for (std::size_t w = 0; w < words; ++w)
          trace_diff = std::max(trace_diff, std::abs(tb[t].beta.at(i, w) - ta[t].beta.at(perm[i], w)));
        trace_diff = std::max(trace_diff, std::abs(tb[t].delta.at(0, i) - ta[t].delta.at(0, perm[i])));
      }
    }
  }
  Outcome o;
  o.pass = logit_diff < 1e-10 && trace_diff < 1e-10;
  o.detail = "100 samples; max logit change " + fmt(logit_diff, 3) + " (limit 1e-10), max trace mismatch " +
             fmt(trace_diff, 3);
  return o;
}

// ---- 4 ---------------------------------------------------------------------

Outcome learning(const fs::path& work) {
  const fs::path data = dataset(work / "data");
  const fs::path run = work / "learning";
  const auto t0 = Clock::now();
  must(cli::run(cat({"train", "--data", data.string(), "--out", run.string()}, kDeskTrain)), "train");
  const double train_seconds = seconds_since(t0);
  must(cli::run({"eval", "--checkpoint", (run / "best.ckpt").string(), "--data", data.string(), "--split", "val",
                 "--out", (run / "eval-val").string()}),
       "eval");
  const auto rep = load_json(run / "eval-val" / "report.json");
  const double acc = rep.at("accuracy");
  const double majority = load_json(data / "audit.json").at("train").at("majority_baseline");
  const int best_epoch = load_checkpoint(run / "best.ckpt").epoch;

  // overfit sanity
  auto vocab = toy::build_vocabulary();
  ModelConfig cfg = desk_for_toy();
  const auto few = encode_all(toy::generate_split(1, toy::Split::kTrain, 20, toy::GeneratorConfig{}), vocab, cfg);
  TrainConfig tc;
  tc.lr = 1e-3;
  tc.batch_size = 20;
  tc.epochs = 200;
  TrainOptions opt;
  opt.validate = false;
  opt.max_steps = 200;
  int first_perfect = -1;
  opt.on_epoch = [&](const EpochSummary& s) {
    if (first_perfect < 0 && s.train_accuracy == 1.0) first_perfect = s.epoch;
  };
  const auto res = train(cfg, tc, vocab, few, {}, opt);
  Model fitted = model_from_checkpoint(res.last);
  const double overfit = evaluate(fitted, few).accuracy;

  Outcome o;
  o.pass = acc >= 0.85 && majority <= 0.35 && acc - majority >= 0.40 && train_seconds < 1800.0 && overfit == 1.0;
  o.detail = "val accuracy " + fmt(100 * acc) + "% (best epoch " + std::to_string(best_epoch) + ", need 85%), majority " +
             fmt(100 * majority) + "%, margin " + fmt(100 * (acc - majority)) + " points (need 40), train time " +
             fmt(train_seconds / 60.0, 3) + " min (limit 30); overfit 20 samples: " + fmt(100 * overfit) +
             "% after 200 steps" +
             (first_perfect > 0 ? ", first perfect batch at step " + std::to_string(first_perfect) : "");
  return o;
}

// ---- 5 ---------------------------------------------------------------------

Outcome ablation_trends(const fs::path& work) {
  const fs::path data = dataset(work / "data");
  const fs::path out = work / "ablation";
  auto args = cat({"ablate", "--data", data.string(), "--out", out.string(), "--seeds", "1,2,3", "--depths", "1,4",
                   "--fractions", "0.1,0.25,0.5,1"},
                  kDeskTrain);
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--epochs") args[i + 1] = std::to_string(kAblationEpochs);
  const int code = cli::run(args);
  const auto m = load_json(out / "manifest.json");
  Outcome o;
  o.pass = code == 0 && m.at("results").at("pass").get<bool>();
  std::string detail;
  for (const auto& v : m.at("results").at("verdicts")) {
    if (!v.at("required").get<bool>()) continue;
    if (!detail.empty()) detail += "; ";
    detail += v.at("name").get<std::string>() + (v.at("pass").get<bool>() ? " ok (" : " FAILED (") +
              v.at("detail").get<std::string>() + ")";
  }
  o.detail = "3 seeds, " + std::to_string(kAblationEpochs) + " epochs: " + detail;
  return o;
}

// ---- 6 ---------------------------------------------------------------------

Outcome determinism(const fs::path& work) {
  std::vector<std::string> problems;
  // dataset regeneration
  const fs::path a = work / "regen-a", b = work / "regen-b";
  fs::remove_all(a);
  fs::remove_all(b);
  must(cli::run({"generate-data", "--out", a.string(), "--seed", "5"}), "generate-data");
  must(cli::run({"generate-data", "--out", b.string(), "--seed", "5"}), "generate-data");
  std::size_t files = 0;
  for (auto f : {"train.jsonl", "val.jsonl", "test.jsonl", "vocab.txt", "audit.json", "generator.json"}) {
    ++files;
    if (slurp(a / f) != slurp(b / f)) problems.push_back(std::string(f) + " differs");
  }

  // loss sequence
  auto vocab = toy::build_vocabulary();
  ModelConfig cfg = desk_for_toy();
  const auto tr = encode_all(toy::read_jsonl(a / "train.jsonl"), vocab, cfg);
  const auto va = encode_all(toy::read_jsonl(a / "val.jsonl"), vocab, cfg);
  const std::span<const EncodedSample> tr_part(tr.data(), 640);
  TrainConfig tc;
  tc.lr = 1e-3;
  tc.epochs = 2;
  const auto r1 = train(cfg, tc, vocab, tr_part, va);
  const auto r2 = train(cfg, tc, vocab, tr_part, va);
  std::size_t mismatched = 0;
  for (std::size_t i = 0; i < r1.batch_losses.size(); ++i)
    mismatched += std::memcmp(&r1.batch_losses[i], &r2.batch_losses[i], sizeof(double)) == 0 ? 0 : 1;
  if (r1.batch_losses.size() != r2.batch_losses.size() || mismatched) problems.push_back("loss sequence differs");

  // checkpoint round trip
  const fs::path ck = work / "determinism.ckpt";
  save_checkpoint(ck, r1.last);
  Model before = model_from_checkpoint(r1.last);
  Model after = model_from_checkpoint(load_checkpoint(ck));
  const auto e1 = evaluate(before, va), e2 = evaluate(after, va);
  if (e1.accuracy != e2.accuracy || e1.loss != e2.loss) problems.push_back("reloaded checkpoint evaluates differently");

  Outcome o;
  o.pass = problems.empty();
  o.detail = std::to_string(files) + " regenerated files compared, " + std::to_string(r1.batch_losses.size()) +
             " losses compared bitwise (" + std::to_string(mismatched) + " differ), eval accuracy " +
             fmt(100 * e1.accuracy) + "% before and " + fmt(100 * e2.accuracy) + "% after reload";
  for (const auto& p : problems) o.detail += "; " + p;
  return o;
}

// ---- 7 ---------------------------------------------------------------------

// Checks node and edge statements of an undirected DOT graph.
bool valid_dot(const std::string& text, std::size_t nodes_expected) {
  if (text.rfind("graph", 0) != 0 || text.find("->") != std::string::npos) return false;
  if (std::count(text.begin(), text.end(), '{') != 1 || std::count(text.begin(), text.end(), '}') != 1) return false;
  std::istringstream is(text);
  std::set<std::string> declared;
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::string line; std::getline(is, line);) {
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    const auto dash = line.find(" -- ");
    const auto bracket = line.find(" [");
    if (dash != std::string::npos && (bracket == std::string::npos || dash < bracket)) {
      const auto end = line.find_first_of(" [;", dash + 4);
      edges.emplace_back(line.substr(0, dash), line.substr(dash + 4, end - dash - 4));
    } else if (bracket != std::string::npos && line.rfind("graph", 0) != 0 && line.rfind("node", 0) != 0 &&
               line.rfind("edge", 0) != 0) {
      declared.insert(line.substr(0, bracket));
    }
  }
  if (declared.size() != nodes_expected) return false;
  return std::all_of(edges.begin(), edges.end(),
                     [&](const auto& e) { return declared.count(e.first) && declared.count(e.second); });
}

Outcome trace_export(const fs::path& work) {
  const fs::path data = dataset(work / "data");
  fs::path ckpt = work / "learning" / "best.ckpt";
  std::string source = "criterion 4 model";
  if (!fs::exists(ckpt)) {
    const fs::path run = work / "trace-model";
    auto args = cat({"train", "--data", data.string(), "--out", run.string()}, kDeskTrain);
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--epochs") args[i + 1] = "3";
    must(cli::run(args), "train");
    ckpt = run / "best.ckpt";
    source = "3-epoch desk model";
  }
  const int steps = load_checkpoint(ckpt).model.steps;
  const auto val = toy::read_jsonl(data / "val.jsonl");
  std::size_t files = 0, bad = 0;
  std::vector<double> sharp_sum(static_cast<std::size_t>(steps), 0.0);
  const std::vector<int> ids{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  for (int id : ids) {
    const fs::path out = work / "inspect" / std::to_string(id);
    fs::remove_all(out);
    must(cli::run({"inspect", "--checkpoint", ckpt.string(), "--data", data.string(), "--split", "val", "--sample-id",
                   std::to_string(id), "--out", out.string()}),
         "inspect");
    const auto& sample = val[static_cast<std::size_t>(id)];
    const std::size_t words = std::min<std::size_t>(sample.tokens.size(), 16);
    for (int t = 1; t <= steps; ++t) {
      const std::string stem = "step" + std::to_string(t);
      files += 2;
      try {
        const auto j = load_json(out / (stem + ".json"));
        const bool ok = j.at("step") == t && j.at("adjacency").size() == sample.scene.objects.size() &&
                        j.at("beta").size() == sample.scene.objects.size() && j.at("words").size() == words &&
                        j.contains("beta_sharpness");
        bad += ok ? 0 : 1;
      } catch (const std::exception&) {
        ++bad;
      }
      bad += valid_dot(slurp(out / (stem + ".dot")), sample.scene.objects.size() + words) ? 0 : 1;
    }
    bad += fs::exists(out / ("step" + std::to_string(steps + 1) + ".json")) ? 1 : 0;
    const auto sharp = load_json(out / "summary.json").at("beta_sharpness");
    if (sharp.size() != static_cast<std::size_t>(steps)) {
      ++bad;
      continue;
    }
    for (int t = 0; t < steps; ++t) sharp_sum[static_cast<std::size_t>(t)] += sharp[static_cast<std::size_t>(t)].get<double>();
  }
  Outcome o;
  o.pass = bad == 0;
  o.detail = std::to_string(ids.size()) + " samples from the " + source + ", " + std::to_string(files) +
             " trace files, " + std::to_string(bad) + " invalid; mean beta sharpness per step:";
  for (double s : sharp_sum) o.detail += " " + fmt(s / static_cast<double>(ids.size()), 3);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LOGNet acceptance checks"};
  std::string work = "acceptance-work";
  std::vector<int> criteria;
  app.add_option("--work", work, "Scratch directory")->capture_default_str();
  app.add_option("--criterion", criteria, "Criteria to run (default: all)")->check(CLI::Range(1, 7));
  CLI11_PARSE(app, argc, argv);
  if (criteria.empty()) criteria = {1, 2, 3, 4, 5, 6, 7};
  fs::create_directories(work);
  const fs::path w(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"gradient correctness", gradient_correctness},
      {"structural invariants", structural_invariants},
      {"permutation invariance", permutation_invariance},
      {"learning", [&] { return learning(w); }},
      {"ablation trends", [&] { return ablation_trends(w); }},
      {"determinism and persistence", [&] { return determinism(w); }},
      {"trace export", [&] { return trace_export(w); }},
  };
  bool ok = true;
  std::vector<std::string> lines;
  for (int c : criteria) {
    const auto& [name, fn] = all[static_cast<std::size_t>(c - 1)];
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    std::ostringstream line;
    line << (out.pass ? "[PASS] " : "[FAIL] ") << c << " " << name << ": " << out.detail << " ["
         << std::fixed << std::setprecision(1) << seconds_since(t0) << " s]";
    lines.push_back(line.str());
    ok = ok && out.pass;
  }
  std::cout << "\n";
  for (const auto& l : lines) std::cout << l << "\n";
  return ok ? 0 : 1;
}
