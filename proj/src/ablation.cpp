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


#include "lognet/ablation.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "lognet/manifest.hpp"

namespace lognet {

namespace {

std::string steps_label(int t) { return "T=" + std::to_string(t); }

std::string fraction_label(double f) {
  std::ostringstream os;
  os << "data " << std::round(f * 100.0) << "%";
  return os.str();
}

std::string number(double v, int precision) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

const AblationSummary* find_summary(const AblationReport& r, const std::string& label) {
  for (const auto& s : r.summaries)
    if (s.label == label) return &s;
  return nullptr;
}

}  // namespace

std::vector<AblationVariant> ablation_variants(const AblationOptions& o) {
  std::vector<AblationVariant> out;
  out.push_back({"default", o.base, 1.0});
  if (o.variants) {
    ModelConfig single = o.base;
    single.single_head = true;
    out.push_back({"single-head", single, 1.0});
    ModelConfig unbound = o.base;
    unbound.disable_binding = true;
    out.push_back({"no-binding", unbound, 1.0});
  }
  for (int t : o.steps) {
    ModelConfig c = o.base;
    c.steps = t;
    out.push_back({steps_label(t), c, 1.0});
  }
  if (o.data_sweep)
    for (double f : o.fractions) out.push_back({fraction_label(f), o.base, f});
  return out;
}

AblationReport run_ablations(const AblationOptions& options, const Vocabulary& vocab,
                             std::span<const EncodedSample> train_data, std::span<const EncodedSample> val_data) {
  AblationReport report;
  const auto variants = ablation_variants(options);
  const auto runs_dir = options.out_dir / "runs";
  if (!options.out_dir.empty()) std::filesystem::create_directories(runs_dir);
  // key: canonical config + fraction + seed
  std::map<std::string, AblationRun> done;
  try {
    for (const auto& v : variants) {
      for (std::uint64_t seed : options.seeds) {
        TrainConfig tc = options.train;
        tc.seed = seed;
        const std::string key = to_json(v.model).dump() + "|" + std::to_string(v.train_fraction) + "|" +
                                std::to_string(seed) + "|" + to_json(tc).dump();
        AblationRun run;
        if (auto it = done.find(key); it != done.end()) {
          run = it->second;
          run.label = v.label;
        } else {
          const auto count = std::max<std::size_t>(
              2, static_cast<std::size_t>(std::ceil(v.train_fraction * static_cast<double>(train_data.size()))));
          const auto subset = train_data.first(std::min(count, train_data.size()));
          const auto t0 = std::chrono::steady_clock::now();
          TrainResult result = train(v.model, tc, vocab, subset, val_data);
          run.label = v.label;
          run.seed = seed;
          run.epochs = tc.epochs;
          run.train_fraction = v.train_fraction;
          run.val_accuracy = result.best.best_val_accuracy;
          run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          if (!options.out_dir.empty()) {
            std::string stem = v.label + "-seed" + std::to_string(seed);
            for (char& c : stem)
              if (c == ' ' || c == '%' || c == '=') c = '_';
            const auto config_path = runs_dir / (stem + ".config.json");
            {
              std::ofstream os(config_path);
              os << nlohmann::json{{"model", to_json(v.model)}, {"train", to_json(tc)}}.dump(2) << '\n';
            }
            RunManifest m;
            m.command = "train";
            m.argv = {"train",     "--data",   options.data_dir,         "--config",
                      config_path.string(), "--seed", std::to_string(seed), "--epochs",
                      std::to_string(tc.epochs), "--train-fraction", number(v.train_fraction, 4), "--out",
                      (runs_dir / stem).string()};
            m.config = nlohmann::json{{"model", to_json(v.model)}, {"train", to_json(tc)},
                                      {"train_fraction", v.train_fraction}, {"train_samples", subset.size()}};
            m.seed = seed;
            m.inputs["data"] = options.data_dir;
            m.results = nlohmann::json{{"label", v.label}, {"best_val_accuracy", run.val_accuracy},
                                       {"seconds", run.seconds}};
            const auto manifest_path = runs_dir / (stem + ".manifest.json");
            write_manifest(manifest_path, m);
            run.manifest = manifest_path.string();
          }
          done.emplace(key, run);
        }
        report.runs.push_back(run);
        if (options.on_run) options.on_run(run);
      }
    }
  } catch (const std::exception& e) {
    report.complete = false;
    report.error = e.what();
  }
  summarize(report, options);
  return report;
}

void summarize(AblationReport& report, const AblationOptions& options) {
  report.summaries.clear();
  report.verdicts.clear();
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_label;
  for (const auto& r : report.runs) {
    if (!by_label.contains(r.label)) order.push_back(r.label);
    by_label[r.label].push_back(r.val_accuracy);
  }
  for (const auto& label : order) {
    const auto& xs = by_label[label];
    AblationSummary s;
    s.label = label;
    s.n = xs.size();
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - s.mean) * (x - s.mean);
      s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    report.summaries.push_back(s);
  }

  auto ordering = [&](const std::string& name, const std::string& lo, const std::string& hi, bool strict,
                      bool required) {
    const auto* a = find_summary(report, lo);
    const auto* b = find_summary(report, hi);
    TrendVerdict v{name, "", false, required};
    if (a == nullptr || b == nullptr) {
      v.detail = "missing rows";
    } else {
      v.pass = strict ? a->mean < b->mean : a->mean <= b->mean;
      v.detail = lo + " " + number(100 * a->mean, 2) + (strict ? " < " : " <= ") + hi + " " +
                 number(100 * b->mean, 2);
    }
    report.verdicts.push_back(v);
  };

  const std::string base = steps_label(options.base.steps);
  if (options.variants) ordering("binding helps", "no-binding", "default", false, true);
  bool has1 = false, has4 = false;
  for (int t : options.steps) {
    has1 = has1 || t == 1;
    has4 = has4 || t == 4;
  }
  if (has1 && has4) ordering("depth 1 < 4", steps_label(1), steps_label(4), true, true);
  for (std::size_t i = 1; i < options.steps.size(); ++i) {
    const int lo = options.steps[i - 1], hi = options.steps[i];
    if (lo == 1 && hi == 4) continue;
    ordering("depth " + std::to_string(lo) + " < " + std::to_string(hi), steps_label(lo), steps_label(hi), true,
             false);
  }
  if (options.variants) ordering("multi-head helps", "single-head", "default", false, false);
  if (options.data_sweep && options.fractions.size() > 1) {
    TrendVerdict v{"data efficiency monotone", "", true, true};
    std::ostringstream detail;
    for (std::size_t i = 0; i < options.fractions.size(); ++i) {
      const auto* s = find_summary(report, fraction_label(options.fractions[i]));
      if (s == nullptr) {
        v.pass = false;
        detail << " missing " << fraction_label(options.fractions[i]);
        continue;
      }
      if (i > 0) {
        const auto* prev = find_summary(report, fraction_label(options.fractions[i - 1]));
        if (prev != nullptr && s->mean < prev->mean) v.pass = false;
        detail << " <= ";
      }
      detail << fraction_label(options.fractions[i]) << " " << number(100 * s->mean, 2);
    }
    v.detail = detail.str();
    report.verdicts.push_back(v);
  }
  report.pass = report.complete;
  for (const auto& v : report.verdicts)
    if (v.required && !v.pass) report.pass = false;
}

std::string to_markdown(const AblationReport& report) {
  std::ostringstream os;
  os << "| configuration | val acc mean (%) | sd | seeds |\n|---|---|---|---|\n";
  for (const auto& s : report.summaries)
    os << "| " << s.label << " | " << number(100 * s.mean, 2) << " | " << number(100 * s.sd, 2) << " | " << s.n
       << " |\n";
  os << "\n| check | result | detail |\n|---|---|---|\n";
  for (const auto& v : report.verdicts)
    os << "| " << v.name << (v.required ? "" : " (info)") << " | " << (v.pass ? "pass" : "FAIL") << " | "
       << v.detail << " |\n";
  os << "\n| configuration | seed | epochs | train fraction | val acc (%) | manifest |\n|---|---|---|---|---|---|\n";
  for (const auto& r : report.runs)
    os << "| " << r.label << " | " << r.seed << " | " << r.epochs << " | " << number(r.train_fraction, 2) << " | "
       << number(100 * r.val_accuracy, 2) << " | " << r.manifest << " |\n";
  if (!report.complete) os << "\nIncomplete: " << report.error << "\n";
  return os.str();
}

void write_csv(const std::filesystem::path& path, const AblationReport& report) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "label,seed,epochs,train_fraction,val_accuracy,seconds,manifest\n";
  os << std::setprecision(10);
  for (const auto& r : report.runs)
    os << r.label << ',' << r.seed << ',' << r.epochs << ',' << r.train_fraction << ',' << r.val_accuracy << ','
       << r.seconds << ',' << r.manifest << '\n';
}

}  // namespace lognet
