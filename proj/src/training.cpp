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

#include "lognet/training.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace lognet {

// ---- optimizer -------------------------------------------------------------

double Adam::step(ParameterSet& params) {
  auto& all = params.all();
  if (state_.first.size() != all.size()) {
    state_.first.clear();
    state_.second.clear();
    for (const auto& p : all) {
      state_.first.emplace_back(p.tensor.size(), 0.0);
      state_.second.emplace_back(p.tensor.size(), 0.0);
    }
  }
  double sq = 0.0;
  for (const auto& p : all)
    for (double g : p.tensor.grad()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
  const double clip = norm > cfg_.clip_norm ? cfg_.clip_norm / norm : 1.0;
  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto values = all[i].tensor.mutable_values();
    const auto grad = all[i].tensor.grad();
    auto& m = state_.first[i];
    auto& v = state_.second[i];
    for (std::size_t e = 0; e < values.size(); ++e) {
      const double g = grad.empty() ? 0.0 : grad[e] * clip;
      m[e] = cfg_.beta1 * m[e] + (1.0 - cfg_.beta1) * g;
      v[e] = cfg_.beta2 * v[e] + (1.0 - cfg_.beta2) * g * g;
      values[e] -= cfg_.lr * (m[e] / c1) / (std::sqrt(v[e] / c2) + cfg_.adam_eps);
    }
  }
  return norm;
}

// ---- checkpoints -----------------------------------------------------------

Checkpoint capture(const Model& model) {
  Checkpoint c;
  c.model = model.config();
  for (const auto& p : model.params().all()) {
    c.parameter_names.push_back(p.name);
    c.parameters.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  }
  c.running_mean = model.norm().running_mean;
  c.running_var = model.norm().running_var;
  return c;
}

void restore(Model& model, const Checkpoint& ckpt) {
  auto& all = model.params().all();
  if (all.size() != ckpt.parameters.size())
    throw ConfigError("checkpoint holds " + std::to_string(ckpt.parameters.size()) + " parameters, model expects " +
                      std::to_string(all.size()));
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!ckpt.parameter_names.empty() && ckpt.parameter_names[i] != all[i].name)
      throw ConfigError("checkpoint parameter '" + ckpt.parameter_names[i] + "' where model has '" + all[i].name + "'");
    auto dst = all[i].tensor.mutable_values();
    if (dst.size() != ckpt.parameters[i].size()) throw ConfigError("size mismatch for parameter " + all[i].name);
    std::copy(ckpt.parameters[i].begin(), ckpt.parameters[i].end(), dst.begin());
  }
  if (ckpt.running_mean.size() != model.norm().running_mean.size())
    throw ConfigError("checkpoint batch-norm statistics have the wrong width");
  model.norm().running_mean = ckpt.running_mean;
  model.norm().running_var = ckpt.running_var;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  Model m(ckpt.model, 0);
  restore(m, ckpt);
  return m;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::ostream& os, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_array(std::ostream& os, std::span<const double> values) {
  put_u64(os, values.size());
  for (double v : values) put_u64(os, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t get_uint(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw IoError("truncated checkpoint");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

std::vector<double> get_array(std::istream& is) {
  const std::uint64_t n = get_uint(is, 8);
  if (n > (std::uint64_t{1} << 32)) throw IoError("implausible array length in checkpoint");
  std::vector<double> out(n);
  for (auto& v : out) v = std::bit_cast<double>(get_uint(is, 8));
  return out;
}

nlohmann::json metrics_json(std::span<const MetricRow> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"epoch", r.epoch}, {"split", r.split}, {"type", r.type}, {"accuracy", r.accuracy}, {"loss", r.loss}});
  return arr;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  nlohmann::json meta{{"format", "lognet-checkpoint"},
                      {"model", to_json(c.model)},
                      {"train", to_json(c.train)},
                      {"vocabulary", c.vocabulary},
                      {"answers", c.answers},
                      {"parameter_names", c.parameter_names},
                      {"rng_state", c.rng_state},
                      {"epoch", c.epoch},
                      {"best_val_accuracy", c.best_val_accuracy},
                      {"adam_step", c.adam.step},
                      {"metrics", metrics_json(c.metrics)}};
  const std::string blob = meta.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint " + path.string());
  os.write("LOGK", 4);
  put_u32(os, Checkpoint::kVersion);
  put_u64(os, blob.size());
  os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  for (const auto& p : c.parameters) put_array(os, p);
  put_array(os, c.running_mean);
  put_array(os, c.running_var);
  // Moments are optional (absent before the first optimizer step).
  put_u64(os, c.adam.first.size());
  for (const auto& m : c.adam.first) put_array(os, m);
  for (const auto& v : c.adam.second) put_array(os, v);
  if (!os) throw IoError("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read checkpoint " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "LOGK") throw IoError(path.string() + " is not a LOGNet checkpoint");
  const auto version = static_cast<std::uint32_t>(get_uint(is, 4));
  if (version != Checkpoint::kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  const std::uint64_t blob_len = get_uint(is, 8);
  std::string blob(blob_len, '\0');
  is.read(blob.data(), static_cast<std::streamsize>(blob_len));
  if (!is) throw IoError("truncated checkpoint header");
  const auto meta = nlohmann::json::parse(blob);
  Checkpoint c;
  c.model = model_config_from_json(meta.at("model"));
  c.train = train_config_from_json(meta.at("train"));
  c.vocabulary = meta.at("vocabulary").get<std::vector<std::string>>();
  c.answers = meta.at("answers").get<std::vector<std::string>>();
  c.parameter_names = meta.at("parameter_names").get<std::vector<std::string>>();
  c.rng_state = meta.at("rng_state").get<std::string>();
  c.epoch = meta.at("epoch").get<int>();
  c.best_val_accuracy = meta.at("best_val_accuracy").get<double>();
  c.adam.step = meta.at("adam_step").get<std::int64_t>();
  for (const auto& r : meta.at("metrics"))
    c.metrics.push_back(MetricRow{r.at("epoch").get<int>(), r.at("split").get<std::string>(),
                                  r.at("type").get<std::string>(), r.at("accuracy").get<double>(),
                                  r.at("loss").get<double>()});
  for (std::size_t i = 0; i < c.parameter_names.size(); ++i) c.parameters.push_back(get_array(is));
  c.running_mean = get_array(is);
  c.running_var = get_array(is);
  const std::uint64_t moments = get_uint(is, 8);
  for (std::uint64_t i = 0; i < moments; ++i) c.adam.first.push_back(get_array(is));
  for (std::uint64_t i = 0; i < moments; ++i) c.adam.second.push_back(get_array(is));
  return c;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write metrics to " + path.string());
  os << "epoch,split,type,accuracy,loss\n";
  os << std::setprecision(10);
  for (const auto& r : rows) os << r.epoch << ',' << r.split << ',' << r.type << ',' << r.accuracy << ',' << r.loss << '\n';
}

// ---- evaluation ------------------------------------------------------------

namespace {

struct EvalCounts {
  double loss_sum = 0.0;
  std::size_t count = 0;
  std::size_t correct = 0;
  std::map<std::string, std::size_t> type_count;
  std::map<std::string, std::size_t> type_correct;

  void merge(const EvalCounts& o) {
    loss_sum += o.loss_sum;
    count += o.count;
    correct += o.correct;
    for (const auto& [k, v] : o.type_count) type_count[k] += v;
    for (const auto& [k, v] : o.type_correct) type_correct[k] += v;
  }
};

EvalCounts eval_range(Model& model, std::span<const EncodedSample> data, std::size_t batch_size) {
  EvalCounts c;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    std::vector<const EncodedSample*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&data[i]);
    const BatchForward out = model.forward(batch, Mode::kEval);
    const double loss = model.loss(out, batch).item();
    const auto pred = predictions(out.logits);
    c.loss_sum += loss * static_cast<double>(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const bool ok = pred[b] == batch[b]->label;
      ++c.count;
      ++c.type_count[batch[b]->type];
      if (ok) {
        ++c.correct;
        ++c.type_correct[batch[b]->type];
      }
    }
  }
  return c;
}

}  // namespace

EvalReport evaluate(Model& model, std::span<const EncodedSample> data, int workers, std::size_t batch_size) {
  EvalCounts total;
  if (workers <= 1 || data.size() < 2 * batch_size) {
    total = eval_range(model, data, batch_size);
  } else {
    const auto w = static_cast<std::size_t>(workers);
    // Shards are whole batches so results match the single-worker pass.
    const std::size_t batches = (data.size() + batch_size - 1) / batch_size;
    const std::size_t per = (batches + w - 1) / w;
    std::vector<EvalCounts> parts(w);
    std::vector<std::thread> threads;
    for (std::size_t k = 0; k < w; ++k) {
      const std::size_t begin = std::min(data.size(), k * per * batch_size);
      const std::size_t end = std::min(data.size(), (k + 1) * per * batch_size);
      if (begin >= end) continue;
      threads.emplace_back([&, k, begin, end] {
        Model replica = model;
        parts[k] = eval_range(replica, data.subspan(begin, end - begin), batch_size);
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& p : parts) total.merge(p);
  }
  EvalReport r;
  r.count = total.count;
  if (total.count == 0) return r;
  r.accuracy = static_cast<double>(total.correct) / static_cast<double>(total.count);
  r.loss = total.loss_sum / static_cast<double>(total.count);
  for (const auto& [type, n] : total.type_count) {
    r.type_count[type] = n;
    r.type_accuracy[type] = static_cast<double>(total.type_correct[type]) / static_cast<double>(n);
  }
  return r;
}

// ---- training --------------------------------------------------------------

namespace {

std::string parameter_norm_report(const ParameterSet& params) {
  std::ostringstream os;
  os << std::setprecision(6);
  for (const auto& p : params.all()) {
    double sq = 0.0;
    bool finite = true;
    for (double v : p.tensor.values()) {
      sq += v * v;
      finite = finite && std::isfinite(v);
    }
    os << "  " << p.name << ": |w|=" << std::sqrt(sq) << (finite ? "" : " (non-finite)") << '\n';
  }
  return os.str();
}

}  // namespace

TrainResult train(const ModelConfig& model_cfg, const TrainConfig& train_cfg, const Vocabulary& vocab,
                  std::span<const EncodedSample> train_data, std::span<const EncodedSample> val_data,
                  const TrainOptions& options) {
  if (train_data.size() < 2) throw ConfigError("training needs at least two samples");
  if (train_cfg.batch_size < 2) throw ConfigError("batch_size must be at least 2");
  Model model(model_cfg, mix_seed(train_cfg.seed, 1));
  Adam adam(train_cfg);
  Rng rng(mix_seed(train_cfg.seed, 2));
  TrainResult result;
  int start_epoch = 0;
  double best_val = -1.0;
  if (options.resume != nullptr) {
    restore(model, *options.resume);
    adam.state() = options.resume->adam;
    if (!options.resume->rng_state.empty()) rng.restore(options.resume->rng_state);
    start_epoch = options.resume->epoch;
    result.metrics = options.resume->metrics;
    best_val = options.resume->best_val_accuracy;
  }
  std::vector<std::string> vocab_tokens;
  for (std::size_t i = 0; i < vocab.size(); ++i) vocab_tokens.push_back(vocab.token(static_cast<int>(i)));

  auto snapshot = [&](int epoch) {
    Checkpoint c = capture(model);
    c.train = train_cfg;
    c.vocabulary = vocab_tokens;
    c.answers = toy::answer_space();
    c.adam = adam.state();
    c.rng_state = rng.state();
    c.epoch = epoch;
    c.metrics = result.metrics;
    c.best_val_accuracy = best_val;
    return c;
  };
  result.best = snapshot(start_epoch);
  result.last = result.best;

  std::vector<std::size_t> order(train_data.size());
  const auto batch_size = static_cast<std::size_t>(train_cfg.batch_size);
  std::int64_t steps = 0;
  bool stop = false;

  for (int epoch = start_epoch + 1; epoch <= train_cfg.epochs && !stop; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(static_cast<int>(i)))]);
    double loss_sum = 0.0;
    std::size_t seen = 0, correct = 0, batch_id = 0;
    for (std::size_t start = 0; start + 2 <= order.size(); start += batch_size, ++batch_id) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      if (end - start < 2) break;
      std::vector<const EncodedSample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train_data[order[i]]);
      double loss_value = 0.0;
      try {
        Tape tape;
        TapeScope scope(tape);
        const BatchForward out = model.forward(batch, Mode::kTrain);
        const Tensor loss = model.loss(out, batch);
        loss_value = loss.item();
        tape.backward(loss);
        const auto pred = predictions(out.logits);
        for (std::size_t b = 0; b < batch.size(); ++b) correct += pred[b] == batch[b]->label ? 1 : 0;
        adam.step(model.params());
      } catch (const NumericError& e) {
        std::ostringstream os;
        os << "numeric failure in epoch " << epoch << ", batch " << batch_id << ": " << e.what()
           << "\nparameter norms:\n"
           << parameter_norm_report(model.params());
        throw TrainingAborted(os.str());
      }
      model.params().zero_grad();
      result.batch_losses.push_back(loss_value);
      loss_sum += loss_value * static_cast<double>(batch.size());
      seen += batch.size();
      ++steps;
      if (options.max_steps > 0 && steps >= options.max_steps) {
        stop = true;
        break;
      }
    }
    EpochSummary summary;
    summary.epoch = epoch;
    summary.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
    summary.train_accuracy = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
    result.metrics.push_back(MetricRow{epoch, "train", "all", summary.train_accuracy, summary.train_loss});
    if (options.validate && !val_data.empty()) {
      summary.val = evaluate(model, val_data);
      result.metrics.push_back(MetricRow{epoch, "val", "all", summary.val.accuracy, summary.val.loss});
      for (const auto& [type, acc] : summary.val.type_accuracy)
        result.metrics.push_back(MetricRow{epoch, "val", type, acc, 0.0});
    }
    summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool improved = options.validate && !val_data.empty() && summary.val.accuracy > best_val;
    if (improved) best_val = summary.val.accuracy;
    result.last = snapshot(epoch);
    if (improved || !options.validate) result.best = result.last;
    if (options.on_epoch) options.on_epoch(summary);
  }
  result.last.metrics = result.metrics;
  result.best.metrics = result.metrics;
  return result;
}

// ---- gradient checking -----------------------------------------------------

double gradient_error(double analytic, double numeric, double abs_floor) {
  const double diff = std::abs(analytic - numeric);
  if (diff <= abs_floor) return 0.0;
  return diff / std::max(std::abs(analytic), std::abs(numeric));
}

GradcheckReport gradcheck(const GradcheckOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  ModelConfig cfg = opt.config;
  const Vocabulary vocab = toy::build_vocabulary();
  cfg.vocab_size = static_cast<int>(vocab.size());
  cfg.num_answers = static_cast<int>(toy::answer_space().size());
  cfg.max_objects = std::max<int>(cfg.max_objects, static_cast<int>(opt.objects));
  Model model(cfg, opt.seed);
  Rng rng(mix_seed(opt.seed, 99));

  std::vector<EncodedSample> samples(opt.batch);
  for (auto& s : samples) {
    for (std::size_t w = 0; w < opt.words; ++w) s.tokens.push_back(2 + rng.below(cfg.vocab_size - 2));
    for (std::size_t i = 0; i < opt.objects; ++i) {
      RegionFeature r;
      for (int j = 0; j < cfg.appearance_dim; ++j) r.appearance.push_back(rng.uniform(-1.0, 1.0));
      const double x = rng.uniform(0.0, 0.5), y = rng.uniform(0.0, 0.5);
      r.box = {x, y, x + rng.uniform(0.1, 0.5), y + rng.uniform(0.1, 0.5)};
      s.regions.push_back(std::move(r));
    }
    s.label = rng.below(cfg.num_answers);
    s.binary = rng.below(2) == 0;
    s.type = "gradcheck";
  }
  std::vector<const EncodedSample*> batch;
  for (const auto& s : samples) batch.push_back(&s);

  auto loss_value = [&] {
    const BatchForward out = model.forward(batch, Mode::kTrain, false);
    return model.loss(out, batch).item();
  };

  auto& params = model.params().all();
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    TapeScope scope(tape);
    const BatchForward out = model.forward(batch, Mode::kTrain, false);
    tape.backward(model.loss(out, batch));
    for (const auto& p : params) {
      std::vector<double> g(p.tensor.size(), 0.0);
      if (p.tensor.has_grad()) std::copy(p.tensor.grad().begin(), p.tensor.grad().end(), g.begin());
      if (opt.corrupt_group && p.group == *opt.corrupt_group)
        for (double& v : g) v *= 1.01;
      analytic.push_back(std::move(g));
    }
  }
  model.params().zero_grad();

  GradcheckReport report;
  std::map<std::string, std::size_t> group_index;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto it = group_index.find(p.group);
    if (it == group_index.end()) {
      it = group_index.emplace(p.group, report.groups.size()).first;
      report.groups.push_back(GroupReport{.group = p.group});
    }
    GroupReport& g = report.groups[it->second];
    auto values = p.tensor.mutable_values();
    for (std::size_t e = 0; e < values.size(); ++e) {
      const double orig = values[e];
      values[e] = orig + opt.step;
      const double plus = loss_value();
      values[e] = orig - opt.step;
      const double minus = loss_value();
      values[e] = orig;
      const double numeric = (plus - minus) / (2.0 * opt.step);
      const double err = gradient_error(analytic[i][e], numeric, opt.abs_floor);
      g.max_rel_error = std::max(g.max_rel_error, err);
      g.max_abs_error = std::max(g.max_abs_error, std::abs(analytic[i][e] - numeric));
      ++g.elements;
    }
  }
  for (auto& g : report.groups) {
    g.pass = g.max_rel_error < opt.tolerance;
    report.pass = report.pass && g.pass;
    report.max_rel_error = std::max(report.max_rel_error, g.max_rel_error);
    report.max_abs_error = std::max(report.max_abs_error, g.max_abs_error);
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace lognet
