// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0

#include "cotvars/probe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "cotvars/error.hpp"
#include "cotvars/parallel.hpp"
#include "cotvars/plot.hpp"
#include "cotvars/rng.hpp"

namespace cotvars {

LinearProbe::LinearProbe(int layer, LatentLayout layout, std::size_t hidden_width)
    : layer_(layer),
      layout_(layout),
      hidden_width_(hidden_width),
      weight_(layout.dim() * hidden_width, 0.0),
      bias_(layout.dim(), 0.0) {}

std::vector<double> LinearProbe::logits(std::span<const float> hidden) const {
  if (hidden.size() != hidden_width_) throw ValidationError("hidden state width does not match the probe");
  std::vector<double> out(bias_.begin(), bias_.end());
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* w = weight_.data() + r * hidden_width_;
    double acc = 0.0;
    for (std::size_t c = 0; c < hidden_width_; ++c) acc += w[c] * hidden[c];
    out[r] += acc;
  }
  return out;
}

namespace {

// log(1 + exp(-|z|)) + max(z, 0) - z*y, stable for large |z|
double bce_with_logit(double z, double y) { return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_record(const LinearProbe& probe, const HiddenStateRecord& r) {
  if (r.hidden.size() != probe.hidden_width()) throw ValidationError("record " + r.entry_id + ": hidden width mismatch");
  if (!(r.target.layout() == probe.layout())) throw ValidationError("record " + r.entry_id + ": latent layout mismatch");
}

}  // namespace

double probe_loss(const LinearProbe& probe, std::span<const HiddenStateRecord* const> batch) {
  if (batch.empty()) throw ValidationError("probe_loss: empty batch");
  double total = 0.0;
  for (const auto* r : batch) {
    check_record(probe, *r);
    const auto z = probe.logits(r->hidden);
    const auto bits = r->target.bits();
    for (std::size_t k = 0; k < z.size(); ++k) total += bce_with_logit(z[k], bits[k]);
  }
  return total / static_cast<double>(batch.size() * probe.out_dim());
}

double probe_loss_and_gradient(const LinearProbe& probe, std::span<const HiddenStateRecord* const> batch,
                               std::vector<double>& grad_w, std::vector<double>& grad_b) {
  if (batch.empty()) throw ValidationError("probe_loss: empty batch");
  const std::size_t d = probe.out_dim();
  const std::size_t h = probe.hidden_width();
  grad_w.assign(d * h, 0.0);
  grad_b.assign(d, 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size() * d);
  double total = 0.0;
  for (const auto* r : batch) {
    check_record(probe, *r);
    const auto z = probe.logits(r->hidden);
    const auto bits = r->target.bits();
    for (std::size_t k = 0; k < d; ++k) {
      total += bce_with_logit(z[k], bits[k]);
      const double g = (sigmoid(z[k]) - bits[k]) * scale;
      grad_b[k] += g;
      double* gw = grad_w.data() + k * h;
      for (std::size_t c = 0; c < h; ++c) gw[c] += g * r->hidden[c];
    }
  }
  return total * scale;
}

LinearProbe train_probe(std::span<const HiddenStateRecord> records, const ProbeHyper& hyper, TrainLog* log) {
  if (records.empty()) throw ValidationError("train_probe: no records");
  if (hyper.epochs == 0) throw ValidationError("train_probe: epochs must be at least 1");
  if (hyper.batch_size == 0) throw ValidationError("train_probe: batch size must be at least 1");
  const auto& first = records.front();
  for (const auto& r : records) {
    if (r.layer != first.layer) throw ValidationError("train_probe: records span several layers");
    if (!(r.target.layout() == first.target.layout())) throw ValidationError("train_probe: mixed latent layouts");
    if (r.hidden.size() != first.hidden.size()) throw ValidationError("train_probe: inconsistent hidden widths");
  }
  if (first.hidden.empty()) throw ValidationError("train_probe: zero-width hidden states");

  LinearProbe probe(first.layer, first.target.layout(), first.hidden.size());
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  auto rng = Rng::derive(hyper.seed, "probe", static_cast<std::uint64_t>(first.layer));

  std::vector<double> grad_w, grad_b;
  std::vector<const HiddenStateRecord*> batch;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform(0, i - 1)]);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + hyper.batch_size); ++k) {
        batch.push_back(&records[order[k]]);
      }
      epoch_loss += probe_loss_and_gradient(probe, batch, grad_w, grad_b);
      ++n_batches;

      double norm2 = 0.0;
      for (double g : grad_w) norm2 += g * g;
      for (double g : grad_b) norm2 += g * g;
      const double norm = std::sqrt(norm2);
      const double clip = (hyper.grad_clip > 0 && norm > hyper.grad_clip) ? hyper.grad_clip / norm : 1.0;
      const double step = hyper.learning_rate * clip;
      auto w = probe.weight();
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= step * grad_w[k];
      auto b = probe.bias();
      for (std::size_t k = 0; k < b.size(); ++k) b[k] -= step * grad_b[k];
    }
    if (log != nullptr) log->epoch_losses.push_back(epoch_loss / static_cast<double>(n_batches));
  }
  return probe;
}

namespace {

std::size_t significant_digits(const LatentVec& target) {
  std::uint64_t value = 0;
  if (target.layout().kind == LayoutKind::NumberGroups) {
    value = decode_number(target);
  } else {
    const auto [digit, carry] = decode_mul_step(target);
    value = static_cast<std::uint64_t>(carry * 10 + digit);
  }
  std::size_t n = 1;
  while (value >= 10) {
    value /= 10;
    ++n;
  }
  return n;
}

}  // namespace

ProbeMetrics eval_probe(const LinearProbe& probe, std::span<const HiddenStateRecord> records) {
  if (records.empty()) throw ValidationError("eval_probe: no records");
  ProbeMetrics m;
  std::size_t elements_ok = 0;
  std::size_t tokens_ok = 0;
  for (const auto& r : records) {
    check_record(probe, r);
    const auto z = probe.logits(r.hidden);
    const auto bits = r.target.bits();
    for (std::size_t k = 0; k < z.size(); ++k) {
      const int predicted = sigmoid(z[k]) > 0.5 ? 1 : 0;
      if (predicted == bits[k]) ++elements_ok;
    }
    const bool token_ok = decode_real_vector(std::span<const double>(z), probe.layout()) == r.target;
    if (token_ok) ++tokens_ok;
    auto& bucket = m.by_digits[significant_digits(r.target)];
    ++bucket.total;
    if (token_ok) ++bucket.correct;
  }
  m.count = records.size();
  m.element_accuracy = static_cast<double>(elements_ok) / static_cast<double>(records.size() * probe.out_dim());
  m.token_accuracy = static_cast<double>(tokens_ok) / static_cast<double>(records.size());
  return m;
}

std::vector<LayerSweepRow> layer_sweep(const RecordStore& train, const RecordStore& test, const ProbeHyper& hyper,
                                       std::size_t jobs) {
  if (train.empty()) throw ValidationError("layer_sweep: no layers");
  std::vector<int> layers;
  for (const auto& [layer, records] : train) {
    if (test.find(layer) == test.end()) {
      throw ValidationError("layer_sweep: layer " + std::to_string(layer) + " missing from the evaluation set");
    }
    layers.push_back(layer);
  }
  std::vector<LayerSweepRow> rows(layers.size());
  parallel_for(layers.size(), jobs, [&](std::size_t i) {
    TrainLog log;
    const auto probe = train_probe(train.at(layers[i]), hyper, &log);
    rows[i].layer = layers[i];
    rows[i].metrics = eval_probe(probe, test.at(layers[i]));
    rows[i].final_train_loss = log.epoch_losses.back();
  });
  return rows;
}

std::string sweep_to_csv(const std::vector<LayerSweepRow>& rows) {
  std::ostringstream out;
  out << "layer,element_accuracy,token_accuracy,count,final_train_loss\n";
  out << std::setprecision(6) << std::fixed;
  for (const auto& r : rows) {
    out << r.layer << ',' << r.metrics.element_accuracy << ',' << r.metrics.token_accuracy << ',' << r.metrics.count
        << ',' << r.final_train_loss << '\n';
  }
  return out.str();
}

Json sweep_to_json(const std::vector<LayerSweepRow>& rows) {
  Json arr = Json::array();
  for (const auto& r : rows) {
    Json j;
    j["layer"] = r.layer;
    j["element_accuracy"] = r.metrics.element_accuracy;
    j["token_accuracy"] = r.metrics.token_accuracy;
    j["count"] = r.metrics.count;
    j["final_train_loss"] = r.final_train_loss;
    Json by_digits = Json::object();
    for (const auto& [digits, bucket] : r.metrics.by_digits) {
      by_digits[std::to_string(digits)] = {{"correct", bucket.correct}, {"total", bucket.total},
                                           {"token_accuracy", bucket.accuracy()}};
    }
    j["by_digits"] = std::move(by_digits);
    arr.push_back(std::move(j));
  }
  return Json{{"format_version", kTensorDumpFormatVersion}, {"layers", std::move(arr)}};
}

std::string sweep_to_svg(const std::vector<LayerSweepRow>& rows) {
  std::vector<std::string> labels;
  PlotSeries element{"element accuracy", {}};
  PlotSeries token{"token accuracy", {}};
  for (const auto& r : rows) {
    labels.push_back(std::to_string(r.layer));
    element.values.push_back(r.metrics.element_accuracy);
    token.values.push_back(r.metrics.token_accuracy);
  }
  return line_plot_svg("Probe accuracy by layer", "layer", labels, {element, token});
}

RecordStore synth_fixture(const SynthFixtureConfig& config) {
  if (!(config.noise_sigma >= 0.0)) throw ValidationError("synth_fixture: noise sigma must be nonnegative");
  const std::size_t d = config.layout.dim();
  const std::size_t h = config.hidden_width;
  if (h < d) throw ValidationError("synth_fixture: hidden width must be at least the latent dimension");

  // Embedding matrix A (h x d, column-major here) with orthonormal columns.
  auto a_rng = Rng::derive(config.seed, "fixture-embedding");
  std::vector<std::vector<double>> columns(d, std::vector<double>(h));
  for (std::size_t c = 0; c < d; ++c) {
    auto& col = columns[c];
    for (auto& v : col) v = a_rng.normal();
    for (std::size_t p = 0; p < c; ++p) {
      const double dot = std::inner_product(col.begin(), col.end(), columns[p].begin(), 0.0);
      for (std::size_t k = 0; k < h; ++k) col[k] -= dot * columns[p][k];
    }
    const double norm = std::sqrt(std::inner_product(col.begin(), col.end(), col.begin(), 0.0));
    for (auto& v : col) v /= norm;
  }

  RecordStore store;
  for (std::size_t layer = 0; layer < config.n_layers; ++layer) {
    const bool signal = static_cast<int>(layer) >= config.signal_from_layer;
    auto rng = Rng::derive(config.seed ^ splitmix64(config.sample_stream + 1), "fixture-samples", layer);
    auto& records = store[static_cast<int>(layer)];
    records.reserve(config.n_samples);
    for (std::size_t i = 0; i < config.n_samples; ++i) {
      std::vector<std::size_t> hot;
      for (std::size_t g = 0; g < config.layout.n_groups; ++g) hot.push_back(10 * g + rng.uniform(0, 9));
      HiddenStateRecord r;
      r.entry_id = "synthetic-" + std::to_string(i);
      r.layer = static_cast<int>(layer);
      r.slot = i;
      r.target = LatentVec::from_hot_indices(config.layout, hot);
      r.hidden.resize(h);
      for (std::size_t k = 0; k < h; ++k) {
        double v = 0.0;
        if (signal) {
          for (auto idx : hot) v += columns[idx][k];
          v += config.noise_sigma * rng.normal();
        } else {
          v = rng.normal();
        }
        r.hidden[k] = static_cast<float>(v);
      }
      records.push_back(std::move(r));
    }
  }
  return store;
}

// ---------------------------------------------------------------------------
// Tensor dumps

namespace {

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  auto p = stem;
  p += ext;
  return p;
}

void put_f32_le(std::string& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xff));
}

float get_f32_le(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return std::bit_cast<float>(bits);
}

}  // namespace

void write_tensor_dump(const std::filesystem::path& stem, int layer, std::span<const HiddenStateRecord> records) {
  const std::size_t width = records.empty() ? 0 : records.front().hidden.size();
  std::string bin;
  bin.reserve(records.size() * width * 4);
  Json ids = Json::array();
  Json slots = Json::array();
  Json targets = Json::array();
  for (const auto& r : records) {
    if (r.hidden.size() != width) throw ValidationError("tensor dump: inconsistent hidden widths");
    if (r.layer != layer) throw ValidationError("tensor dump: record from another layer");
    for (float v : r.hidden) put_f32_le(bin, v);
    ids.push_back(r.entry_id);
    slots.push_back(r.slot);
    targets.push_back(r.target.hot_indices());
  }
  Json sidecar;
  sidecar["format_version"] = kTensorDumpFormatVersion;
  sidecar["layer"] = layer;
  sidecar["hidden_width"] = width;
  sidecar["count"] = records.size();
  const auto layout = records.empty() ? LatentLayout::dp_default() : records.front().target.layout();
  sidecar["layout"] = {{"kind", std::string(to_string(layout.kind))}, {"n_groups", layout.n_groups}};
  sidecar["entry_ids"] = std::move(ids);
  sidecar["slots"] = std::move(slots);
  sidecar["targets"] = std::move(targets);
  write_file_atomic(with_ext(stem, ".bin"), bin);
  write_file_atomic(with_ext(stem, ".json"), sidecar.dump() + "\n");
}

DumpLoad read_tensor_dump(const std::filesystem::path& stem) {
  DumpLoad out;
  const auto sidecar = read_json(with_ext(stem, ".json"));
  auto diag = [&](std::string msg) { out.diagnostics.push_back(stem.string() + ": " + std::move(msg)); };

  for (const char* key : {"format_version", "layer", "hidden_width", "count", "layout", "entry_ids", "targets"}) {
    if (!sidecar.contains(key)) diag(std::string("sidecar missing '") + key + "'");
  }
  if (!out.diagnostics.empty()) return out;
  if (sidecar["format_version"] != kTensorDumpFormatVersion) {
    diag("unsupported format_version " + sidecar["format_version"].dump());
    return out;
  }
  const auto width = sidecar["hidden_width"].get<std::size_t>();
  const auto count = sidecar["count"].get<std::size_t>();
  const int layer = sidecar["layer"].get<int>();
  LatentLayout layout;
  try {
    const auto kind = layout_kind_from_string(sidecar["layout"].at("kind").get<std::string>());
    layout = kind == LayoutKind::DigitCarry ? LatentLayout::digit_carry()
                                            : LatentLayout::number_groups(sidecar["layout"].at("n_groups").get<std::size_t>());
  } catch (const std::exception& e) {
    diag(std::string("bad layout: ") + e.what());
    return out;
  }
  const auto& ids = sidecar["entry_ids"];
  const auto& targets = sidecar["targets"];
  if (ids.size() != count || targets.size() != count) diag("entry_ids/targets length differs from count");
  if (sidecar.contains("slots") && sidecar["slots"].size() != count) diag("slots length differs from count");

  std::ifstream in(with_ext(stem, ".bin"), std::ios::binary);
  if (!in) throw IoError("cannot open " + with_ext(stem, ".bin").string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != count * width * 4) {
    diag("binary holds " + std::to_string(bytes.size()) + " bytes, expected " + std::to_string(count * width * 4));
  }
  if (!out.diagnostics.empty()) return out;

  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  out.records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    HiddenStateRecord r;
    r.entry_id = ids[i].get<std::string>();
    r.layer = layer;
    r.slot = sidecar.contains("slots") ? sidecar["slots"][i].get<std::size_t>() : i;
    try {
      r.target = LatentVec::from_hot_indices(layout, targets[i].get<std::vector<std::size_t>>());
    } catch (const std::exception& e) {
      diag("record " + std::to_string(i) + ": " + e.what());
      continue;
    }
    r.hidden.resize(width);
    for (std::size_t k = 0; k < width; ++k) r.hidden[k] = get_f32_le(data + 4 * (i * width + k));
    out.records.push_back(std::move(r));
  }
  return out;
}

RecordStore read_dump_dir(const std::filesystem::path& dir, std::vector<std::string>* diagnostics) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> stems;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json" && std::filesystem::exists(with_ext(e.path().parent_path() / e.path().stem(), ".bin"))) {
      stems.push_back(e.path().parent_path() / e.path().stem());
    }
  }
  std::sort(stems.begin(), stems.end());
  RecordStore store;
  for (const auto& stem : stems) {
    auto load = read_tensor_dump(stem);
    if (diagnostics != nullptr) diagnostics->insert(diagnostics->end(), load.diagnostics.begin(), load.diagnostics.end());
    for (auto& r : load.records) store[r.layer].push_back(std::move(r));
  }
  return store;
}

void write_dump_dir(const std::filesystem::path& dir, const RecordStore& store) {
  for (const auto& [layer, records] : store) {
    write_tensor_dump(dir / ("layer_" + std::to_string(layer)), layer, records);
  }
}

}  // namespace cotvars
