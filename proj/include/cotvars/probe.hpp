// Copyright (c) 2026, cotvars contributors
// SPDX-License-Identifier: Apache-2.0
//
// Per-layer linear probes: P(h) = W h + b, trained with sigmoid binary cross
// entropy against the one-hot latent embedding of the next token.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cotvars/json.hpp"
#include "cotvars/latent.hpp"

namespace cotvars {

inline constexpr int kTensorDumpFormatVersion = 1;

struct HiddenStateRecord {
  std::string entry_id;
  int layer = 0;
  std::size_t slot = 0;
  std::vector<float> hidden;  // state at the position before the latent token
  LatentVec target;
};

/// Records grouped by layer, ascending.
using RecordStore = std::map<int, std::vector<HiddenStateRecord>>;

struct ProbeHyper {
  double learning_rate = 1e-3;
  double grad_clip = 1.0;  // global L2 norm over (W, b)
  std::size_t epochs = 4;
  std::size_t batch_size = 32;
  std::size_t eval_batch_size = 64;
  std::uint64_t seed = 0;
};

class LinearProbe {
 public:
  LinearProbe() = default;
  LinearProbe(int layer, LatentLayout layout, std::size_t hidden_width);

  int layer() const { return layer_; }
  const LatentLayout& layout() const { return layout_; }
  std::size_t hidden_width() const { return hidden_width_; }
  std::size_t out_dim() const { return layout_.dim(); }

  /// Row-major out_dim x hidden_width.
  std::span<double> weight() { return weight_; }
  std::span<const double> weight() const { return weight_; }
  std::span<double> bias() { return bias_; }
  std::span<const double> bias() const { return bias_; }

  std::vector<double> logits(std::span<const float> hidden) const;

 private:
  int layer_ = 0;
  LatentLayout layout_;
  std::size_t hidden_width_ = 0;
  std::vector<double> weight_;
  std::vector<double> bias_;
};

/// Mean sigmoid-BCE over every (record, dimension) of the batch.
double probe_loss(const LinearProbe& probe, std::span<const HiddenStateRecord* const> batch);
/// Loss plus its gradient; grad_w is row-major like the weight.
double probe_loss_and_gradient(const LinearProbe& probe, std::span<const HiddenStateRecord* const> batch,
                               std::vector<double>& grad_w, std::vector<double>& grad_b);

struct TrainLog {
  std::vector<double> epoch_losses;  // mean training loss per epoch
};

LinearProbe train_probe(std::span<const HiddenStateRecord> records, const ProbeHyper& hyper, TrainLog* log = nullptr);

struct DigitBucket {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct ProbeMetrics {
  double element_accuracy = 0.0;
  double token_accuracy = 0.0;
  std::size_t count = 0;
  std::map<std::size_t, DigitBucket> by_digits;  // target value's significant-digit count
};

ProbeMetrics eval_probe(const LinearProbe& probe, std::span<const HiddenStateRecord> records);

struct LayerSweepRow {
  int layer = 0;
  ProbeMetrics metrics;
  double final_train_loss = 0.0;
};

/// Trains one probe per layer of `train` and evaluates it on the same layer of
/// `test`. Layers train independently on up to `jobs` threads.
std::vector<LayerSweepRow> layer_sweep(const RecordStore& train, const RecordStore& test, const ProbeHyper& hyper,
                                       std::size_t jobs = 1);

std::string sweep_to_csv(const std::vector<LayerSweepRow>& rows);
Json sweep_to_json(const std::vector<LayerSweepRow>& rows);
/// Line plot of element and token accuracy against layer.
std::string sweep_to_svg(const std::vector<LayerSweepRow>& rows);

struct SynthFixtureConfig {
  std::uint64_t seed = 0;
  LatentLayout layout = LatentLayout::dp_default();
  std::size_t n_samples = 5000;
  double noise_sigma = 0.01;
  std::size_t n_layers = 8;
  int signal_from_layer = 4;  // layers >= this carry signal
  std::size_t hidden_width = 128;
  /// Samples drawn from a separate stream with the same embedding matrix.
  std::uint64_t sample_stream = 0;
};

/// h = A * target + noise on signal layers, pure N(0, 1) noise elsewhere.
/// A has orthonormal columns and depends only on the seed.
RecordStore synth_fixture(const SynthFixtureConfig& config);

// Tensor dumps: <stem>.bin holds little-endian float32 rows (record-major),
// <stem>.json is the sidecar.

void write_tensor_dump(const std::filesystem::path& stem, int layer, std::span<const HiddenStateRecord> records);

struct DumpLoad {
  std::vector<HiddenStateRecord> records;
  std::vector<std::string> diagnostics;  // schema problems; empty on success
};

DumpLoad read_tensor_dump(const std::filesystem::path& stem);
/// Loads every <stem>.json/.bin pair in a directory.
RecordStore read_dump_dir(const std::filesystem::path& dir, std::vector<std::string>* diagnostics = nullptr);
void write_dump_dir(const std::filesystem::path& dir, const RecordStore& store);

}  // namespace cotvars
