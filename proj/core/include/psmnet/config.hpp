#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "psmnet/scalar.hpp"

namespace psmnet {

// Flat "key = value" text, one key per line, '#' comments. Lists are
// comma-separated. Repeated keys are allowed (used by data specs).
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  // Single-valued accessors; throw ConfigError on absence or bad format.
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int_or(const std::string& key, int64_t fallback) const;
  Scalar get_real(const std::string& key) const;
  Scalar get_real_or(const std::string& key, Scalar fallback) const;
  std::vector<int64_t> get_int_list(const std::string& key) const;
  std::vector<Scalar> get_real_list(const std::string& key) const;
  // All values for a repeated key, in file order.
  std::vector<std::string> get_all(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }
  std::string serialize() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

enum class RegularizerKind { kBasic, kStackedHourglass };

struct LossWeights {
  Scalar w1 = 0.5, w2 = 0.7, w3 = 1.0;
};

// Architecture hyperparameters. Defaults are the desk-scale network: same
// topology as the full-size one, channel widths shrunk to run on a CPU.
struct NetworkConfig {
  int64_t stem_channels = 8;
  std::array<int64_t, 4> stage_blocks{1, 1, 1, 1};
  std::array<int64_t, 4> stage_channels{8, 8, 16, 16};
  std::array<int64_t, 4> dilations{1, 1, 2, 4};
  std::vector<int64_t> spp_scales{8, 4, 2, 1};  // empty list disables the pyramid
  int64_t spp_reduced_channels = 4;
  int64_t fusion_channels = 16;
  int64_t max_disparity = 16;  // D, full-resolution levels; multiple of 4
  RegularizerKind regularizer = RegularizerKind::kStackedHourglass;
  LossWeights loss_weights;

  void validate() const;  // throws ConfigError on violated invariants

  // Channel count entering the SPP fusion convs: conv2_x and conv4_x skips
  // plus one reduced branch per pyramid scale.
  int64_t spp_concat_channels() const;
};

struct LrScheduleEntry {
  int64_t epoch_threshold = 0;
  Scalar rate = 0.001;
};

struct TrainConfig {
  std::vector<LrScheduleEntry> lr_schedule{{0, Scalar(0.001)}};
  int64_t crop_h = 32;
  int64_t crop_w = 64;
  int64_t batch_size = 2;
  int64_t epochs = 10;
  uint64_t seed = 1;
  Scalar adam_epsilon = Scalar(1e-8);
  int64_t max_steps = 0;        // 0 = no step cap
  Scalar target_epe = 0;        // > 0 enables early stop on training EPE
  Scalar val_fraction = 0;      // 0 = evaluate EPE on the training samples
  int64_t eval_interval = 1;    // epochs between EPE evaluations

  void validate() const;
  Scalar learning_rate_for_epoch(int64_t epoch) const;
};

enum class D1Rule { kConjunction, kDisjunction };

// Everything a run reads from one config file.
struct RunConfig {
  NetworkConfig network;
  TrainConfig train;
  D1Rule d1_rule = D1Rule::kConjunction;

  static RunConfig from_kv(const KeyValueFile& kv);
  static RunConfig load(const std::string& path);
  KeyValueFile to_kv() const;
  std::string canonical_text() const;
  uint64_t hash() const;  // FNV-1a over the canonical text
};

uint64_t fnv1a64(const std::string& text);
std::string hash_hex(uint64_t hash);

}  // namespace psmnet
