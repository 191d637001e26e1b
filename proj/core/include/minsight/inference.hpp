#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minsight/dataset.hpp"
#include "minsight/nn.hpp"
#include "minsight/simulator.hpp"

namespace minsight::inference {

enum class Tier { kTiny, kSmall, kBase };
enum class Head { kSingle, kDistFlat, kDistGrid };
enum class PosEncoding { kNone, kLinear, kRowCol };

const char* to_string(Tier t);
const char* to_string(Head h);
const char* to_string(PosEncoding e);
Tier tier_from_string(const std::string& s);
Head head_from_string(const std::string& s);
PosEncoding pos_encoding_from_string(const std::string& s);

// Input dimensions per scale percent of the 410x308 full-resolution frame.
// 20% (82x60) and 1% (4x3) are the documented anchor points.
std::pair<int, int> scale_dims(int scale_percent);

// Difference image preprocessing: subtract the reference, box-average
// down to the scale dimensions, optionally append pixel-position
// channels. Linear encodes (row*W + col)/(H*W) in one channel; RowCol
// encodes (row+0.5)/H and (col+0.5)/W in two.
nn::Tensor preprocess(const simulator::SensorImage& image,
                      const simulator::SensorImage& reference,
                      int scale_percent, PosEncoding encoding);

// Four stages of stride-2 3x3 conv + 1x1 pointwise mix (ELU after each),
// global average pool, dense head. Channel widths per tier.
struct NetConfig {
  Tier tier = Tier::kSmall;
  Head head = Head::kSingle;
  int scale_percent = 20;
  PosEncoding encoding = PosEncoding::kRowCol;
  int n_nodes = 1350;   // dist-flat output nodes
  int grid_w = 40;      // dist-grid output dims
  int grid_h = 40;

  std::array<int, 4> stage_widths() const;
  int input_channels() const;
  std::pair<int, int> input_dims() const { return scale_dims(scale_percent); }
  int out_dim() const;
  // Closed-form parameter count; asserted against the built net.
  long expected_param_count() const;
  nn::Net build_net(std::uint64_t init_seed) const;
};

struct TrainConfig {
  double lr = 1e-3;
  int batch = 32;
  int epochs = 60;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = all available
  bool verbose = false;
  void validate() const;
};

struct TrainResult {
  std::vector<double> train_mse;  // per epoch
  std::vector<double> val_mse;
  int best_epoch = -1;
};

// A trained (or trainable) regressor: net + config + label normalization.
struct Regressor {
  NetConfig cfg;
  nn::Net net;
  dataset::NormStats stats;
  bool trained = false;
};

// Mini-batch MSE training on normalized labels. Fits label stats on the
// train split, preprocesses both splits once, returns the best-validation
// checkpoint in-place. Deterministic per seed (for a fixed thread count).
// Throws minsight::NumericError on divergence.
TrainResult train(Regressor& reg, const dataset::Dataset& train_set,
                  const dataset::Dataset& val_set, const TrainConfig& cfg);

// Label vector for one sample under the given head (unnormalized).
Eigen::VectorXd label_vector(const NetConfig& cfg, const dataset::Dataset& ds,
                             const dataset::Sample& s);

// Denormalized physical outputs of the single-contact head.
std::pair<Eigen::Vector3d, Eigen::Vector3d> predict_single(
    const Regressor& reg, const simulator::SensorImage& image,
    const simulator::SensorImage& reference);

// Distribution heads: predicted per-node force map.
ForceMap predict_map(const Regressor& reg, const simulator::SensorImage& image,
                     const simulator::SensorImage& reference,
                     const embedding::MapLayout* layout);

// Checkpoint file "MNSW": config echo, normalization stats, then the
// little-endian float32 weight blobs in layer order.
void save_model(const Regressor& reg, const std::string& path);
Regressor load_model(const std::string& path);

void write_loss_csv(const TrainResult& result, const std::string& path);

}  // namespace minsight::inference
