#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minsight/embedding.hpp"
#include "minsight/simulator.hpp"

namespace minsight::dataset {

// Probing schedule of the synthetic test bed: depths are pressed at each
// of n_locations random surface nodes; recorded labels carry the stated
// measurement noise.
struct ProbeProtocol {
  int n_locations = 2000;
  std::vector<double> depths = {0.25, 0.5, 0.75, 1.0, 1.25};  // mm
  double indenter_radius = 8.0;                               // mm
  double tangential_cap = 0.3;  // max shear fraction of the normal force
  Eigen::Vector3d force_sigma{0.01, 0.01, 0.02};  // N
  double position_sigma = 0.2;                    // mm
  std::uint64_t seed = 1;

  int samples_per_location() const {
    return static_cast<int>(depths.size());
  }
  // Throws on non-increasing depths, negative noise, or depth schedules
  // whose forces leave the simulator envelope (names the offending depth).
  void validate(const simulator::SimParams& params) const;
};

struct Sample {
  simulator::SensorImage image;
  simulator::ContactState contact;        // noisy labels
  ForceMap force_map;                     // built from the noisy contact
  simulator::ContactState clean_contact;  // noise-free oracle
  ForceMap clean_map;
  int location_index = 0;
};

struct Dataset {
  geometry::FingertipSurface surface;
  std::vector<geometry::SurfaceNode> nodes;
  int graph_k = 6;
  simulator::SimParams sim_params;
  ProbeProtocol protocol;
  int image_w = 0;
  int image_h = 0;
  simulator::SensorImage reference;
  std::vector<Sample> samples;
  std::optional<embedding::MapLayout> layout;

  int location_count() const;
};

// Renders every (location, depth) press and the no-contact reference.
// All randomness is drawn sequentially from the protocol seed before the
// data-parallel render phase, so output is deterministic.
Dataset generate(const simulator::SensorRig& rig, const ProbeProtocol& protocol,
                 int w, int h);

// Location-disjoint split: all depths of one probe location stay on one
// side. Deterministic per seed.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed);

// Per-channel min-max normalization to [-1, 1]. apply does not clamp, so
// out-of-range test values map outside [-1, 1] as required.
struct NormStats {
  std::vector<double> lo, hi;

  int channels() const { return static_cast<int>(lo.size()); }
  void apply(Eigen::Ref<Eigen::VectorXd> v) const;
  void invert(Eigen::Ref<Eigen::VectorXd> v) const;
};

// Channels = (force xyz, location xyz) of the noisy contact labels.
NormStats fit_norm_single(const Dataset& train);
// Channels = (x, y, z) force components pooled over all nodes and samples.
NormStats fit_norm_dist(const Dataset& train);

// Container format: <dir>/manifest.json, <dir>/samples.bin ("MNST"),
// <dir>/reference.bin ("MNSR"). Little-endian, layout documented in
// FORMATS.md.
void save(const Dataset& ds, const std::string& dir);
Dataset load(const std::string& dir);

}  // namespace minsight::dataset
