#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "minsight/force_map.hpp"
#include "minsight/geometry.hpp"

namespace minsight::simulator {

// Ground-truth contact: where the indenter touches, what it applies.
struct ContactState {
  Eigen::Vector3d node_center = Eigen::Vector3d::Zero();  // mm, on surface
  Eigen::Vector3d force = Eigen::Vector3d::Zero();        // N, sensor frame
  double indenter_radius = 8.0;                           // mm
  bool contact = false;

  static ContactState none() { return {}; }
  // Enforces the validity envelope: ||force|| in [0, 5] N and
  // contact == false implies force == 0.
  void validate(double max_force) const;
};

struct Led {
  double azimuth = 0.0;
  Eigen::Vector3d color = Eigen::Vector3d::Zero();  // RGB in [0,1]
};

// Six collimated RGB emitters around the camera, two per color, alternating
// R,G,B,R,G,B at 60 degree spacing.
struct LedRing {
  double ring_radius = 4.0;    // mm from the sensor axis
  double ring_height = 2.0;    // mm above the base rim plane
  double cone_half_angle = 10.0 * M_PI / 180.0;
  double aperture = 2.4;       // mm, collimator bore
  double tilt = 55.0 * M_PI / 180.0;  // beam axis tilt from +z, outward
  std::array<Led, 6> leds;

  static LedRing standard();
  Eigen::Vector3d position(int i) const;
  Eigen::Vector3d axis(int i) const;  // unit beam direction
};

// Equidistant fisheye camera on the sensor axis, looking up (+z). The
// focal constant spans the field of view across the short image dimension
// so the whole shell projects inside any 4:3 frame.
struct CameraModel {
  Eigen::Vector3d position{0.0, 0.0, -2.5};  // mm
  double fov = 160.0 * M_PI / 180.0;
  int native_w = 1020;
  int native_h = 720;

  static CameraModel standard() { return {}; }

  double focal(int w, int h) const {  // pixels per radian
    return 0.5 * std::min(w, h) / (0.5 * fov);
  }
  // Pixel coordinates of a 3D point for a w x h render. May land outside
  // the image for points beyond the field of view.
  Eigen::Vector2d project(const Eigen::Vector3d& p, int w, int h) const;
  // Unit ray direction through pixel center (px, py); false when the pixel
  // lies outside the lens coverage.
  bool pixel_ray(double px, double py, int w, int h,
                 Eigen::Vector3d& dir) const;
};

struct SensorImage {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // h * w * 3, row-major, RGB interleaved

  SensorImage() = default;
  SensorImage(int w, int h)
      : width(w), height(h),
        values(static_cast<std::size_t>(w) * h * 3, 0.0f) {}

  float& at(int row, int col, int c) {
    return values[(static_cast<std::size_t>(row) * width + col) * 3 + c];
  }
  float at(int row, int col, int c) const {
    return values[(static_cast<std::size_t>(row) * width + col) * 3 + c];
  }
  bool operator==(const SensorImage& o) const {
    return width == o.width && height == o.height && values == o.values;
  }
};

// Triangulation of the node set (convex hull of the capsule samples with
// the bottom lid removed). Faces are outward-oriented.
struct SurfaceMesh {
  std::vector<std::array<int, 3>> triangles;
};

SurfaceMesh build_mesh(const std::vector<geometry::SurfaceNode>& nodes);

// Per-node displacement (mm). When the producer knows the analytic surface
// response it also supplies the first-order normal rotation per node;
// renderers fall back to a mesh estimate when normal_delta is empty.
struct DisplacementField {
  std::vector<Eigen::Vector3d> delta;
  std::vector<Eigen::Vector3d> normal_delta;

  DisplacementField() = default;
  explicit DisplacementField(std::size_t n)
      : delta(n, Eigen::Vector3d::Zero()) {}

  std::size_t size() const { return delta.size(); }
  const Eigen::Vector3d& operator[](std::size_t i) const { return delta[i]; }
  Eigen::Vector3d& operator[](std::size_t i) { return delta[i]; }
};

// Toolkit constants of the synthetic forward model.
struct SimParams {
  double stiffness = 2.0;        // N/mm, elastomer normal stiffness k_e
  double shear_stiffness = 2.0;  // N/mm, tangential counterpart
  double sigma_d_factor = 0.6;   // displacement kernel width / indenter radius
  double sigma_f_factor = 0.5;   // force-spread kernel width / indenter radius
  double max_force = 5.0;        // N, validity envelope
  double ambient = 0.25;         // base shading strength
  double base_clamp_height = 2.5;  // mm; shell is bonded below this height
};

// Gaussian-kernel displacement: inward along each node normal with
// magnitude ||F||/k_e at the contact center, plus a tangential term from
// the shear component of F. Zero field when contact is false.
DisplacementField deform(const geometry::FingertipSurface& surface,
                         const std::vector<geometry::SurfaceNode>& nodes,
                         const ContactState& contact,
                         const SimParams& params = {});

// Structured-light render of the displaced surface: per-pixel fisheye ray
// cast against the displaced triangulation, shaded with the six LED cones
// (smooth cutoff at the cone half-angle), Lambertian terms, and a small
// ambient term toward the camera. Rays that miss map to 0. Deterministic.
SensorImage render(const std::vector<geometry::SurfaceNode>& nodes,
                   const SurfaceMesh& mesh, const LedRing& leds,
                   const CameraModel& cam,
                   const DisplacementField& displacement, int w, int h,
                   const SimParams& params = {});

// Gaussian force distribution around the contact point, truncated at
// 2*sigma_f, normalized so the node forces sum to the contact force.
ForceMap ground_truth_map(const std::vector<geometry::SurfaceNode>& nodes,
                          const ContactState& contact,
                          const SimParams& params = {});

// Everything a sensor instance needs, bundled for the pipeline modules.
struct SensorRig {
  geometry::FingertipSurface surface;
  std::vector<geometry::SurfaceNode> nodes;
  geometry::NeighborGraph graph;
  SurfaceMesh mesh;
  LedRing leds;
  CameraModel camera;
  SimParams params;

  static SensorRig standard(int n_nodes = 1350, std::uint64_t seed = 7,
                            int graph_k = 6);
};

std::pair<SensorImage, ForceMap> sensor_forward(const SensorRig& rig,
                                                const ContactState& contact,
                                                int w, int h);

}  // namespace minsight::simulator
