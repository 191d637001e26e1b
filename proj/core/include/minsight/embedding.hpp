#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "minsight/assignment.hpp"
#include "minsight/force_map.hpp"
#include "minsight/geometry.hpp"

namespace minsight::embedding {

// Node -> pixel assignment realizing the 2D force-map image. Injective and
// complete: every node owns exactly one pixel, spare pixels are flagged
// unoccupied.
struct MapLayout {
  int grid_w = 0;
  int grid_h = 0;
  double alpha = 0.0;
  double pixel_pitch = 0.0;  // mm per pixel actually used
  double z_max = 0.0;        // mm, sensor height used by the projection
  std::vector<std::pair<int, int>> assignment;  // node -> (row, col)
  std::vector<std::uint8_t> occupied;           // grid_h * grid_w mask

  int node_count() const { return static_cast<int>(assignment.size()); }
  int occupied_count() const;
  // Throws std::logic_error if the assignment is not injective/complete.
  void validate() const;
};

// Radial shrink of the zero-centered x/y coordinates by alpha * z / z_max
// before the 2D assignment; alpha = 0 is the identity projection.
Eigen::Vector2d weighted_project(const geometry::SurfaceNode& node,
                                 double alpha, double z_max);

// Projects all nodes, scales them onto a grid centered at
// (grid_w/2, grid_h/2), and solves the rectangular assignment with squared
// Euclidean pixel-distance costs. pixel_pitch <= 0 selects auto-fit: the
// projected cloud's bounding square fills 95% of the short grid dimension.
MapLayout build_layout(const std::vector<geometry::SurfaceNode>& nodes,
                       int grid_w, int grid_h, double alpha,
                       double pixel_pitch = 0.0);

// Mean 2D pixel distance between assigned pixels across graph edges;
// lower = smoother.
double smoothness_score(const MapLayout& layout,
                        const geometry::NeighborGraph& graph);

// ForceMap <-> 3-channel image (row-major, RGB-interleaved, grid_h x
// grid_w). Unoccupied pixels carry zeros; round trips are lossless.
std::vector<double> map_to_image(const ForceMap& map, const MapLayout& layout);
ForceMap image_to_map(const std::vector<double>& image,
                      const MapLayout& layout);

// Self-contained binary layout file ("MNSL"): grid dims, alpha, pitch,
// node table (position, normal, area weight) and the assignment.
void save_layout(const MapLayout& layout,
                 const std::vector<geometry::SurfaceNode>& nodes,
                 const std::string& path);
std::pair<MapLayout, std::vector<geometry::SurfaceNode>> load_layout(
    const std::string& path);

}  // namespace minsight::embedding
