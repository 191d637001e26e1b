#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "minsight/rng.hpp"

namespace minsight::geometry {

// Capsule-shaped sensing surface: a cylinder wall capped by a hemisphere.
// Sensor frame: z up, origin at the center of the base rim. The wall spans
// z in [0, cyl_height], the cap tops out at z = cyl_height + cap_radius.
struct FingertipSurface {
  double radius = 0.0;      // mm
  double cyl_height = 0.0;  // mm
  double cap_radius = 0.0;  // mm (hemispherical cap)
  double total_area = 0.0;  // mm^2

  double apex_z() const { return cyl_height + cap_radius; }
  // Arc length of one meridian, rim to apex.
  double meridian_length() const {
    return cyl_height + 0.5 * M_PI * cap_radius;
  }
};

struct SurfaceNode {
  int index = -1;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // mm
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();   // unit, outward
  double area_weight = 0.0;                            // mm^2
};

// Symmetric k-NN graph with chord-length edge weights. Adjacency lists are
// sorted by neighbor index; every node has degree >= k after
// symmetrization and the graph is a single connected component.
struct NeighborGraph {
  int k = 0;
  std::vector<std::vector<std::pair<int, double>>> adjacency;

  std::size_t size() const { return adjacency.size(); }
  int degree(int i) const { return static_cast<int>(adjacency[i].size()); }
  bool connected() const;
  std::size_t edge_count() const;  // undirected edges
};

// Standard sensing geometry: 22 mm diameter, 1740 mm^2 sensing area, wall
// height solved from the area constraint.
FingertipSurface build_surface();

// Point and outward normal at azimuth u in [0, 2*pi) and meridian
// parameter t in [0, 1]; t is proportional to arc length from rim (t=0)
// to apex (t=1). Out-of-range parameters throw std::invalid_argument.
std::pair<Eigen::Vector3d, Eigen::Vector3d> surface_point(
    const FingertipSurface& surface, double u, double t);

// Exactly n blue-noise nodes (dart throwing with a minimum-distance
// rejection radius, then Lloyd relaxation on the surface). Deterministic
// per seed. Throws minsight::NumericError if sampling cannot place n nodes
// after bounded radius reductions.
std::vector<SurfaceNode> sample_nodes(const FingertipSurface& surface, int n,
                                      std::uint64_t seed);

NeighborGraph build_neighbor_graph(const std::vector<SurfaceNode>& nodes,
                                   int k);

// Nearest point on the surface to an arbitrary point (points on the axis
// fall back to azimuth 0). Exact for points already on the surface.
Eigen::Vector3d project_to_surface(const FingertipSurface& surface,
                                   const Eigen::Vector3d& p);

// Outward unit normal of the surface point nearest to p.
Eigen::Vector3d surface_normal_at(const FingertipSurface& surface,
                                  const Eigen::Vector3d& p);

// Area-uniform random point on the surface.
Eigen::Vector3d random_surface_point(const FingertipSurface& surface,
                                     Rng& rng);

}  // namespace minsight::geometry
