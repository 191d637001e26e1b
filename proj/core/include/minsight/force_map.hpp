#pragma once

#include <Eigen/Dense>
#include <vector>

namespace minsight {

// Per-node 3D force vectors over the discretized sensing surface. Nodes
// outside the contact patch hold exact zeros; the vector sum equals the
// applied contact force by construction.
struct ForceMap {
  std::vector<Eigen::Vector3d> forces;

  ForceMap() = default;
  explicit ForceMap(std::size_t n)
      : forces(n, Eigen::Vector3d::Zero()) {}

  std::size_t size() const { return forces.size(); }

  Eigen::Vector3d sum() const {
    Eigen::Vector3d s = Eigen::Vector3d::Zero();
    for (const auto& f : forces) s += f;
    return s;
  }

  int nonzero_count() const {
    int n = 0;
    for (const auto& f : forces)
      if (f != Eigen::Vector3d::Zero()) ++n;
    return n;
  }

  bool operator==(const ForceMap& other) const {
    return forces == other.forces;
  }
};

}  // namespace minsight
