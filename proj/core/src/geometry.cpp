#include "minsight/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "minsight/errors.hpp"

namespace minsight::geometry {

namespace {

constexpr double kSensorRadius = 11.0;   // mm, from the 22 mm diameter
constexpr double kSensingArea = 1740.0;  // mm^2

// Uniform hash grid over 3D points for neighbor queries.
class PointGrid {
 public:
  explicit PointGrid(double cell) : cell_(cell) {}

  void insert(int idx, const Eigen::Vector3d& p) {
    cells_[key(p)].push_back(idx);
  }

  void clear() { cells_.clear(); }

  // Visits candidate indices in cells overlapping a ball of radius r at p.
  template <typename Fn>
  void visit(const Eigen::Vector3d& p, double r, Fn&& fn) const {
    const int span = static_cast<int>(std::ceil(r / cell_));
    const int cx = coord(p.x()), cy = coord(p.y()), cz = coord(p.z());
    for (int dz = -span; dz <= span; ++dz)
      for (int dy = -span; dy <= span; ++dy)
        for (int dx = -span; dx <= span; ++dx) {
          const auto it = cells_.find(pack(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) continue;
          for (int idx : it->second) fn(idx);
        }
  }

 private:
  int coord(double v) const {
    return static_cast<int>(std::floor(v / cell_));
  }
  static std::uint64_t pack(int x, int y, int z) {
    const auto u = [](int v) {
      return static_cast<std::uint64_t>(v + (1 << 20)) & ((1u << 21) - 1);
    };
    return u(x) | (u(y) << 21) | (u(z) << 42);
  }
  std::uint64_t key(const Eigen::Vector3d& p) const {
    return pack(coord(p.x()), coord(p.y()), coord(p.z()));
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

Eigen::Vector3d nearest_axis_point(const FingertipSurface& s,
                                   const Eigen::Vector3d& p) {
  const double z = std::clamp(p.z(), 0.0, s.cyl_height);
  return {0.0, 0.0, z};
}

// One Lloyd pass: assign quadrature points to their nearest node, move each
// node to the projected centroid of its cell.
void lloyd_step(const FingertipSurface& surface,
                std::vector<Eigen::Vector3d>& nodes,
                const std::vector<Eigen::Vector3d>& quad, double cell) {
  PointGrid grid(cell);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    grid.insert(static_cast<int>(i), nodes[i]);

  std::vector<Eigen::Vector3d> sum(nodes.size(), Eigen::Vector3d::Zero());
  std::vector<int> count(nodes.size(), 0);

  for (const auto& q : quad) {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    double radius = cell;
    while (best < 0 || best_d2 > (radius - cell) * (radius - cell)) {
      grid.visit(q, radius, [&](int idx) {
        const double d2 = (nodes[idx] - q).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
          best_d2 = d2;
          best = idx;
        }
      });
      radius += cell;
      if (radius > 100.0) break;  // surface is bounded, cannot happen
    }
    sum[best] += q;
    count[best] += 1;
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (count[i] > 0) {
      nodes[i] = project_to_surface(surface, sum[i] / count[i]);
    }
  }
}

}  // namespace

bool NeighborGraph::connected() const {
  if (adjacency.empty()) return true;
  std::vector<char> seen(adjacency.size(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  std::size_t visited = 1;
  while (!q.empty()) {
    const int i = q.front();
    q.pop();
    for (const auto& [j, w] : adjacency[i]) {
      if (!seen[j]) {
        seen[j] = 1;
        ++visited;
        q.push(j);
      }
    }
  }
  return visited == adjacency.size();
}

std::size_t NeighborGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& adj : adjacency) total += adj.size();
  return total / 2;
}

FingertipSurface build_surface() {
  FingertipSurface s;
  s.radius = kSensorRadius;
  s.cap_radius = kSensorRadius;
  const double cap_area = 2.0 * M_PI * s.cap_radius * s.cap_radius;
  s.cyl_height = (kSensingArea - cap_area) / (2.0 * M_PI * s.radius);
  s.total_area = 2.0 * M_PI * s.radius * s.cyl_height + cap_area;
  return s;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> surface_point(
    const FingertipSurface& s, double u, double t) {
  if (!(u >= 0.0 && u < 2.0 * M_PI)) {
    throw std::invalid_argument("surface_point: azimuth out of [0, 2*pi)");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("surface_point: meridian parameter out of [0, 1]");
  }
  const double cu = std::cos(u), su = std::sin(u);
  const double arc = t * s.meridian_length();
  if (arc <= s.cyl_height) {
    return {Eigen::Vector3d(s.radius * cu, s.radius * su, arc),
            Eigen::Vector3d(cu, su, 0.0)};
  }
  const double phi = (arc - s.cyl_height) / s.cap_radius;  // [0, pi/2]
  const double cp = std::cos(phi), sp = std::sin(phi);
  return {Eigen::Vector3d(s.cap_radius * cp * cu, s.cap_radius * cp * su,
                          s.cyl_height + s.cap_radius * sp),
          Eigen::Vector3d(cp * cu, cp * su, sp)};
}

Eigen::Vector3d project_to_surface(const FingertipSurface& s,
                                   const Eigen::Vector3d& p) {
  const Eigen::Vector3d a = nearest_axis_point(s, p);
  Eigen::Vector3d d = p - a;
  if (d.norm() < 1e-12) d = Eigen::Vector3d::UnitX();
  Eigen::Vector3d q = a + s.radius * d.normalized();
  if (q.z() < 0.0) {
    double phi = std::atan2(p.y(), p.x());
    if (p.head<2>().norm() < 1e-12) phi = 0.0;
    q = {s.radius * std::cos(phi), s.radius * std::sin(phi), 0.0};
  }
  return q;
}

Eigen::Vector3d surface_normal_at(const FingertipSurface& s,
                                  const Eigen::Vector3d& p) {
  const Eigen::Vector3d q = project_to_surface(s, p);
  return (q - nearest_axis_point(s, q)).normalized();
}

Eigen::Vector3d random_surface_point(const FingertipSurface& s, Rng& rng) {
  const double wall_area = 2.0 * M_PI * s.radius * s.cyl_height;
  const double u = rng.uniform(0.0, 2.0 * M_PI);
  const double cu = std::cos(u), su = std::sin(u);
  if (rng.uniform() * s.total_area < wall_area) {
    const double z = rng.uniform(0.0, s.cyl_height);
    return {s.radius * cu, s.radius * su, z};
  }
  // On a sphere, surface area is uniform in z.
  const double sp = rng.uniform();  // sin(phi), phi polar angle from equator
  const double cp = std::sqrt(std::max(0.0, 1.0 - sp * sp));
  return {s.cap_radius * cp * cu, s.cap_radius * cp * su,
          s.cyl_height + s.cap_radius * sp};
}

std::vector<SurfaceNode> sample_nodes(const FingertipSurface& surface, int n,
                                      std::uint64_t seed) {
  if (n < 4) throw std::invalid_argument("sample_nodes: n must be >= 4");

  // Hex-lattice spacing for n cells of area A/n sets the rejection radius.
  const double spacing =
      std::sqrt(2.0 * surface.total_area / (n * std::sqrt(3.0)));
  Rng rng(seed);

  std::vector<Eigen::Vector3d> accepted;
  double r_min = 0.75 * spacing;
  bool ok = false;
  for (int round = 0; round < 25 && !ok; ++round, r_min *= 0.97) {
    accepted.clear();
    PointGrid grid(std::max(r_min, 1e-6));
    const long budget = 400L * n;
    for (long draw = 0; draw < budget && static_cast<int>(accepted.size()) < n;
         ++draw) {
      const Eigen::Vector3d p = random_surface_point(surface, rng);
      bool clash = false;
      grid.visit(p, r_min, [&](int idx) {
        if (!clash && (accepted[idx] - p).squaredNorm() < r_min * r_min)
          clash = true;
      });
      if (!clash) {
        grid.insert(static_cast<int>(accepted.size()), p);
        accepted.push_back(p);
      }
    }
    ok = static_cast<int>(accepted.size()) == n;
  }
  if (!ok) {
    throw NumericError("sample_nodes: could not place " + std::to_string(n) +
                       " nodes after bounded retries");
  }

  // Lloyd relaxation against a fixed area-uniform quadrature set.
  const int quad_count = std::max(30 * n, 4000);
  std::vector<Eigen::Vector3d> quad(quad_count);
  for (auto& q : quad) q = random_surface_point(surface, rng);
  for (int it = 0; it < 12; ++it) {
    lloyd_step(surface, accepted, quad, spacing);
  }

  std::vector<SurfaceNode> nodes(n);
  for (int i = 0; i < n; ++i) {
    nodes[i].index = i;
    nodes[i].position = accepted[i];
    nodes[i].normal = surface_normal_at(surface, accepted[i]);
    nodes[i].area_weight = surface.total_area / n;
  }
  return nodes;
}

NeighborGraph build_neighbor_graph(const std::vector<SurfaceNode>& nodes,
                                   int k) {
  if (k < 3) throw std::invalid_argument("build_neighbor_graph: k must be >= 3");
  const int n = static_cast<int>(nodes.size());
  if (n < 2) throw std::invalid_argument("build_neighbor_graph: need >= 2 nodes");
  const int kk = std::min(k, n - 1);

  NeighborGraph g;
  g.k = k;
  g.adjacency.assign(n, {});

  std::vector<std::pair<double, int>> dist(n);
  std::vector<std::vector<int>> knn(n);
  for (int i = 0; i < n; ++i) {
    dist.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      dist.emplace_back((nodes[i].position - nodes[j].position).norm(), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
    knn[i].reserve(kk);
    for (int m = 0; m < kk; ++m) knn[i].push_back(dist[m].second);
  }

  // Symmetrize by union.
  auto add_edge = [&](int i, int j) {
    for (const auto& [jj, w] : g.adjacency[i])
      if (jj == j) return;
    const double w = (nodes[i].position - nodes[j].position).norm();
    g.adjacency[i].emplace_back(j, w);
    g.adjacency[j].emplace_back(i, w);
  };
  for (int i = 0; i < n; ++i)
    for (int j : knn[i]) add_edge(i, j);

  // Join stray components with their shortest bridge (rare for k >= 6 on
  // blue-noise nodes, but keeps the invariant unconditional).
  auto component_labels = [&](std::vector<int>& label) {
    label.assign(n, -1);
    int comp = 0;
    for (int s = 0; s < n; ++s) {
      if (label[s] >= 0) continue;
      std::queue<int> q;
      q.push(s);
      label[s] = comp;
      while (!q.empty()) {
        const int i = q.front();
        q.pop();
        for (const auto& [j, w] : g.adjacency[i])
          if (label[j] < 0) {
            label[j] = comp;
            q.push(j);
          }
      }
      ++comp;
    }
    return comp;
  };
  std::vector<int> label;
  while (component_labels(label) > 1) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (label[i] == label[j]) continue;
        const double d = (nodes[i].position - nodes[j].position).norm();
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    add_edge(bi, bj);
  }

  for (auto& adj : g.adjacency) {
    std::sort(adj.begin(), adj.end());
  }
  return g;
}

}  // namespace minsight::geometry
