#include "minsight/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "binio.hpp"

namespace minsight::embedding {

int MapLayout::occupied_count() const {
  int n = 0;
  for (auto o : occupied) n += o != 0;
  return n;
}

void MapLayout::validate() const {
  if (static_cast<int>(occupied.size()) != grid_w * grid_h) {
    throw std::logic_error("MapLayout: occupancy mask size mismatch");
  }
  std::unordered_set<int> used;
  for (const auto& [row, col] : assignment) {
    if (row < 0 || row >= grid_h || col < 0 || col >= grid_w) {
      throw std::logic_error("MapLayout: assignment outside grid");
    }
    const int cell = row * grid_w + col;
    if (!used.insert(cell).second) {
      throw std::logic_error("MapLayout: assignment is not injective");
    }
    if (!occupied[cell]) {
      throw std::logic_error("MapLayout: assigned pixel not marked occupied");
    }
  }
  if (static_cast<int>(used.size()) != occupied_count()) {
    throw std::logic_error("MapLayout: stray occupied pixels");
  }
}

Eigen::Vector2d weighted_project(const geometry::SurfaceNode& node,
                                 double alpha, double z_max) {
  if (z_max <= 0.0) {
    throw std::invalid_argument("weighted_project: z_max must be positive");
  }
  const double z = node.position.z();
  if (z < -1e-9 || z > z_max * (1.0 + 1e-9) + 1e-9) {
    throw std::invalid_argument("weighted_project: node z outside [0, z_max]");
  }
  const double shrink = 1.0 - alpha * (z / z_max);
  return {node.position.x() * shrink, node.position.y() * shrink};
}

MapLayout build_layout(const std::vector<geometry::SurfaceNode>& nodes,
                       int grid_w, int grid_h, double alpha,
                       double pixel_pitch) {
  const int n = static_cast<int>(nodes.size());
  if (n == 0) throw std::invalid_argument("build_layout: no nodes");
  if (grid_w * grid_h < n) {
    throw std::invalid_argument("build_layout: grid too small for node count");
  }

  double z_max = 0.0;
  for (const auto& node : nodes) z_max = std::max(z_max, node.position.z());
  if (z_max <= 0.0) z_max = 1.0;  // flat node sets: projection is identity

  std::vector<Eigen::Vector2d> projected(n);
  double bound = 0.0;
  for (int i = 0; i < n; ++i) {
    projected[i] = weighted_project(nodes[i], alpha, z_max);
    bound = std::max({bound, std::abs(projected[i].x()),
                      std::abs(projected[i].y())});
  }

  double pitch = pixel_pitch;
  if (pitch <= 0.0) {
    const double half_px = 0.475 * std::min(grid_w, grid_h);
    pitch = bound > 0.0 ? bound / half_px : 1.0;
  }

  const double cx = grid_w / 2.0, cy = grid_h / 2.0;
  AssignmentProblem problem;
  problem.cost.resize(n, grid_w * grid_h);
  for (int i = 0; i < n; ++i) {
    const double px = cx + projected[i].x() / pitch;
    const double py = cy + projected[i].y() / pitch;
    for (int row = 0; row < grid_h; ++row) {
      const double dy = py - (row + 0.5);
      for (int col = 0; col < grid_w; ++col) {
        const double dx = px - (col + 0.5);
        problem.cost(i, row * grid_w + col) = dx * dx + dy * dy;
      }
    }
  }

  const AssignmentResult solution = solve_assignment(problem);

  MapLayout layout;
  layout.grid_w = grid_w;
  layout.grid_h = grid_h;
  layout.alpha = alpha;
  layout.pixel_pitch = pitch;
  layout.z_max = z_max;
  layout.assignment.resize(n);
  layout.occupied.assign(grid_w * grid_h, 0);
  for (int i = 0; i < n; ++i) {
    const int cell = solution.row_to_col[i];
    layout.assignment[i] = {cell / grid_w, cell % grid_w};
    layout.occupied[cell] = 1;
  }
  layout.validate();
  return layout;
}

double smoothness_score(const MapLayout& layout,
                        const geometry::NeighborGraph& graph) {
  if (graph.size() != layout.assignment.size()) {
    throw std::invalid_argument(
        "smoothness_score: layout and graph node sets differ");
  }
  double total = 0.0;
  std::size_t edges = 0;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (const auto& [j, w] : graph.adjacency[i]) {
      if (static_cast<std::size_t>(j) <= i) continue;
      const auto& [r1, c1] = layout.assignment[i];
      const auto& [r2, c2] = layout.assignment[j];
      total += std::hypot(double(r1 - r2), double(c1 - c2));
      ++edges;
    }
  }
  if (edges == 0) throw std::invalid_argument("smoothness_score: no edges");
  return total / static_cast<double>(edges);
}

std::vector<double> map_to_image(const ForceMap& map,
                                 const MapLayout& layout) {
  if (static_cast<int>(map.size()) != layout.node_count()) {
    throw std::invalid_argument("map_to_image: node count mismatch");
  }
  std::vector<double> image(
      static_cast<std::size_t>(layout.grid_w) * layout.grid_h * 3, 0.0);
  for (int i = 0; i < layout.node_count(); ++i) {
    const auto& [row, col] = layout.assignment[i];
    double* px = &image[(static_cast<std::size_t>(row) * layout.grid_w + col) * 3];
    px[0] = map.forces[i].x();
    px[1] = map.forces[i].y();
    px[2] = map.forces[i].z();
  }
  return image;
}

ForceMap image_to_map(const std::vector<double>& image,
                      const MapLayout& layout) {
  if (image.size() !=
      static_cast<std::size_t>(layout.grid_w) * layout.grid_h * 3) {
    throw std::invalid_argument("image_to_map: image size mismatch");
  }
  ForceMap map(layout.assignment.size());
  for (int i = 0; i < layout.node_count(); ++i) {
    const auto& [row, col] = layout.assignment[i];
    const double* px =
        &image[(static_cast<std::size_t>(row) * layout.grid_w + col) * 3];
    map.forces[i] = {px[0], px[1], px[2]};
  }
  return map;
}

namespace {
constexpr char kLayoutMagic[5] = "MNSL";
constexpr std::uint32_t kLayoutVersion = 1;
}  // namespace

void save_layout(const MapLayout& layout,
                 const std::vector<geometry::SurfaceNode>& nodes,
                 const std::string& path) {
  if (static_cast<int>(nodes.size()) != layout.node_count()) {
    throw std::invalid_argument("save_layout: node count mismatch");
  }
  detail::BinWriter w(path);
  w.magic(kLayoutMagic);
  w.value<std::uint32_t>(kLayoutVersion);
  w.value<std::uint32_t>(layout.grid_w);
  w.value<std::uint32_t>(layout.grid_h);
  w.value<double>(layout.alpha);
  w.value<double>(layout.pixel_pitch);
  w.value<double>(layout.z_max);
  w.value<std::uint32_t>(layout.node_count());
  for (int i = 0; i < layout.node_count(); ++i) {
    w.doubles(nodes[i].position.data(), 3);
    w.doubles(nodes[i].normal.data(), 3);
    w.value<double>(nodes[i].area_weight);
    w.value<std::uint32_t>(layout.assignment[i].first);
    w.value<std::uint32_t>(layout.assignment[i].second);
  }
  w.close();
}

std::pair<MapLayout, std::vector<geometry::SurfaceNode>> load_layout(
    const std::string& path) {
  detail::BinReader r(path);
  r.expect_magic(kLayoutMagic);
  const auto version = r.value<std::uint32_t>();
  if (version != kLayoutVersion) {
    throw DataError("unsupported layout version in " + path);
  }
  MapLayout layout;
  layout.grid_w = static_cast<int>(r.value<std::uint32_t>());
  layout.grid_h = static_cast<int>(r.value<std::uint32_t>());
  layout.alpha = r.value<double>();
  layout.pixel_pitch = r.value<double>();
  layout.z_max = r.value<double>();
  const int n = static_cast<int>(r.value<std::uint32_t>());
  std::vector<geometry::SurfaceNode> nodes(n);
  layout.assignment.resize(n);
  layout.occupied.assign(layout.grid_w * layout.grid_h, 0);
  for (int i = 0; i < n; ++i) {
    nodes[i].index = i;
    r.doubles(nodes[i].position.data(), 3);
    r.doubles(nodes[i].normal.data(), 3);
    nodes[i].area_weight = r.value<double>();
    const int row = static_cast<int>(r.value<std::uint32_t>());
    const int col = static_cast<int>(r.value<std::uint32_t>());
    layout.assignment[i] = {row, col};
    layout.occupied[row * layout.grid_w + col] = 1;
  }
  layout.validate();
  return {std::move(layout), std::move(nodes)};
}

}  // namespace minsight::embedding
