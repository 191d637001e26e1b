#include "minsight/embedding.hpp"

#include <cstdio>

#include "doctest.h"
#include "minsight/errors.hpp"
#include "minsight/rng.hpp"

using namespace minsight;
using namespace minsight::embedding;
using minsight::geometry::SurfaceNode;

namespace {

SurfaceNode node_at(double x, double y, double z) {
  SurfaceNode n;
  n.position = {x, y, z};
  n.normal = Eigen::Vector3d::UnitZ();
  n.area_weight = 1.0;
  return n;
}

}  // namespace

TEST_CASE("weighted projection follows the radial-shrink rule") {
  SUBCASE("alpha = 0 is the identity") {
    const auto p = weighted_project(node_at(3.7, -4.1, 9.0), 0.0, 25.0);
    CHECK(p.x() == 3.7);
    CHECK(p.y() == -4.1);
  }
  SUBCASE("z = 0 is unchanged for any alpha") {
    const auto p = weighted_project(node_at(5.0, 2.0, 0.0), 0.73, 25.0);
    CHECK(p.x() == 5.0);
    CHECK(p.y() == 2.0);
  }
  SUBCASE("published shifting weight at full height") {
    const auto p = weighted_project(node_at(11.0, 0.0, 25.0), 0.0005, 25.0);
    CHECK(p.x() == doctest::Approx(10.9945).epsilon(1e-12));
    CHECK(p.y() == 0.0);
  }
  SUBCASE("nonpositive z_max rejected") {
    CHECK_THROWS_AS(weighted_project(node_at(1, 1, 0), 0.1, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("four symmetric rim nodes land in their own quadrant pixels") {
  std::vector<SurfaceNode> nodes;
  for (double deg : {45.0, 135.0, 225.0, 315.0}) {
    const double a = deg * M_PI / 180.0;
    nodes.push_back(node_at(11.0 * std::cos(a), 11.0 * std::sin(a), 0.0));
  }
  const MapLayout layout = build_layout(nodes, 2, 2, 0.0);
  // +x,+y quadrant -> (row 1, col 1), and so on around.
  CHECK(layout.assignment[0] == std::pair<int, int>{1, 1});
  CHECK(layout.assignment[1] == std::pair<int, int>{1, 0});
  CHECK(layout.assignment[2] == std::pair<int, int>{0, 0});
  CHECK(layout.assignment[3] == std::pair<int, int>{0, 1});
  CHECK(layout.occupied_count() == 4);
}

TEST_CASE("standard 1350-node layout fills a 40x40 grid completely") {
  const auto surface = geometry::build_surface();
  const auto nodes = geometry::sample_nodes(surface, 1350, 7);
  const MapLayout layout = build_layout(nodes, 40, 40, 0.0005);
  CHECK(layout.node_count() == 1350);
  CHECK(layout.occupied_count() == 1350);
  // 1600 - 1350 pixels stay unoccupied.
  int unoccupied = 0;
  for (auto o : layout.occupied) unoccupied += o == 0;
  CHECK(unoccupied == 250);

  // Determinism: same inputs, identical layout.
  const MapLayout again = build_layout(nodes, 40, 40, 0.0005);
  CHECK(again.assignment == layout.assignment);

  // Auto-fit keeps the projected cloud inside 95% of the grid.
  for (const auto& [row, col] : layout.assignment) {
    CHECK(row >= 0);
    CHECK(row < 40);
    CHECK(col >= 0);
    CHECK(col < 40);
  }
}

TEST_CASE("grid too small is rejected") {
  const auto surface = geometry::build_surface();
  const auto nodes = geometry::sample_nodes(surface, 100, 1);
  CHECK_THROWS_AS(build_layout(nodes, 9, 9, 0.0), std::invalid_argument);
}

TEST_CASE("smoothness of a perfect planar grid arrangement is ~1 pixel") {
  // 6x6 nodes laid out exactly on pixel centers of a 6x6 grid.
  std::vector<SurfaceNode> nodes;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      nodes.push_back(node_at(j + 0.5 - 3.0, i + 0.5 - 3.0, 0.0));
    }
  }
  const MapLayout layout = build_layout(nodes, 6, 6, 0.0, 1.0);
  const auto graph = geometry::build_neighbor_graph(nodes, 3);
  const double score = smoothness_score(layout, graph);
  CHECK(score >= 1.0);
  CHECK(score <= 1.5);
}

TEST_CASE("random permutation scores near the mean random pixel distance") {
  const auto surface = geometry::build_surface();
  const auto nodes = geometry::sample_nodes(surface, 400, 11);
  const auto graph = geometry::build_neighbor_graph(nodes, 6);
  MapLayout layout = build_layout(nodes, 22, 22, 0.0005);
  const double smooth = smoothness_score(layout, graph);

  Rng rng(5);
  rng.shuffle(layout.assignment);
  // re-validate the shuffled layout is still injective+complete
  layout.validate();
  const double shuffled = smoothness_score(layout, graph);

  // Monte-Carlo oracle for the mean distance between two uniform pixels.
  double mc = 0.0;
  const int trials = 200000;
  for (int i = 0; i < trials; ++i) {
    const double r1 = double(rng.index(22)), c1 = double(rng.index(22));
    const double r2 = double(rng.index(22)), c2 = double(rng.index(22));
    mc += std::hypot(r1 - r2, c1 - c2);
  }
  mc /= trials;
  CHECK(mc == doctest::Approx(0.52 * 22).epsilon(0.08));
  CHECK(shuffled == doctest::Approx(mc).epsilon(0.15));
  CHECK(smooth < shuffled);
}

TEST_CASE("the tiny shifting weight strictly improves smoothness") {
  const auto surface = geometry::build_surface();
  const auto nodes = geometry::sample_nodes(surface, 500, 21);
  const auto graph = geometry::build_neighbor_graph(nodes, 6);
  const double s0 = smoothness_score(build_layout(nodes, 24, 24, 0.0), graph);
  const double s1 =
      smoothness_score(build_layout(nodes, 24, 24, 0.0005), graph);
  CHECK(s1 < s0);
}

TEST_CASE("force map <-> image round trip is lossless") {
  const auto surface = geometry::build_surface();
  const auto nodes = geometry::sample_nodes(surface, 200, 9);
  const MapLayout layout = build_layout(nodes, 16, 16, 0.0005);

  SUBCASE("random map round trips bitwise") {
    Rng rng(17);
    ForceMap map(nodes.size());
    for (auto& f : map.forces) {
      f = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    }
    const auto image = map_to_image(map, layout);
    const ForceMap back = image_to_map(image, layout);
    CHECK(back == map);
  }

  SUBCASE("all-zero map gives the all-zero image") {
    const auto image = map_to_image(ForceMap(nodes.size()), layout);
    for (double v : image) CHECK(v == 0.0);
  }

  SUBCASE("single nonzero node occupies exactly its assigned pixel") {
    ForceMap map(nodes.size());
    map.forces[42] = {0.0, 0.0, -1.0};
    const auto image = map_to_image(map, layout);
    int nonzero_pixels = 0;
    for (int row = 0; row < 16; ++row) {
      for (int col = 0; col < 16; ++col) {
        const double* px = &image[(row * 16 + col) * 3];
        if (px[0] != 0.0 || px[1] != 0.0 || px[2] != 0.0) {
          ++nonzero_pixels;
          CHECK(std::pair<int, int>{row, col} == layout.assignment[42]);
          CHECK(px[2] == -1.0);
        }
      }
    }
    CHECK(nonzero_pixels == 1);
  }

  SUBCASE("shape mismatches are rejected") {
    CHECK_THROWS_AS(map_to_image(ForceMap(7), layout), std::invalid_argument);
    CHECK_THROWS_AS(image_to_map(std::vector<double>(5), layout),
                    std::invalid_argument);
  }
}

TEST_CASE("layout file round trip") {
  const auto surface = geometry::build_surface();
  const auto nodes = geometry::sample_nodes(surface, 64, 3);
  const MapLayout layout = build_layout(nodes, 9, 9, 0.0005);
  const std::string path = "layout_roundtrip_test.bin";
  save_layout(layout, nodes, path);
  const auto [loaded, loaded_nodes] = load_layout(path);
  CHECK(loaded.assignment == layout.assignment);
  CHECK(loaded.alpha == layout.alpha);
  CHECK(loaded.pixel_pitch == layout.pixel_pitch);
  CHECK(loaded.grid_w == layout.grid_w);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    CHECK(loaded_nodes[i].position == nodes[i].position);
  }
  std::remove(path.c_str());
}
