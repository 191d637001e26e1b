#include "minsight/simulator.hpp"

#include <cmath>

#include "doctest.h"
#include "minsight/errors.hpp"
#include "minsight/rng.hpp"

using namespace minsight;
using namespace minsight::simulator;

namespace {

const SensorRig& test_rig() {
  static const SensorRig rig = SensorRig::standard(1350, 7);
  return rig;
}

int nearest_node(const SensorRig& rig, const Eigen::Vector3d& p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rig.nodes.size(); ++i) {
    const double d = (rig.nodes[i].position - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

double difference_energy(const SensorImage& a, const SensorImage& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = double(a.values[i]) - double(b.values[i]);
    e += d * d;
  }
  return e;
}

ContactState normal_press(const SensorRig& rig, const Eigen::Vector3d& at,
                          double newtons, double radius) {
  ContactState c;
  c.node_center = geometry::project_to_surface(rig.surface, at);
  c.force = -newtons * geometry::surface_normal_at(rig.surface, c.node_center);
  c.indenter_radius = radius;
  c.contact = true;
  return c;
}

}  // namespace

TEST_CASE("mesh triangulates every node with outward faces") {
  const auto& rig = test_rig();
  CHECK(rig.mesh.triangles.size() > 2000);
  int outward = 0;
  for (const auto& tri : rig.mesh.triangles) {
    const Eigen::Vector3d a = rig.nodes[tri[0]].position;
    const Eigen::Vector3d fn = (rig.nodes[tri[1]].position - a)
                                   .cross(rig.nodes[tri[2]].position - a);
    const Eigen::Vector3d avg_n = rig.nodes[tri[0]].normal +
                                  rig.nodes[tri[1]].normal +
                                  rig.nodes[tri[2]].normal;
    if (fn.dot(avg_n) > 0.0) ++outward;
  }
  CHECK(outward == static_cast<int>(rig.mesh.triangles.size()));
}

TEST_CASE("camera sees every node inside the frame") {
  const auto& rig = test_rig();
  for (int wh : {410, 82}) {
    const int w = wh, h = wh * 3 / 4;
    for (const auto& node : rig.nodes) {
      const Eigen::Vector2d px = rig.camera.project(node.position, w, h);
      CHECK(px.x() >= 0.0);
      CHECK(px.x() <= w);
      CHECK(px.y() >= 0.0);
      CHECK(px.y() <= h);
    }
  }
}

TEST_CASE("deform: zero field without contact, exact center displacement") {
  const auto& rig = test_rig();

  SUBCASE("no contact -> all zeros") {
    const auto field = deform(rig.surface, rig.nodes, ContactState::none());
    for (const auto& d : field.delta) CHECK(d == Eigen::Vector3d::Zero());
  }

  SUBCASE("1 N normal press displaces the center node 0.5 mm inward") {
    const int apex_node =
        nearest_node(rig, {0.0, 0.0, rig.surface.apex_z()});
    ContactState c;
    c.node_center = rig.nodes[apex_node].position;
    c.force = -1.0 * rig.nodes[apex_node].normal;
    c.indenter_radius = 8.0;
    c.contact = true;
    const auto field = deform(rig.surface, rig.nodes, c);
    const Eigen::Vector3d expected =
        -0.5 * rig.nodes[apex_node].normal;  // ||F||/k_e = 1/2
    CHECK((field[apex_node] - expected).norm() < 1e-12);
  }

  SUBCASE("doubling the force doubles every displacement") {
    const auto contact = normal_press(rig, {11, 0, 7}, 1.1, 8.0);
    auto twice = contact;
    twice.force *= 2.0;
    const auto f1 = deform(rig.surface, rig.nodes, contact);
    const auto f2 = deform(rig.surface, rig.nodes, twice);
    for (std::size_t i = 0; i < f1.size(); ++i) {
      CHECK((f2.delta[i] - 2.0 * f1.delta[i]).norm() < 1e-12);
    }
  }

  SUBCASE("force outside the envelope is rejected") {
    auto contact = normal_press(rig, {11, 0, 7}, 6.0, 8.0);
    CHECK_THROWS_AS(deform(rig.surface, rig.nodes, contact),
                    std::invalid_argument);
  }
}

TEST_CASE("ground-truth map conserves the contact force") {
  const auto& rig = test_rig();

  SUBCASE("zero map without contact") {
    const auto map = ground_truth_map(rig.nodes, ContactState::none());
    CHECK(map.sum() == Eigen::Vector3d::Zero());
    CHECK(map.nonzero_count() == 0);
  }

  SUBCASE("random contacts: vector sum equals F within 1e-9 N") {
    Rng rng(123);
    for (int i = 0; i < 300; ++i) {
      ContactState c;
      c.node_center = geometry::random_surface_point(rig.surface, rng);
      const Eigen::Vector3d n =
          geometry::surface_normal_at(rig.surface, c.node_center);
      Eigen::Vector3d t(rng.normal(), rng.normal(), rng.normal());
      t -= t.dot(n) * n;
      c.force = -rng.uniform(0.1, 3.0) * n + 0.2 * rng.uniform() * t;
      if (c.force.norm() > 5.0) c.force *= 4.9 / c.force.norm();
      c.indenter_radius = rng.uniform(2.0, 16.0);
      c.contact = true;
      const auto map = ground_truth_map(rig.nodes, c);
      CHECK((map.sum() - c.force).norm() < 1e-9);
      CHECK(map.nonzero_count() >= 1);
    }
  }

  SUBCASE("16 mm indenter at the apex covers at least 30 nodes") {
    const auto c = normal_press(rig, {0, 0, 30}, 1.0, 16.0);
    const auto map = ground_truth_map(rig.nodes, c);
    CHECK(map.nonzero_count() >= 30);
    // independent count: nodes within the 2*sigma_f = 16 mm support
    int within = 0;
    for (const auto& node : rig.nodes) {
      if ((node.position - c.node_center).norm() <= 16.0) ++within;
    }
    CHECK(map.nonzero_count() == within);
  }
}

TEST_CASE("render determinism and reference image") {
  const auto& rig = test_rig();
  const DisplacementField zero(rig.nodes.size());
  const auto ref1 =
      render(rig.nodes, rig.mesh, rig.leds, rig.camera, zero, 120, 90);
  const auto ref2 =
      render(rig.nodes, rig.mesh, rig.leds, rig.camera, zero, 120, 90);
  CHECK(ref1 == ref2);

  // The shell should light up: a healthy fraction of nonzero pixels.
  int nonzero = 0;
  for (float v : ref1.values) nonzero += v > 0.0f;
  CHECK(nonzero > static_cast<int>(ref1.values.size() / 4));

  // All values in [0, 1] and finite.
  for (float v : ref1.values) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("difference energy localizes around the contact") {
  const auto& rig = test_rig();
  const int w = 164, h = 123;
  const DisplacementField zero(rig.nodes.size());
  const auto ref =
      render(rig.nodes, rig.mesh, rig.leds, rig.camera, zero, w, h);

  const auto contact = normal_press(rig, {11.0 * std::cos(0.7),
                                          11.0 * std::sin(0.7), 8.0},
                                    1.5, 5.0);
  const auto field = deform(rig.surface, rig.nodes, contact, rig.params);
  const auto img =
      render(rig.nodes, rig.mesh, rig.leds, rig.camera, field, w, h);

  // Pixel radius of the 2*sigma_d disc: probe offsets in many directions,
  // projected back to the surface and into the image.
  const Eigen::Vector2d center = rig.camera.project(contact.node_center, w, h);
  const double support = 2.0 * rig.params.sigma_d_factor *
                         contact.indenter_radius;
  // Triangles with one displaced vertex extend the footprint by up to one
  // edge length past the support, hence the +2 mm probe offset.
  double pix_radius = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double phi = std::acos(1.0 - 2.0 * (k + 0.5) / 64.0);
    const double theta = M_PI * (1.0 + std::sqrt(5.0)) * k;
    const Eigen::Vector3d dir(std::sin(phi) * std::cos(theta),
                              std::sin(phi) * std::sin(theta), std::cos(phi));
    const Eigen::Vector3d probe = geometry::project_to_surface(
        rig.surface, contact.node_center + (support + 2.0) * dir);
    pix_radius =
        std::max(pix_radius, (rig.camera.project(probe, w, h) - center).norm());
  }
  pix_radius *= 1.05;

  double inside = 0.0, total = 0.0;
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      double e = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = double(img.at(row, col, c)) - double(ref.at(row, col, c));
        e += d * d;
      }
      total += e;
      const double dist = std::hypot(col + 0.5 - center.x(),
                                     row + 0.5 - center.y());
      if (dist <= pix_radius) inside += e;
    }
  }
  REQUIRE(total > 0.0);
  CHECK(inside / total >= 0.99);
}

TEST_CASE("image difference energy grows strictly with force magnitude") {
  const auto& rig = test_rig();
  const int w = 120, h = 90;
  const DisplacementField zero(rig.nodes.size());
  const auto ref =
      render(rig.nodes, rig.mesh, rig.leds, rig.camera, zero, w, h);

  double prev = -1.0;
  for (int k = 0; k < 10; ++k) {
    const double f = 0.1 + (3.0 - 0.1) * k / 9.0;
    const auto contact = normal_press(rig, {11, 0, 7}, f, 8.0);
    const auto field = deform(rig.surface, rig.nodes, contact, rig.params);
    const auto img =
        render(rig.nodes, rig.mesh, rig.leds, rig.camera, field, w, h);
    const double e = difference_energy(img, ref);
    CHECK(e > prev);
    prev = e;
  }
}

// A 120-degree scene rotation maps each LED onto the next color in the
// cycle, so the rotated difference image reproduces the original with
// channels permuted (R<-G, G<-B, B<-R). The mismatch floor is set by
// interpolation over the finite node mesh: measured ~4% relative RMS at
// the standard 1350-node sampling and ~2.6% at 2700 nodes, independent of
// render resolution. Asserted here with the measured floor plus margin,
// and the refinement trend is checked alongside.
static double symmetry_rel_rms(const SensorRig& rig, int w, int h) {
  const DisplacementField zero(rig.nodes.size());
  const auto ref =
      render(rig.nodes, rig.mesh, rig.leds, rig.camera, zero, w, h,
             rig.params);
  const double rot = 2.0 * M_PI / 3.0;
  const Eigen::Matrix3d R =
      Eigen::AngleAxisd(rot, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  ContactState c1;
  c1.node_center = geometry::project_to_surface(
      rig.surface, {11.0 * std::cos(0.35), 11.0 * std::sin(0.35), 9.0});
  c1.force = -1.8 * geometry::surface_normal_at(rig.surface, c1.node_center);
  c1.indenter_radius = 8.0;
  c1.contact = true;
  ContactState c2 = c1;
  c2.node_center = R * c1.node_center;
  c2.force = R * c1.force;
  const auto img1 = render(rig.nodes, rig.mesh, rig.leds, rig.camera,
                           deform(rig.surface, rig.nodes, c1, rig.params), w,
                           h, rig.params);
  const auto img2 = render(rig.nodes, rig.mesh, rig.leds, rig.camera,
                           deform(rig.surface, rig.nodes, c2, rig.params), w,
                           h, rig.params);
  auto diff_at = [&](const SensorImage& img, double row, double col,
                     int ch) -> double {
    const int r0 = static_cast<int>(std::floor(row - 0.5));
    const int c0 = static_cast<int>(std::floor(col - 0.5));
    const double fr = row - 0.5 - r0, fc = col - 0.5 - c0;
    double acc = 0.0;
    for (int dr = 0; dr <= 1; ++dr) {
      for (int dc = 0; dc <= 1; ++dc) {
        const int rr = std::clamp(r0 + dr, 0, h - 1);
        const int cc = std::clamp(c0 + dc, 0, w - 1);
        const double wgt = (dr ? fr : 1.0 - fr) * (dc ? fc : 1.0 - fc);
        acc += wgt * (double(img.at(rr, cc, ch)) - double(ref.at(rr, cc, ch)));
      }
    }
    return acc;
  };
  double num = 0.0, den = 0.0;
  const double cx = w / 2.0, cy = h / 2.0;
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const double dx = col + 0.5 - cx, dy = row + 0.5 - cy;
      const double sx = cx + std::cos(-rot) * dx - std::sin(-rot) * dy;
      const double sy = cy + std::sin(-rot) * dx + std::cos(-rot) * dy;
      if (sx < 1 || sx > w - 1 || sy < 1 || sy > h - 1) continue;
      for (int ch = 0; ch < 3; ++ch) {
        const double d2 =
            double(img2.at(row, col, ch)) - double(ref.at(row, col, ch));
        const double d1 = diff_at(img1, sy, sx, (ch + 1) % 3);
        num += (d1 - d2) * (d1 - d2);
        den += d2 * d2;
      }
    }
  }
  REQUIRE(den > 0.0);
  return std::sqrt(num / den);
}

TEST_CASE("120-degree LED color symmetry carries to the difference image") {
  const double coarse = symmetry_rel_rms(test_rig(), 256, 192);
  MESSAGE("relative RMS asymmetry at 1350 nodes: ", coarse);
  CHECK(coarse < 0.05);

  const SensorRig fine = SensorRig::standard(2700, 7);
  const double refined = symmetry_rel_rms(fine, 256, 192);
  MESSAGE("relative RMS asymmetry at 2700 nodes: ", refined);
  CHECK(refined < 0.032);
  CHECK(refined < coarse);
}

TEST_CASE("sensor_forward composes deform, render, and the label map") {
  const auto& rig = test_rig();
  const auto contact = normal_press(rig, {0, 11, 10}, 1.0, 8.0);
  const auto [image, map] = sensor_forward(rig, contact, 82, 60);
  CHECK(image.width == 82);
  CHECK(image.height == 60);
  CHECK((map.sum() - contact.force).norm() < 1e-9);
  const auto [image2, map2] = sensor_forward(rig, contact, 82, 60);
  CHECK(image == image2);
}
