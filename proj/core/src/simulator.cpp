#include "minsight/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "minsight/errors.hpp"

namespace minsight::simulator {

void ContactState::validate(double max_force) const {
  const double f = force.norm();
  if (!std::isfinite(f)) {
    throw std::invalid_argument("ContactState: non-finite force");
  }
  if (f > max_force) {
    throw std::invalid_argument("ContactState: force " + std::to_string(f) +
                                " N outside [0, " + std::to_string(max_force) +
                                "] N envelope");
  }
  if (!contact && f != 0.0) {
    throw std::invalid_argument("ContactState: force must be zero without contact");
  }
  if (indenter_radius <= 0.0) {
    throw std::invalid_argument("ContactState: indenter radius must be positive");
  }
}

LedRing LedRing::standard() {
  LedRing ring;
  // Intensity 0.6 keeps spot + ambient below 1.0, clear of the clamp.
  const Eigen::Vector3d palette[3] = {{0.6, 0.0, 0.0},
                                      {0.0, 0.6, 0.0},
                                      {0.0, 0.0, 0.6}};
  for (int i = 0; i < 6; ++i) {
    ring.leds[i].azimuth = i * M_PI / 3.0;
    ring.leds[i].color = palette[i % 3];
  }
  return ring;
}

Eigen::Vector3d LedRing::position(int i) const {
  const double a = leds[i].azimuth;
  return {ring_radius * std::cos(a), ring_radius * std::sin(a), ring_height};
}

Eigen::Vector3d LedRing::axis(int i) const {
  const double a = leds[i].azimuth;
  const double st = std::sin(tilt), ct = std::cos(tilt);
  return {st * std::cos(a), st * std::sin(a), ct};
}

Eigen::Vector2d CameraModel::project(const Eigen::Vector3d& p, int w,
                                     int h) const {
  const Eigen::Vector3d d = p - position;
  const double rho = d.head<2>().norm();
  const double theta = std::atan2(rho, d.z());
  const double r = focal(w, h) * theta;
  double phi = 0.0;
  if (rho > 1e-300) phi = std::atan2(d.y(), d.x());
  return {w / 2.0 + r * std::cos(phi), h / 2.0 + r * std::sin(phi)};
}

bool CameraModel::pixel_ray(double px, double py, int w, int h,
                            Eigen::Vector3d& dir) const {
  const double dx = px - w / 2.0;
  const double dy = py - h / 2.0;
  const double r = std::hypot(dx, dy);
  const double theta = r / focal(w, h);
  if (theta > 0.5 * fov) return false;
  if (r < 1e-300) {
    dir = Eigen::Vector3d::UnitZ();
    return true;
  }
  const double st = std::sin(theta);
  dir = {st * dx / r, st * dy / r, std::cos(theta)};
  return true;
}

// ---------------------------------------------------------------------------
// Mesh construction: incremental convex hull over the node positions. The
// capsule is convex, so the hull triangulates the sampled surface; the flat
// bottom closure the hull adds across the rim is dropped afterwards.

namespace {

struct HullFace {
  int a, b, c;
  Eigen::Vector3d normal;  // unit, outward
  bool alive = true;
};

Eigen::Vector3d face_normal(const std::vector<Eigen::Vector3d>& pts, int a,
                            int b, int c) {
  return (pts[b] - pts[a]).cross(pts[c] - pts[a]);
}

double corner_angle(const std::vector<Eigen::Vector3d>& pts, int apex, int u,
                    int v) {
  const Eigen::Vector3d e1 = (pts[u] - pts[apex]).normalized();
  const Eigen::Vector3d e2 = (pts[v] - pts[apex]).normalized();
  return std::acos(std::clamp(e1.dot(e2), -1.0, 1.0));
}

// Iterative Delaunay edge flipping on an oriented triangle mesh: an
// interior edge is flipped when the opposite corner angles sum past pi.
// Fold-overs are rejected by checking the new faces stay outward.
void delaunay_flip(const std::vector<Eigen::Vector3d>& pts,
                   std::vector<std::array<int, 3>>& tris) {
  constexpr double kAngleTol = 1e-9;
  for (int pass = 0; pass < 60; ++pass) {
    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int k = 0; k < 3; ++k) {
        int a = tris[t][k], b = tris[t][(k + 1) % 3];
        if (a > b) std::swap(a, b);
        edge_tris[{a, b}].push_back(static_cast<int>(t));
      }
    }
    int flips = 0;
    std::vector<char> touched(tris.size(), 0);
    for (const auto& [edge, owners] : edge_tris) {
      if (owners.size() != 2) continue;
      const int t1 = owners[0], t2 = owners[1];
      if (touched[t1] || touched[t2]) continue;
      const auto [a, b] = edge;
      auto opposite = [&](int t) {
        for (int v : tris[t])
          if (v != a && v != b) return v;
        return -1;
      };
      const int c = opposite(t1), d = opposite(t2);
      if (c < 0 || d < 0 || c == d) continue;
      if (corner_angle(pts, c, a, b) + corner_angle(pts, d, a, b) <=
          M_PI + kAngleTol) {
        continue;
      }
      // Rebuild the quad with edge c-d, preserving the winding of t1.
      int a1 = -1, b1 = -1;
      for (int k = 0; k < 3; ++k) {
        const int u = tris[t1][k], v = tris[t1][(k + 1) % 3];
        if ((u == a && v == b) || (u == b && v == a)) {
          a1 = u;
          b1 = v;
          break;
        }
      }
      const std::array<int, 3> n1{a1, d, c};
      const std::array<int, 3> n2{d, b1, c};
      // Reject fold-overs: both new faces must stay roughly parallel to
      // the old pair's orientation.
      const Eigen::Vector3d old_n = face_normal(pts, a1, b1, c) +
                                    face_normal(pts, b1, a1, d);
      if (face_normal(pts, n1[0], n1[1], n1[2]).dot(old_n) <= 0.0) continue;
      if (face_normal(pts, n2[0], n2[1], n2[2]).dot(old_n) <= 0.0) continue;
      tris[t1] = n1;
      tris[t2] = n2;
      touched[t1] = touched[t2] = 1;
      ++flips;
    }
    if (flips == 0) break;
  }
}

}  // namespace

SurfaceMesh build_mesh(const std::vector<geometry::SurfaceNode>& nodes) {
  const int n = static_cast<int>(nodes.size());
  if (n < 4) throw std::invalid_argument("build_mesh: need at least 4 nodes");
  std::vector<Eigen::Vector3d> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = nodes[i].position;

  // Initial simplex: spread-out extremes.
  int p0 = 0;
  for (int i = 1; i < n; ++i)
    if (pts[i].x() < pts[p0].x()) p0 = i;
  int p1 = (p0 + 1) % n;
  for (int i = 0; i < n; ++i)
    if ((pts[i] - pts[p0]).squaredNorm() > (pts[p1] - pts[p0]).squaredNorm())
      p1 = i;
  int p2 = -1;
  double best_area = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a =
        (pts[i] - pts[p0]).cross(pts[i] - pts[p1]).squaredNorm();
    if (a > best_area) {
      best_area = a;
      p2 = i;
    }
  }
  if (p2 < 0) throw NumericError("build_mesh: degenerate node set");
  const Eigen::Vector3d base_n = face_normal(pts, p0, p1, p2).normalized();
  int p3 = -1;
  double best_vol = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = std::abs(base_n.dot(pts[i] - pts[p0]));
    if (v > best_vol) {
      best_vol = v;
      p3 = i;
    }
  }
  if (p3 < 0 || best_vol < 1e-9) {
    throw NumericError("build_mesh: node set is coplanar");
  }

  std::vector<HullFace> faces;
  auto push_face = [&](int a, int b, int c, const Eigen::Vector3d& inside) {
    HullFace f{a, b, c, Eigen::Vector3d::Zero(), true};
    Eigen::Vector3d nrm = face_normal(pts, a, b, c);
    if (nrm.dot(pts[a] - inside) < 0.0) {
      std::swap(f.b, f.c);
      nrm = -nrm;
    }
    f.normal = nrm.normalized();
    faces.push_back(f);
  };
  const Eigen::Vector3d inside0 =
      (pts[p0] + pts[p1] + pts[p2] + pts[p3]) / 4.0;
  push_face(p0, p1, p2, inside0);
  push_face(p0, p1, p3, inside0);
  push_face(p0, p2, p3, inside0);
  push_face(p1, p2, p3, inside0);

  constexpr double kEps = 1e-9;
  for (int p = 0; p < n; ++p) {
    if (p == p0 || p == p1 || p == p2 || p == p3) continue;
    // Visible faces.
    std::vector<int> visible;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!faces[f].alive) continue;
      if (faces[f].normal.dot(pts[p] - pts[faces[f].a]) > kEps) {
        visible.push_back(static_cast<int>(f));
      }
    }
    if (visible.empty()) continue;  // inside the current hull

    // Horizon: directed edges of visible faces whose reverse edge is not
    // part of the visible set.
    std::set<std::pair<int, int>> edges;
    for (int f : visible) {
      const auto& fc = faces[f];
      edges.insert({fc.a, fc.b});
      edges.insert({fc.b, fc.c});
      edges.insert({fc.c, fc.a});
    }
    for (int f : visible) faces[f].alive = false;
    for (const auto& [u, v] : edges) {
      if (edges.count({v, u})) continue;  // interior edge
      HullFace f{u, v, p, Eigen::Vector3d::Zero(), true};
      f.normal = face_normal(pts, u, v, p).normalized();
      faces.push_back(f);
    }
  }

  // Keep outward-oriented faces, drop the bottom closure across the rim.
  const Eigen::Vector3d interior(0.0, 0.0, 5.0);
  SurfaceMesh mesh;
  std::vector<char> used(n, 0);
  for (const auto& f : faces) {
    if (!f.alive) continue;
    HullFace fc = f;
    if (fc.normal.dot(pts[fc.a] - interior) < 0.0) {
      std::swap(fc.b, fc.c);
      fc.normal = -fc.normal;
    }
    if (fc.normal.z() < -0.3) continue;  // bottom lid
    mesh.triangles.push_back({fc.a, fc.b, fc.c});
    used[fc.a] = used[fc.b] = used[fc.c] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (!used[i]) {
      throw DataError("build_mesh: node " + std::to_string(i) +
                      " absent from the hull triangulation");
    }
  }

  // The wall is developable along z, so the hull is free to emit long
  // vertical slivers there. Delaunay edge flips restore locally short
  // edges, which the displacement interpolation depends on.
  delaunay_flip(pts, mesh.triangles);
  return mesh;
}

// ---------------------------------------------------------------------------

namespace {

// Shape operator (normal gradient) of the capsule at a surface point:
// zero curvature along the wall axis, 1/r azimuthally; 1/R on the cap.
Eigen::Matrix3d shape_operator(const geometry::FingertipSurface& surface,
                               const Eigen::Vector3d& p,
                               const Eigen::Vector3d& normal) {
  if (p.z() < surface.cyl_height) {
    const double rho = p.head<2>().norm();
    if (rho < 1e-12) return Eigen::Matrix3d::Zero();
    const Eigen::Vector3d t_u(-p.y() / rho, p.x() / rho, 0.0);
    return (1.0 / surface.radius) * (t_u * t_u.transpose());
  }
  return (1.0 / surface.cap_radius) *
         (Eigen::Matrix3d::Identity() - normal * normal.transpose());
}

}  // namespace

DisplacementField deform(const geometry::FingertipSurface& surface,
                         const std::vector<geometry::SurfaceNode>& nodes,
                         const ContactState& contact, const SimParams& params) {
  DisplacementField field(nodes.size());
  field.normal_delta.assign(nodes.size(), Eigen::Vector3d::Zero());
  if (!contact.contact) return field;
  contact.validate(params.max_force);

  const Eigen::Vector3d center_normal =
      geometry::surface_normal_at(surface, contact.node_center);
  const Eigen::Vector3d f = contact.force;
  const double f_mag = f.norm();
  const Eigen::Vector3d f_shear = f - f.dot(center_normal) * center_normal;
  const double amp = f_mag / params.stiffness;
  const Eigen::Vector3d shear = f_shear / params.shear_stiffness;
  const double sigma = params.sigma_d_factor * contact.indenter_radius;
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

  // Gaussian kernel with a C1 compact-support taper at 2*sigma: value 1 at
  // the center, value and slope exactly 0 from the support boundary
  // outward, so the difference image stays confined to the contact disc.
  // A smooth ramp clamps the field to zero at the base, where the shell
  // is bonded.
  const double support = 2.0 * sigma;
  const double clamp_h = params.base_clamp_height;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Eigen::Vector3d offset = nodes[i].position - contact.node_center;
    const double g2 = offset.squaredNorm();
    if (g2 >= support * support) continue;
    const double g = std::sqrt(g2);
    const double s_sup = g / support;
    const double taper = (1.0 - s_sup * s_sup) * (1.0 - s_sup * s_sup);
    const double dtaper_dg =
        -4.0 * s_sup * (1.0 - s_sup * s_sup) / support;
    const double gaussian = std::exp(-g2 * inv_two_sigma2);
    const double dgauss_dg = gaussian * (-g * 2.0 * inv_two_sigma2);
    const double w = gaussian * taper;
    const double dw_dg = dgauss_dg * taper + gaussian * dtaper_dg;

    // Fully bonded below the freeze height so the mesh boundary never
    // moves; smooth transition up to the clamp height.
    double ramp = 1.0, dramp_dz = 0.0;
    const double freeze_h = std::min(1.0, 0.4 * clamp_h);
    if (clamp_h > freeze_h && nodes[i].position.z() < clamp_h) {
      const double s = std::clamp(
          (nodes[i].position.z() - freeze_h) / (clamp_h - freeze_h), 0.0, 1.0);
      ramp = s * s * (3.0 - 2.0 * s);
      dramp_dz = 6.0 * s * (1.0 - s) / (clamp_h - freeze_h);
    }
    if (ramp <= 0.0) continue;

    const Eigen::Vector3d& nrm = nodes[i].normal;
    const Eigen::Vector3d p_shear = shear - nrm.dot(shear) * nrm;
    field.delta[i] = ramp * w * (-amp * nrm + p_shear);

    // First-order rotation of the surface normal under the field
    // d = r(z) w(x) * (-amp * n(x) + P(x) s):
    //   dn = amp * P grad(r w) + r w * S s
    // with P the tangent projector and S the shape operator.
    Eigen::Vector3d grad_rw = Eigen::Vector3d::Zero();
    if (g > 1e-12) grad_rw = ramp * dw_dg * (offset / g);
    grad_rw.z() += dramp_dz * w;
    const Eigen::Matrix3d s_op =
        shape_operator(surface, nodes[i].position, nrm);
    field.normal_delta[i] = amp * (grad_rw - nrm.dot(grad_rw) * nrm) +
                            ramp * w * (s_op * shear);
  }
  return field;
}

ForceMap ground_truth_map(const std::vector<geometry::SurfaceNode>& nodes,
                          const ContactState& contact,
                          const SimParams& params) {
  ForceMap map(nodes.size());
  if (!contact.contact) return map;
  contact.validate(params.max_force);

  const double sigma = params.sigma_f_factor * contact.indenter_radius;
  const double support2 = 4.0 * sigma * sigma;  // (2*sigma)^2
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

  std::vector<double> weights(nodes.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double g2 = (nodes[i].position - contact.node_center).squaredNorm();
    if (g2 > support2) continue;
    weights[i] = std::exp(-g2 * inv_two_sigma2);
    total += weights[i];
  }
  if (total <= 0.0) {
    throw NumericError("ground_truth_map: no node inside the contact support");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (weights[i] > 0.0) map.forces[i] = (weights[i] / total) * contact.force;
  }
  return map;
}

// ---------------------------------------------------------------------------

namespace {

// Moller-Trumbore without backface culling. The barycentric slack keeps
// rays that pass exactly through a shared edge from being rejected by both
// neighbors (values agree there by continuity, nearest t wins).
bool ray_triangle(const Eigen::Vector3d& orig, const Eigen::Vector3d& dir,
                  const Eigen::Vector3d& v0, const Eigen::Vector3d& v1,
                  const Eigen::Vector3d& v2, double& t, double& bu,
                  double& bv) {
  constexpr double kSlack = 1e-7;
  const Eigen::Vector3d e1 = v1 - v0;
  const Eigen::Vector3d e2 = v2 - v0;
  const Eigen::Vector3d pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-12) return false;
  const double inv_det = 1.0 / det;
  const Eigen::Vector3d tvec = orig - v0;
  bu = tvec.dot(pvec) * inv_det;
  if (bu < -kSlack || bu > 1.0 + kSlack) return false;
  const Eigen::Vector3d qvec = tvec.cross(e1);
  bv = dir.dot(qvec) * inv_det;
  if (bv < -kSlack || bu + bv > 1.0 + kSlack) return false;
  t = e2.dot(qvec) * inv_det;
  return t > 1e-9;
}

double cone_falloff(double angle, double half_angle) {
  if (angle >= half_angle) return 0.0;
  const double s = angle / half_angle;
  const double q = 1.0 - s * s;
  return q * q;
}

}  // namespace

SensorImage render(const std::vector<geometry::SurfaceNode>& nodes,
                   const SurfaceMesh& mesh, const LedRing& leds,
                   const CameraModel& cam,
                   const DisplacementField& displacement, int w, int h,
                   const SimParams& params) {
  if (displacement.size() != nodes.size()) {
    throw std::invalid_argument("render: displacement/node size mismatch");
  }
  if (w <= 0 || h <= 0) throw std::invalid_argument("render: bad image size");

  const int n = static_cast<int>(nodes.size());
  std::vector<Eigen::Vector3d> pos(n);
  for (int i = 0; i < n; ++i) pos[i] = nodes[i].position + displacement[i];

  // Shading normals: exact analytic normal plus the deformation-induced
  // rotation. The analytic normal_delta is used when supplied; otherwise
  // the change is estimated from area-weighted face-normal averages, with
  // the rest-mesh average subtracted so the mesh's own bias cancels.
  std::vector<Eigen::Vector3d> vnormal(n);
  if (!displacement.normal_delta.empty()) {
    for (int i = 0; i < n; ++i) {
      vnormal[i] =
          (nodes[i].normal + displacement.normal_delta[i]).normalized();
    }
  } else {
    std::vector<Eigen::Vector3d> rest_avg(n, Eigen::Vector3d::Zero());
    std::vector<Eigen::Vector3d> disp_avg(n, Eigen::Vector3d::Zero());
    for (const auto& tri : mesh.triangles) {
      const Eigen::Vector3d rest_fn =
          (nodes[tri[1]].position - nodes[tri[0]].position)
              .cross(nodes[tri[2]].position - nodes[tri[0]].position);
      const Eigen::Vector3d disp_fn =
          (pos[tri[1]] - pos[tri[0]]).cross(pos[tri[2]] - pos[tri[0]]);
      for (int k = 0; k < 3; ++k) {
        rest_avg[tri[k]] += rest_fn;
        disp_avg[tri[k]] += disp_fn;
      }
    }
    for (int i = 0; i < n; ++i) {
      const double len = rest_avg[i].norm();
      Eigen::Vector3d delta = Eigen::Vector3d::Zero();
      if (len > 1e-12) delta = (disp_avg[i] - rest_avg[i]) / len;
      vnormal[i] = (nodes[i].normal + delta).normalized();
    }
  }

  // Depth pass: candidate pixels from the projected triangle bounding box,
  // exact ray-triangle intersection per pixel.
  const std::size_t pixels = static_cast<std::size_t>(w) * h;
  std::vector<double> depth(pixels, std::numeric_limits<double>::infinity());
  std::vector<int> hit(pixels, -1);
  std::vector<double> hit_u(pixels, 0.0), hit_v(pixels, 0.0);

  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    const auto& tri = mesh.triangles[ti];
    Eigen::Vector2d p0 = cam.project(pos[tri[0]], w, h);
    Eigen::Vector2d p1 = cam.project(pos[tri[1]], w, h);
    Eigen::Vector2d p2 = cam.project(pos[tri[2]], w, h);
    const int c_lo = std::max(
        0, static_cast<int>(std::floor(std::min({p0.x(), p1.x(), p2.x()}))) - 1);
    const int c_hi = std::min(
        w - 1,
        static_cast<int>(std::ceil(std::max({p0.x(), p1.x(), p2.x()}))) + 1);
    const int r_lo = std::max(
        0, static_cast<int>(std::floor(std::min({p0.y(), p1.y(), p2.y()}))) - 1);
    const int r_hi = std::min(
        h - 1,
        static_cast<int>(std::ceil(std::max({p0.y(), p1.y(), p2.y()}))) + 1);
    for (int row = r_lo; row <= r_hi; ++row) {
      for (int col = c_lo; col <= c_hi; ++col) {
        Eigen::Vector3d dir;
        if (!cam.pixel_ray(col + 0.5, row + 0.5, w, h, dir)) continue;
        double t, bu, bv;
        if (!ray_triangle(cam.position, dir, pos[tri[0]], pos[tri[1]],
                          pos[tri[2]], t, bu, bv)) {
          continue;
        }
        const std::size_t px = static_cast<std::size_t>(row) * w + col;
        if (t < depth[px]) {
          depth[px] = t;
          hit[px] = static_cast<int>(ti);
          hit_u[px] = bu;
          hit_v[px] = bv;
        }
      }
    }
  }

  // Shading pass.
  SensorImage img(w, h);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const std::size_t px = static_cast<std::size_t>(row) * w + col;
      if (hit[px] < 0) continue;
      Eigen::Vector3d dir;
      cam.pixel_ray(col + 0.5, row + 0.5, w, h, dir);
      const auto& tri = mesh.triangles[hit[px]];
      const double bu = hit_u[px], bv = hit_v[px];
      const Eigen::Vector3d x = cam.position + depth[px] * dir;
      Eigen::Vector3d nrm = (1.0 - bu - bv) * vnormal[tri[0]] +
                            bu * vnormal[tri[1]] + bv * vnormal[tri[2]];
      nrm.normalize();
      const Eigen::Vector3d inward = -nrm;  // lit from inside

      Eigen::Vector3d rgb =
          params.ambient * std::max(0.0, inward.dot(-dir)) *
          Eigen::Vector3d::Ones();
      for (int li = 0; li < 6; ++li) {
        const Eigen::Vector3d lp = leds.position(li);
        Eigen::Vector3d to_surface = x - lp;
        const double dist = to_surface.norm();
        if (dist < 1e-9) continue;
        to_surface /= dist;
        const double cang = std::clamp(to_surface.dot(leds.axis(li)), -1.0, 1.0);
        const double falloff =
            cone_falloff(std::acos(cang), leds.cone_half_angle);
        if (falloff <= 0.0) continue;
        const double lambert = std::max(0.0, inward.dot(-to_surface));
        rgb += leds.leds[li].color * (falloff * lambert);
      }
      for (int c = 0; c < 3; ++c) {
        img.at(row, col, c) =
            static_cast<float>(std::clamp(rgb[c], 0.0, 1.0));
      }
    }
  }
  return img;
}

SensorRig SensorRig::standard(int n_nodes, std::uint64_t seed, int graph_k) {
  SensorRig rig;
  rig.surface = geometry::build_surface();
  rig.nodes = geometry::sample_nodes(rig.surface, n_nodes, seed);
  rig.graph = geometry::build_neighbor_graph(rig.nodes, graph_k);
  rig.mesh = build_mesh(rig.nodes);
  rig.leds = LedRing::standard();
  rig.camera = CameraModel::standard();
  return rig;
}

std::pair<SensorImage, ForceMap> sensor_forward(const SensorRig& rig,
                                                const ContactState& contact,
                                                int w, int h) {
  const DisplacementField field =
      deform(rig.surface, rig.nodes, contact, rig.params);
  SensorImage image =
      render(rig.nodes, rig.mesh, rig.leds, rig.camera, field, w, h,
             rig.params);
  ForceMap map = ground_truth_map(rig.nodes, contact, rig.params);
  return {std::move(image), std::move(map)};
}

}  // namespace minsight::simulator
