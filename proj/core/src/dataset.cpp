#include "minsight/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "binio.hpp"
#include "minsight/errors.hpp"
#include "minsight/rng.hpp"
#include "minsight/threads.hpp"
#include "minsight/version.hpp"

namespace minsight::dataset {

using nlohmann::json;

void ProbeProtocol::validate(const simulator::SimParams& params) const {
  if (n_locations < 1) {
    throw std::invalid_argument("protocol: need at least one location");
  }
  if (depths.empty()) {
    throw std::invalid_argument("protocol: empty depth schedule");
  }
  double prev = 0.0;
  for (double d : depths) {
    if (d <= prev) {
      throw std::invalid_argument(
          "protocol: depths must be positive and strictly increasing");
    }
    prev = d;
  }
  if (position_sigma < 0.0 || force_sigma.minCoeff() < 0.0) {
    throw std::invalid_argument("protocol: noise sigmas must be nonnegative");
  }
  if (tangential_cap < 0.0 || tangential_cap > 1.0) {
    throw std::invalid_argument("protocol: tangential cap must be in [0, 1]");
  }
  const double worst =
      params.stiffness * depths.back() *
          std::sqrt(1.0 + tangential_cap * tangential_cap) +
      6.0 * force_sigma.maxCoeff();
  if (worst > params.max_force) {
    throw DataError("protocol: depth " + std::to_string(depths.back()) +
                    " mm yields up to " + std::to_string(worst) +
                    " N, outside the " + std::to_string(params.max_force) +
                    " N simulator envelope");
  }
}

int Dataset::location_count() const {
  int n = 0;
  for (const auto& s : samples) n = std::max(n, s.location_index + 1);
  return n;
}

Dataset generate(const simulator::SensorRig& rig, const ProbeProtocol& protocol,
                 int w, int h) {
  protocol.validate(rig.params);

  Dataset ds;
  ds.surface = rig.surface;
  ds.nodes = rig.nodes;
  ds.graph_k = rig.graph.k;
  ds.sim_params = rig.params;
  ds.protocol = protocol;
  ds.image_w = w;
  ds.image_h = h;

  // Draw every random quantity sequentially first; rendering is pure.
  Rng rng(protocol.seed);
  struct Draw {
    simulator::ContactState clean, noisy;
    int location;
  };
  std::vector<Draw> draws;
  draws.reserve(static_cast<std::size_t>(protocol.n_locations) *
                protocol.depths.size());
  for (int loc = 0; loc < protocol.n_locations; ++loc) {
    const auto& node = rig.nodes[rng.index(rig.nodes.size())];
    Eigen::Vector3d t1 = node.normal.cross(Eigen::Vector3d::UnitZ());
    if (t1.norm() < 1e-6) t1 = node.normal.cross(Eigen::Vector3d::UnitX());
    t1.normalize();
    const Eigen::Vector3d t2 = node.normal.cross(t1);
    for (double depth : protocol.depths) {
      const double f_normal = rig.params.stiffness * depth;
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      const double shear = rng.uniform(0.0, protocol.tangential_cap) * f_normal;

      Draw d;
      d.location = loc;
      d.clean.node_center = node.position;
      d.clean.force = -f_normal * node.normal +
                      shear * (std::cos(angle) * t1 + std::sin(angle) * t2);
      d.clean.indenter_radius = protocol.indenter_radius;
      d.clean.contact = true;

      d.noisy = d.clean;
      for (int a = 0; a < 3; ++a) {
        d.noisy.node_center[a] +=
            rng.truncated_normal(protocol.position_sigma, 6.0);
        d.noisy.force[a] += rng.truncated_normal(protocol.force_sigma[a], 6.0);
      }
      draws.push_back(std::move(d));
    }
  }

  const simulator::DisplacementField no_contact(rig.nodes.size());
  ds.reference = simulator::render(rig.nodes, rig.mesh, rig.leds, rig.camera,
                                   no_contact, w, h, rig.params);

  ds.samples.resize(draws.size());
  parallel_for(draws.size(), [&](std::size_t i) {
    const Draw& d = draws[i];
    Sample& s = ds.samples[i];
    s.location_index = d.location;
    s.clean_contact = d.clean;
    s.contact = d.noisy;
    const auto field = simulator::deform(rig.surface, rig.nodes, d.clean,
                                         rig.params);
    s.image = simulator::render(rig.nodes, rig.mesh, rig.leds, rig.camera,
                                field, w, h, rig.params);
    s.force_map = simulator::ground_truth_map(rig.nodes, d.noisy, rig.params);
    s.clean_map = simulator::ground_truth_map(rig.nodes, d.clean, rig.params);
  });
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: fraction must be in (0, 1)");
  }
  const int locations = ds.location_count();
  if (locations < 2) {
    throw std::invalid_argument("split: need at least two probe locations");
  }
  std::vector<int> order(locations);
  for (int i = 0; i < locations; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const int n_train = std::clamp(
      static_cast<int>(std::llround(train_fraction * locations)), 1,
      locations - 1);
  std::vector<char> in_train(locations, 0);
  for (int i = 0; i < n_train; ++i) in_train[order[i]] = 1;

  auto shell = [&ds]() {
    Dataset out;
    out.surface = ds.surface;
    out.nodes = ds.nodes;
    out.graph_k = ds.graph_k;
    out.sim_params = ds.sim_params;
    out.protocol = ds.protocol;
    out.image_w = ds.image_w;
    out.image_h = ds.image_h;
    out.reference = ds.reference;
    out.layout = ds.layout;
    return out;
  };
  Dataset train = shell(), test = shell();
  for (const auto& s : ds.samples) {
    (in_train[s.location_index] ? train : test).samples.push_back(s);
  }
  return {std::move(train), std::move(test)};
}

void NormStats::apply(Eigen::Ref<Eigen::VectorXd> v) const {
  const int c = channels();
  for (int i = 0; i < v.size(); ++i) {
    const int ch = static_cast<int>(i % c);
    v[i] = -1.0 + 2.0 * (v[i] - lo[ch]) / (hi[ch] - lo[ch]);
  }
}

void NormStats::invert(Eigen::Ref<Eigen::VectorXd> v) const {
  const int c = channels();
  for (int i = 0; i < v.size(); ++i) {
    const int ch = static_cast<int>(i % c);
    v[i] = lo[ch] + (v[i] + 1.0) * 0.5 * (hi[ch] - lo[ch]);
  }
}

namespace {

NormStats finish_stats(std::vector<double> lo, std::vector<double> hi) {
  for (std::size_t c = 0; c < lo.size(); ++c) {
    if (!(hi[c] > lo[c])) {
      throw DataError("fit_norm: channel " + std::to_string(c) +
                      " is constant");
    }
  }
  return NormStats{std::move(lo), std::move(hi)};
}

}  // namespace

NormStats fit_norm_single(const Dataset& train) {
  if (train.samples.empty()) throw std::invalid_argument("fit_norm: empty set");
  std::vector<double> lo(6, std::numeric_limits<double>::infinity());
  std::vector<double> hi(6, -std::numeric_limits<double>::infinity());
  for (const auto& s : train.samples) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], s.contact.force[a]);
      hi[a] = std::max(hi[a], s.contact.force[a]);
      lo[3 + a] = std::min(lo[3 + a], s.contact.node_center[a]);
      hi[3 + a] = std::max(hi[3 + a], s.contact.node_center[a]);
    }
  }
  return finish_stats(std::move(lo), std::move(hi));
}

NormStats fit_norm_dist(const Dataset& train) {
  if (train.samples.empty()) throw std::invalid_argument("fit_norm: empty set");
  std::vector<double> lo(3, std::numeric_limits<double>::infinity());
  std::vector<double> hi(3, -std::numeric_limits<double>::infinity());
  for (const auto& s : train.samples) {
    for (const auto& f : s.force_map.forces) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], f[a]);
        hi[a] = std::max(hi[a], f[a]);
      }
    }
  }
  return finish_stats(std::move(lo), std::move(hi));
}

// ---------------------------------------------------------------------------
// Container IO

namespace {

constexpr char kSamplesMagic[5] = "MNST";
constexpr char kReferenceMagic[5] = "MNSR";
constexpr std::uint32_t kFormatVersion = 1;

void write_contact_f32(detail::BinWriter& w,
                       const simulator::ContactState& c) {
  const float vals[7] = {
      static_cast<float>(c.force.x()),  static_cast<float>(c.force.y()),
      static_cast<float>(c.force.z()),  static_cast<float>(c.node_center.x()),
      static_cast<float>(c.node_center.y()),
      static_cast<float>(c.node_center.z()), c.contact ? 1.0f : 0.0f};
  w.floats(vals, 7);
}

simulator::ContactState read_contact_f32(detail::BinReader& r,
                                         double indenter_radius) {
  float vals[7];
  r.floats(vals, 7);
  simulator::ContactState c;
  c.force = {vals[0], vals[1], vals[2]};
  c.node_center = {vals[3], vals[4], vals[5]};
  c.contact = vals[6] != 0.0f;
  c.indenter_radius = indenter_radius;
  return c;
}

void write_map_f32(detail::BinWriter& w, const ForceMap& m) {
  std::vector<float> buf(m.size() * 3);
  for (std::size_t i = 0; i < m.size(); ++i) {
    buf[3 * i + 0] = static_cast<float>(m.forces[i].x());
    buf[3 * i + 1] = static_cast<float>(m.forces[i].y());
    buf[3 * i + 2] = static_cast<float>(m.forces[i].z());
  }
  w.floats(buf.data(), buf.size());
}

ForceMap read_map_f32(detail::BinReader& r, std::size_t n) {
  std::vector<float> buf(n * 3);
  r.floats(buf.data(), buf.size());
  ForceMap m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.forces[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
  }
  return m;
}

}  // namespace

void save(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  json manifest;
  manifest["format"] = "minsight-dataset";
  manifest["version"] = kFormatVersion;
  manifest["toolkit_version"] = kVersion;
  manifest["surface"] = {{"radius", ds.surface.radius},
                         {"cyl_height", ds.surface.cyl_height},
                         {"cap_radius", ds.surface.cap_radius},
                         {"total_area", ds.surface.total_area}};
  json nodes_j;
  nodes_j["count"] = ds.nodes.size();
  {
    std::vector<double> pos, nrm, area;
    pos.reserve(ds.nodes.size() * 3);
    nrm.reserve(ds.nodes.size() * 3);
    area.reserve(ds.nodes.size());
    for (const auto& node : ds.nodes) {
      for (int a = 0; a < 3; ++a) pos.push_back(node.position[a]);
      for (int a = 0; a < 3; ++a) nrm.push_back(node.normal[a]);
      area.push_back(node.area_weight);
    }
    nodes_j["positions"] = pos;
    nodes_j["normals"] = nrm;
    nodes_j["area_weights"] = area;
  }
  manifest["nodes"] = nodes_j;
  manifest["graph_k"] = ds.graph_k;
  manifest["sim"] = {{"stiffness", ds.sim_params.stiffness},
                     {"shear_stiffness", ds.sim_params.shear_stiffness},
                     {"sigma_d_factor", ds.sim_params.sigma_d_factor},
                     {"sigma_f_factor", ds.sim_params.sigma_f_factor},
                     {"max_force", ds.sim_params.max_force},
                     {"ambient", ds.sim_params.ambient},
                     {"base_clamp_height", ds.sim_params.base_clamp_height}};
  manifest["protocol"] = {
      {"n_locations", ds.protocol.n_locations},
      {"depths", ds.protocol.depths},
      {"indenter_radius", ds.protocol.indenter_radius},
      {"tangential_cap", ds.protocol.tangential_cap},
      {"force_sigma",
       {ds.protocol.force_sigma.x(), ds.protocol.force_sigma.y(),
        ds.protocol.force_sigma.z()}},
      {"position_sigma", ds.protocol.position_sigma},
      {"seed", ds.protocol.seed}};
  manifest["image"] = {{"width", ds.image_w}, {"height", ds.image_h}};
  manifest["counts"] = {{"samples", ds.samples.size()},
                        {"locations", ds.protocol.n_locations},
                        {"depths_per_location", ds.protocol.depths.size()}};
  if (ds.layout) {
    json lj;
    lj["grid_w"] = ds.layout->grid_w;
    lj["grid_h"] = ds.layout->grid_h;
    lj["alpha"] = ds.layout->alpha;
    lj["pixel_pitch"] = ds.layout->pixel_pitch;
    lj["z_max"] = ds.layout->z_max;
    std::vector<int> rows, cols;
    for (const auto& [r, c] : ds.layout->assignment) {
      rows.push_back(r);
      cols.push_back(c);
    }
    lj["assignment_rows"] = rows;
    lj["assignment_cols"] = cols;
    manifest["layout"] = lj;
  } else {
    manifest["layout"] = nullptr;
  }

  {
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw DataError("cannot write manifest in " + dir);
    out << manifest.dump(2) << '\n';
  }

  {
    detail::BinWriter w((fs::path(dir) / "reference.bin").string());
    w.magic(kReferenceMagic);
    w.value<std::uint32_t>(kFormatVersion);
    w.value<std::uint32_t>(ds.reference.width);
    w.value<std::uint32_t>(ds.reference.height);
    w.floats(ds.reference.values.data(), ds.reference.values.size());
    w.close();
  }

  {
    detail::BinWriter w((fs::path(dir) / "samples.bin").string());
    w.magic(kSamplesMagic);
    w.value<std::uint32_t>(kFormatVersion);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      const Sample& s = ds.samples[i];
      w.value<std::uint32_t>(static_cast<std::uint32_t>(i));
      w.value<std::uint32_t>(s.image.width);
      w.value<std::uint32_t>(s.image.height);
      w.floats(s.image.values.data(), s.image.values.size());
      write_contact_f32(w, s.contact);
      write_map_f32(w, s.force_map);
      write_contact_f32(w, s.clean_contact);
      write_map_f32(w, s.clean_map);
    }
    w.close();
  }
}

Dataset load(const std::string& dir) {
  namespace fs = std::filesystem;
  json manifest;
  {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw DataError("missing manifest.json in " + dir);
    try {
      in >> manifest;
    } catch (const json::exception& e) {
      throw DataError("malformed manifest in " + dir + ": " + e.what());
    }
  }
  if (manifest.value("format", "") != "minsight-dataset" ||
      manifest.value("version", 0u) != kFormatVersion) {
    throw DataError("unsupported dataset format in " + dir);
  }

  Dataset ds;
  const auto& sj = manifest.at("surface");
  ds.surface.radius = sj.at("radius");
  ds.surface.cyl_height = sj.at("cyl_height");
  ds.surface.cap_radius = sj.at("cap_radius");
  ds.surface.total_area = sj.at("total_area");

  const auto& nj = manifest.at("nodes");
  const std::size_t n = nj.at("count");
  const std::vector<double> pos = nj.at("positions");
  const std::vector<double> nrm = nj.at("normals");
  const std::vector<double> area = nj.at("area_weights");
  if (pos.size() != 3 * n || nrm.size() != 3 * n || area.size() != n) {
    throw DataError("node table size mismatch in " + dir);
  }
  ds.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.nodes[i].index = static_cast<int>(i);
    ds.nodes[i].position = {pos[3 * i], pos[3 * i + 1], pos[3 * i + 2]};
    ds.nodes[i].normal = {nrm[3 * i], nrm[3 * i + 1], nrm[3 * i + 2]};
    ds.nodes[i].area_weight = area[i];
  }
  ds.graph_k = manifest.at("graph_k");

  const auto& simj = manifest.at("sim");
  ds.sim_params.stiffness = simj.at("stiffness");
  ds.sim_params.shear_stiffness = simj.at("shear_stiffness");
  ds.sim_params.sigma_d_factor = simj.at("sigma_d_factor");
  ds.sim_params.sigma_f_factor = simj.at("sigma_f_factor");
  ds.sim_params.max_force = simj.at("max_force");
  ds.sim_params.ambient = simj.at("ambient");
  ds.sim_params.base_clamp_height = simj.at("base_clamp_height");

  const auto& pj = manifest.at("protocol");
  ds.protocol.n_locations = pj.at("n_locations");
  ds.protocol.depths = pj.at("depths").get<std::vector<double>>();
  ds.protocol.indenter_radius = pj.at("indenter_radius");
  ds.protocol.tangential_cap = pj.at("tangential_cap");
  const std::vector<double> fs_sigma = pj.at("force_sigma");
  ds.protocol.force_sigma = {fs_sigma[0], fs_sigma[1], fs_sigma[2]};
  ds.protocol.position_sigma = pj.at("position_sigma");
  ds.protocol.seed = pj.at("seed");

  ds.image_w = manifest.at("image").at("width");
  ds.image_h = manifest.at("image").at("height");

  if (!manifest.at("layout").is_null()) {
    const auto& lj = manifest.at("layout");
    embedding::MapLayout layout;
    layout.grid_w = lj.at("grid_w");
    layout.grid_h = lj.at("grid_h");
    layout.alpha = lj.at("alpha");
    layout.pixel_pitch = lj.at("pixel_pitch");
    layout.z_max = lj.at("z_max");
    const std::vector<int> rows = lj.at("assignment_rows");
    const std::vector<int> cols = lj.at("assignment_cols");
    if (rows.size() != n || cols.size() != n) {
      throw DataError("layout assignment size mismatch in " + dir);
    }
    layout.occupied.assign(layout.grid_w * layout.grid_h, 0);
    for (std::size_t i = 0; i < n; ++i) {
      layout.assignment.emplace_back(rows[i], cols[i]);
      layout.occupied[rows[i] * layout.grid_w + cols[i]] = 1;
    }
    layout.validate();
    ds.layout = std::move(layout);
  }

  {
    detail::BinReader r((fs::path(dir) / "reference.bin").string());
    r.expect_magic(kReferenceMagic);
    if (r.value<std::uint32_t>() != kFormatVersion) {
      throw DataError("unsupported reference.bin version in " + dir);
    }
    const auto w = r.value<std::uint32_t>();
    const auto h = r.value<std::uint32_t>();
    ds.reference = simulator::SensorImage(static_cast<int>(w),
                                          static_cast<int>(h));
    r.floats(ds.reference.values.data(), ds.reference.values.size());
  }

  const std::size_t expected =
      static_cast<std::size_t>(manifest.at("counts").at("samples"));
  const std::size_t depths_per =
      static_cast<std::size_t>(manifest.at("counts").at("depths_per_location"));
  {
    detail::BinReader r((fs::path(dir) / "samples.bin").string());
    r.expect_magic(kSamplesMagic);
    if (r.value<std::uint32_t>() != kFormatVersion) {
      throw DataError("unsupported samples.bin version in " + dir);
    }
    ds.samples.reserve(expected);
    for (std::size_t i = 0; i < expected; ++i) {
      Sample s;
      const auto index = r.value<std::uint32_t>();
      if (index != i) throw DataError("sample index out of order in " + dir);
      const auto w = r.value<std::uint32_t>();
      const auto h = r.value<std::uint32_t>();
      s.image = simulator::SensorImage(static_cast<int>(w),
                                       static_cast<int>(h));
      r.floats(s.image.values.data(), s.image.values.size());
      s.contact = read_contact_f32(r, ds.protocol.indenter_radius);
      s.force_map = read_map_f32(r, n);
      s.clean_contact = read_contact_f32(r, ds.protocol.indenter_radius);
      s.clean_map = read_map_f32(r, n);
      s.location_index = static_cast<int>(i / depths_per);
      ds.samples.push_back(std::move(s));
    }
    if (!r.at_eof()) throw DataError("trailing bytes in samples.bin");
  }
  return ds;
}

}  // namespace minsight::dataset
