#include "gist/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gist/error.hpp"

namespace gist {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double deg(double a) { return a * kPi / 180.0; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  require(static_cast<bool>(out), ErrorKind::io, "write failed for '" + path.string() + "'");
}

}  // namespace

void MapPoint::validate() const {
  require(!name.empty(), ErrorKind::parameter, "map point needs a name");
  auto check = [&](double v, double limit, const char* what) {
    require(std::isfinite(v) && std::abs(v) <= limit, ErrorKind::parameter,
            "map point '" + name + "': " + what + " out of range");
  };
  check(heave, kHeaveLimit, "heave");
  check(pitch, kPitchLimit, "pitch");
  check(yaw, kYawLimit, "yaw");
  check(roll, kRollLimit, "roll");
  check(steer, kSteerLimit, "steer");
}

std::vector<MapPoint> default_map_points() {
  return {
      {"straight_nominal", 0.0, 0.0, 0.0, 0.0, 0.0},
      {"straight_low", -0.01, 0.5, 0.0, 0.0, 0.0},
      {"braking", -0.015, 1.0, 0.0, 0.0, 0.0},
      {"high_speed_lift", 0.01, -0.5, 0.0, 0.0, 0.0},
      {"corner_left", -0.005, 0.3, 2.0, 1.0, 3.0},
      {"corner_right", -0.005, 0.3, -2.0, -1.0, -3.0},
  };
}

double flap_pressure_jump(double alpha_deg, double q) { return q * kCp0 * std::tanh(alpha_deg / kAlpha0); }

ManufacturedField::ManufacturedField(double alpha_deg, const MapPoint& map, const FlowConstants& constants)
    : alpha_deg_(alpha_deg),
      sin_a_(std::sin(deg(alpha_deg))),
      cos_a_(std::cos(deg(alpha_deg))),
      q_(constants.dynamic_pressure()),
      map_(map) {
  map.validate();
}

Vec3 ManufacturedField::reference_normal(const Vec3& x) const {
  return x.x() <= kWingMainChord ? Vec3::UnitZ() : Vec3(-sin_a_, 0.0, cos_a_);
}

Eigen::Vector4d ManufacturedField::at(const Vec3& x, int side) const {
  const bool main = x.x() <= kWingMainChord;
  const double u = main ? x.x() : kWingMainChord + std::hypot(x.x() - kWingMainChord, x.z());
  const double y = x.y();
  const double eta = 2.0 * y / kWingSpan - 1.0;
  const double span = std::sin(kPi * y / kWingSpan);
  const double total_chord = kWingMainChord + kFlapChord;

  double p = kBaseline * q_ * std::cos(kPi * u / total_chord);
  if (main) {
    if (side < 0) {
      const double gain = 1.0 + kPitchGain * map_.pitch + kHeaveGain * map_.heave;
      const double skew = 1.0 + (kRollSkew * map_.roll + kYawSkew * map_.yaw) * eta;
      p += q_ * kMainLoading * gain * skew * std::sin(kPi * u / kWingMainChord) * span;
    }
  } else if (side != 0) {
    const double s = u - kWingMainChord;
    const double jump = flap_pressure_jump(alpha_deg_, q_) * (1.0 + kSteerSkew * map_.steer * eta);
    p -= side * 0.5 * jump * std::sin(kPi * s / kFlapChord) * span;
  }
  const double ramp = std::max(0.0, u - kWingMainChord) / kFlapChord;
  const double tau = kTau0 * (1.0 + kTauSlope * alpha_deg_ * ramp);
  return {p, tau, 0.0, 0.0};
}

double infer_flap_angle(const SurfaceMesh& mesh) {
  std::size_t te = 0;
  double best = -1.0;
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const Vec3& x = mesh.vertices[v];
    const double d = std::hypot(x.x() - kWingMainChord, x.z());
    if (x.x() > kWingMainChord && d > best) {
      best = d;
      te = v;
    }
  }
  require(best > 0.0, ErrorKind::generation, "mesh has no flap trailing edge");
  const Vec3& x = mesh.vertices[te];
  return std::atan2(x.z(), x.x() - kWingMainChord) * 180.0 / kPi;
}

FieldMatrix manufactured_fields(const SurfaceMesh& mesh, const MapPoint& map, const FlowConstants& constants) {
  const auto pids = mesh.pids();
  for (const char* needed : {"main", "flap"})
    require(std::find(pids.begin(), pids.end(), needed) != pids.end(), ErrorKind::generation,
            std::string("mesh has no '") + needed + "' PID");
  const ManufacturedField field(infer_flap_angle(mesh), map, constants);
  const auto normals = vertex_normals(mesh);
  FieldMatrix out(static_cast<Eigen::Index>(mesh.vertex_count()), kFieldChannels);
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const double d = normals[v].dot(field.reference_normal(mesh.vertices[v]));
    const int side = d > 1e-6 ? 1 : (d < -1e-6 ? -1 : 0);
    out.row(static_cast<Eigen::Index>(v)) = field.at(mesh.vertices[v], side).transpose();
  }
  return out;
}

FlowConstants map_constants(const MapPoint& map, const FlowConstants& base) {
  FlowConstants c = FlowConstants::yawed(map.yaw);
  c.density = base.density;
  c.speed = base.speed;
  c.ref_length = base.ref_length;
  c.origin = base.origin;
  return c;
}

Coefficients analytic_coefficients(double alpha_deg, const MapPoint& map, int resolution) {
  require(resolution >= 4, ErrorKind::parameter, "resolution must be >= 4");
  const auto mesh = gen_wing_flap(alpha_deg, 4 * resolution);
  const auto constants = map_constants(map);
  return integrate_fields(mesh, manufactured_fields(mesh, map, constants), constants).total;
}

Coefficients quadrature_coefficients(const SurfaceMesh& mesh, const MapPoint& map, const FlowConstants& constants) {
  const ManufacturedField field(infer_flap_angle(mesh), map, constants);
  const auto fine = subdivide(subdivide(mesh).mesh).mesh;
  const double q = constants.dynamic_pressure();
  std::vector<std::vector<double>> terms(6);
  for (std::size_t k = 0; k < fine.face_count(); ++k) {
    const auto& f = fine.faces[k];
    const Vec3 a = fine.vertices[f[0]], b = fine.vertices[f[1]], c = fine.vertices[f[2]];
    const Vec3 cross = (b - a).cross(c - a);
    const double area = 0.5 * cross.norm();
    const Vec3 n = cross.normalized();
    const int side = n.dot(field.reference_normal((a + b + c) / 3.0)) > 0 ? 1 : -1;
    for (const Vec3& x : {Vec3((a + b) / 2), Vec3((b + c) / 2), Vec3((c + a) / 2)}) {
      const Eigen::Vector4d v = field.at(x, side);
      const Vec3 force = (v(0) * n + v.tail<3>()) * (area / 3.0);
      const Vec3 moment = (x - constants.origin).cross(force);
      for (int i = 0; i < 3; ++i) {
        terms[i].push_back(force.dot(constants.wind_basis[i]) / q);
        terms[3 + i].push_back(moment.dot(constants.wind_basis[i]) / (q * constants.ref_length));
      }
    }
  }
  Coefficients out;
  for (int i = 0; i < 6; ++i) out.values[i] = pairwise_sum(terms[i]);
  return out;
}

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  fail(ErrorKind::parse, "unknown split '" + s + "'");
}

void DatasetConfig::validate() const {
  require(configurations >= 2, ErrorKind::parameter, "need at least 2 configurations");
  require(alpha_min < alpha_max, ErrorKind::parameter, "alpha range is empty");
  require(alpha_min >= kWingAlphaMin && alpha_max <= kWingAlphaMax, ErrorKind::parameter,
          "alpha range outside the wing generator bounds");
  require(resolution >= 4, ErrorKind::parameter, "resolution must be >= 4");
  require(!map_points.empty(), ErrorKind::parameter, "no map points");
  std::set<std::string> names;
  for (const auto& m : map_points) {
    m.validate();
    require(names.insert(m.name).second, ErrorKind::parameter, "duplicate map point '" + m.name + "'");
  }
  constants.validate();
}

std::vector<Split> assign_splits(int n, std::uint64_t seed) {
  require(n >= 2, ErrorKind::parameter, "need at least 2 configurations");
  const int train = std::clamp(static_cast<int>(std::lround(0.7 * n)), 2, n);
  const int val = (n - train) / 2;
  std::vector<int> interior;
  for (int i = 1; i + 1 < n; ++i) interior.push_back(i);
  std::mt19937_64 rng(seed);
  std::shuffle(interior.begin(), interior.end(), rng);
  std::vector<Split> out(n, Split::train);
  for (std::size_t k = 0; k < interior.size(); ++k) {
    const int rank = static_cast<int>(k) + 2;  // endpoints already in train
    if (rank >= train) out[interior[k]] = rank < train + val ? Split::val : Split::test;
  }
  return out;
}

const MapPoint& DatasetManifest::map_point(const std::string& name) const {
  for (const auto& m : map_points)
    if (m.name == name) return m;
  fail(ErrorKind::parse, "manifest has no map point '" + name + "'");
}

const ConfigurationEntry& DatasetManifest::configuration(int id) const {
  for (const auto& c : configurations)
    if (c.id == id) return c;
  fail(ErrorKind::parse, "manifest has no configuration " + std::to_string(id));
}

std::vector<const SampleEntry*> DatasetManifest::samples_in(Split split) const {
  std::vector<const SampleEntry*> out;
  for (const auto& s : samples)
    if (s.split == split) out.push_back(&s);
  return out;
}

double DatasetManifest::alpha_min(Split split) const {
  double v = INFINITY;
  for (const auto& c : configurations)
    if (c.split == split) v = std::min(v, c.alpha);
  return v;
}

double DatasetManifest::alpha_max(Split split) const {
  double v = -INFINITY;
  for (const auto& c : configurations)
    if (c.split == split) v = std::max(v, c.alpha);
  return v;
}

DatasetManifest generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "meshes", ec);
  if (!ec) std::filesystem::create_directories(out_dir / "fields", ec);
  require(!ec, ErrorKind::io, "cannot create output directory '" + out_dir.string() + "': " + ec.message());

  DatasetManifest manifest;
  manifest.seed = config.seed;
  manifest.resolution = config.resolution;
  manifest.constants = config.constants;
  manifest.map_points = config.map_points;
  manifest.root = out_dir;

  const auto splits = assign_splits(config.configurations, config.seed);
  char name[64];
  for (int c = 0; c < config.configurations; ++c) {
    const double alpha =
        config.alpha_min + (config.alpha_max - config.alpha_min) * c / (config.configurations - 1);
    const auto mesh = gen_wing_flap(alpha, config.resolution);
    std::snprintf(name, sizeof name, "meshes/config_%02d.obj", c);
    write_text(out_dir / name, save_mesh(mesh));
    manifest.configurations.push_back({c, alpha, name, splits[c]});
    for (const auto& mp : config.map_points) {
      const auto fields = manufactured_fields(mesh, mp, map_constants(mp, config.constants));
      std::snprintf(name, sizeof name, "fields/config_%02d_%s.csv", c, mp.name.c_str());
      std::ostringstream csv;
      write_fields_csv(csv, fields);
      write_text(out_dir / name, csv.str());
      manifest.samples.push_back({c, mp.name, manifest.configurations.back().mesh, name, splits[c]});
    }
  }
  write_text(out_dir / "manifest.json", manifest_to_json(manifest));
  return manifest;
}

std::string manifest_to_json(const DatasetManifest& m) {
  using nlohmann::json;
  json j;
  j["version"] = m.version;
  j["seed"] = m.seed;
  j["resolution"] = m.resolution;
  j["constants"] = {{"density", m.constants.density},
                    {"speed", m.constants.speed},
                    {"ref_length", m.constants.ref_length},
                    {"origin", {m.constants.origin.x(), m.constants.origin.y(), m.constants.origin.z()}},
                    {"cp0", kCp0},
                    {"alpha0_deg", kAlpha0},
                    {"tau0", kTau0}};
  j["configurations"] = json::array();
  for (const auto& c : m.configurations)
    j["configurations"].push_back({{"id", c.id}, {"alpha", c.alpha}, {"mesh", c.mesh}, {"split", to_string(c.split)}});
  j["map_points"] = json::array();
  for (const auto& p : m.map_points)
    j["map_points"].push_back({{"name", p.name},
                               {"heave", p.heave},
                               {"pitch", p.pitch},
                               {"yaw", p.yaw},
                               {"roll", p.roll},
                               {"steer", p.steer}});
  j["samples"] = json::array();
  for (const auto& s : m.samples)
    j["samples"].push_back({{"configuration", s.configuration},
                            {"map_point", s.map_point},
                            {"mesh", s.mesh},
                            {"fields", s.fields},
                            {"split", to_string(s.split)}});
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  using nlohmann::json;
  DatasetManifest m;
  try {
    const json j = json::parse(text);
    m.version = j.at("version").get<std::string>();
    require(m.version == "gist-dataset-1", ErrorKind::parse, "unsupported manifest version '" + m.version + "'");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.resolution = j.at("resolution").get<int>();
    const auto& c = j.at("constants");
    m.constants.density = c.at("density").get<double>();
    m.constants.speed = c.at("speed").get<double>();
    m.constants.ref_length = c.at("ref_length").get<double>();
    const auto o = c.at("origin").get<std::vector<double>>();
    require(o.size() == 3, ErrorKind::parse, "origin needs 3 components");
    m.constants.origin = Vec3(o[0], o[1], o[2]);
    for (const auto& e : j.at("configurations"))
      m.configurations.push_back({e.at("id").get<int>(), e.at("alpha").get<double>(), e.at("mesh").get<std::string>(),
                                  parse_split(e.at("split").get<std::string>())});
    for (const auto& e : j.at("map_points"))
      m.map_points.push_back({e.at("name").get<std::string>(), e.at("heave").get<double>(),
                              e.at("pitch").get<double>(), e.at("yaw").get<double>(), e.at("roll").get<double>(),
                              e.at("steer").get<double>()});
    for (const auto& e : j.at("samples"))
      m.samples.push_back({e.at("configuration").get<int>(), e.at("map_point").get<std::string>(),
                           e.at("mesh").get<std::string>(), e.at("fields").get<std::string>(),
                           parse_split(e.at("split").get<std::string>())});
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("manifest: ") + e.what());
  }
  require(m.samples.size() == m.configurations.size() * m.map_points.size(), ErrorKind::parse,
          "manifest sample count is not configurations x map points");
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open manifest '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto m = manifest_from_json(ss.str());
  m.root = path.parent_path();
  return m;
}

}  // namespace gist
