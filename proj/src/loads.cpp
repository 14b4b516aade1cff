#include "gist/loads.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "gist/error.hpp"

namespace gist {

void FlowConstants::validate() const {
  require(density > 0 && std::isfinite(density), ErrorKind::parameter, "density must be positive");
  require(speed > 0 && std::isfinite(speed), ErrorKind::parameter, "free-stream speed must be positive");
  require(ref_length > 0 && std::isfinite(ref_length), ErrorKind::parameter, "reference length must be positive");
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double expected = a == b ? 1.0 : 0.0;
      require(std::abs(wind_basis[a].dot(wind_basis[b]) - expected) <= 1e-12, ErrorKind::parameter,
              "wind basis is not orthonormal");
    }
}

FlowConstants FlowConstants::yawed(double yaw_deg) {
  FlowConstants c;
  const double psi = yaw_deg * std::numbers::pi / 180.0;
  c.wind_basis = {Vec3(std::cos(psi), std::sin(psi), 0.0), Vec3(-std::sin(psi), std::cos(psi), 0.0), Vec3::UnitZ()};
  return c;
}

std::vector<ElementLoad> element_loads(const SurfaceMesh& mesh, const FieldMatrix& fields,
                                       const FlowConstants& constants) {
  constants.validate();
  require(fields.rows() == static_cast<Eigen::Index>(mesh.vertex_count()) && fields.cols() == kFieldChannels,
          ErrorKind::shape,
          "fields are " + std::to_string(fields.rows()) + "x" + std::to_string(fields.cols()) + ", expected " +
              std::to_string(mesh.vertex_count()) + "x4");
  std::vector<ElementLoad> loads(mesh.face_count());
  for (std::size_t k = 0; k < mesh.face_count(); ++k) {
    const auto& f = mesh.faces[k];
    const Vec3 cross = face_cross(mesh, k);
    const double twice_area = cross.norm();
    require(twice_area > 0.0, ErrorKind::integration, "face " + std::to_string(k) + " has zero area");
    ElementLoad& e = loads[k];
    e.area = 0.5 * twice_area;
    e.normal = cross / twice_area;
    e.centroid = face_centroid(mesh, k);
    const Eigen::RowVector4d mean = (fields.row(f[0]) + fields.row(f[1]) + fields.row(f[2])) / 3.0;
    e.pressure = mean(0);
    e.shear = Vec3(mean(1), mean(2), mean(3));
    e.force = (e.pressure * e.normal + e.shear) * e.area;
    e.moment = (e.centroid - constants.origin).cross(e.force);
  }
  return loads;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

const Coefficients& AeroCoefficients::pid(const std::string& name) const {
  for (const auto& [p, c] : by_pid)
    if (p == name) return c;
  fail(ErrorKind::report, "no coefficients for PID '" + name + "'");
}

AeroCoefficients integrate_coefficients(std::span<const ElementLoad> loads, std::span<const std::string> face_pids,
                                        const FlowConstants& constants) {
  constants.validate();
  require(loads.size() == face_pids.size(), ErrorKind::shape, "one PID per element load required");
  const double q = constants.dynamic_pressure();

  std::vector<std::string> order;
  for (const auto& p : face_pids)
    if (std::find(order.begin(), order.end(), p) == order.end()) order.push_back(p);

  AeroCoefficients out;
  std::vector<double> terms;
  for (const auto& pid : order) {
    Coefficients c;
    for (int comp = 0; comp < 6; ++comp) {
      terms.clear();
      const Vec3& axis = constants.wind_basis[comp % 3];
      const double scale = comp < 3 ? q : q * constants.ref_length;
      for (std::size_t k = 0; k < loads.size(); ++k) {
        if (face_pids[k] != pid) continue;
        terms.push_back((comp < 3 ? loads[k].force : loads[k].moment).dot(axis) / scale);
      }
      c.values[comp] = pairwise_sum(terms);
    }
    out.by_pid.emplace_back(pid, c);
  }
  for (const auto& [pid, c] : out.by_pid)
    for (int comp = 0; comp < 6; ++comp) out.total.values[comp] += c.values[comp];
  return out;
}

AeroCoefficients integrate_fields(const SurfaceMesh& mesh, const FieldMatrix& fields, const FlowConstants& constants) {
  const auto loads = element_loads(mesh, fields, constants);
  return integrate_coefficients(loads, mesh.face_pids, constants);
}

double FieldMetrics::r_squared() const {
  if (!r2) fail(ErrorKind::undefined_value, "R^2 is undefined for a constant truth vector");
  return *r2;
}

FieldMetrics field_metrics(std::span<const double> pred, std::span<const double> truth) {
  require(pred.size() == truth.size(), ErrorKind::shape, "prediction and truth lengths differ");
  require(!truth.empty(), ErrorKind::shape, "empty field");
  const double n = static_cast<double>(truth.size());
  double mean = 0.0;
  for (double y : truth) mean += y;
  mean /= n;
  double sse = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    sse += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    sst += (truth[i] - mean) * (truth[i] - mean);
  }
  FieldMetrics m;
  m.mse = sse / n;
  if (sst > 0.0) m.r2 = 1.0 - sse / sst;
  return m;
}

PidReport pid_report(const AeroCoefficients& pred, const AeroCoefficients& truth, const Thresholds& thresholds) {
  require(thresholds.cfd_replacement > 0.0 && thresholds.cfd_replacement <= thresholds.usability, ErrorKind::parameter,
          "thresholds must satisfy 0 < replace <= usable");
  std::set<std::string> a, b;
  for (const auto& [p, _] : pred.by_pid) a.insert(p);
  for (const auto& [p, _] : truth.by_pid) b.insert(p);
  if (a != b) {
    std::string diff;
    for (const auto& p : a)
      if (!b.count(p)) diff += " +" + p;
    for (const auto& p : b)
      if (!a.count(p)) diff += " -" + p;
    fail(ErrorKind::report, "PID sets differ:" + diff);
  }
  PidReport report;
  for (const auto& [pid, c] : truth.by_pid) {
    PidReportRow row;
    row.pid = pid;
    row.cxs_true = c.cxs();
    row.cxs_pred = pred.pid(pid).cxs();
    row.abs_err = std::abs(row.cxs_pred - row.cxs_true);
    row.usable = row.abs_err <= thresholds.usability;
    row.replace = row.abs_err <= thresholds.cfd_replacement;
    report.usable_count += row.usable;
    report.replace_count += row.replace;
    report.rows.push_back(row);
  }
  return report;
}

void write_report_csv(std::ostream& out, const PidReport& report) {
  out << "pid,cxs_pred,cxs_true,abs_err,usable,replace\n";
  char buf[256];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%s,%s\n", r.pid.c_str(), r.cxs_pred, r.cxs_true, r.abs_err,
                  r.usable ? "true" : "false", r.replace ? "true" : "false");
    out << buf;
  }
}

void write_fields_csv(std::ostream& out, const FieldMatrix& fields) {
  require(fields.cols() == kFieldChannels, ErrorKind::shape, "fields need 4 columns");
  out << "vertex_id,p,taux,tauy,tauz\n";
  char buf[160];
  for (Eigen::Index i = 0; i < fields.rows(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g\n", static_cast<long long>(i), fields(i, 0),
                  fields(i, 1), fields(i, 2), fields(i, 3));
    out << buf;
  }
}

FieldMatrix read_fields_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::parse, "empty field file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "vertex_id,p,taux,tauy,tauz", ErrorKind::parse, "bad field header '" + line + "'");
  std::vector<std::array<double, 4>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    require(cells.size() == 5, ErrorKind::parse, "line " + std::to_string(line_no) + ": expected 5 columns");
    try {
      const long id = std::stol(cells[0]);
      require(id == static_cast<long>(rows.size()), ErrorKind::parse,
              "line " + std::to_string(line_no) + ": vertex ids must be 0..N-1 in order");
      rows.push_back({std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]), std::stod(cells[4])});
    } catch (const std::logic_error&) {
      fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": bad number");
    }
  }
  FieldMatrix out(static_cast<Eigen::Index>(rows.size()), kFieldChannels);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int c = 0; c < 4; ++c) out(static_cast<Eigen::Index>(i), c) = rows[i][c];
  return out;
}

void write_fields_file(const FieldMatrix& fields, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write field file '" + path + "'");
  write_fields_csv(out, fields);
}

FieldMatrix read_fields_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open field file '" + path + "'");
  return read_fields_csv(in);
}

}  // namespace gist
