#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gist/graph.hpp"
#include "gist/mesh.hpp"

namespace gist {

/// Free-stream and reference quantities for coefficient normalization.
struct FlowConstants {
  double density = 1.225;  // kg/m^3
  double speed = 50.0;     // m/s
  double ref_length = 1.0; // m
  Vec3 origin = Vec3::Zero();
  std::array<Vec3, 3> wind_basis{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};

  double dynamic_pressure() const { return 0.5 * density * speed * speed; }
  void validate() const;

  /// Body axes rotated about +z by `yaw_deg`.
  static FlowConstants yawed(double yaw_deg);
};

/// Per-vertex surface fields, columns (p, tau_x, tau_y, tau_z), in Pa.
using FieldMatrix = RowMatrix;
inline constexpr int kFieldChannels = 4;

struct ElementLoad {
  double pressure = 0.0;
  Vec3 shear = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  double area = 0.0;
  Vec3 centroid = Vec3::Zero();
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
};

/// F_k = (p_k n_k + tau_k) A_k and M_k = (c_k - r0) x F_k with element
/// values taken as the mean of the three vertex values.
std::vector<ElementLoad> element_loads(const SurfaceMesh& mesh, const FieldMatrix& fields,
                                       const FlowConstants& constants);

/// CxS, CyS, CzS, CmxS, CmyS, CmzS (all m^2).
struct Coefficients {
  std::array<double, 6> values{};

  double cxs() const { return values[0]; }
  double cys() const { return values[1]; }
  double czs() const { return values[2]; }
  double cmxs() const { return values[3]; }
  double cmys() const { return values[4]; }
  double cmzs() const { return values[5]; }
};

inline constexpr std::array<const char*, 6> kCoefficientNames{"CxS", "CyS", "CzS", "CmxS", "CmyS", "CmzS"};

struct AeroCoefficients {
  Coefficients total;
  std::vector<std::pair<std::string, Coefficients>> by_pid;  // first-appearance order

  const Coefficients& pid(const std::string& name) const;
};

AeroCoefficients integrate_coefficients(std::span<const ElementLoad> loads, std::span<const std::string> face_pids,
                                        const FlowConstants& constants);

AeroCoefficients integrate_fields(const SurfaceMesh& mesh, const FieldMatrix& fields, const FlowConstants& constants);

/// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> values);

struct FieldMetrics {
  double mse = 0.0;
  std::optional<double> r2;  // empty when the truth vector is constant

  /// Throws undefined_value when R^2 is undefined.
  double r_squared() const;
};

FieldMetrics field_metrics(std::span<const double> pred, std::span<const double> truth);

struct Thresholds {
  double usability = 0.0;
  double cfd_replacement = 0.0;
};

struct PidReportRow {
  std::string pid;
  double cxs_pred = 0.0;
  double cxs_true = 0.0;
  double abs_err = 0.0;
  bool usable = false;
  bool replace = false;
};

struct PidReport {
  std::vector<PidReportRow> rows;
  int usable_count = 0;
  int replace_count = 0;
};

/// Per-PID absolute drag-coefficient error against two thresholds
/// (pass means error <= threshold).
PidReport pid_report(const AeroCoefficients& pred, const AeroCoefficients& truth, const Thresholds& thresholds);

void write_report_csv(std::ostream& out, const PidReport& report);

// Field CSV: header `vertex_id,p,taux,tauy,tauz`, 0-based ids.
void write_fields_csv(std::ostream& out, const FieldMatrix& fields);
FieldMatrix read_fields_csv(std::istream& in);
void write_fields_file(const FieldMatrix& fields, const std::string& path);
FieldMatrix read_fields_file(const std::string& path);

}  // namespace gist
