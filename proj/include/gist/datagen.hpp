#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gist/loads.hpp"
#include "gist/mesh.hpp"

namespace gist {

struct MapPoint {
  std::string name;
  double heave = 0.0;  // m
  double pitch = 0.0;  // deg
  double yaw = 0.0;    // deg
  double roll = 0.0;   // deg
  double steer = 0.0;  // deg

  void validate() const;
  /// heave, pitch, yaw, roll, steer
  std::array<double, 5> values() const { return {heave, pitch, yaw, roll, steer}; }
};

inline constexpr double kHeaveLimit = 0.03;
inline constexpr double kPitchLimit = 2.0;
inline constexpr double kYawLimit = 5.0;
inline constexpr double kRollLimit = 3.0;
inline constexpr double kSteerLimit = 10.0;

/// Two straight-line and four cornering/braking conditions.
std::vector<MapPoint> default_map_points();

// Manufactured-field constants.
inline constexpr double kCp0 = 0.8;
inline constexpr double kAlpha0 = 1.5;        // deg
inline constexpr double kTau0 = 25.0;         // Pa
inline constexpr double kTauSlope = 0.8;      // per deg, at the trailing edge
inline constexpr double kMainLoading = 0.5;   // fraction of q
inline constexpr double kPitchGain = 0.2;     // per deg
inline constexpr double kHeaveGain = -10.0;   // per m
inline constexpr double kBaseline = 0.15;     // fraction of q, same on both sides
inline constexpr double kYawSkew = 0.03;      // per deg
inline constexpr double kRollSkew = 0.05;     // per deg
inline constexpr double kSteerSkew = 0.02;    // per deg
inline constexpr int kDefaultResolution = 24;

/// Flap pressure jump q * Cp0 * tanh(alpha / alpha0).
double flap_pressure_jump(double alpha_deg, double q);

/// Analytic field on the wing surface, evaluable at any surface point.
class ManufacturedField {
 public:
  ManufacturedField(double alpha_deg, const MapPoint& map, const FlowConstants& constants);

  /// side: +1 upper sheet, -1 lower sheet, 0 rim (only the two-sided part).
  Eigen::Vector4d at(const Vec3& x, int side) const;

  /// Reference upper normal at a surface point.
  Vec3 reference_normal(const Vec3& x) const;

  double alpha() const { return alpha_deg_; }

 private:
  double alpha_deg_, sin_a_, cos_a_, q_;
  MapPoint map_;
};

/// Flap angle recovered from the trailing-edge geometry.
double infer_flap_angle(const SurfaceMesh& mesh);

FieldMatrix manufactured_fields(const SurfaceMesh& mesh, const MapPoint& map, const FlowConstants& constants);

/// Wind frame for a map point: body axes yawed by map.yaw.
FlowConstants map_constants(const MapPoint& map, const FlowConstants& base = {});

/// Ground truth from the manufactured field on a 4x-resolution wing.
Coefficients analytic_coefficients(double alpha_deg, const MapPoint& map, int resolution = kDefaultResolution);

/// Independent oracle: 3-point quadrature of the analytic field on `mesh`
/// subdivided twice.
Coefficients quadrature_coefficients(const SurfaceMesh& mesh, const MapPoint& map, const FlowConstants& constants);

enum class Split { train, val, test };
const char* to_string(Split s);
Split parse_split(const std::string& s);

struct DatasetConfig {
  int configurations = 10;
  double alpha_min = -2.0;
  double alpha_max = 3.0;
  int resolution = kDefaultResolution;
  std::uint64_t seed = 1;
  std::vector<MapPoint> map_points = default_map_points();
  FlowConstants constants{};

  void validate() const;
};

struct ConfigurationEntry {
  int id = 0;
  double alpha = 0.0;
  std::string mesh;  // relative to the manifest directory
  Split split = Split::train;
};

struct SampleEntry {
  int configuration = 0;
  std::string map_point;
  std::string mesh;
  std::string fields;
  Split split = Split::train;
};

struct DatasetManifest {
  std::string version = "gist-dataset-1";
  std::uint64_t seed = 0;
  int resolution = kDefaultResolution;
  FlowConstants constants{};
  std::vector<ConfigurationEntry> configurations;
  std::vector<MapPoint> map_points;
  std::vector<SampleEntry> samples;
  std::filesystem::path root;  // directory holding the manifest; not serialized

  const MapPoint& map_point(const std::string& name) const;
  const ConfigurationEntry& configuration(int id) const;
  std::vector<const SampleEntry*> samples_in(Split split) const;
  double alpha_min(Split split) const;
  double alpha_max(Split split) const;
};

/// Train/val/test counts by configuration (70/15/15, endpoints in train).
std::vector<Split> assign_splits(int configurations, std::uint64_t seed);

DatasetManifest generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir);

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace gist
