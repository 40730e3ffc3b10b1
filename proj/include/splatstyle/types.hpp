#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace splatstyle {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecX = Eigen::VectorXd;

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SelectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PipelineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// SH DC band scale: color = 0.5 + kShC0 * f_dc.
inline constexpr double kShC0 = 0.28209479177387814;

// One splat. Core fields are decoded to doubles; `raw` keeps the full file
// record (one 32-bit word per float property) so untouched gaussians write
// back byte-exact. `dirty` forces re-encoding of the core fields on save;
// `color_dirty` additionally zeroes the f_rest SH bands, since a recolored
// DC term makes the higher bands stale.
struct Gaussian {
  Vec3 position = Vec3::Zero();
  Vec3 color = Vec3::Constant(0.5);  // decoded DC-band RGB in [0,1]
  Vec3 log_scale = Vec3::Zero();
  Quat rotation = Quat::Identity();  // unit (w,x,y,z)
  double opacity = 1.0;              // in [0,1]

  std::vector<std::uint32_t> raw;  // full vertex record; empty when built in code
  bool dirty = false;
  bool color_dirty = false;

  Vec3 scale() const { return log_scale.array().exp(); }
};

// Float32 vertex property names in file order.
struct PlyLayout {
  std::vector<std::string> properties;

  bool empty() const { return properties.empty(); }
  int index_of(const std::string& name) const;        // -1 if absent
  std::vector<int> indices_with_prefix(const std::string& prefix) const;

  // x,y,z,nx,ny,nz,f_dc_0..2,f_rest_0..44,opacity,scale_0..2,rot_0..3
  static PlyLayout standard();
};

struct GaussianCloud {
  std::vector<Gaussian> gaussians;
  PlyLayout layout;
  std::string source_path;

  std::size_t size() const { return gaussians.size(); }
  bool empty() const { return gaussians.empty(); }

  MatX positions() const;  // n x 3
};

}  // namespace splatstyle
