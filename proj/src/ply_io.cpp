#include "splatstyle/ply_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace splatstyle {

int PlyLayout::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < properties.size(); ++i)
    if (properties[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<int> PlyLayout::indices_with_prefix(const std::string& prefix) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < properties.size(); ++i)
    if (properties[i].rfind(prefix, 0) == 0) out.push_back(static_cast<int>(i));
  return out;
}

PlyLayout PlyLayout::standard() {
  PlyLayout layout;
  auto& p = layout.properties;
  p = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
  for (int i = 0; i < 45; ++i) p.push_back("f_rest_" + std::to_string(i));
  p.insert(p.end(), {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"});
  return layout;
}

MatX GaussianCloud::positions() const {
  MatX out(static_cast<Eigen::Index>(size()), 3);
  for (std::size_t i = 0; i < size(); ++i) out.row(static_cast<Eigen::Index>(i)) = gaussians[i].position;
  return out;
}

namespace {

const char* const kRequired[] = {"x",       "y",       "z",       "f_dc_0", "f_dc_1",
                                 "f_dc_2",  "opacity", "scale_0", "scale_1", "scale_2",
                                 "rot_0",   "rot_1",   "rot_2",   "rot_3"};

float word_to_float(std::uint32_t w) {
  float f;
  std::memcpy(&f, &w, sizeof(f));
  return f;
}

std::uint32_t float_to_word(float f) {
  std::uint32_t w;
  std::memcpy(&w, &f, sizeof(w));
  return w;
}

struct CoreIndices {
  int x, y, z, f_dc[3], opacity, scale[3], rot[4];
  std::vector<int> f_rest;
};

CoreIndices resolve_core(const PlyLayout& layout) {
  for (const char* name : kRequired)
    if (layout.index_of(name) < 0)
      throw FormatError(std::string("missing required vertex property '") + name + "'");
  CoreIndices c;
  c.x = layout.index_of("x");
  c.y = layout.index_of("y");
  c.z = layout.index_of("z");
  for (int i = 0; i < 3; ++i) c.f_dc[i] = layout.index_of("f_dc_" + std::to_string(i));
  c.opacity = layout.index_of("opacity");
  for (int i = 0; i < 3; ++i) c.scale[i] = layout.index_of("scale_" + std::to_string(i));
  for (int i = 0; i < 4; ++i) c.rot[i] = layout.index_of("rot_" + std::to_string(i));
  c.f_rest = layout.indices_with_prefix("f_rest_");
  return c;
}

}  // namespace

GaussianCloud load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line) || (line != "ply" && line != "ply\r"))
    throw FormatError("'" + path + "' is not a PLY file");

  GaussianCloud cloud;
  cloud.source_path = path;
  std::size_t vertex_count = 0;
  bool in_vertex_element = false;
  bool saw_format = false;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "comment" || tok.empty()) continue;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") throw FormatError("ASCII PLY is not supported; expected binary_little_endian");
      if (fmt != "binary_little_endian") throw FormatError("unsupported PLY format '" + fmt + "'");
      saw_format = true;
    } else if (tok == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      if (name == "vertex") {
        vertex_count = count;
        in_vertex_element = true;
      } else {
        if (count != 0) throw FormatError("unsupported PLY element '" + name + "'");
        in_vertex_element = false;
      }
    } else if (tok == "property") {
      std::string type, name;
      ls >> type >> name;
      if (!in_vertex_element) continue;
      if (type != "float" && type != "float32")
        throw FormatError("vertex property '" + name + "' has unsupported type '" + type + "' (float32 only)");
      cloud.layout.properties.push_back(name);
    } else if (tok == "end_header") {
      break;
    } else {
      throw FormatError("unrecognized PLY header line: " + line);
    }
  }

  if (!saw_format) throw FormatError("PLY header has no format line");
  if (vertex_count == 0) throw FormatError("'" + path + "' describes an empty scene (zero vertices)");

  const CoreIndices core = resolve_core(cloud.layout);
  const std::size_t width = cloud.layout.properties.size();

  cloud.gaussians.resize(vertex_count);
  std::vector<std::uint32_t> record(width);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    in.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(width * 4));
    if (!in) throw FormatError("truncated PLY payload at vertex " + std::to_string(i));

    Gaussian& g = cloud.gaussians[i];
    g.raw = record;
    auto fld = [&](int idx) { return static_cast<double>(word_to_float(record[static_cast<std::size_t>(idx)])); };

    g.position = Vec3(fld(core.x), fld(core.y), fld(core.z));
    for (int a = 0; a < 3; ++a) g.color[a] = decode_color_component(fld(core.f_dc[a]));
    g.opacity = decode_opacity(fld(core.opacity));
    for (int a = 0; a < 3; ++a) g.log_scale[a] = fld(core.scale[a]);

    Quat q(fld(core.rot[0]), fld(core.rot[1]), fld(core.rot[2]), fld(core.rot[3]));
    const double norm = q.norm();
    g.rotation = norm > 1e-12 ? Quat(q.coeffs() / norm) : Quat::Identity();

    if (!g.position.allFinite() || !g.log_scale.allFinite() || !std::isfinite(g.opacity) ||
        !g.color.allFinite() || !g.rotation.coeffs().allFinite())
      throw FormatError("non-finite vertex data at index " + std::to_string(i));
  }
  return cloud;
}

void save_ply(const GaussianCloud& cloud, const std::string& path) {
  if (cloud.empty()) throw ContractError("save_ply: cloud is empty");

  const PlyLayout layout = cloud.layout.empty() ? PlyLayout::standard() : cloud.layout;
  const CoreIndices core = resolve_core(layout);
  const std::size_t width = layout.properties.size();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  for (const auto& name : layout.properties) out << "property float " << name << "\n";
  out << "end_header\n";

  std::vector<std::uint32_t> record(width);
  for (const Gaussian& g : cloud.gaussians) {
    if (!g.raw.empty() && g.raw.size() != width)
      throw ContractError("save_ply: raw record width does not match layout");

    if (!g.raw.empty() && !g.dirty && !g.color_dirty) {
      out.write(reinterpret_cast<const char*>(g.raw.data()), static_cast<std::streamsize>(width * 4));
      continue;
    }

    if (!g.raw.empty())
      record = g.raw;
    else
      std::fill(record.begin(), record.end(), float_to_word(0.0f));

    auto put = [&](int idx, double v) { record[static_cast<std::size_t>(idx)] = float_to_word(static_cast<float>(v)); };
    put(core.x, g.position.x());
    put(core.y, g.position.y());
    put(core.z, g.position.z());
    for (int a = 0; a < 3; ++a) put(core.f_dc[a], encode_color_component(g.color[a]));
    put(core.opacity, encode_opacity(g.opacity));
    for (int a = 0; a < 3; ++a) put(core.scale[a], g.log_scale[a]);
    const Quat q = g.rotation.normalized();
    put(core.rot[0], q.w());
    put(core.rot[1], q.x());
    put(core.rot[2], q.y());
    put(core.rot[3], q.z());
    if (g.color_dirty || g.raw.empty())
      for (int idx : core.f_rest) put(idx, 0.0);

    out.write(reinterpret_cast<const char*>(record.data()), static_cast<std::streamsize>(width * 4));
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace splatstyle
