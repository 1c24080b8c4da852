#include "panfuse/io.hpp"

#include <json.hpp>

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace panfuse {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path + ": cannot open for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw FormatError(path + ": write failed");
}

[[noreturn]] void fail_at(const std::string& path, std::size_t offset, const std::string& what) {
  throw FormatError(path + ": " + what + " (byte offset " + std::to_string(offset) + ")");
}

// Skips PGM whitespace and '#' comment lines, returns the next integer token.
long pgm_int(const std::string& data, std::size_t& pos, const std::string& path) {
  for (;;) {
    while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos < data.size() && data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= data.size() || !std::isdigit(static_cast<unsigned char>(data[pos])))
    fail_at(path, pos, "expected integer in PGM header");
  long value = 0;
  while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
    value = value * 10 + (data[pos] - '0');
    if (value > 1000000000L) fail_at(path, pos, "PGM header value out of range");
    ++pos;
  }
  return value;
}

std::uint32_t read_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

}  // namespace

LabelRaster read_label_raster(const std::string& path, RasterKind kind,
                              std::uint16_t label_bound) {
  const std::string data = read_file(path);
  std::size_t pos = 0;
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    fail_at(path, 0, "not a P5 PGM file");
  pos = 2;
  const long width = pgm_int(data, pos, path);
  const long height = pgm_int(data, pos, path);
  const long maxval = pgm_int(data, pos, path);
  if (width <= 0 || height <= 0) fail_at(path, pos, "non-positive dimensions");
  if (maxval != 65535) fail_at(path, pos, "label rasters require maxval 65535");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
    fail_at(path, pos, "missing whitespace after maxval");
  ++pos;  // single whitespace byte separates header from payload

  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (data.size() - pos < count * 2)
    fail_at(path, data.size(), "truncated payload: expected " + std::to_string(count * 2) +
                                   " sample bytes after header");

  LabelRaster raster;
  raster.width = static_cast<int>(width);
  raster.height = static_cast<int>(height);
  raster.kind = kind;
  raster.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto hi = static_cast<unsigned char>(data[pos + 2 * i]);
    const auto lo = static_cast<unsigned char>(data[pos + 2 * i + 1]);
    const std::uint16_t label = static_cast<std::uint16_t>((hi << 8) | lo);
    if (label != kUnknownLabel && label >= label_bound)
      fail_at(path, pos + 2 * i,
              "label " + std::to_string(label) + " >= bound " + std::to_string(label_bound));
    raster.labels[i] = label;
  }
  return raster;
}

void write_label_raster(const LabelRaster& raster, const std::string& path) {
  std::string out;
  out.reserve(32 + raster.labels.size() * 2);
  out += "P5\n" + std::to_string(raster.width) + " " + std::to_string(raster.height) +
         "\n65535\n";
  for (std::uint16_t label : raster.labels) {
    out.push_back(static_cast<char>(label >> 8));  // big-endian per PGM convention
    out.push_back(static_cast<char>(label & 0xff));
  }
  write_file(path, out);
}

void write_pgm8(const std::vector<std::uint8_t>& values, int width, int height,
                const std::string& path) {
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(values.data()), values.size());
  write_file(path, out);
}

DepthMap read_depth_map(const std::string& path) {
  const std::string data = read_file(path);
  if (data.size() < 12 || std::memcmp(data.data(), "DMAP", 4) != 0)
    fail_at(path, 0, "missing DMAP magic");
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::uint32_t width = read_u32le(bytes + 4);
  const std::uint32_t height = read_u32le(bytes + 8);
  if (width == 0 || height == 0) fail_at(path, 4, "non-positive dimensions");
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (data.size() - 12 < count * 4)
    fail_at(path, data.size(), "truncated payload: expected " + std::to_string(count * 4) +
                                   " value bytes after header");
  DepthMap depth;
  depth.width = static_cast<int>(width);
  depth.height = static_cast<int>(height);
  depth.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t raw = read_u32le(bytes + 12 + 4 * i);
    float value = std::bit_cast<float>(raw);
    if (!std::isnan(value) && !(std::isfinite(value) && value > 0.0f))
      fail_at(path, 12 + 4 * i, "depth values must be positive finite or NaN");
    depth.values[i] = value;
  }
  return depth;
}

void write_depth_map(const DepthMap& depth, const std::string& path) {
  std::string out = "DMAP";
  append_u32le(out, static_cast<std::uint32_t>(depth.width));
  append_u32le(out, static_cast<std::uint32_t>(depth.height));
  for (float value : depth.values) append_u32le(out, std::bit_cast<std::uint32_t>(value));
  write_file(path, out);
}

namespace {

struct PlyProperty {
  std::string type;
  std::string name;
};

}  // namespace

LabeledPointCloud read_ply_cloud(const std::string& path, std::vector<std::string>* comments) {
  const std::string data = read_file(path);
  std::istringstream in(data);
  std::string line;
  std::size_t offset = 0;

  auto next_line = [&](std::string& out) {
    if (!std::getline(in, out)) return false;
    offset += out.size() + 1;
    return true;
  };

  if (!next_line(line) || line != "ply") fail_at(path, 0, "missing ply magic");
  bool ascii = false;
  long vertex_count = -1;
  std::vector<PlyProperty> props;
  for (;;) {
    if (!next_line(line)) fail_at(path, offset, "unterminated header");
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "end_header") break;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = (fmt == "ascii");
      if (!ascii) fail_at(path, offset, "only ascii PLY is supported");
    } else if (tok == "comment") {
      if (comments) comments->push_back(line.substr(std::min<std::size_t>(line.size(), 8)));
    } else if (tok == "element") {
      std::string name;
      ls >> name >> vertex_count;
      if (name != "vertex") fail_at(path, offset, "only vertex elements are supported");
    } else if (tok == "property") {
      PlyProperty p;
      ls >> p.type >> p.name;
      props.push_back(p);
    } else {
      fail_at(path, offset, "unrecognized header line: " + line);
    }
  }
  if (vertex_count < 0) fail_at(path, offset, "missing vertex element");

  int ix = -1, iy = -1, iz = -1, isem = -1, iinst = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i].name == "x") ix = static_cast<int>(i);
    else if (props[i].name == "y") iy = static_cast<int>(i);
    else if (props[i].name == "z") iz = static_cast<int>(i);
    else if (props[i].name == "sem") isem = static_cast<int>(i);
    else if (props[i].name == "inst") iinst = static_cast<int>(i);
    else fail_at(path, offset, "unsupported property " + props[i].name);
  }
  if (ix < 0 || iy < 0 || iz < 0) fail_at(path, offset, "missing required property x/y/z");
  if (isem < 0) fail_at(path, offset, "missing required property sem");

  LabeledPointCloud cloud;
  cloud.points.reserve(vertex_count);
  cloud.sem_labels.reserve(vertex_count);
  if (iinst >= 0) cloud.inst_labels.reserve(vertex_count);
  for (long row = 0; row < vertex_count; ++row) {
    if (!next_line(line)) fail_at(path, offset, "truncated vertex list");
    std::istringstream ls(line);
    std::vector<double> vals(props.size());
    for (std::size_t i = 0; i < props.size(); ++i) {
      if (!(ls >> vals[i])) fail_at(path, offset, "malformed vertex row " + std::to_string(row));
    }
    Vec3 p(vals[ix], vals[iy], vals[iz]);
    if (!p.allFinite()) fail_at(path, offset, "non-finite coordinate");
    auto as_u16 = [&](double v) {
      if (v < 0 || v > 65535 || v != std::floor(v))
        fail_at(path, offset, "label out of ushort range");
      return static_cast<std::uint16_t>(v);
    };
    cloud.points.push_back(p);
    cloud.sem_labels.push_back(as_u16(vals[isem]));
    if (iinst >= 0) cloud.inst_labels.push_back(as_u16(vals[iinst]));
  }
  return cloud;
}

void write_ply_cloud(const LabeledPointCloud& cloud, const std::string& path,
                     const std::vector<std::string>& comments) {
  const bool with_inst = cloud.has_instances();
  std::string out = "ply\nformat ascii 1.0\n";
  for (const auto& c : comments) out += "comment " + c + "\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\nproperty ushort sem\n";
  if (with_inst) out += "property ushort inst\n";
  out += "end_header\n";
  char buf[128];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    int n = std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %u", p.x(), p.y(), p.z(),
                          static_cast<unsigned>(cloud.sem_labels[i]));
    out.append(buf, n);
    if (with_inst) {
      n = std::snprintf(buf, sizeof(buf), " %u", static_cast<unsigned>(cloud.inst_labels[i]));
      out.append(buf, n);
    }
    out.push_back('\n');
  }
  write_file(path, out);
}

CameraView read_camera_json(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) throw FormatError(path + ": missing key \"" + key + "\"");
    return doc.at(key);
  };
  const int view_id = need("view_id").get<int>();
  const int width = need("width").get<int>();
  const int height = need("height").get<int>();
  const auto k_items = need("k_matrix");
  const auto pose_items = need("cam_to_world");
  if (k_items.size() != 9) throw FormatError(path + ": k_matrix must have 9 entries");
  if (pose_items.size() != 16) throw FormatError(path + ": cam_to_world must have 16 entries");
  Mat3 k;
  for (int i = 0; i < 9; ++i) k(i / 3, i % 3) = k_items[i].get<double>();
  Mat4 pose;
  for (int i = 0; i < 16; ++i) pose(i / 4, i % 4) = pose_items[i].get<double>();
  try {
    return CameraView::create(view_id, width, height, k, pose);
  } catch (const std::invalid_argument& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_camera_json(const CameraView& view, const std::string& path) {
  nlohmann::json doc;
  doc["view_id"] = view.view_id;
  doc["width"] = view.width;
  doc["height"] = view.height;
  auto& k = doc["k_matrix"] = nlohmann::json::array();
  for (int i = 0; i < 9; ++i) k.push_back(view.k_matrix(i / 3, i % 3));
  auto& pose = doc["cam_to_world"] = nlohmann::json::array();
  for (int i = 0; i < 16; ++i) pose.push_back(view.cam_to_world(i / 4, i % 4));
  write_file(path, doc.dump(2) + "\n");
}

}  // namespace panfuse
