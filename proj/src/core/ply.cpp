#include "scene4d/core/ply.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "scene4d/core/error.hpp"

namespace scene4d {

namespace {

static_assert(std::endian::native == std::endian::little, "PLY binary I/O assumes a little-endian host");

struct PropertyDef {
  std::string name;
  std::string type;  // canonical
  bool is_list = false;
  std::string count_type;
};

struct ElementDef {
  std::string name;
  std::size_t count = 0;
  std::vector<PropertyDef> properties;
};

std::string canonical_type(const std::string& t) {
  if (t == "char" || t == "int8") return "int8";
  if (t == "uchar" || t == "uint8") return "uint8";
  if (t == "short" || t == "int16") return "int16";
  if (t == "ushort" || t == "uint16") return "uint16";
  if (t == "int" || t == "int32") return "int32";
  if (t == "uint" || t == "uint32") return "uint32";
  if (t == "float" || t == "float32") return "float32";
  if (t == "double" || t == "float64") return "float64";
  throw InputFormatError("unknown PLY property type '" + t + "'");
}

std::size_t type_size(const std::string& t) {
  if (t == "int8" || t == "uint8") return 1;
  if (t == "int16" || t == "uint16") return 2;
  if (t == "int32" || t == "uint32" || t == "float32") return 4;
  return 8;
}

bool is_integer_type(const std::string& t) { return t != "float32" && t != "float64"; }

template <typename T>
double load_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double decode_binary(const std::string& t, const char* p) {
  if (t == "int8") return load_as<std::int8_t>(p);
  if (t == "uint8") return load_as<std::uint8_t>(p);
  if (t == "int16") return load_as<std::int16_t>(p);
  if (t == "uint16") return load_as<std::uint16_t>(p);
  if (t == "int32") return load_as<std::int32_t>(p);
  if (t == "uint32") return load_as<std::uint32_t>(p);
  if (t == "float32") return load_as<float>(p);
  return load_as<double>(p);
}

class BinaryCursor {
 public:
  BinaryCursor(const std::string& data, std::size_t offset) : data_(data), pos_(offset) {}
  double read(const std::string& type) {
    const std::size_t n = type_size(type);
    if (pos_ + n > data_.size()) throw InputFormatError("PLY body is truncated");
    const double v = decode_binary(type, data_.data() + pos_);
    pos_ += n;
    return v;
  }

 private:
  const std::string& data_;
  std::size_t pos_;
};

class AsciiCursor {
 public:
  AsciiCursor(const std::string& data, std::size_t offset) : in_(data.substr(offset)) {}
  double read(const std::string& type) {
    std::string token;
    if (!(in_ >> token)) throw InputFormatError("PLY body is truncated");
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw InputFormatError("bad PLY number '" + token + "'");
      // Narrow to the declared width so ascii and binary files decode identically.
      return type == "float32" ? static_cast<double>(static_cast<float>(v)) : v;
    } catch (const std::logic_error&) {
      throw InputFormatError("bad PLY number '" + token + "'");
    }
  }

 private:
  std::istringstream in_;
};

template <typename Cursor>
PlyVertexTable read_body(Cursor& cursor, const std::vector<ElementDef>& elements) {
  PlyVertexTable table;
  bool seen_vertex = false;
  for (const auto& el : elements) {
    const bool is_vertex = el.name == "vertex";
    if (is_vertex) {
      seen_vertex = true;
      table.count = el.count;
      for (const auto& p : el.properties) {
        if (p.is_list) continue;
        table.order.push_back(p.name);
        table.types[p.name] = p.type;
        table.columns[p.name].reserve(el.count);
      }
    }
    for (std::size_t i = 0; i < el.count; ++i) {
      for (const auto& p : el.properties) {
        if (p.is_list) {
          const double n = cursor.read(p.count_type);
          if (n < 0) throw InputFormatError("negative PLY list length");
          for (std::size_t m = 0; m < static_cast<std::size_t>(n); ++m) cursor.read(p.type);
          continue;
        }
        const double v = cursor.read(p.type);
        if (is_vertex) table.columns[p.name].push_back(v);
      }
    }
    if (is_vertex) break;  // nothing after the vertex table is needed
  }
  if (!seen_vertex) throw InputFormatError("PLY file has no vertex element");
  return table;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const std::vector<double>& PlyVertexTable::column(const std::string& name) const {
  auto it = columns.find(name);
  if (it == columns.end()) throw InputFormatError("PLY vertex property '" + name + "' missing");
  return it->second;
}

PlyVertexTable read_ply(const std::string& path) {
  const std::string data = read_file(path);
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    if (pos >= data.size()) throw InputFormatError(path + ": PLY header is not terminated");
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    std::string line = data.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply") throw InputFormatError(path + ": missing 'ply' magic");
  std::string format;
  std::vector<ElementDef> elements;
  while (true) {
    const std::string line = next_line();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word.empty() || word == "comment" || word == "obj_info") continue;
    if (word == "end_header") break;
    if (word == "format") {
      ls >> format;
    } else if (word == "element") {
      ElementDef el;
      long long count = -1;
      ls >> el.name >> count;
      if (el.name.empty() || count < 0) throw InputFormatError(path + ": bad element line '" + line + "'");
      el.count = static_cast<std::size_t>(count);
      elements.push_back(el);
    } else if (word == "property") {
      if (elements.empty()) throw InputFormatError(path + ": property before element");
      PropertyDef p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string ct, it;
        ls >> ct >> it >> p.name;
        p.is_list = true;
        p.count_type = canonical_type(ct);
        p.type = canonical_type(it);
      } else {
        ls >> p.name;
        p.type = canonical_type(type);
      }
      if (p.name.empty()) throw InputFormatError(path + ": property without a name");
      elements.back().properties.push_back(p);
    } else {
      throw InputFormatError(path + ": unexpected header line '" + line + "'");
    }
  }

  if (format == "ascii") {
    AsciiCursor cursor(data, pos);
    return read_body(cursor, elements);
  }
  if (format == "binary_little_endian") {
    BinaryCursor cursor(data, pos);
    return read_body(cursor, elements);
  }
  throw InputFormatError(path + ": unsupported PLY format '" + format + "'");
}

std::vector<ColoredPoint> read_point_cloud(const std::string& path) {
  const PlyVertexTable t = read_ply(path);
  const auto& x = t.column("x");
  const auto& y = t.column("y");
  const auto& z = t.column("z");
  if (!t.has("red") || !t.has("green") || !t.has("blue")) {
    throw InputFormatError(path + ": point cloud needs red, green and blue properties");
  }
  const double color_div = is_integer_type(t.types.at("red")) ? 255.0 : 1.0;
  const auto& r = t.column("red");
  const auto& g = t.column("green");
  const auto& b = t.column("blue");
  std::vector<ColoredPoint> points(t.count);
  for (std::size_t i = 0; i < t.count; ++i) {
    points[i].position = Vec3(x[i], y[i], z[i]);
    points[i].color = Vec3(r[i], g[i], b[i]) / color_div;
    if (!points[i].position.allFinite()) throw InputFormatError(path + ": non-finite vertex position");
  }
  return points;
}

namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

std::uint8_t to_byte(double c) {
  const double v = std::clamp(c, 0.0, 1.0) * 255.0 + 0.5;
  return static_cast<std::uint8_t>(v);
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

void write_point_cloud(const std::string& path, std::span<const ColoredPoint> points, PlyFormat format) {
  std::string out = "ply\nformat ";
  out += format == PlyFormat::ascii ? "ascii 1.0\n" : "binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(points.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (const auto& p : points) {
    if (format == PlyFormat::ascii) {
      std::ostringstream ls;
      ls.precision(9);
      ls << static_cast<float>(p.position.x()) << ' ' << static_cast<float>(p.position.y()) << ' '
         << static_cast<float>(p.position.z()) << ' ' << int(to_byte(p.color.x())) << ' '
         << int(to_byte(p.color.y())) << ' ' << int(to_byte(p.color.z())) << '\n';
      out += ls.str();
    } else {
      for (int a = 0; a < 3; ++a) put(out, static_cast<float>(p.position[a]));
      for (int a = 0; a < 3; ++a) put(out, to_byte(p.color[a]));
    }
  }
  write_file(path, out);
}

void write_gaussians(const std::string& path, std::span<const Gaussian3D> gaussians) {
  std::string out = "ply\nformat binary_little_endian 1.0\ncomment scene4d gaussian checkpoint\n";
  out += "element vertex " + std::to_string(gaussians.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  for (const char* name : {"px", "py", "pz", "color_r", "color_g", "color_b", "opacity", "scale_0", "scale_1",
                           "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"}) {
    out += std::string("property double ") + name + "\n";
  }
  out += "end_header\n";
  for (const auto& g : gaussians) {
    for (int a = 0; a < 3; ++a) put(out, static_cast<float>(g.center[a]));
    for (int a = 0; a < 3; ++a) put(out, to_byte(g.color[a]));
    for (int a = 0; a < 3; ++a) put(out, g.center[a]);
    for (int a = 0; a < 3; ++a) put(out, g.color[a]);
    put(out, g.opacity);
    for (int a = 0; a < 3; ++a) put(out, g.scale[a]);
    put(out, g.rotation.w());
    put(out, g.rotation.x());
    put(out, g.rotation.y());
    put(out, g.rotation.z());
  }
  write_file(path, out);
}

std::vector<Gaussian3D> read_gaussians(const std::string& path) {
  const PlyVertexTable t = read_ply(path);
  std::vector<Gaussian3D> out(t.count);
  const auto& px = t.column("px");
  const auto& py = t.column("py");
  const auto& pz = t.column("pz");
  const auto& cr = t.column("color_r");
  const auto& cg = t.column("color_g");
  const auto& cb = t.column("color_b");
  const auto& op = t.column("opacity");
  const auto& s0 = t.column("scale_0");
  const auto& s1 = t.column("scale_1");
  const auto& s2 = t.column("scale_2");
  const auto& r0 = t.column("rot_0");
  const auto& r1 = t.column("rot_1");
  const auto& r2 = t.column("rot_2");
  const auto& r3 = t.column("rot_3");
  for (std::size_t i = 0; i < t.count; ++i) {
    Gaussian3D& g = out[i];
    g.center = Vec3(px[i], py[i], pz[i]);
    g.color = Vec3(cr[i], cg[i], cb[i]);
    g.opacity = op[i];
    g.scale = Vec3(s0[i], s1[i], s2[i]);
    g.rotation = Quat(r0[i], r1[i], r2[i], r3[i]);
    try {
      validate(g);
    } catch (const ContractError& e) {
      throw InputFormatError(path + ": vertex " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace scene4d
