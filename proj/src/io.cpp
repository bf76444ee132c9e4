// Copyright 2026 The Compod Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "compod/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "compod/error.hpp"

namespace compod {

namespace {

using nlohmann::json;

std::string extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// ---------------------------------------------------------------- PLY ----

enum class PlyFormat { Ascii, BinaryLE, BinaryBE };

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyHeader {
  PlyFormat format = PlyFormat::Ascii;
  std::vector<PlyElement> elements;
  std::size_t data_offset = 0;  // byte offset of the body
  std::size_t lines = 0;        // header line count
};

std::size_t type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" ||
      t == "uint32" || t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  return 0;
}

PlyHeader parse_ply_header(const std::string& data) {
  PlyHeader h;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_format = false;
  for (;;) {
    const auto eol = data.find('\n', pos);
    if (eol == std::string::npos) throw ParseError("PLY header not terminated", line_no + 1);
    std::string line = data.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = eol + 1;
    ++line_no;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (line_no == 1) {
      if (word != "ply") throw ParseError("missing 'ply' magic", 1);
      continue;
    }
    if (word.empty() || word == "comment" || word == "obj_info") continue;
    if (word == "format") {
      std::string f;
      ss >> f;
      if (f == "ascii") h.format = PlyFormat::Ascii;
      else if (f == "binary_little_endian") h.format = PlyFormat::BinaryLE;
      else if (f == "binary_big_endian") h.format = PlyFormat::BinaryBE;
      else throw ParseError("unknown PLY format '" + f + "'", line_no);
      saw_format = true;
    } else if (word == "element") {
      PlyElement e;
      long long count = -1;
      ss >> e.name >> count;
      if (e.name.empty() || count < 0) throw ParseError("bad element line", line_no);
      e.count = static_cast<std::size_t>(count);
      h.elements.push_back(std::move(e));
    } else if (word == "property") {
      if (h.elements.empty()) throw ParseError("property before element", line_no);
      PlyProperty p;
      std::string t;
      ss >> t;
      if (t == "list") {
        p.is_list = true;
        ss >> p.count_type >> p.type >> p.name;
        if (type_size(p.count_type) == 0) throw ParseError("bad list count type", line_no);
      } else {
        p.type = t;
        ss >> p.name;
      }
      if (type_size(p.type) == 0 || p.name.empty()) {
        throw ParseError("bad property line", line_no);
      }
      h.elements.back().properties.push_back(std::move(p));
    } else if (word == "end_header") {
      if (!saw_format) throw ParseError("PLY format line missing", line_no);
      h.data_offset = pos;
      h.lines = line_no;
      return h;
    } else {
      throw ParseError("unexpected PLY header keyword '" + word + "'", line_no);
    }
  }
}

// Sequential reader over the PLY body for any of the three encodings.
class PlyReader {
 public:
  PlyReader(const std::string& data, const PlyHeader& h)
      : data_(data), pos_(h.data_offset), format_(h.format), line_(h.lines) {}

  double read(const std::string& type) {
    if (format_ == PlyFormat::Ascii) return read_ascii();
    const std::size_t n = type_size(type);
    if (pos_ + n > data_.size()) throw ParseError("unexpected end of PLY data", pos_);
    unsigned char buf[8];
    std::memcpy(buf, data_.data() + pos_, n);
    const bool big = format_ == PlyFormat::BinaryBE;
    if (big != (std::endian::native == std::endian::big)) std::reverse(buf, buf + n);
    pos_ += n;
    if (type == "char" || type == "int8") return static_cast<std::int8_t>(buf[0]);
    if (type == "uchar" || type == "uint8") return buf[0];
    if (type == "short" || type == "int16") return load<std::int16_t>(buf);
    if (type == "ushort" || type == "uint16") return load<std::uint16_t>(buf);
    if (type == "int" || type == "int32") return load<std::int32_t>(buf);
    if (type == "uint" || type == "uint32") return load<std::uint32_t>(buf);
    if (type == "float" || type == "float32") return load<float>(buf);
    return load<double>(buf);
  }

  void end_record() {
    if (format_ != PlyFormat::Ascii) return;
    // Discard the remainder of the line.
    while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
    if (pos_ < data_.size()) ++pos_;
    ++line_;
  }

 private:
  template <typename T>
  static double load(const unsigned char* buf) {
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return static_cast<double>(v);
  }

  double read_ascii() {
    while (pos_ < data_.size() && (data_[pos_] == ' ' || data_[pos_] == '\t' ||
                                   data_[pos_] == '\r')) {
      ++pos_;
    }
    if (pos_ >= data_.size() || data_[pos_] == '\n') {
      throw ParseError("missing value in PLY record", line_ + 1);
    }
    const char* begin = data_.data() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number in PLY record", line_ + 1);
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  const std::string& data_;
  std::size_t pos_;
  PlyFormat format_;
  std::size_t line_;
};

struct PlyContents {
  PointCloud cloud;
  std::vector<std::vector<int>> faces;
};

PlyContents read_ply(const std::string& data) {
  const PlyHeader h = parse_ply_header(data);
  auto vit = std::find_if(h.elements.begin(), h.elements.end(),
                          [](const PlyElement& e) { return e.name == "vertex"; });
  if (vit == h.elements.end()) throw ParseError("PLY has no vertex element", h.lines);
  PlyReader reader(data, h);
  PlyContents out;
  for (const PlyElement& e : h.elements) {
    if (e.name == "vertex") {
      int ix[6] = {-1, -1, -1, -1, -1, -1};
      const char* names[6] = {"x", "y", "z", "nx", "ny", "nz"};
      for (std::size_t p = 0; p < e.properties.size(); ++p) {
        for (int k = 0; k < 6; ++k) {
          if (e.properties[p].name == names[k] && !e.properties[p].is_list) {
            ix[k] = static_cast<int>(p);
          }
        }
      }
      if (ix[0] < 0 || ix[1] < 0 || ix[2] < 0) {
        throw ParseError("vertex element lacks x, y or z", h.lines);
      }
      const bool normals = ix[3] >= 0 && ix[4] >= 0 && ix[5] >= 0;
      out.cloud.points.reserve(e.count);
      std::vector<double> vals(e.properties.size());
      for (std::size_t i = 0; i < e.count; ++i) {
        for (std::size_t p = 0; p < e.properties.size(); ++p) {
          const PlyProperty& prop = e.properties[p];
          if (prop.is_list) {
            const auto n = static_cast<std::size_t>(reader.read(prop.count_type));
            for (std::size_t k = 0; k < n; ++k) reader.read(prop.type);
            vals[p] = 0.0;
          } else {
            vals[p] = reader.read(prop.type);
          }
        }
        reader.end_record();
        out.cloud.points.emplace_back(vals[ix[0]], vals[ix[1]], vals[ix[2]]);
        if (normals) out.cloud.normals.emplace_back(vals[ix[3]], vals[ix[4]], vals[ix[5]]);
      }
    } else {
      const bool is_face = e.name == "face";
      for (std::size_t i = 0; i < e.count; ++i) {
        for (const PlyProperty& prop : e.properties) {
          if (prop.is_list) {
            const auto n = static_cast<std::size_t>(reader.read(prop.count_type));
            std::vector<int> idx(n);
            for (std::size_t k = 0; k < n; ++k) idx[k] = static_cast<int>(reader.read(prop.type));
            if (is_face && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
              out.faces.push_back(std::move(idx));
            }
          } else {
            reader.read(prop.type);
          }
        }
        reader.end_record();
      }
    }
  }
  return out;
}

template <typename T>
void append_le(std::string& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

// ---------------------------------------------------------------- OBJ ----

SurfaceMesh read_obj(const std::string& data) {
  SurfaceMesh mesh;
  std::istringstream in(data);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) throw ParseError("malformed vertex", line_no);
      mesh.vertices.emplace_back(x, y, z);
    } else if (word == "f") {
      MeshFacet f;
      std::string tok;
      while (ss >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        char* end = nullptr;
        const long v = std::strtol(head.c_str(), &end, 10);
        if (head.empty() || *end != '\0' || v == 0) {
          throw ParseError("malformed face index '" + tok + "'", line_no);
        }
        const long idx = v > 0 ? v - 1 : static_cast<long>(mesh.vertices.size()) + v;
        if (idx < 0 || idx >= static_cast<long>(mesh.vertices.size())) {
          throw ParseError(fmt::format("face index {} out of range", v), line_no);
        }
        f.loop.push_back(static_cast<int>(idx));
      }
      if (f.loop.size() < 3) throw ParseError("face with fewer than 3 vertices", line_no);
      mesh.facets.push_back(std::move(f));
    }
  }
  return mesh;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

PointCloud load_point_cloud(const std::string& path) {
  if (extension(path) != "ply") {
    throw UnsupportedFormat("point clouds must be PLY: '" + path + "'");
  }
  PlyContents c = read_ply(read_file(path));
  return std::move(c.cloud);
}

void save_point_cloud(const PointCloud& cloud, const std::string& path, bool ascii) {
  const bool normals = cloud.has_normals();
  std::string out = "ply\n";
  out += ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
  out += fmt::format("element vertex {}\n", cloud.points.size());
  out += "property double x\nproperty double y\nproperty double z\n";
  if (normals) out += "property double nx\nproperty double ny\nproperty double nz\n";
  out += "end_header\n";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    if (ascii) {
      out += fmt::format("{:.17g} {:.17g} {:.17g}", p.x(), p.y(), p.z());
      if (normals) {
        const Vec3& n = cloud.normals[i];
        out += fmt::format(" {:.17g} {:.17g} {:.17g}", n.x(), n.y(), n.z());
      }
      out += '\n';
    } else {
      for (int a = 0; a < 3; ++a) append_le(out, p[a]);
      if (normals) {
        for (int a = 0; a < 3; ++a) append_le(out, cloud.normals[i][a]);
      }
    }
  }
  write_file(path, out);
}

SurfaceMesh load_mesh(const std::string& path) {
  const std::string ext = extension(path);
  if (ext == "obj") return read_obj(read_file(path));
  if (ext == "ply") {
    PlyContents c = read_ply(read_file(path));
    SurfaceMesh mesh;
    mesh.vertices = std::move(c.cloud.points);
    for (auto& f : c.faces) {
      for (int v : f) {
        if (v < 0 || v >= static_cast<int>(mesh.vertices.size())) {
          throw ParseError(fmt::format("face index {} out of range", v), 0);
        }
      }
      mesh.facets.push_back({std::move(f), kNoSource});
    }
    return mesh;
  }
  throw UnsupportedFormat("unknown mesh format: '" + path + "'");
}

void save_mesh(const SurfaceMesh& mesh, const std::string& path) {
  const std::string ext = extension(path);
  fmt::memory_buffer buf;
  if (ext == "obj") {
    for (const Vec3& v : mesh.vertices) {
      fmt::format_to(std::back_inserter(buf), "v {:.17g} {:.17g} {:.17g}\n", v.x(),
                     v.y(), v.z());
    }
    for (const MeshFacet& f : mesh.facets) {
      buf.push_back('f');
      for (int v : f.loop) fmt::format_to(std::back_inserter(buf), " {}", v + 1);
      buf.push_back('\n');
    }
    write_file(path, fmt::to_string(buf));
    return;
  }
  if (ext == "ply") {
    std::string out = "ply\nformat binary_little_endian 1.0\n";
    out += fmt::format("element vertex {}\n", mesh.vertices.size());
    out += "property double x\nproperty double y\nproperty double z\n";
    out += fmt::format("element face {}\n", mesh.facets.size());
    out += "property list uint int vertex_indices\nend_header\n";
    for (const Vec3& v : mesh.vertices) {
      for (int a = 0; a < 3; ++a) append_le(out, v[a]);
    }
    for (const MeshFacet& f : mesh.facets) {
      append_le(out, static_cast<std::uint32_t>(f.loop.size()));
      for (int v : f.loop) append_le(out, static_cast<std::int32_t>(v));
    }
    write_file(path, out);
    return;
  }
  throw UnsupportedFormat("unknown mesh format: '" + path + "'");
}

std::vector<PlanarPrimitive> load_primitives(const std::string& path,
                                             std::optional<std::size_t> cloud_size) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid primitives JSON: ") + e.what(), e.byte);
  }
  if (!j.is_object() || !j.contains("planes") || !j["planes"].is_array()) {
    throw ParseError("primitives JSON needs a \"planes\" array", 0);
  }
  const json& planes = j["planes"];
  const json inliers = j.value("inliers", json::array());
  const json orient = j.value("orientations", json::array());
  if (inliers.size() != planes.size()) {
    throw ParseError("\"inliers\" and \"planes\" differ in length", 0);
  }
  std::vector<PlanarPrimitive> out;
  try {
    for (std::size_t i = 0; i < planes.size(); ++i) {
      const json& p = planes[i];
      if (!p.is_array() || p.size() != 4) {
        throw ParseError(fmt::format("plane {} must have 4 coefficients", i), i);
      }
      PlanarPrimitive prim;
      prim.id = static_cast<int>(i);
      prim.plane = PlaneEq::from_coefficients(p[0].get<double>(), p[1].get<double>(),
                                              p[2].get<double>(), p[3].get<double>());
      for (const json& idx : inliers[i]) {
        const long long v = idx.get<long long>();
        if (v < 0 || (cloud_size && static_cast<std::size_t>(v) >= *cloud_size)) {
          throw ParseError(
              fmt::format("primitive {} has inlier index {} outside the cloud", i, v), i);
        }
        prim.inliers.push_back(static_cast<int>(v));
      }
      if (i < orient.size()) prim.orientation = orient[i].get<int>();
      out.push_back(std::move(prim));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid primitives JSON: ") + e.what(), 0);
  } catch (const DegenerateInput& e) {
    throw ParseError(std::string("invalid plane: ") + e.what(), 0);
  }
  return out;
}

void save_primitives(const std::vector<PlanarPrimitive>& primitives,
                     const std::string& path) {
  json j;
  j["planes"] = json::array();
  j["inliers"] = json::array();
  j["orientations"] = json::array();
  for (const PlanarPrimitive& p : primitives) {
    j["planes"].push_back({p.plane.n.x(), p.plane.n.y(), p.plane.n.z(), p.plane.d});
    j["inliers"].push_back(p.inliers);
    j["orientations"].push_back(p.orientation);
  }
  write_file(path, j.dump() + "\n");
}

}  // namespace compod
