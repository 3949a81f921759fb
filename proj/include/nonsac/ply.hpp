#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nonsac {

namespace ply_detail {

struct Property {
  std::string name;
  int size = 0;          // bytes per scalar
  bool is_float = false;
  bool is_list = false;
  int count_size = 0;    // list count scalar size
};

struct Element {
  std::string name;
  long long count = 0;
  std::vector<Property> props;
};

inline int scalar_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
      t == "float32") {
    return 4;
  }
  if (t == "double" || t == "float64") return 8;
  return 0;
}

inline bool scalar_is_float(const std::string& t) {
  return t == "float" || t == "float32" || t == "double" || t == "float64";
}

[[noreturn]] inline void fail(const std::string& what, std::streamoff offset) {
  throw std::runtime_error("ply parse error at byte " + std::to_string(offset) + ": " + what);
}

inline double read_scalar(std::istream& in, int size, bool is_float, std::streamoff offset) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), size);
  if (!in) fail("truncated payload", offset);
  if (is_float) {
    if (size == 4) {
      float f;
      std::memcpy(&f, buf, 4);
      return f;
    }
    double d;
    std::memcpy(&d, buf, 8);
    return d;
  }
  std::uint64_t v = 0;
  for (int i = size - 1; i >= 0; --i) v = (v << 8) | buf[i];
  return static_cast<double>(v);
}

}  // namespace ply_detail

// Reads vertex x,y,z from an ASCII or binary-little-endian PLY file. Other
// elements and properties are skipped; malformed input raises with the byte
// offset where parsing stopped.
inline std::vector<Eigen::Vector3d> load_ply(const std::string& path) {
  using namespace ply_detail;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open ply file: " + path);

  auto offset = [&]() -> std::streamoff {
    const auto p = in.tellg();
    return p < 0 ? -1 : static_cast<std::streamoff>(p);
  };

  std::string line;
  if (!std::getline(in, line)) fail("empty file", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") fail("missing 'ply' magic", 0);

  bool ascii = false;
  bool have_format = false;
  std::vector<Element> elements;
  while (true) {
    const std::streamoff line_start = offset();
    if (!std::getline(in, line)) fail("header ended before end_header", line_start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string tag, version;
      ls >> tag >> version;
      if (tag == "ascii") ascii = true;
      else if (tag == "binary_little_endian") ascii = false;
      else fail("unsupported format tag '" + tag + "'", line_start);
      have_format = true;
    } else if (kw == "element") {
      Element e;
      ls >> e.name >> e.count;
      if (ls.fail() || e.count < 0) fail("malformed element line", line_start);
      elements.push_back(e);
    } else if (kw == "property") {
      if (elements.empty()) fail("property before any element", line_start);
      Property p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.name;
        p.is_list = true;
        p.count_size = scalar_size(count_type);
        p.size = scalar_size(item_type);
        if (p.count_size == 0 || p.size == 0) fail("unknown list scalar type", line_start);
      } else {
        ls >> p.name;
        p.size = scalar_size(type);
        p.is_float = scalar_is_float(type);
        if (p.size == 0) fail("unknown scalar type '" + type + "'", line_start);
      }
      if (ls.fail()) fail("malformed property line", line_start);
      elements.back().props.push_back(p);
    } else if (kw == "end_header") {
      break;
    } else {
      fail("unexpected header keyword '" + kw + "'", line_start);
    }
  }
  if (!have_format) fail("header has no format line", offset());

  std::vector<Eigen::Vector3d> points;
  for (const Element& e : elements) {
    const bool is_vertex = e.name == "vertex";
    int xi = -1, yi = -1, zi = -1;
    if (is_vertex) {
      for (int i = 0; i < static_cast<int>(e.props.size()); ++i) {
        if (e.props[i].is_list) continue;
        if (e.props[i].name == "x") xi = i;
        if (e.props[i].name == "y") yi = i;
        if (e.props[i].name == "z") zi = i;
      }
      if (xi < 0 || yi < 0 || zi < 0) fail("vertex element lacks x/y/z", offset());
      points.reserve(static_cast<std::size_t>(e.count));
    }
    for (long long row = 0; row < e.count; ++row) {
      const std::streamoff row_start = offset();
      if (ascii) {
        if (!std::getline(in, line)) fail("truncated payload", row_start);
        if (!is_vertex) continue;
        std::istringstream ls(line);
        double v = 0, x = 0, y = 0, z = 0;
        for (int i = 0; i < static_cast<int>(e.props.size()); ++i) {
          if (e.props[i].is_list) {
            long long cnt;
            if (!(ls >> cnt)) fail("truncated payload", row_start);
            for (long long k = 0; k < cnt; ++k) {
              if (!(ls >> v)) fail("truncated payload", row_start);
            }
            continue;
          }
          if (!(ls >> v)) fail("truncated payload", row_start);
          if (i == xi) x = v;
          if (i == yi) y = v;
          if (i == zi) z = v;
        }
        points.emplace_back(x, y, z);
      } else {
        double x = 0, y = 0, z = 0;
        for (int i = 0; i < static_cast<int>(e.props.size()); ++i) {
          const Property& p = e.props[i];
          if (p.is_list) {
            const double cnt = read_scalar(in, p.count_size, false, row_start);
            in.seekg(static_cast<std::streamoff>(cnt) * p.size, std::ios::cur);
            if (!in) fail("truncated payload", row_start);
            continue;
          }
          const double v = read_scalar(in, p.size, p.is_float, row_start);
          if (is_vertex) {
            if (i == xi) x = v;
            if (i == yi) y = v;
            if (i == zi) z = v;
          }
        }
        if (is_vertex) points.emplace_back(x, y, z);
      }
    }
    if (is_vertex) break;  // remaining elements are irrelevant
  }
  return points;
}

}  // namespace nonsac
