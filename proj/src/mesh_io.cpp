#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gist/error.hpp"
#include "gist/mesh.hpp"

namespace gist {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + what);
}

double parse_double(std::string_view tok, std::size_t line_no) {
  // from_chars for double is available in libstdc++ >= 11.
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) parse_fail(line_no, "bad number '" + std::string(tok) + "'");
  return value;
}

long parse_index(std::string_view tok, std::size_t line_no) {
  // Accept `i/t/n` forms by taking the vertex part.
  tok = tok.substr(0, tok.find('/'));
  long value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) parse_fail(line_no, "bad index '" + std::string(tok) + "'");
  return value;
}

}  // namespace

SurfaceMesh load_mesh(std::string_view text) {
  SurfaceMesh mesh;
  std::string pid = "default";
  std::vector<std::size_t> face_lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;

    if (tok[0] == "v") {
      if (tok.size() != 4) parse_fail(line_no, "vertex needs 3 coordinates");
      mesh.vertices.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                                 parse_double(tok[3], line_no));
    } else if (tok[0] == "g") {
      if (tok.size() != 2) parse_fail(line_no, "group needs exactly one name");
      pid = std::string(tok[1]);
    } else if (tok[0] == "f") {
      if (tok.size() != 4)
        fail(ErrorKind::unsupported_element,
             "line " + std::to_string(line_no) + ": face with " + std::to_string(tok.size() - 1) +
                 " vertices (triangles only)");
      Face f{};
      for (int e = 0; e < 3; ++e) {
        const long idx = parse_index(tok[e + 1], line_no);
        if (idx < 1 || idx > static_cast<long>(mesh.vertices.size()))
          fail(ErrorKind::index, "line " + std::to_string(line_no) + ": vertex index " + std::to_string(idx) +
                                     " out of range 1.." + std::to_string(mesh.vertices.size()));
        f[e] = static_cast<int>(idx - 1);
      }
      mesh.faces.push_back(f);
      mesh.face_pids.push_back(pid);
      face_lines.push_back(line_no);
    } else {
      parse_fail(line_no, "unknown record '" + std::string(tok[0]) + "'");
    }
  }
  for (std::size_t k = 0; k < mesh.face_count(); ++k) {
    const auto& f = mesh.faces[k];
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2] || face_cross(mesh, k).norm() == 0.0)
      fail(ErrorKind::degenerate,
           "face " + std::to_string(k) + " (line " + std::to_string(face_lines[k]) + ") has zero area");
  }
  mesh.closed = is_closed_manifold(mesh);
  return mesh;
}

std::string save_mesh(const SurfaceMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertex_count() * 64 + mesh.face_count() * 24);
  char buf[128];
  for (const Vec3& v : mesh.vertices) {
    const int n = std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out.append(buf, static_cast<std::size_t>(n));
  }
  for (const auto& pid : mesh.pids()) {
    out += "g " + pid + "\n";
    for (std::size_t k = 0; k < mesh.face_count(); ++k) {
      if (mesh.face_pids[k] != pid) continue;
      const auto& f = mesh.faces[k];
      const int n = std::snprintf(buf, sizeof buf, "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
      out.append(buf, static_cast<std::size_t>(n));
    }
  }
  return out;
}

SurfaceMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open mesh file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_mesh(ss.str());
}

void write_mesh_file(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write mesh file '" + path + "'");
  out << save_mesh(mesh);
  require(static_cast<bool>(out), ErrorKind::io, "write failed for '" + path + "'");
}

}  // namespace gist
