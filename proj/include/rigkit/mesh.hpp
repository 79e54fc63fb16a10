#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rigkit/core.hpp"

namespace rigkit {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW seen from outside
  std::string source;

  double triangle_area(int t) const {
    const auto& tri = triangles[t];
    Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
    Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * e1.cross(e2).norm();
  }

  Vec3 triangle_normal(int t) const {
    const auto& tri = triangles[t];
    Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
    Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
    return e1.cross(e2).normalized();
  }
};

// Uniform surface samples with per-point normals; the shape-conditioning input.
struct MeshSample {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::string source;

  size_t size() const { return points.size(); }
};

inline constexpr int kDefaultSampleCount = 8192;

// Wavefront OBJ subset: v, vn, f. Polygonal faces are fan-triangulated.
// Unknown record types (o, l, usemtl, ...) are skipped.
inline TriMesh read_obj(std::istream& in, const std::string& source = "") {
  TriMesh mesh;
  mesh.source = source;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x >> v.y >> v.z))
        throw Error(ErrorCode::ParseError, source + ": bad vertex at line " + std::to_string(lineno));
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> face;
      std::string item;
      while (ss >> item) {
        // formats: i, i/t, i//n, i/t/n
        size_t slash = item.find('/');
        std::string first = slash == std::string::npos ? item : item.substr(0, slash);
        int vi = 0;
        try {
          vi = std::stoi(first);
        } catch (const std::exception&) {
          throw Error(ErrorCode::ParseError,
                      source + ": bad face index at line " + std::to_string(lineno));
        }
        if (vi < 0) vi = int(mesh.vertices.size()) + vi + 1;  // relative indexing
        if (vi < 1 || vi > int(mesh.vertices.size()))
          throw Error(ErrorCode::ParseError,
                      source + ": face index out of range at line " + std::to_string(lineno));
        face.push_back(vi - 1);
      }
      if (face.size() < 3)
        throw Error(ErrorCode::ParseError,
                    source + ": face with <3 vertices at line " + std::to_string(lineno));
      for (size_t i = 1; i + 1 < face.size(); ++i)
        mesh.triangles.push_back({face[0], face[int(i)], face[int(i) + 1]});
    }
    // vn records carry no information we keep: sampling normals come from
    // triangle planes.
  }
  return mesh;
}

inline TriMesh read_obj_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_obj(f, path);
}

inline void write_obj(std::ostream& out, const TriMesh& mesh) {
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

inline void write_obj_file(const std::string& path, const TriMesh& mesh) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  write_obj(f, mesh);
}

// Area-weighted uniform surface sampling, deterministic per seed. Normals come
// from the sampled triangle's plane, oriented by the stored winding.
inline MeshSample sample_mesh(const TriMesh& mesh, int count, uint64_t seed) {
  if (mesh.triangles.empty()) throw Error(ErrorCode::EmptyMesh, "mesh has no triangles");

  std::vector<double> cumulative;
  cumulative.reserve(mesh.triangles.size());
  double total = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    total += mesh.triangle_area(int(t));
    cumulative.push_back(total);
  }
  if (total <= 0.0)
    throw Error(ErrorCode::DegenerateTriangleOnly, "all triangles have zero area");

  MeshSample out;
  out.source = mesh.source;
  out.points.reserve(count);
  out.normals.reserve(count);
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    double target = rng.uniform() * total;
    size_t t = size_t(std::lower_bound(cumulative.begin(), cumulative.end(), target) -
                      cumulative.begin());
    if (t >= mesh.triangles.size()) t = mesh.triangles.size() - 1;
    const auto& tri = mesh.triangles[t];
    // uniform barycentric via the sqrt trick
    double r1 = std::sqrt(rng.uniform());
    double r2 = rng.uniform();
    double a = 1.0 - r1, b = r1 * (1.0 - r2), c = r1 * r2;
    Vec3 p = mesh.vertices[tri[0]] * a + mesh.vertices[tri[1]] * b + mesh.vertices[tri[2]] * c;
    out.points.push_back(p);
    out.normals.push_back(mesh.triangle_normal(int(t)));
  }
  return out;
}

// ---- primitive constructors (tests, synthetic corpus) ----

inline TriMesh make_box(Vec3 center, Vec3 half_extent) {
  TriMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back({center.x + (i & 1 ? half_extent.x : -half_extent.x),
                          center.y + (i & 2 ? half_extent.y : -half_extent.y),
                          center.z + (i & 4 ? half_extent.z : -half_extent.z)});
  }
  auto quad = [&m](int a, int b, int c, int d) {
    m.triangles.push_back({a, b, c});
    m.triangles.push_back({a, c, d});
  };
  quad(0, 2, 3, 1);  // -z
  quad(4, 5, 7, 6);  // +z
  quad(0, 1, 5, 4);  // -y
  quad(2, 6, 7, 3);  // +y
  quad(0, 4, 6, 2);  // -x
  quad(1, 3, 7, 5);  // +x
  return m;
}

inline TriMesh make_uv_sphere(Vec3 center, double radius, int rings = 16, int segments = 32) {
  TriMesh m;
  for (int r = 0; r <= rings; ++r) {
    double phi = M_PI * double(r) / rings;
    for (int s = 0; s < segments; ++s) {
      double theta = 2.0 * M_PI * double(s) / segments;
      m.vertices.push_back({center.x + radius * std::sin(phi) * std::cos(theta),
                            center.y + radius * std::cos(phi),
                            center.z + radius * std::sin(phi) * std::sin(theta)});
    }
  }
  auto at = [segments](int r, int s) { return r * segments + (s % segments); };
  for (int r = 0; r < rings; ++r) {
    for (int s = 0; s < segments; ++s) {
      int a = at(r, s), b = at(r, s + 1), c = at(r + 1, s + 1), d = at(r + 1, s);
      if (r != 0) m.triangles.push_back({a, b, c});
      if (r != rings - 1) m.triangles.push_back({a, c, d});
    }
  }
  return m;
}

// Capped prism around a segment; the synthetic corpus wraps one around each
// bone so that leaf joints sit inside the surface.
inline TriMesh make_tube(Vec3 a, Vec3 b, double radius, int sides = 6) {
  TriMesh m;
  Vec3 axis = b - a;
  double len = axis.norm();
  Vec3 dir = len > 1e-12 ? axis / len : Vec3{0, 1, 0};
  Vec3 ref = std::abs(dir.y) < 0.9 ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
  Vec3 u = dir.cross(ref).normalized();
  Vec3 v = dir.cross(u);
  for (int s = 0; s < sides; ++s) {
    double t = 2.0 * M_PI * double(s) / sides;
    Vec3 off = u * (radius * std::cos(t)) + v * (radius * std::sin(t));
    m.vertices.push_back(a + off);
    m.vertices.push_back(b + off);
  }
  int na = 2 * sides;
  m.vertices.push_back(a - dir * radius);  // cap apexes
  m.vertices.push_back(b + dir * radius);
  for (int s = 0; s < sides; ++s) {
    int a0 = 2 * s, b0 = 2 * s + 1;
    int a1 = 2 * ((s + 1) % sides), b1 = 2 * ((s + 1) % sides) + 1;
    m.triangles.push_back({a0, b1, b0});
    m.triangles.push_back({a0, a1, b1});
    m.triangles.push_back({a1, a0, na});      // cap at a
    m.triangles.push_back({b0, b1, na + 1});  // cap at b
  }
  return m;
}

}  // namespace rigkit
