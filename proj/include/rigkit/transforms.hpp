#pragma once

#include <array>
#include <cmath>
#include <tuple>

#include "rigkit/core.hpp"
#include "rigkit/mesh.hpp"
#include "rigkit/skeleton.hpp"

namespace rigkit {

// Centering + isotropic scale into [-1, 1]^3.
struct NormalizationTransform {
  Vec3 center{0, 0, 0};
  double scale = 1.0;  // half the longest bounding-box extent

  Vec3 apply(const Vec3& p) const {
    return {(p.x - center.x) / scale, (p.y - center.y) / scale, (p.z - center.z) / scale};
  }
  Vec3 invert(const Vec3& p) const {
    return {p.x * scale + center.x, p.y * scale + center.y, p.z * scale + center.z};
  }
};

struct Aabb {
  Vec3 lo{0, 0, 0}, hi{0, 0, 0};
  Vec3 center() const { return {(lo.x + hi.x) / 2, (lo.y + hi.y) / 2, (lo.z + hi.z) / 2}; }
  Vec3 extent() const { return hi - lo; }
  double diagonal() const { return extent().norm(); }
  double longest_extent() const {
    Vec3 e = extent();
    return std::max(e.x, std::max(e.y, e.z));
  }
};

inline Aabb bounding_box(const std::vector<Vec3>& points) {
  if (points.empty()) throw Error(ErrorCode::EmptyMesh, "bounding box of empty point set");
  Aabb box{points[0], points[0]};
  for (const auto& p : points) {
    box.lo.x = std::min(box.lo.x, p.x); box.hi.x = std::max(box.hi.x, p.x);
    box.lo.y = std::min(box.lo.y, p.y); box.hi.y = std::max(box.hi.y, p.y);
    box.lo.z = std::min(box.lo.z, p.z); box.hi.z = std::max(box.hi.z, p.z);
  }
  return box;
}

// Transform derived from the mesh bounding box (not the skeleton's), so that
// conditioned and unconditioned generation share one frame.
inline NormalizationTransform normalization_from_mesh(const std::vector<Vec3>& mesh_points) {
  Aabb box = bounding_box(mesh_points);
  double half = box.longest_extent() / 2.0;
  if (half <= 0.0)
    throw Error(ErrorCode::DegenerateExtent, "mesh bounding box has zero longest extent");
  return {box.center(), half};
}

inline Skeleton apply_transform(const Skeleton& s, const NormalizationTransform& t) {
  Skeleton out = s;
  for (auto& j : out.joints) j.position = t.apply(j.position);
  return out;
}

inline MeshSample apply_transform(const MeshSample& m, const NormalizationTransform& t) {
  MeshSample out = m;
  for (auto& p : out.points) p = t.apply(p);
  return out;  // normals are unit and unaffected by translation + isotropic scale
}

inline TriMesh apply_transform(const TriMesh& m, const NormalizationTransform& t) {
  TriMesh out = m;
  for (auto& v : out.vertices) v = t.apply(v);
  return out;
}

inline std::tuple<Skeleton, MeshSample, NormalizationTransform> normalize(
    const Skeleton& skeleton, const MeshSample& mesh) {
  if (mesh.points.empty()) throw Error(ErrorCode::EmptyMesh, "cannot normalize empty mesh");
  NormalizationTransform t = normalization_from_mesh(mesh.points);
  return {apply_transform(skeleton, t), apply_transform(mesh, t), t};
}

// Normalization against the full triangle mesh rather than a point sample:
// every joint sits strictly inside the surface's bounding box, so quantization
// never sees out-of-range coordinates regardless of how sparsely the surface
// was sampled.
inline std::tuple<Skeleton, TriMesh, NormalizationTransform> normalize(
    const Skeleton& skeleton, const TriMesh& mesh) {
  if (mesh.vertices.empty()) throw Error(ErrorCode::EmptyMesh, "cannot normalize empty mesh");
  NormalizationTransform t = normalization_from_mesh(mesh.vertices);
  return {apply_transform(skeleton, t), apply_transform(mesh, t), t};
}

inline constexpr int kDefaultResolution = 256;
inline constexpr double kQuantizeSlack = 1e-9;

inline int quantize_axis(double x, int resolution) {
  if (x < -1.0 - kQuantizeSlack || x > 1.0 + kQuantizeSlack)
    throw Error(ErrorCode::OutOfRange,
                "coordinate " + std::to_string(x) + " outside [-1, 1]");
  int bin = int(std::floor((x + 1.0) / 2.0 * resolution));
  if (bin < 0) bin = 0;
  if (bin >= resolution) bin = resolution - 1;
  return bin;
}

inline std::array<int, 3> quantize(const Vec3& p, int resolution = kDefaultResolution) {
  return {quantize_axis(p.x, resolution), quantize_axis(p.y, resolution),
          quantize_axis(p.z, resolution)};
}

inline double dequantize_axis(int bin, int resolution) {
  return -1.0 + (double(bin) + 0.5) * 2.0 / resolution;  // bin center
}

inline Vec3 dequantize(const std::array<int, 3>& bins, int resolution = kDefaultResolution) {
  return {dequantize_axis(bins[0], resolution), dequantize_axis(bins[1], resolution),
          dequantize_axis(bins[2], resolution)};
}

// ---- rigid / similarity transforms (augmentation) ----

struct Rot3 {
  // row-major 3x3
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  Vec3 apply(const Vec3& p) const {
    return {m[0] * p.x + m[1] * p.y + m[2] * p.z,
            m[3] * p.x + m[4] * p.y + m[5] * p.z,
            m[6] * p.x + m[7] * p.y + m[8] * p.z};
  }

  static Rot3 about_z(double angle) {
    double c = std::cos(angle), s = std::sin(angle);
    return {{c, -s, 0, s, c, 0, 0, 0, 1}};
  }

  static Rot3 from_quaternion(double w, double x, double y, double z) {
    double n = std::sqrt(w * w + x * x + y * y + z * z);
    w /= n; x /= n; y /= n; z /= n;
    return {{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
             2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
             2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}};
  }

  static Rot3 random(Rng& rng) {
    // uniform over SO(3) via uniform quaternion
    double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    double a = std::sqrt(1 - u1), b = std::sqrt(u1);
    return from_quaternion(a * std::sin(2 * M_PI * u2), a * std::cos(2 * M_PI * u2),
                           b * std::sin(2 * M_PI * u3), b * std::cos(2 * M_PI * u3));
  }
};

struct Similarity {
  Rot3 rotation;
  double scale = 1.0;
  Vec3 translation{0, 0, 0};

  Vec3 apply(const Vec3& p) const { return rotation.apply(p) * scale + translation; }
};

inline Skeleton apply_similarity(const Skeleton& s, const Similarity& t) {
  Skeleton out = s;
  for (auto& j : out.joints) j.position = t.apply(j.position);
  return out;
}

inline MeshSample apply_similarity(const MeshSample& m, const Similarity& t) {
  MeshSample out = m;
  for (auto& p : out.points) p = t.apply(p);
  for (auto& n : out.normals) n = t.rotation.apply(n);
  return out;
}

}  // namespace rigkit
