#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "rigkit/core.hpp"
#include "rigkit/skeleton.hpp"
#include "rigkit/transforms.hpp"

namespace rigkit {

inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double len2 = ab.squared_norm();
  if (len2 <= 0.0) return distance(p, a);
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + ab * t);
}

// Uniform-grid nearest neighbor over a fixed point set. Queries expand cell
// rings outward until no unvisited cell can beat the best distance found.
class PointGrid {
 public:
  explicit PointGrid(const std::vector<Vec3>& points) : points_(points) {
    box_ = bounding_box(points);
    int n = int(points.size());
    int per_axis = std::clamp(int(std::round(std::cbrt(double(n)))), 1, 64);
    dims_ = {per_axis, per_axis, per_axis};
    Vec3 ext = box_.extent();
    cell_ = {ext.x > 0 ? ext.x / dims_[0] : 1.0, ext.y > 0 ? ext.y / dims_[1] : 1.0,
             ext.z > 0 ? ext.z / dims_[2] : 1.0};
    buckets_.resize(size_t(dims_[0]) * dims_[1] * dims_[2]);
    for (int i = 0; i < n; ++i) buckets_[flat(cell_of(points[size_t(i)]))].push_back(i);
  }

  // (index of nearest point, Euclidean distance)
  std::pair<int, double> nearest(const Vec3& q) const {
    auto c0 = cell_of(q);
    double min_cell = std::min({cell_.x, cell_.y, cell_.z});
    int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= max_ring; ++r) {
      if (best >= 0 && double(r - 1) * min_cell > best_d) break;
      scan_ring(q, c0, r, best, best_d);
    }
    return {best, best_d};
  }

 private:
  std::array<int, 3> cell_of(const Vec3& p) const {
    auto axis = [](double v, double lo, double cell, int dim) {
      int c = int(std::floor((v - lo) / cell));
      return std::clamp(c, 0, dim - 1);
    };
    return {axis(p.x, box_.lo.x, cell_.x, dims_[0]),
            axis(p.y, box_.lo.y, cell_.y, dims_[1]),
            axis(p.z, box_.lo.z, cell_.z, dims_[2])};
  }

  size_t flat(const std::array<int, 3>& c) const {
    return (size_t(c[2]) * dims_[1] + c[1]) * dims_[0] + c[0];
  }

  void scan_ring(const Vec3& q, const std::array<int, 3>& c0, int r, int& best,
                 double& best_d) const {
    for (int dz = -r; dz <= r; ++dz) {
      int z = c0[2] + dz;
      if (z < 0 || z >= dims_[2]) continue;
      for (int dy = -r; dy <= r; ++dy) {
        int y = c0[1] + dy;
        if (y < 0 || y >= dims_[1]) continue;
        bool face_z = std::abs(dz) == r;
        bool face_y = std::abs(dy) == r;
        for (int dx = -r; dx <= r; ++dx) {
          if (!face_z && !face_y && std::abs(dx) != r) continue;  // shell only
          int x = c0[0] + dx;
          if (x < 0 || x >= dims_[0]) continue;
          for (int i : buckets_[flat({x, y, z})]) {
            double d = distance(points_[size_t(i)], q);
            if (d < best_d) {
              best_d = d;
              best = i;
            }
          }
        }
      }
    }
  }

  std::vector<Vec3> points_;
  Aabb box_;
  std::array<int, 3> dims_{1, 1, 1};
  Vec3 cell_{1, 1, 1};
  std::vector<std::vector<int>> buckets_;
};

namespace detail {

inline std::vector<double> nearest_distances(const std::vector<Vec3>& queries,
                                             const std::vector<Vec3>& targets) {
  std::vector<double> out(queries.size());
  if (targets.size() >= 64) {
    PointGrid grid(targets);
    for (size_t i = 0; i < queries.size(); ++i) out[i] = grid.nearest(queries[i]).second;
  } else {
    for (size_t i = 0; i < queries.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& t : targets) best = std::min(best, distance(queries[i], t));
      out[i] = best;
    }
  }
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / double(v.size());
}

inline std::vector<Vec3> joint_positions(const Skeleton& s) {
  std::vector<Vec3> p;
  p.reserve(s.joints.size());
  for (const auto& j : s.joints) p.push_back(j.position);
  return p;
}

inline std::vector<std::pair<Vec3, Vec3>> bone_segments(const Skeleton& s) {
  std::vector<std::pair<Vec3, Vec3>> segs;
  for (auto [pi, ci] : s.bones())
    segs.emplace_back(s.joints[size_t(pi)].position, s.joints[size_t(ci)].position);
  return segs;
}

}  // namespace detail

// Symmetric Chamfer distance between point sets: the equally weighted mean of
// both one-directional mean nearest-neighbor distances.
inline double chamfer_points(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptySkeleton, "empty point set");
  return 0.5 * detail::mean(detail::nearest_distances(a, b)) +
         0.5 * detail::mean(detail::nearest_distances(b, a));
}

inline double cd_j2j(const Skeleton& pred, const Skeleton& gt) {
  return chamfer_points(detail::joint_positions(pred), detail::joint_positions(gt));
}

inline double cd_j2b(const Skeleton& pred, const Skeleton& gt) {
  auto pj = detail::joint_positions(pred);
  auto gj = detail::joint_positions(gt);
  auto ps = detail::bone_segments(pred);
  auto gs = detail::bone_segments(gt);
  if (ps.empty() || gs.empty())
    throw Error(ErrorCode::NoBones, "joint-to-bone needs at least one bone on each side");

  auto dir = [](const std::vector<Vec3>& joints,
                const std::vector<std::pair<Vec3, Vec3>>& segs) {
    std::vector<double> d(joints.size());
    for (size_t i = 0; i < joints.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [a, b] : segs)
        best = std::min(best, point_segment_distance(joints[i], a, b));
      d[i] = best;
    }
    return detail::mean(d);
  };
  return 0.5 * dir(pj, gs) + 0.5 * dir(gj, ps);
}

inline constexpr double kDefaultBoneSampleSpacing = 0.005;  // half of tau_match

// Points along every bone at fixed arc-length spacing, both endpoints
// included; zero-length bones contribute a single point.
inline std::vector<Vec3> sample_bones(const Skeleton& s,
                                      double spacing = kDefaultBoneSampleSpacing) {
  std::vector<Vec3> out;
  for (const auto& [a, b] : detail::bone_segments(s)) {
    double len = distance(a, b);
    if (len <= 0.0) {
      out.push_back(a);
      continue;
    }
    int steps = std::max(1, int(std::ceil(len / spacing)));
    for (int i = 0; i <= steps; ++i) out.push_back(a + (b - a) * (double(i) / steps));
  }
  return out;
}

inline double cd_b2b(const Skeleton& pred, const Skeleton& gt,
                     double spacing = kDefaultBoneSampleSpacing) {
  if (pred.bone_count() == 0 || gt.bone_count() == 0)
    throw Error(ErrorCode::NoBones, "bone-to-bone needs at least one bone on each side");
  return chamfer_points(sample_bones(pred, spacing), sample_bones(gt, spacing));
}

inline constexpr double kDefaultTauMatch = 0.01;

struct JointClassification {
  double precision = 0.0, recall = 0.0, accuracy = 0.0, f1 = 0.0;
};

// Threshold matching with strict inequality: a prediction counts when its
// distance to any ground-truth joint is below tau. Accuracy is the symmetric
// matched fraction (matched pred + matched gt) / (|pred| + |gt|) -- reported
// numbers depend on this choice, so it is fixed here rather than configurable.
inline JointClassification classify_joints(const Skeleton& pred, const Skeleton& gt,
                                           double tau_match = kDefaultTauMatch) {
  auto pj = detail::joint_positions(pred);
  auto gj = detail::joint_positions(gt);
  if (pj.empty() || gj.empty()) throw Error(ErrorCode::EmptySkeleton, "empty skeleton");

  auto count_matched = [tau_match](const std::vector<Vec3>& from,
                                   const std::vector<Vec3>& to) {
    auto d = detail::nearest_distances(from, to);
    return double(std::count_if(d.begin(), d.end(),
                                [tau_match](double x) { return x < tau_match; }));
  };
  double matched_pred = count_matched(pj, gj);
  double matched_gt = count_matched(gj, pj);

  JointClassification r;
  r.precision = matched_pred / double(pj.size());
  r.recall = matched_gt / double(gj.size());
  r.accuracy = (matched_pred + matched_gt) / double(pj.size() + gj.size());
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

struct EvalReport {
  double precision = 0.0, recall = 0.0, accuracy = 0.0, f1 = 0.0;
  double cd_j2j = 0.0, cd_j2b = 0.0, cd_b2b = 0.0;
  double tau_match = kDefaultTauMatch;
  int pred_joints = 0, gt_joints = 0;
};

inline EvalReport evaluate_pair(const Skeleton& pred, const Skeleton& gt,
                                double tau_match = kDefaultTauMatch,
                                double spacing = kDefaultBoneSampleSpacing) {
  EvalReport r;
  r.tau_match = tau_match;
  r.pred_joints = int(pred.joints.size());
  r.gt_joints = int(gt.joints.size());
  auto cls = classify_joints(pred, gt, tau_match);
  r.precision = cls.precision;
  r.recall = cls.recall;
  r.accuracy = cls.accuracy;
  r.f1 = cls.f1;
  r.cd_j2j = cd_j2j(pred, gt);
  r.cd_j2b = cd_j2b(pred, gt);
  r.cd_b2b = cd_b2b(pred, gt, spacing);
  return r;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  return nlohmann::ordered_json{
      {"precision", r.precision}, {"recall", r.recall},   {"accuracy", r.accuracy},
      {"f1", r.f1},               {"cd_j2j", r.cd_j2j},   {"cd_j2b", r.cd_j2b},
      {"cd_b2b", r.cd_b2b},       {"tau_match", r.tau_match},
      {"pred_joints", r.pred_joints}, {"gt_joints", r.gt_joints}};
}

}  // namespace rigkit
