#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigkit/core.hpp"
#include "rigkit/mesh.hpp"
#include "rigkit/serialization.hpp"
#include "rigkit/skeleton.hpp"
#include "rigkit/transforms.hpp"

namespace rigkit {

struct UnionFind {
  std::vector<int> parent, rank_;

  explicit UnionFind(int n) : parent(size_t(n)), rank_(size_t(n), 0) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[size_t(x)] != x) {
      parent[size_t(x)] = parent[size_t(parent[size_t(x)])];
      x = parent[size_t(x)];
    }
    return x;
  }
  // returns false when x and y were already connected
  bool unite(int x, int y) {
    int rx = find(x), ry = find(y);
    if (rx == ry) return false;
    if (rank_[size_t(rx)] < rank_[size_t(ry)]) std::swap(rx, ry);
    parent[size_t(ry)] = rx;
    if (rank_[size_t(rx)] == rank_[size_t(ry)]) ++rank_[size_t(rx)];
    return true;
  }
};

// Vertex positions grouped by triangle-connected component (vertex sharing).
inline std::vector<std::vector<Vec3>> mesh_components(const TriMesh& mesh) {
  if (mesh.triangles.empty()) throw Error(ErrorCode::EmptyMesh, "mesh has no triangles");
  UnionFind uf(int(mesh.vertices.size()));
  std::vector<char> used(mesh.vertices.size(), 0);
  for (const auto& t : mesh.triangles) {
    uf.unite(t[0], t[1]);
    uf.unite(t[0], t[2]);
    used[size_t(t[0])] = used[size_t(t[1])] = used[size_t(t[2])] = 1;
  }
  std::map<int, std::vector<Vec3>> by_root;
  for (size_t v = 0; v < mesh.vertices.size(); ++v)
    if (used[v]) by_root[uf.find(int(v))].push_back(mesh.vertices[v]);
  std::vector<std::vector<Vec3>> out;
  out.reserve(by_root.size());
  for (auto& [root, pts] : by_root) out.push_back(std::move(pts));
  return out;
}

struct ContainmentResult {
  bool pass = true;
  std::vector<int> offending_joint_ids;  // leaves beyond the margin
};

inline constexpr double kDefaultDriftMargin = 0.05;

// Every leaf joint must lie within margin * bbox-diagonal of its nearest mesh
// component; component decomposition makes "nearest component" well defined,
// and the nearest point of the nearest component is the global nearest point.
inline ContainmentResult check_terminal_containment(
    const Skeleton& skeleton, const std::vector<std::vector<Vec3>>& components,
    double margin = kDefaultDriftMargin) {
  std::vector<Vec3> all_points;
  for (const auto& c : components) all_points.insert(all_points.end(), c.begin(), c.end());
  if (all_points.empty()) throw Error(ErrorCode::EmptyMesh, "no mesh points");

  double limit = margin * bounding_box(all_points).diagonal();
  ContainmentResult result;
  for (int leaf : skeleton.leaf_indices()) {
    const Vec3& p = skeleton.joints[size_t(leaf)].position;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : all_points) best = std::min(best, distance(p, q));
    if (best > limit) result.offending_joint_ids.push_back(skeleton.joints[size_t(leaf)].id);
  }
  result.pass = result.offending_joint_ids.empty();
  return result;
}

enum class RejectReason { ParseError, NotTree, TooFewJoints, Drift };

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::ParseError: return "ParseError";
    case RejectReason::NotTree: return "NotTree";
    case RejectReason::TooFewJoints: return "TooFewJoints";
    case RejectReason::Drift: return "Drift";
  }
  return "?";
}

struct CurationRules {
  int min_joints = 5;
  double margin = kDefaultDriftMargin;
};

struct Rejection {
  std::string id;
  RejectReason primary;                 // first failing rule in the fixed order
  std::vector<RejectReason> all_reasons;
};

struct AcceptedEntry {
  std::string id;
  Category category = Category::Other;
  int bones = 0;
};

struct CurationReport {
  int total = 0;
  std::vector<AcceptedEntry> accepted;
  std::vector<Rejection> rejections;
  std::map<int, int> histogram;  // bone count binned by 50 -> file count
  std::vector<std::string> warnings;

  int accepted_count() const { return int(accepted.size()); }
};

inline nlohmann::ordered_json curation_report_to_json(const CurationReport& r) {
  nlohmann::ordered_json out;
  out["total"] = r.total;
  out["accepted_count"] = r.accepted.size();
  nlohmann::ordered_json acc = nlohmann::ordered_json::array();
  for (const auto& a : r.accepted)
    acc.push_back({{"id", a.id}, {"category", to_string(a.category)}, {"bones", a.bones}});
  out["accepted"] = acc;
  nlohmann::ordered_json rej = nlohmann::ordered_json::array();
  for (const auto& x : r.rejections) {
    nlohmann::ordered_json reasons = nlohmann::ordered_json::array();
    for (auto reason : x.all_reasons) reasons.push_back(to_string(reason));
    rej.push_back({{"id", x.id}, {"reason", to_string(x.primary)}, {"all_reasons", reasons}});
  }
  out["rejections"] = rej;
  nlohmann::ordered_json hist = nlohmann::ordered_json::array();
  for (const auto& [lo, count] : r.histogram)
    hist.push_back({{"lo", lo}, {"hi", lo + 50}, {"count", count}});
  out["histogram"] = hist;
  out["warnings"] = r.warnings;
  return out;
}

// Checks one skeleton (+ optional mesh) against the filtering rules. Failures
// are reported in the fixed order ParseError, NotTree, TooFewJoints, Drift.
inline std::vector<RejectReason> check_rig(const Skeleton& skeleton, const TriMesh* mesh,
                                           const CurationRules& rules) {
  std::vector<RejectReason> reasons;
  if (!validate_tree(skeleton).ok()) reasons.push_back(RejectReason::NotTree);
  if (int(skeleton.joints.size()) < rules.min_joints)
    reasons.push_back(RejectReason::TooFewJoints);
  if (mesh && !mesh->triangles.empty()) {
    if (!check_terminal_containment(skeleton, mesh_components(*mesh), rules.margin).pass)
      reasons.push_back(RejectReason::Drift);
  }
  return reasons;
}

// Scan a directory of `<id>.skel.json` (+ optional `<id>.obj`) files. Per-file
// failures are recorded, never abort the batch; output order is by file id, so
// the report does not depend on directory enumeration order.
inline CurationReport filter_corpus(const std::string& dir, const CurationRules& rules) {
  namespace fs = std::filesystem;
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".skel.json";
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      ids.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(ids.begin(), ids.end());

  CurationReport report;
  report.total = int(ids.size());
  for (const auto& id : ids) {
    const std::string skel_path = (fs::path(dir) / (id + ".skel.json")).string();
    const std::string mesh_path = (fs::path(dir) / (id + ".obj")).string();
    try {
      Skeleton skeleton = read_skeleton_file(skel_path);
      std::optional<TriMesh> mesh;
      if (fs::exists(mesh_path)) mesh = read_obj_file(mesh_path);
      if (!mesh) report.warnings.push_back(id + ": no mesh, drift check skipped");
      auto reasons = check_rig(skeleton, mesh ? &*mesh : nullptr, rules);
      if (reasons.empty()) {
        int bones = int(skeleton.bone_count());
        report.accepted.push_back({id, skeleton.category, bones});
        report.histogram[(bones / 50) * 50] += 1;
      } else {
        report.rejections.push_back({id, reasons.front(), reasons});
      }
    } catch (const Error&) {
      report.rejections.push_back(
          {id, RejectReason::ParseError, {RejectReason::ParseError}});
    }
  }
  return report;
}

// ---- stratified splitting ----

struct Stratum {
  Category category = Category::Other;
  int lo = 0;                 // inclusive bone count
  std::optional<int> hi;      // exclusive; absent = unbounded
};

struct SplitSpec {
  std::vector<Stratum> strata;
  double test_fraction = 0.018;  // mirrors the held-out share of the full corpus
  uint64_t seed = 0;
};

inline SplitSpec default_split_spec(uint64_t seed) {
  SplitSpec spec;
  spec.seed = seed;
  for (Category c : {Category::Humanoid, Category::Tetrapod, Category::Other}) {
    spec.strata.push_back({c, 0, 50});
    spec.strata.push_back({c, 50, 150});
    spec.strata.push_back({c, 150, std::nullopt});
  }
  return spec;
}

inline void validate_split_spec(const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
    throw Error(ErrorCode::OutOfRange, "test_fraction must lie in (0, 1)");
  for (Category c : {Category::Humanoid, Category::Tetrapod, Category::Other}) {
    std::vector<Stratum> in_cat;
    for (const auto& s : spec.strata)
      if (s.category == c) in_cat.push_back(s);
    if (in_cat.empty()) continue;
    std::sort(in_cat.begin(), in_cat.end(),
              [](const Stratum& a, const Stratum& b) { return a.lo < b.lo; });
    for (size_t i = 0; i + 1 < in_cat.size(); ++i) {
      if (!in_cat[i].hi || *in_cat[i].hi != in_cat[i + 1].lo)
        throw Error(ErrorCode::OutOfRange,
                    std::string("strata for ") + to_string(c) + " overlap or leave gaps");
    }
    if (in_cat.back().hi)
      throw Error(ErrorCode::OutOfRange,
                  std::string("last stratum for ") + to_string(c) + " must be unbounded");
    if (in_cat.front().lo > 4)
      throw Error(ErrorCode::OutOfRange,
                  std::string("strata for ") + to_string(c) +
                      " must start at or below the minimum bone count");
  }
}

struct SplitResult {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::vector<std::string> warnings;  // strata contributing nothing to test
};

// Disjoint, exhaustive, per-stratum fraction honored to within one sample,
// deterministic under the spec seed regardless of input order.
inline SplitResult stratified_split(const std::vector<AcceptedEntry>& accepted,
                                    const SplitSpec& spec) {
  validate_split_spec(spec);

  auto stratum_of = [&spec](const AcceptedEntry& e) -> int {
    for (size_t i = 0; i < spec.strata.size(); ++i) {
      const auto& s = spec.strata[i];
      if (s.category == e.category && e.bones >= s.lo && (!s.hi || e.bones < *s.hi))
        return int(i);
    }
    throw Error(ErrorCode::OutOfRange,
                "no stratum covers " + e.id + " (" + to_string(e.category) + ", " +
                    std::to_string(e.bones) + " bones)");
  };

  std::vector<std::vector<std::string>> members(spec.strata.size());
  for (const auto& e : accepted) members[size_t(stratum_of(e))].push_back(e.id);

  SplitResult result;
  for (size_t si = 0; si < spec.strata.size(); ++si) {
    auto& ids = members[si];
    std::sort(ids.begin(), ids.end());
    Rng rng(spec.seed * 1000003ull + si);
    rng.shuffle(ids);
    size_t n_test = size_t(std::llround(spec.test_fraction * double(ids.size())));
    if (n_test == 0) {
      const auto& s = spec.strata[si];
      result.warnings.push_back(std::string("stratum (") + to_string(s.category) + ", " +
                                std::to_string(s.lo) + "..) contributes nothing to test");
    }
    for (size_t i = 0; i < ids.size(); ++i)
      (i < n_test ? result.test_ids : result.train_ids).push_back(ids[i]);
  }
  std::sort(result.train_ids.begin(), result.train_ids.end());
  std::sort(result.test_ids.begin(), result.test_ids.end());
  return result;
}

inline nlohmann::ordered_json split_spec_to_json(const SplitSpec& spec) {
  nlohmann::ordered_json strata = nlohmann::ordered_json::array();
  for (const auto& s : spec.strata) {
    nlohmann::ordered_json js;
    js["category"] = to_string(s.category);
    js["lo"] = s.lo;
    if (s.hi)
      js["hi"] = *s.hi;
    else
      js["hi"] = nullptr;
    strata.push_back(js);
  }
  return nlohmann::ordered_json{
      {"test_fraction", spec.test_fraction}, {"seed", spec.seed}, {"strata", strata}};
}

inline SplitSpec split_spec_from_json(const nlohmann::json& j) {
  SplitSpec spec;
  try {
    spec.test_fraction = j.at("test_fraction").get<double>();
    spec.seed = j.value("seed", uint64_t(0));
    for (const auto& js : j.at("strata")) {
      Stratum s;
      s.category = category_from_string(js.at("category").get<std::string>());
      s.lo = js.at("lo").get<int>();
      if (js.contains("hi") && !js.at("hi").is_null()) s.hi = js.at("hi").get<int>();
      spec.strata.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("split spec: ") + e.what());
  }
  return spec;
}

// ---- augmentation ----

struct AugmentConfig {
  double scale_lo = 1.0, scale_hi = 1.0;
  double max_translation = 0.0;  // per-axis uniform in [-t, t]
  bool random_rotation = false;
};

// One similarity transform applied to skeleton and mesh alike, then
// re-normalized into the canonical frame. Topology and labels never change.
inline std::pair<Skeleton, MeshSample> augment(const Skeleton& skeleton,
                                               const MeshSample& mesh,
                                               const AugmentConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  Similarity t;
  t.scale = cfg.scale_lo == cfg.scale_hi ? cfg.scale_lo
                                         : rng.uniform(cfg.scale_lo, cfg.scale_hi);
  if (cfg.max_translation > 0.0)
    t.translation = {rng.uniform(-cfg.max_translation, cfg.max_translation),
                     rng.uniform(-cfg.max_translation, cfg.max_translation),
                     rng.uniform(-cfg.max_translation, cfg.max_translation)};
  if (cfg.random_rotation) t.rotation = Rot3::random(rng);

  Skeleton sk = apply_similarity(skeleton, t);
  MeshSample ms = apply_similarity(mesh, t);
  auto [sk_n, ms_n, transform] = normalize(sk, ms);
  (void)transform;
  return {std::move(sk_n), std::move(ms_n)};
}

}  // namespace rigkit
