#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigkit/core.hpp"
#include "rigkit/mesh.hpp"
#include "rigkit/serialization.hpp"
#include "rigkit/skeleton.hpp"
#include "rigkit/taxonomy.hpp"
#include "rigkit/transforms.hpp"

namespace rigkit {

// Procedural stand-in corpus. The real corpus behind the reference numbers is
// not public, so tests and the toy pipeline run on rigs synthesized here:
// humanoid-like trees with optional hair/cloth strands, tetrapods with
// auxiliary attachments, and free-form "other" trees, each wrapped in tube
// meshes so curation has a surface to check against.

struct SynthRig {
  Skeleton skeleton;  // model units, labels inline for humanoid/tetrapod
  TriMesh mesh;
};

namespace synth_detail {

struct Builder {
  Skeleton skel;
  Rng& rng;
  const Taxonomy* taxonomy = nullptr;

  explicit Builder(Rng& r) : rng(r) {}

  int add(Vec3 pos, int parent, int fine) {
    Joint j;
    j.id = int(skel.joints.size());
    j.position = pos;
    if (parent >= 0) j.parent = parent;
    if (taxonomy) j.label = taxonomy->label_of(fine);
    skel.joints.push_back(j);
    return j.id;
  }

  Vec3 at(int id) const { return skel.joints[size_t(id)].position; }

  // chain of `n` joints drifting along `dir` with jitter; returns last id
  int chain(int from, Vec3 dir, int n, double step, int fine, double jitter = 0.25) {
    int cur = from;
    Vec3 d = dir.normalized();
    for (int i = 0; i < n; ++i) {
      Vec3 wobble{rng.uniform(-jitter, jitter) * step, rng.uniform(-jitter, jitter) * step,
                  rng.uniform(-jitter, jitter) * step};
      Vec3 next = at(cur) + d * step + wobble;
      cur = add(next, cur, fine);
      d = (d + wobble * 0.5).normalized();
    }
    return cur;
  }
};

inline TriMesh tube_mesh(const Skeleton& s, Rng& rng) {
  TriMesh mesh;
  for (auto [pi, ci] : s.bones()) {
    Vec3 a = s.joints[size_t(pi)].position;
    Vec3 b = s.joints[size_t(ci)].position;
    double radius = std::max(0.02, 0.25 * distance(a, b));
    TriMesh tube = make_tube(a, b, radius, 6);
    int base = int(mesh.vertices.size());
    mesh.vertices.insert(mesh.vertices.end(), tube.vertices.begin(), tube.vertices.end());
    for (auto t : tube.triangles)
      mesh.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  if (mesh.triangles.empty()) {
    // single-joint rig: a small box around it
    mesh = make_box(s.joints[0].position, {0.1, 0.1, 0.1});
  }
  (void)rng;
  return mesh;
}

}  // namespace synth_detail

// Humanoid: torso chain with arms and legs (Main), then hair/cloth/other
// strands until the joint budget is spent. All strands attach to Main joints.
inline SynthRig make_humanoid(Rng& rng, int target_joints) {
  static const Taxonomy tax = humanoid_taxonomy();
  synth_detail::Builder b(rng);
  b.taxonomy = &tax;
  b.skel.category = Category::Humanoid;

  int pelvis = b.add({rng.uniform(-0.05, 0.05), 0.9, rng.uniform(-0.05, 0.05)}, -1,
                     tax.find_by_name("pelvis"));
  int n_spine = rng.range(1, 3);
  int spine = b.chain(pelvis, {0, 1, 0}, n_spine, 0.13, tax.find_by_name("spine"));
  int chest = b.add(b.at(spine) + Vec3{0, 0.14, 0}, spine, tax.find_by_name("chest"));
  int neck = b.add(b.at(chest) + Vec3{0, 0.11, 0}, chest, tax.find_by_name("neck"));
  int head = b.add(b.at(neck) + Vec3{0, 0.13, 0}, neck, tax.find_by_name("head"));

  for (int side = 0; side < 2; ++side) {
    double sx = side == 0 ? -1.0 : 1.0;
    const char* sh = side == 0 ? "shoulder_l" : "shoulder_r";
    const char* ua = side == 0 ? "upper_arm_l" : "upper_arm_r";
    const char* fa = side == 0 ? "forearm_l" : "forearm_r";
    const char* ha = side == 0 ? "hand_l" : "hand_r";
    int shoulder = b.add(b.at(chest) + Vec3{sx * 0.17, 0.05, 0}, chest, tax.find_by_name(sh));
    int upper = b.add(b.at(shoulder) + Vec3{sx * 0.2, -0.08, 0.01}, shoulder, tax.find_by_name(ua));
    int fore = b.add(b.at(upper) + Vec3{sx * 0.2, -0.1, 0.02}, upper, tax.find_by_name(fa));
    b.add(b.at(fore) + Vec3{sx * 0.15, -0.08, 0.01}, fore, tax.find_by_name(ha));

    const char* th = side == 0 ? "thigh_l" : "thigh_r";
    const char* ca = side == 0 ? "calf_l" : "calf_r";
    const char* ft = side == 0 ? "foot_l" : "foot_r";
    const char* to = side == 0 ? "toes_l" : "toes_r";
    int thigh = b.add(b.at(pelvis) + Vec3{sx * 0.1, -0.35, 0.01}, pelvis, tax.find_by_name(th));
    int calf = b.add(b.at(thigh) + Vec3{sx * 0.02, -0.35, -0.01}, thigh, tax.find_by_name(ca));
    int foot = b.add(b.at(calf) + Vec3{0, -0.12, 0.1}, calf, tax.find_by_name(ft));
    if (rng.uniform() < 0.5) b.add(b.at(foot) + Vec3{0, -0.02, 0.08}, foot, tax.find_by_name(to));
  }

  // auxiliary strands until the budget is spent
  static const char* hair_names[] = {"hair_front", "hair_back", "ponytail"};
  static const char* cloth_names[] = {"skirt", "cape", "sleeve"};
  static const char* other_names[] = {"backpack", "accessory"};
  while (int(b.skel.joints.size()) < target_joints) {
    int remaining = target_joints - int(b.skel.joints.size());
    int len = std::min(remaining, rng.range(2, 6));
    switch (rng.below(4)) {
      case 0: {  // hair from the head, upward/backward fan
        Vec3 dir{rng.uniform(-0.6, 0.6), rng.uniform(0.1, 0.9), rng.uniform(-0.9, -0.1)};
        b.chain(head, dir, len, 0.07, tax.find_by_name(hair_names[rng.below(3)]));
        break;
      }
      case 1: {  // skirt strand from the pelvis, downward cone
        Vec3 dir{rng.uniform(-0.7, 0.7), -1.0, rng.uniform(-0.7, 0.7)};
        b.chain(pelvis, dir, len, 0.09, tax.find_by_name("skirt"));
        break;
      }
      case 2: {  // cape or sleeve from the chest
        Vec3 dir{rng.uniform(-0.5, 0.5), rng.uniform(-0.8, -0.2), rng.uniform(-1.0, -0.4)};
        b.chain(chest, dir, len, 0.08, tax.find_by_name(cloth_names[rng.below(3)]));
        break;
      }
      default: {  // accessory strand from the chest, outward
        Vec3 dir{rng.uniform(-1, 1), rng.uniform(-0.3, 0.5), rng.uniform(-1.0, -0.5)};
        b.chain(chest, dir, len, 0.08, tax.find_by_name(other_names[rng.below(2)]));
        break;
      }
    }
  }

  SynthRig rig;
  rig.skeleton = std::move(b.skel);
  rig.mesh = synth_detail::tube_mesh(rig.skeleton, rng);
  return rig;
}

inline SynthRig make_tetrapod(Rng& rng, int target_joints) {
  static const Taxonomy tax = tetrapod_taxonomy();
  synth_detail::Builder b(rng);
  b.taxonomy = &tax;
  b.skel.category = Category::Tetrapod;

  int pelvis = b.add({0, 0.6, rng.uniform(-0.45, -0.35)}, -1, tax.find_by_name("pelvis"));
  int s1 = b.add(b.at(pelvis) + Vec3{0, 0.02, 0.25}, pelvis, tax.find_by_name("spine_back"));
  int s2 = b.add(b.at(s1) + Vec3{0, 0.02, 0.25}, s1, tax.find_by_name("spine_front"));
  int chest = b.add(b.at(s2) + Vec3{0, 0.0, 0.22}, s2, tax.find_by_name("chest"));
  int neck = b.add(b.at(chest) + Vec3{0, 0.12, 0.15}, chest, tax.find_by_name("neck"));
  int head = b.add(b.at(neck) + Vec3{0, 0.1, 0.14}, neck, tax.find_by_name("head"));
  b.add(b.at(head) + Vec3{0, -0.08, 0.1}, head, tax.find_by_name("jaw"));
  int tail = b.add(b.at(pelvis) + Vec3{0, 0.05, -0.2}, pelvis, tax.find_by_name("tail_base"));
  b.chain(tail, {0, -0.1, -1}, rng.range(1, 4), 0.12, tax.find_by_name("tail_tip"));

  for (int side = 0; side < 2; ++side) {
    double sx = side == 0 ? -1.0 : 1.0;
    auto leg = [&](int hip, const char* upper, const char* lower, const char* foot) {
      int u = b.add(b.at(hip) + Vec3{sx * 0.12, -0.22, 0.02}, hip, tax.find_by_name(upper));
      int l = b.add(b.at(u) + Vec3{sx * 0.01, -0.22, -0.02}, u, tax.find_by_name(lower));
      b.add(b.at(l) + Vec3{0, -0.13, 0.05}, l, tax.find_by_name(foot));
    };
    leg(chest, side == 0 ? "front_upper_leg_l" : "front_upper_leg_r",
        side == 0 ? "front_lower_leg_l" : "front_lower_leg_r",
        side == 0 ? "front_foot_l" : "front_foot_r");
    leg(pelvis, side == 0 ? "hind_upper_leg_l" : "hind_upper_leg_r",
        side == 0 ? "hind_lower_leg_l" : "hind_lower_leg_r",
        side == 0 ? "hind_foot_l" : "hind_foot_r");
  }

  while (int(b.skel.joints.size()) < target_joints) {
    int remaining = target_joints - int(b.skel.joints.size());
    int len = std::min(remaining, rng.range(1, 5));
    switch (rng.below(5)) {
      case 0: {
        double sx = rng.uniform() < 0.5 ? -1.0 : 1.0;
        b.chain(head, {sx, 0.8, -0.2}, len, 0.06,
                tax.find_by_name(sx < 0 ? "ear_l" : "ear_r"));
        break;
      }
      case 1: {
        double sx = rng.uniform() < 0.5 ? -1.0 : 1.0;
        b.chain(head, {sx * 0.4, 1, 0.3}, len, 0.07,
                tax.find_by_name(sx < 0 ? "horn_l" : "horn_r"));
        break;
      }
      case 2: {
        double sx = rng.uniform() < 0.5 ? -1.0 : 1.0;
        b.chain(chest, {sx, 0.5, -0.1}, len, 0.1,
                tax.find_by_name(sx < 0 ? "wing_l" : "wing_r"));
        break;
      }
      case 3:
        b.chain(s2, {0, 1, rng.uniform(-0.3, 0.3)}, len, 0.06,
                tax.find_by_name(rng.uniform() < 0.5 ? "fin_dorsal" : "mane"));
        break;
      default:
        b.chain(head, {rng.uniform(-0.4, 0.4), -0.4, 1}, len, 0.08,
                tax.find_by_name(rng.uniform() < 0.5 ? "rein" : "fin_tail"));
        break;
    }
  }

  SynthRig rig;
  rig.skeleton = std::move(b.skel);
  rig.mesh = synth_detail::tube_mesh(rig.skeleton, rng);
  return rig;
}

// Free-form tree, unlabeled, category "other".
inline SynthRig make_other(Rng& rng, int target_joints) {
  synth_detail::Builder b(rng);
  b.skel.category = Category::Other;
  b.add({0, 0, 0}, -1, 0);
  while (int(b.skel.joints.size()) < target_joints) {
    int parent = int(rng.below(b.skel.joints.size()));
    Vec3 dir = rng.unit_vector();
    double step = rng.uniform(0.08, 0.2);
    b.add(b.at(parent) + dir * step, parent, 0);
  }
  SynthRig rig;
  rig.skeleton = std::move(b.skel);
  rig.mesh = synth_detail::tube_mesh(rig.skeleton, rng);
  return rig;
}

inline SynthRig make_rig(Category category, int target_joints, Rng& rng) {
  switch (category) {
    case Category::Humanoid: return make_humanoid(rng, target_joints);
    case Category::Tetrapod: return make_tetrapod(rng, target_joints);
    default: return make_other(rng, target_joints);
  }
}

enum class PlantedDefect { None, Cycle, Forest, TooFewJoints, Drift };

inline const char* to_string(PlantedDefect d) {
  switch (d) {
    case PlantedDefect::None: return "none";
    case PlantedDefect::Cycle: return "cycle";
    case PlantedDefect::Forest: return "forest";
    case PlantedDefect::TooFewJoints: return "too_few_joints";
    case PlantedDefect::Drift: return "drift";
  }
  return "?";
}

inline void plant_defect(SynthRig& rig, PlantedDefect defect, Rng& rng) {
  auto& joints = rig.skeleton.joints;
  switch (defect) {
    case PlantedDefect::None:
      break;
    case PlantedDefect::Cycle: {
      // point the root's parent at a random other joint
      int other = 1 + int(rng.below(joints.size() - 1));
      joints[size_t(rig.skeleton.root)].parent = joints[size_t(other)].id;
      break;
    }
    case PlantedDefect::Forest: {
      int victim = 1 + int(rng.below(joints.size() - 1));
      joints[size_t(victim)].parent.reset();
      break;
    }
    case PlantedDefect::TooFewJoints: {
      // keep only the root chain's first four joints
      Skeleton small;
      small.category = rig.skeleton.category;
      for (int i = 0; i < 4 && i < int(joints.size()); ++i) {
        Joint j = joints[size_t(i)];
        j.id = i;
        j.parent = i > 0 ? std::optional<int>(i - 1) : std::nullopt;
        small.joints.push_back(j);
      }
      small.root = 0;
      rig.skeleton = std::move(small);
      rig.mesh = synth_detail::tube_mesh(rig.skeleton, rng);
      break;
    }
    case PlantedDefect::Drift: {
      auto leaves = rig.skeleton.leaf_indices();
      int leaf = leaves[rng.below(leaves.size())];
      std::vector<Vec3> pts = rig.mesh.vertices;
      double diag = bounding_box(pts).diagonal();
      joints[size_t(leaf)].position += Vec3{diag, diag, diag};
      break;
    }
  }
}

struct SynthSpec {
  int count = 100;
  double humanoid_fraction = 0.5;
  double tetrapod_fraction = 0.25;  // remainder is "other"
  int min_joints = 8;
  int max_joints = 60;
  double defect_rate = 0.0;
  uint64_t seed = 0;
};

struct SynthSummary {
  std::vector<std::string> ids;
  std::map<std::string, PlantedDefect> defects;  // only non-None entries
};

// Writes `<id>.skel.json`, `<id>.obj`, `<id>.labels.json` per rig plus a
// `truth.json` manifest of planted defects. Byte-identical for a fixed spec.
inline SynthSummary synth_corpus(const std::string& dir, const SynthSpec& spec) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Rng rng(spec.seed);
  SynthSummary summary;

  PlantedDefect defect_cycle[] = {PlantedDefect::Cycle, PlantedDefect::Forest,
                                  PlantedDefect::TooFewJoints, PlantedDefect::Drift};
  int defect_cursor = 0;

  for (int i = 0; i < spec.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "rig_%04d", i);
    std::string id = name;

    double u = rng.uniform();
    Category cat = u < spec.humanoid_fraction
                       ? Category::Humanoid
                       : (u < spec.humanoid_fraction + spec.tetrapod_fraction
                              ? Category::Tetrapod
                              : Category::Other);
    int target = rng.range(spec.min_joints, spec.max_joints);
    SynthRig rig = make_rig(cat, target, rng);

    PlantedDefect defect = PlantedDefect::None;
    if (rng.uniform() < spec.defect_rate) {
      defect = defect_cycle[defect_cursor % 4];
      ++defect_cursor;
      plant_defect(rig, defect, rng);
      summary.defects[id] = defect;
    }

    write_skeleton_file((fs::path(dir) / (id + ".skel.json")).string(), rig.skeleton);
    write_obj_file((fs::path(dir) / (id + ".obj")).string(), rig.mesh);
    if (rig.skeleton.category != Category::Other) {
      std::vector<std::pair<int, int>> ann;
      for (const auto& j : rig.skeleton.joints)
        if (j.label) ann.emplace_back(j.id, j.label->fine);
      write_annotation_file((fs::path(dir) / (id + ".labels.json")).string(), ann);
    }
    summary.ids.push_back(id);
  }

  nlohmann::ordered_json truth = nlohmann::ordered_json::object();
  for (const auto& [id, defect] : summary.defects) truth[id] = to_string(defect);
  std::ofstream f((fs::path(dir) / "truth.json").string());
  f << truth.dump(2) << '\n';
  return summary;
}

}  // namespace rigkit
