#pragma once

#include <algorithm>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rigkit/core.hpp"

namespace rigkit {

enum class CoarseLabel { Main, Hair, Cloth, Other, Auxiliary };
enum class Category { Humanoid, Tetrapod, Other };

inline const char* to_string(CoarseLabel c) {
  switch (c) {
    case CoarseLabel::Main: return "Main";
    case CoarseLabel::Hair: return "Hair";
    case CoarseLabel::Cloth: return "Cloth";
    case CoarseLabel::Other: return "Other";
    case CoarseLabel::Auxiliary: return "Auxiliary";
  }
  return "?";
}

inline const char* to_string(Category c) {
  switch (c) {
    case Category::Humanoid: return "humanoid";
    case Category::Tetrapod: return "tetrapod";
    case Category::Other: return "other";
  }
  return "?";
}

struct SemanticLabel {
  CoarseLabel coarse = CoarseLabel::Main;
  int fine = 0;
  bool operator==(const SemanticLabel&) const = default;
};

struct Joint {
  int id = 0;
  Vec3 position;
  std::optional<int> parent;  // referenced by id, not index
  std::optional<SemanticLabel> label;
};

// Tree of joints. Bones are derived: one per non-root joint, (parent, child).
// `root` is an index into `joints`, stored explicitly so that multi-root
// inputs stay representable for validation.
struct Skeleton {
  std::vector<Joint> joints;
  int root = 0;
  Category category = Category::Other;

  size_t joint_count() const { return joints.size(); }
  size_t bone_count() const {
    size_t b = 0;
    for (const auto& j : joints)
      if (j.parent.has_value()) ++b;
    return b;
  }

  std::unordered_map<int, int> id_to_index() const {
    std::unordered_map<int, int> m;
    m.reserve(joints.size());
    for (size_t i = 0; i < joints.size(); ++i) m.emplace(joints[i].id, int(i));
    return m;
  }

  // (parent index, child index) pairs; skips dangling parents.
  std::vector<std::pair<int, int>> bones() const {
    auto idx = id_to_index();
    std::vector<std::pair<int, int>> out;
    out.reserve(joints.size());
    for (size_t i = 0; i < joints.size(); ++i) {
      if (!joints[i].parent) continue;
      auto it = idx.find(*joints[i].parent);
      if (it != idx.end()) out.emplace_back(it->second, int(i));
    }
    return out;
  }

  // children[i] = indices of joints whose parent is joint i, in storage order.
  std::vector<std::vector<int>> children() const {
    auto idx = id_to_index();
    std::vector<std::vector<int>> ch(joints.size());
    for (size_t i = 0; i < joints.size(); ++i) {
      if (!joints[i].parent) continue;
      auto it = idx.find(*joints[i].parent);
      if (it != idx.end() && it->second != int(i)) ch[it->second].push_back(int(i));
    }
    return ch;
  }

  std::vector<int> leaf_indices() const {
    std::vector<char> has_child(joints.size(), 0);
    auto idx = id_to_index();
    for (size_t i = 0; i < joints.size(); ++i) {
      if (!joints[i].parent) continue;
      auto it = idx.find(*joints[i].parent);
      if (it != idx.end() && it->second != int(i)) has_child[it->second] = 1;
    }
    std::vector<int> leaves;
    for (size_t i = 0; i < joints.size(); ++i)
      if (!has_child[i]) leaves.push_back(int(i));
    return leaves;
  }
};

enum class TreeViolation { Cycle, Forest, MultiRoot, DanglingParent, SelfParent };

inline const char* to_string(TreeViolation v) {
  switch (v) {
    case TreeViolation::Cycle: return "Cycle";
    case TreeViolation::Forest: return "Forest";
    case TreeViolation::MultiRoot: return "MultiRoot";
    case TreeViolation::DanglingParent: return "DanglingParent";
    case TreeViolation::SelfParent: return "SelfParent";
  }
  return "?";
}

struct ValidationResult {
  std::vector<TreeViolation> violations;  // sorted, unique
  std::vector<int> offending_ids;        // joints involved in any violation

  bool ok() const { return violations.empty(); }
  bool has(TreeViolation v) const {
    return std::find(violations.begin(), violations.end(), v) != violations.end();
  }
};

// Exhaustive structural check of the parent relation. Violations are data:
// every applicable reason code is reported, not just the first.
inline ValidationResult validate_tree(const Skeleton& s) {
  ValidationResult r;
  auto add = [&r](TreeViolation v) {
    if (!r.has(v)) r.violations.push_back(v);
  };
  auto offend = [&r](int id) {
    if (std::find(r.offending_ids.begin(), r.offending_ids.end(), id) ==
        r.offending_ids.end())
      r.offending_ids.push_back(id);
  };

  const size_t k = s.joints.size();
  auto idx = s.id_to_index();

  // parent edges resolved to indices; -1 none, -2 dangling, -3 self
  std::vector<int> parent(k, -1);
  size_t parentless = 0;
  for (size_t i = 0; i < k; ++i) {
    const auto& j = s.joints[i];
    if (!j.parent) {
      ++parentless;
      continue;
    }
    if (*j.parent == j.id) {
      parent[i] = -3;
      add(TreeViolation::SelfParent);
      offend(j.id);
      continue;
    }
    auto it = idx.find(*j.parent);
    if (it == idx.end()) {
      parent[i] = -2;
      add(TreeViolation::DanglingParent);
      offend(j.id);
    } else {
      parent[i] = it->second;
    }
  }

  if (parentless > 1) add(TreeViolation::MultiRoot);
  // declared root must be the parentless joint
  if (s.root < 0 || size_t(s.root) >= k ||
      (parentless >= 1 && s.joints[s.root].parent.has_value())) {
    add(TreeViolation::MultiRoot);
  }

  // cycle detection by coloring the parent-pointer walk
  std::vector<uint8_t> color(k, 0);  // 0 white, 1 on current walk, 2 done
  for (size_t start = 0; start < k; ++start) {
    if (color[start]) continue;
    std::vector<int> path;
    int cur = int(start);
    while (cur >= 0 && color[cur] == 0) {
      color[cur] = 1;
      path.push_back(cur);
      cur = parent[cur];
    }
    if (cur >= 0 && color[cur] == 1) {
      add(TreeViolation::Cycle);
      offend(s.joints[cur].id);
    }
    for (int p : path) color[p] = 2;
  }

  // connectivity over undirected valid parent edges
  if (k > 0) {
    std::vector<std::vector<int>> adj(k);
    for (size_t i = 0; i < k; ++i) {
      if (parent[i] >= 0) {
        adj[i].push_back(parent[i]);
        adj[parent[i]].push_back(int(i));
      }
    }
    std::vector<char> seen(k, 0);
    size_t components = 0;
    for (size_t i = 0; i < k; ++i) {
      if (seen[i]) continue;
      ++components;
      std::vector<int> stack{int(i)};
      seen[i] = 1;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[v])
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
      }
    }
    if (components > 1) add(TreeViolation::Forest);
  }

  std::sort(r.violations.begin(), r.violations.end());
  return r;
}

}  // namespace rigkit
