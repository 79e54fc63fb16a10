#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rigkit/core.hpp"
#include "rigkit/skeleton.hpp"
#include "rigkit/taxonomy.hpp"

namespace rigkit {

// A maximal in-group subtree. `entry` is the one member whose parent lies
// outside the group (or is absent); every other member descends from it
// through in-group edges.
struct GroupFragment {
  int entry = -1;
  std::vector<int> members;  // joint indices, entry included
};

struct Group {
  CoarseLabel coarse = CoarseLabel::Main;
  std::vector<int> members;  // joint indices
  int root = -1;             // joint index; the traversal starts here
};

struct GroupPlan {
  std::vector<Group> groups;  // fixed category order, empty groups omitted
  Category category = Category::Other;

  const Group* find(CoarseLabel c) const {
    for (const auto& g : groups)
      if (g.coarse == c) return &g;
    return nullptr;
  }
};

// Attach labels from an annotation (joint id -> fine id). The annotation must
// cover every joint exactly once; fine ids are checked against the taxonomy.
inline Skeleton ingest_labels(const Skeleton& skeleton,
                              const std::vector<std::pair<int, int>>& annotations,
                              const Taxonomy& taxonomy) {
  Skeleton out = skeleton;
  auto idx = out.id_to_index();
  std::vector<char> covered(out.joints.size(), 0);
  for (const auto& [joint_id, fine] : annotations) {
    auto it = idx.find(joint_id);
    if (it == idx.end())
      throw Error(ErrorCode::ParseError,
                  "annotation references unknown joint id " + std::to_string(joint_id));
    if (covered[it->second])
      throw Error(ErrorCode::DuplicateLabel,
                  "joint " + std::to_string(joint_id) + " labeled twice");
    if (!taxonomy.valid_fine(fine))
      throw Error(ErrorCode::UnknownFineId,
                  "fine id " + std::to_string(fine) + " not in taxonomy (size " +
                      std::to_string(taxonomy.size()) + ")");
    covered[it->second] = 1;
    out.joints[it->second].label = taxonomy.label_of(fine);
  }
  for (size_t i = 0; i < out.joints.size(); ++i)
    if (!covered[i])
      throw Error(ErrorCode::MissingLabel,
                  "joint " + std::to_string(out.joints[i].id) + " has no annotation");
  return out;
}

// Decompose a member set into its in-group subtrees. Fragment entries are
// returned in ascending (z, y, x) of the entry position (ties by joint id),
// except that `first_entry`, when given, is moved to the front.
inline std::vector<GroupFragment> group_fragments(const Skeleton& s,
                                                  const std::vector<int>& members,
                                                  int first_entry = -1) {
  std::unordered_set<int> in_group(members.begin(), members.end());
  auto idx = s.id_to_index();

  auto parent_index = [&](int i) -> int {
    const auto& j = s.joints[size_t(i)];
    if (!j.parent) return -1;
    auto it = idx.find(*j.parent);
    if (it == idx.end() || it->second == i) return -1;
    return it->second;
  };

  std::vector<int> entries;
  for (int i : members) {
    int p = parent_index(i);
    if (p < 0 || !in_group.count(p)) entries.push_back(i);
  }
  std::sort(entries.begin(), entries.end(), [&](int a, int b) {
    const Vec3& pa = s.joints[size_t(a)].position;
    const Vec3& pb = s.joints[size_t(b)].position;
    if (!(pa == pb)) return zyx_less(pa, pb);
    return s.joints[size_t(a)].id < s.joints[size_t(b)].id;
  });
  if (first_entry >= 0) {
    auto it = std::find(entries.begin(), entries.end(), first_entry);
    if (it != entries.end()) std::rotate(entries.begin(), it, it + 1);
  }

  // collect each entry's subtree through in-group children
  auto children = s.children();
  std::vector<GroupFragment> fragments;
  for (int e : entries) {
    GroupFragment frag;
    frag.entry = e;
    std::vector<int> stack{e};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      frag.members.push_back(v);
      for (int c : children[size_t(v)])
        if (in_group.count(c)) stack.push_back(c);
    }
    fragments.push_back(std::move(frag));
  }
  return fragments;
}

// Root selection for a non-main group: adjacency first (an entry whose parent
// is a Main joint, nearest to that parent), then nearest entry to any Main
// joint. Ties resolve by (z, y, x) of the entry position, then joint id, so
// tokenization stays a pure function.
inline int select_group_root(const Skeleton& s, const std::vector<int>& members,
                             const std::vector<int>& main_members) {
  auto fragments = group_fragments(s, members);
  auto idx = s.id_to_index();
  std::unordered_set<int> main_set(main_members.begin(), main_members.end());

  struct Candidate {
    int joint = -1;
    double dist = 0.0;
  };
  auto better = [&s](const Candidate& a, const Candidate& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    const Vec3& pa = s.joints[size_t(a.joint)].position;
    const Vec3& pb = s.joints[size_t(b.joint)].position;
    if (!(pa == pb)) return zyx_less(pa, pb);
    return s.joints[size_t(a.joint)].id < s.joints[size_t(b.joint)].id;
  };

  std::optional<Candidate> adjacent, nearest;
  for (const auto& frag : fragments) {
    int e = frag.entry;
    const auto& joint = s.joints[size_t(e)];
    if (joint.parent) {
      auto it = idx.find(*joint.parent);
      if (it != idx.end() && main_set.count(it->second)) {
        Candidate c{e, distance(joint.position, s.joints[size_t(it->second)].position)};
        if (!adjacent || better(c, *adjacent)) adjacent = c;
      }
    }
    double best = std::numeric_limits<double>::infinity();
    for (int m : main_members)
      best = std::min(best, distance(joint.position, s.joints[size_t(m)].position));
    Candidate c{e, best};
    if (!nearest || better(c, *nearest)) nearest = c;
  }
  if (adjacent) return adjacent->joint;
  if (nearest) return nearest->joint;
  return members.empty() ? -1 : members.front();
}

// Partition a labeled skeleton into ordered semantic groups. Humanoids order
// Main, Hair, Cloth, Other; tetrapods Main, Auxiliary; category "other" is a
// single whole-tree group. Empty groups are omitted. Groups need not induce
// connected subgraphs; fragments share the group's token block.
inline GroupPlan plan_groups(const Skeleton& s) {
  GroupPlan plan;
  plan.category = s.category;

  if (s.category == Category::Other) {
    Group g;
    g.coarse = CoarseLabel::Main;
    for (size_t i = 0; i < s.joints.size(); ++i) g.members.push_back(int(i));
    g.root = s.root;
    plan.groups.push_back(std::move(g));
    return plan;
  }

  std::vector<CoarseLabel> order =
      s.category == Category::Humanoid
          ? std::vector<CoarseLabel>{CoarseLabel::Main, CoarseLabel::Hair,
                                     CoarseLabel::Cloth, CoarseLabel::Other}
          : std::vector<CoarseLabel>{CoarseLabel::Main, CoarseLabel::Auxiliary};

  std::unordered_map<int, std::vector<int>> by_coarse;
  for (size_t i = 0; i < s.joints.size(); ++i) {
    const auto& j = s.joints[i];
    if (!j.label)
      throw Error(ErrorCode::UnlabeledJoint,
                  "joint " + std::to_string(j.id) + " is unlabeled");
    by_coarse[int(j.label->coarse)].push_back(int(i));
  }
  for (const auto& [coarse, members] : by_coarse) {
    if (std::find(order.begin(), order.end(), CoarseLabel(coarse)) == order.end())
      throw Error(ErrorCode::UnlabeledJoint,
                  std::string("coarse label ") + to_string(CoarseLabel(coarse)) +
                      " not valid for category " + to_string(s.category));
  }

  std::vector<int> main_members;
  auto main_it = by_coarse.find(int(CoarseLabel::Main));
  if (main_it != by_coarse.end()) main_members = main_it->second;
  // reference set for root selection when no Main joints exist: the root's own
  // group anchors the others
  if (main_members.empty()) main_members.push_back(s.root);

  for (CoarseLabel coarse : order) {
    auto it = by_coarse.find(int(coarse));
    if (it == by_coarse.end() || it->second.empty()) continue;
    Group g;
    g.coarse = coarse;
    g.members = it->second;
    std::sort(g.members.begin(), g.members.end());
    bool contains_root =
        std::find(g.members.begin(), g.members.end(), s.root) != g.members.end();
    if (contains_root)
      g.root = s.root;
    else
      g.root = select_group_root(s, g.members, main_members);
    plan.groups.push_back(std::move(g));
  }
  return plan;
}

}  // namespace rigkit
