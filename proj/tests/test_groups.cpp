#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <set>

#include "rigkit/groups.hpp"
#include "rigkit/synth.hpp"
#include "rigkit/taxonomy.hpp"

#include "helpers.hpp"

using namespace rigkit;
using test_helpers::make_chain;

TEST_CASE("taxonomies carry 29 and 31 fine categories") {
  REQUIRE(humanoid_taxonomy().size() == 29);
  REQUIRE(tetrapod_taxonomy().size() == 31);
  for (const auto& e : humanoid_taxonomy().entries)
    REQUIRE((e.coarse == CoarseLabel::Main || e.coarse == CoarseLabel::Hair ||
             e.coarse == CoarseLabel::Cloth || e.coarse == CoarseLabel::Other));
  for (const auto& e : tetrapod_taxonomy().entries)
    REQUIRE((e.coarse == CoarseLabel::Main || e.coarse == CoarseLabel::Auxiliary));
}

TEST_CASE("taxonomy JSON round-trips") {
  auto t = tetrapod_taxonomy();
  auto back = taxonomy_from_json(taxonomy_to_json(t));
  REQUIRE(back.size() == t.size());
  REQUIRE(back.category == t.category);
  for (int i = 0; i < t.size(); ++i) {
    REQUIRE(back.entries[size_t(i)].name == t.entries[size_t(i)].name);
    REQUIRE(back.entries[size_t(i)].coarse == t.entries[size_t(i)].coarse);
  }
}

TEST_CASE("ingest_labels accepts full coverage with valid fine ids") {
  auto s = make_chain(5);
  s.category = Category::Humanoid;
  std::vector<std::pair<int, int>> ann{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 28}};
  auto labeled = ingest_labels(s, ann, humanoid_taxonomy());
  for (const auto& j : labeled.joints) REQUIRE(j.label.has_value());
  REQUIRE(labeled.joints[4].label->coarse == CoarseLabel::Other);  // fine 28
}

TEST_CASE("ingest_labels rejects out-of-range, missing, duplicate") {
  auto s = make_chain(5);
  s.category = Category::Tetrapod;
  auto tax = tetrapod_taxonomy();

  std::vector<std::pair<int, int>> bad_fine{{0, 0}, {1, 1}, {2, 2}, {3, 3}, {4, 31}};
  try {
    ingest_labels(s, bad_fine, tax);
    FAIL("expected UnknownFineId");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnknownFineId);
  }

  std::vector<std::pair<int, int>> missing{{0, 0}, {1, 1}, {2, 2}, {4, 4}};
  try {
    ingest_labels(s, missing, tax);
    FAIL("expected MissingLabel");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::MissingLabel);
    REQUIRE(std::string(e.what()).find("3") != std::string::npos);
  }

  std::vector<std::pair<int, int>> dup{{0, 0}, {1, 1}, {1, 2}, {2, 2}, {3, 3}, {4, 4}};
  try {
    ingest_labels(s, dup, tax);
    FAIL("expected DuplicateLabel");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::DuplicateLabel);
  }
}

namespace {

Skeleton labeled_humanoid_with_hair(int n_main, int n_hair) {
  auto tax = humanoid_taxonomy();
  Skeleton s;
  s.category = Category::Humanoid;
  for (int i = 0; i < n_main; ++i) {
    Joint j;
    j.id = i;
    j.position = {0.0, 0.1 * i, 0.0};
    if (i > 0) j.parent = i - 1;
    j.label = tax.label_of(i < 21 ? i : 0);
    s.joints.push_back(j);
  }
  int head = n_main - 1;  // chain top is the attachment joint
  for (int i = 0; i < n_hair; ++i) {
    Joint j;
    j.id = n_main + i;
    j.position = {0.05, 0.1 * (head + 1 + i), 0.02};
    j.parent = i == 0 ? head : n_main + i - 1;
    j.label = tax.label_of(tax.find_by_name("hair_back"));
    s.joints.push_back(j);
  }
  s.root = 0;
  return s;
}

}  // namespace

TEST_CASE("plan_groups orders humanoid groups Main then Hair") {
  auto s = labeled_humanoid_with_hair(10, 4);
  auto plan = plan_groups(s);
  REQUIRE(plan.groups.size() == 2);
  REQUIRE(plan.groups[0].coarse == CoarseLabel::Main);
  REQUIRE(plan.groups[1].coarse == CoarseLabel::Hair);
  REQUIRE(plan.groups[0].members.size() == 10);
  REQUIRE(plan.groups[1].members.size() == 4);
  REQUIRE(plan.groups[0].root == s.root);
  // hair root is the strand joint that parents onto the main chain
  REQUIRE(plan.groups[1].root == 10);
}

TEST_CASE("all-Main humanoid degenerates to a single group") {
  auto s = labeled_humanoid_with_hair(8, 0);
  auto plan = plan_groups(s);
  REQUIRE(plan.groups.size() == 1);
  REQUIRE(plan.groups[0].coarse == CoarseLabel::Main);
  REQUIRE(plan.groups[0].members.size() == 8);
}

TEST_CASE("category other yields one whole-tree group without labels") {
  auto s = make_chain(6);
  s.category = Category::Other;
  auto plan = plan_groups(s);
  REQUIRE(plan.groups.size() == 1);
  REQUIRE(plan.groups[0].members.size() == 6);
  REQUIRE(plan.groups[0].root == 0);
}

TEST_CASE("unlabeled humanoid joints are an error") {
  auto s = make_chain(5);
  s.category = Category::Humanoid;
  try {
    plan_groups(s);
    FAIL("expected UnlabeledJoint");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnlabeledJoint);
  }
}

TEST_CASE("every joint lands in exactly one group") {
  Rng rng(31);
  for (int round = 0; round < 20; ++round) {
    auto rig = make_humanoid(rng, 30);
    auto plan = plan_groups(rig.skeleton);
    std::set<int> seen;
    for (const auto& g : plan.groups)
      for (int m : g.members) REQUIRE(seen.insert(m).second);
    REQUIRE(seen.size() == rig.skeleton.joints.size());
  }
}

TEST_CASE("tetrapod plans contain at most two groups") {
  Rng rng(37);
  for (int round = 0; round < 10; ++round) {
    auto rig = make_tetrapod(rng, 40);
    auto plan = plan_groups(rig.skeleton);
    REQUIRE(plan.groups.size() <= 2);
    REQUIRE(plan.groups[0].coarse == CoarseLabel::Main);
    if (plan.groups.size() == 2) REQUIRE(plan.groups[1].coarse == CoarseLabel::Auxiliary);
  }
}

TEST_CASE("plan membership is invariant under joint reindexing") {
  Rng rng(41);
  auto rig = make_humanoid(rng, 36);
  auto plan = plan_groups(rig.skeleton);

  // permute storage order and relabel ids, preserving structure
  int k = int(rig.skeleton.joints.size());
  std::vector<int> perm(static_cast<size_t>(k), 0);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);  // perm[new_index] = old_index
  std::vector<int> new_id_of_old(static_cast<size_t>(k), 0);
  for (int ni = 0; ni < k; ++ni) new_id_of_old[size_t(perm[size_t(ni)])] = ni;

  Skeleton shuffled;
  shuffled.category = rig.skeleton.category;
  for (int ni = 0; ni < k; ++ni) {
    Joint j = rig.skeleton.joints[size_t(perm[size_t(ni)])];
    j.id = ni;
    if (j.parent) j.parent = new_id_of_old[size_t(*j.parent)];
    shuffled.joints.push_back(j);
  }
  shuffled.root = new_id_of_old[size_t(rig.skeleton.root)];

  auto plan2 = plan_groups(shuffled);
  REQUIRE(plan2.groups.size() == plan.groups.size());
  for (size_t g = 0; g < plan.groups.size(); ++g) {
    REQUIRE(plan2.groups[g].coarse == plan.groups[g].coarse);
    // compare membership as position sets
    auto key = [](const Skeleton& s, const std::vector<int>& members) {
      std::vector<std::array<double, 3>> pos;
      for (int m : members) {
        const Vec3& p = s.joints[size_t(m)].position;
        pos.push_back({p.x, p.y, p.z});
      }
      std::sort(pos.begin(), pos.end());
      return pos;
    };
    REQUIRE(key(shuffled, plan2.groups[g].members) ==
            key(rig.skeleton, plan.groups[g].members));
    // the selected roots must be the same physical joint
    REQUIRE(shuffled.joints[size_t(plan2.groups[g].root)].position ==
            rig.skeleton.joints[size_t(plan.groups[g].root)].position);
  }
}

TEST_CASE("select_group_root prefers direct adjacency to Main") {
  auto s = labeled_humanoid_with_hair(6, 3);
  std::vector<int> hair{6, 7, 8}, main{0, 1, 2, 3, 4, 5};
  REQUIRE(select_group_root(s, hair, main) == 6);
}

TEST_CASE("adjacent entries compete on distance to their Main parent") {
  auto tax = humanoid_taxonomy();
  Skeleton s;
  s.category = Category::Humanoid;
  s.joints.push_back({0, {0, 0, 0}, std::nullopt, tax.label_of(0)});
  s.joints.push_back({1, {0, 1, 0}, 0, tax.label_of(2)});
  // strand A: entry 2 parents onto Main joint 1 at distance ~0.447
  s.joints.push_back({2, {0.4, 0.8, 0}, 1, tax.label_of(24)});
  s.joints.push_back({3, {0.5, 0.6, 0}, 2, tax.label_of(24)});
  // strand B: entry 4 parents onto Main joint 1 from farther away (~0.906)
  s.joints.push_back({4, {0.05, 0.1, 0}, 1, tax.label_of(24)});
  s.root = 0;

  std::vector<int> cloth{2, 3, 4}, main{0, 1};
  REQUIRE(select_group_root(s, cloth, main) == 2);
}

TEST_CASE("root ties resolve by smaller z") {
  auto tax = humanoid_taxonomy();
  Skeleton s;
  s.category = Category::Humanoid;
  s.joints.push_back({0, {0, 0, 0}, std::nullopt, tax.label_of(0)});
  // two hair joints equidistant from the only Main joint, differing in z
  s.joints.push_back({1, {0.6, 0, 0.8}, 0, tax.label_of(21)});
  s.joints.push_back({2, {0.6, 0, -0.8}, 0, tax.label_of(21)});
  s.root = 0;
  std::vector<int> hair{1, 2}, main{0};
  REQUIRE(select_group_root(s, hair, main) == 2);
}

TEST_CASE("group_fragments enumerates in-group subtrees with unique entries") {
  auto s = labeled_humanoid_with_hair(5, 2);
  // add a second detached hair strand parenting onto main joint 2
  auto tax = humanoid_taxonomy();
  int base = int(s.joints.size());
  s.joints.push_back({base, {-0.3, 0.25, -0.5}, 2, tax.label_of(21)});
  s.joints.push_back({base + 1, {-0.35, 0.3, -0.6}, base, tax.label_of(21)});

  std::vector<int> hair{5, 6, base, base + 1};
  auto frags = group_fragments(s, hair);
  REQUIRE(frags.size() == 2);
  size_t total = 0;
  for (const auto& f : frags) total += f.members.size();
  REQUIRE(total == hair.size());
  // fragment order follows entry (z, y, x): the new strand has z=-0.5 < 0.02
  REQUIRE(frags[0].entry == base);
  REQUIRE(frags[1].entry == 5);
}
