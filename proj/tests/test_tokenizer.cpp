#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <map>
#include <set>

#include "rigkit/groups.hpp"
#include "rigkit/synth.hpp"
#include "rigkit/tokenizer.hpp"
#include "rigkit/transforms.hpp"

#include "helpers.hpp"

using namespace rigkit;
using test_helpers::make_chain;

namespace {

// no two joints share a quantization cell
bool collision_free(const Skeleton& s, int resolution) {
  std::set<std::array<int, 3>> cells;
  for (const auto& j : s.joints)
    if (!cells.insert(quantize(j.position, resolution)).second) return false;
  return true;
}

// match decoded joints to source joints by nearest position, then compare the
// parent relations under that correspondence
bool tree_isomorphic(const Skeleton& decoded, const Skeleton& source, double tol) {
  if (decoded.joints.size() != source.joints.size()) return false;
  const size_t k = source.joints.size();
  std::vector<int> to_source(k, -1);
  std::vector<char> taken(k, 0);
  for (size_t d = 0; d < k; ++d) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < k; ++s) {
      if (taken[s]) continue;
      double dist = (decoded.joints[d].position - source.joints[s].position).norm();
      if (dist < best_d) {
        best_d = dist;
        best = int(s);
      }
    }
    if (best < 0 || best_d > tol) return false;
    to_source[d] = best;
    taken[size_t(best)] = 1;
  }

  auto src_idx = source.id_to_index();
  auto dec_idx = decoded.id_to_index();
  for (size_t d = 0; d < k; ++d) {
    const auto& dj = decoded.joints[d];
    const auto& sj = source.joints[size_t(to_source[d])];
    if (dj.parent.has_value() != sj.parent.has_value()) return false;
    if (!dj.parent) continue;
    int d_parent_storage = dec_idx.at(*dj.parent);
    int s_parent_storage = src_idx.at(*sj.parent);
    if (to_source[size_t(d_parent_storage)] != s_parent_storage) return false;
  }
  return true;
}

Skeleton normalized_rig(const SynthRig& rig, uint64_t) {
  auto [sn, mn, t] = normalize(rig.skeleton, rig.mesh);
  return sn;
}

}  // namespace

TEST_CASE("vocabulary layout: coordinates then four specials") {
  Vocabulary v;
  REQUIRE(v.resolution == 256);
  REQUIRE(v.size() == 260);
  REQUIRE(v.bos() == 256);
  REQUIRE(v.eos() == 257);
  REQUIRE(v.group() == 258);
  REQUIRE(v.pad() == 259);
  REQUIRE(v.is_coordinate(0));
  REQUIRE(v.is_coordinate(255));
  REQUIRE_FALSE(v.is_coordinate(256));
}

TEST_CASE("a 5-joint single-group chain encodes to 33 tokens") {
  auto s = make_chain(5, 0.3);  // fits in [-1, 1]
  s.category = Category::Other;
  auto seq = encode(s, plan_groups(s));
  REQUIRE(seq.tokens.size() == 33);  // BOS + GROUP + 5*6 + EOS
  REQUIRE(seq.tokens.front() == seq.vocab.bos());
  REQUIRE(seq.tokens.back() == seq.vocab.eos());
  REQUIRE(seq.tokens[1] == seq.vocab.group());
}

TEST_CASE("humanoid Main(10) + Hair(4) encodes to 88 tokens, hair block after main") {
  auto tax = humanoid_taxonomy();
  Skeleton s;
  s.category = Category::Humanoid;
  for (int i = 0; i < 10; ++i) {
    Joint j;
    j.id = i;
    j.position = {0.0, -0.9 + 0.15 * i, 0.0};
    if (i > 0) j.parent = i - 1;
    j.label = tax.label_of(i);
    s.joints.push_back(j);
  }
  for (int i = 0; i < 4; ++i) {
    Joint j;
    j.id = 10 + i;
    j.position = {0.1, -0.9 + 0.15 * (9 + i) + 0.1, 0.05 * (i + 1)};
    j.parent = i == 0 ? 9 : 10 + i - 1;
    j.label = tax.label_of(21);
    s.joints.push_back(j);
  }
  s.root = 0;

  auto seq = encode(s, plan_groups(s));
  REQUIRE(seq.tokens.size() == 88);  // 2 + 2 + 14*6

  // exactly two GROUP markers; all hair sextets strictly after the second
  std::vector<size_t> group_pos;
  for (size_t i = 0; i < seq.tokens.size(); ++i)
    if (seq.tokens[i] == seq.vocab.group()) group_pos.push_back(i);
  REQUIRE(group_pos.size() == 2);
  REQUIRE(group_pos[0] == 1);
  REQUIRE(group_pos[1] == 2 + 10 * 6);  // main block holds 10 joints
}

TEST_CASE("the root sextet repeats its own coordinates") {
  Skeleton s;
  s.joints.push_back({0, dequantize({128, 128, 128}, 256), std::nullopt, {}});
  s.joints.push_back({1, dequantize({140, 128, 128}, 256), 0, {}});
  s.root = 0;
  s.category = Category::Other;
  auto seq = encode(s, plan_groups(s));
  // BOS GROUP | 128 128 128 128 128 128 | 140 128 128 128 128 128 | EOS
  REQUIRE(std::vector<int>(seq.tokens.begin() + 2, seq.tokens.begin() + 8) ==
          std::vector<int>{128, 128, 128, 128, 128, 128});
  REQUIRE(std::vector<int>(seq.tokens.begin() + 8, seq.tokens.begin() + 14) ==
          std::vector<int>{140, 128, 128, 128, 128, 128});
}

TEST_CASE("encode is deterministic") {
  Rng rng(55);
  auto rig = make_humanoid(rng, 40);
  auto s = normalized_rig(rig, 1);
  auto a = encode(s, plan_groups(s));
  auto b = encode(s, plan_groups(s));
  REQUIRE(a.tokens == b.tokens);
}

TEST_CASE("token count follows 2 + groups + 6k") {
  Rng rng(66);
  for (int round = 0; round < 30; ++round) {
    Category cat = round % 3 == 0   ? Category::Humanoid
                   : round % 3 == 1 ? Category::Tetrapod
                                    : Category::Other;
    auto rig = make_rig(cat, 10 + int(rng.below(50)), rng);
    auto s = normalized_rig(rig, uint64_t(round));
    auto plan = plan_groups(s);
    auto seq = encode(s, plan);
    REQUIRE(seq.tokens.size() == 2 + plan.groups.size() + 6 * s.joints.size());

    auto stats = sequence_stats(seq);
    REQUIRE(stats.joint_count == int(s.joints.size()));
    REQUIRE(stats.group_count == int(plan.groups.size()));
    REQUIRE(stats.length == int(seq.tokens.size()));
  }
}

TEST_CASE("round trip: decode(encode(s)) is tree-isomorphic within half a bin") {
  Rng rng(77);
  int tested = 0, skipped = 0;
  while (tested < 60) {
    Category cat = tested % 3 == 0   ? Category::Humanoid
                   : tested % 3 == 1 ? Category::Tetrapod
                                     : Category::Other;
    auto rig = make_rig(cat, 10 + int(rng.below(60)), rng);
    auto s = normalized_rig(rig, uint64_t(tested));
    if (!collision_free(s, 256)) {
      ++skipped;
      REQUIRE(skipped < 40);
      continue;
    }
    auto seq = encode(s, plan_groups(s));
    auto res = decode(seq);
    REQUIRE(res.diagnostics.clean());
    REQUIRE(tree_isomorphic(res.skeleton, s, 1.0 / 256.0 * std::sqrt(3.0) + 1e-12));
    ++tested;
  }
}

TEST_CASE("a dangling trailing token is dropped with a Truncation diagnostic") {
  auto s = make_chain(5, 0.3);
  s.category = Category::Other;
  auto seq = encode(s, plan_groups(s));
  // remove EOS, add one stray coordinate: an incomplete sextet
  seq.tokens.pop_back();
  seq.tokens.push_back(17);
  auto res = decode(seq);
  REQUIRE(res.skeleton.joints.size() == 5);
  REQUIRE(res.diagnostics.truncations == 1);
  REQUIRE_FALSE(res.diagnostics.reached_eos);
}

TEST_CASE("colliding parent coordinates resolve to the most recent joint") {
  Vocabulary v;
  std::vector<int> toks;
  toks.push_back(v.bos());
  toks.push_back(v.group());
  auto sextet = [&toks](std::array<int, 3> self, std::array<int, 3> parent) {
    for (int b : self) toks.push_back(b);
    for (int b : parent) toks.push_back(b);
  };
  sextet({10, 10, 10}, {10, 10, 10});  // root (joint 0)
  sextet({10, 10, 10}, {10, 10, 10});  // joint 1: same cell, self-parent later
  sextet({30, 10, 10}, {10, 10, 10});  // joint 2: parent cell is ambiguous
  toks.push_back(v.eos());

  TokenSequence seq{toks, v, "manual"};
  auto res = decode(seq);
  REQUIRE(res.skeleton.joints.size() == 3);
  // joint 1 was a later self-parent: nearest previously decoded is joint 0
  REQUIRE(res.skeleton.joints[1].parent.has_value());
  REQUIRE(*res.skeleton.joints[1].parent == 0);
  // joint 2's parent cell matches joints 0 and 1; recency picks joint 1
  REQUIRE(*res.skeleton.joints[2].parent == 1);
}

TEST_CASE("decode repairs near-miss parent coordinates within 2 bins") {
  Vocabulary v;
  std::vector<int> toks{v.bos(), v.group()};
  auto sextet = [&toks](std::array<int, 3> self, std::array<int, 3> parent) {
    for (int b : self) toks.push_back(b);
    for (int b : parent) toks.push_back(b);
  };
  sextet({100, 100, 100}, {100, 100, 100});  // root
  sextet({120, 100, 100}, {101, 99, 100});   // off-by-one parent: repaired to root
  sextet({200, 200, 200}, {150, 150, 150});  // hopeless: orphan repair to root
  toks.push_back(v.eos());
  auto res = decode({toks, v, ""});
  REQUIRE(*res.skeleton.joints[1].parent == 0);
  REQUIRE(*res.skeleton.joints[2].parent == 0);
  REQUIRE(res.diagnostics.orphan_repairs == std::vector<int>{2});
}

TEST_CASE("decode tolerates a missing BOS with a diagnostic") {
  auto s = make_chain(5, 0.3);
  s.category = Category::Other;
  auto seq = encode(s, plan_groups(s));
  seq.tokens.erase(seq.tokens.begin());
  auto res = decode(seq);
  REQUIRE(res.diagnostics.missing_bos);
  REQUIRE(res.skeleton.joints.size() == 5);
}

TEST_CASE("decode throws EmptySequence when no sextet completes") {
  Vocabulary v;
  TokenSequence seq{{v.bos(), v.group(), 1, 2, 3, v.eos()}, v, ""};
  try {
    decode(seq);
    FAIL("expected EmptySequence");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::EmptySequence);
  }
}

TEST_CASE("decoded skeletons always validate as trees") {
  Rng rng(88);
  Vocabulary v;
  for (int round = 0; round < 500; ++round) {
    size_t len = 7 + rng.below(120);
    std::vector<int> toks;
    for (size_t i = 0; i < len; ++i) toks.push_back(int(rng.below(uint64_t(v.size()))));
    try {
      auto res = decode({toks, v, ""});
      REQUIRE(validate_tree(res.skeleton).ok());
    } catch (const Error& e) {
      REQUIRE(e.code() == ErrorCode::EmptySequence);
    }
  }
}

TEST_CASE("sequence_stats rejects malformed block structure") {
  Vocabulary v;
  auto expect_malformed = [&v](std::vector<int> toks) {
    try {
      sequence_stats({std::move(toks), v, ""});
      FAIL("expected MalformedBlocks");
    } catch (const Error& e) {
      REQUIRE(e.code() == ErrorCode::MalformedBlocks);
    }
  };
  expect_malformed({v.bos(), v.eos()});                              // no block
  expect_malformed({v.bos(), 1, 2, 3, 4, 5, 6, v.eos()});            // coords before GROUP
  expect_malformed({v.bos(), v.group(), 1, 2, 3, v.eos()});          // partial sextet
  expect_malformed({v.group(), 1, 2, 3, 4, 5, 6, v.eos()});          // missing BOS
  expect_malformed({v.bos(), v.group(), 1, 2, 3, 4, 5, 6});          // missing EOS
  expect_malformed({v.bos(), v.group(), v.pad(), v.eos()});          // stray PAD
}

TEST_CASE("token stream files round-trip with magic and resolution") {
  namespace fs = std::filesystem;
  auto s = make_chain(7, 0.2);
  s.category = Category::Other;
  auto seq = encode(s, plan_groups(s));
  auto path = (fs::temp_directory_path() / "rigkit_tok_test.tok").string();
  write_token_file(path, seq);

  // header layout: 8-byte magic + u32 resolution little-endian
  std::ifstream f(path, std::ios::binary);
  char head[12];
  REQUIRE(f.read(head, 12));
  REQUIRE(std::string(head, 8) == "RIGTOKN1");
  REQUIRE((unsigned char)head[8] == 0);  // 256 = 0x0100
  REQUIRE((unsigned char)head[9] == 1);

  auto back = read_token_file(path);
  REQUIRE(back.tokens == seq.tokens);
  REQUIRE(back.vocab.resolution == 256);
  fs::remove(path);
}

TEST_CASE("debug text renders specials and coordinate triples") {
  Vocabulary v;
  TokenSequence seq{{v.bos(), v.group(), 12, 200, 31, 12, 200, 31, v.eos()}, v, ""};
  REQUIRE(to_debug_text(seq) == "<BOS> <G> 12/200/31 12/200/31 <EOS>");
}
