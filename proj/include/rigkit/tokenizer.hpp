#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "rigkit/core.hpp"
#include "rigkit/groups.hpp"
#include "rigkit/skeleton.hpp"
#include "rigkit/transforms.hpp"

namespace rigkit {

// One shared coordinate id space of size `resolution`, reused for every axis
// position, plus four specials appended after it.
struct Vocabulary {
  int resolution = kDefaultResolution;

  int bos() const { return resolution; }
  int eos() const { return resolution + 1; }
  int group() const { return resolution + 2; }
  int pad() const { return resolution + 3; }
  int size() const { return resolution + 4; }
  bool is_coordinate(int id) const { return id >= 0 && id < resolution; }

  bool operator==(const Vocabulary&) const = default;
};

struct TokenSequence {
  std::vector<int> tokens;
  Vocabulary vocab;
  std::string provenance;

  size_t size() const { return tokens.size(); }
};

namespace detail {

// Emission order of one group: the root's fragment first, remaining fragments
// by ascending (z, y, x) of their entries; inside a fragment, preorder DFS
// with children in ascending (z, y, x), exact ties by joint id.
inline std::vector<int> group_emission_order(const Skeleton& s, const Group& g) {
  auto fragments = group_fragments(s, g.members, g.root);
  auto children = s.children();
  std::unordered_set<int> in_group(g.members.begin(), g.members.end());

  auto child_less = [&s](int a, int b) {
    const Vec3& pa = s.joints[size_t(a)].position;
    const Vec3& pb = s.joints[size_t(b)].position;
    if (!(pa == pb)) return zyx_less(pa, pb);
    return s.joints[size_t(a)].id < s.joints[size_t(b)].id;
  };

  std::vector<int> order;
  order.reserve(g.members.size());
  for (const auto& frag : fragments) {
    std::vector<int> stack{frag.entry};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      order.push_back(v);
      std::vector<int> kids;
      for (int c : children[size_t(v)])
        if (in_group.count(c)) kids.push_back(c);
      std::sort(kids.begin(), kids.end(), child_less);
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
  }
  return order;
}

}  // namespace detail

// Serialize a grouped skeleton: BOS, then per group a GROUP marker followed by
// six coordinate tokens per joint (own quantized x,y,z then the parent's).
// A joint whose parent has not been emitted yet (the skeleton root, or a
// fragment entry whose parent lives in a later block) repeats its own
// coordinates as the parent triple; that self-parent sentinel is what decode
// recognizes as a root marker.
inline TokenSequence encode(const Skeleton& s, const GroupPlan& plan,
                            const Vocabulary& vocab = Vocabulary{}) {
  TokenSequence seq;
  seq.vocab = vocab;
  seq.tokens.push_back(vocab.bos());

  std::unordered_map<int, size_t> emitted;  // joint index -> emission position
  auto idx = s.id_to_index();
  auto parent_index = [&](int i) -> int {
    const auto& j = s.joints[size_t(i)];
    if (!j.parent) return -1;
    auto it = idx.find(*j.parent);
    if (it == idx.end() || it->second == i) return -1;
    return it->second;
  };

  for (const auto& g : plan.groups) {
    seq.tokens.push_back(vocab.group());
    for (int v : detail::group_emission_order(s, g)) {
      auto self_bins = quantize(s.joints[size_t(v)].position, vocab.resolution);
      int p = parent_index(v);
      std::array<int, 3> parent_bins =
          (p >= 0 && emitted.count(p)) ? quantize(s.joints[size_t(p)].position, vocab.resolution)
                                       : self_bins;
      for (int b : self_bins) seq.tokens.push_back(b);
      for (int b : parent_bins) seq.tokens.push_back(b);
      emitted.emplace(v, emitted.size());
    }
  }
  seq.tokens.push_back(vocab.eos());
  return seq;
}

struct DecodeDiagnostics {
  bool missing_bos = false;
  bool reached_eos = false;
  int truncations = 0;        // partial sextets dropped
  int stray_tokens = 0;       // PAD/BOS encountered mid-stream
  std::vector<int> orphan_repairs;  // decode-order indices attached to the root by repair
  int group_count = 0;

  bool clean() const {
    return !missing_bos && reached_eos && truncations == 0 && stray_tokens == 0 &&
           orphan_repairs.empty();
  }
};

struct DecodeResult {
  Skeleton skeleton;
  DecodeDiagnostics diagnostics;
};

// Parse a token stream back into a skeleton. Malformed input is in-contract:
// partial sextets are dropped, unresolvable parents are repaired toward the
// nearest previously decoded joint (within 2 bins Chebyshev) or the root.
// Parent resolution order: exact quantized match (most recent wins), then the
// self-parent root rule, then nearest-bin repair.
inline DecodeResult decode(const TokenSequence& seq) {
  const Vocabulary& vocab = seq.vocab;
  DecodeResult res;
  DecodeDiagnostics& diag = res.diagnostics;

  struct Decoded {
    std::array<int, 3> bins;
  };
  std::vector<Decoded> decoded;
  Skeleton& skel = res.skeleton;
  skel.category = Category::Other;

  auto chebyshev = [](const std::array<int, 3>& a, const std::array<int, 3>& b) {
    return std::max({std::abs(a[0] - b[0]), std::abs(a[1] - b[1]), std::abs(a[2] - b[2])});
  };

  // attach by rule (c): nearest previously decoded joint to `target`, most
  // recent on ties, within 2 bins; otherwise the root with a repair note
  auto repair_parent = [&](const std::array<int, 3>& target) -> int {
    int best = -1, best_d = std::numeric_limits<int>::max();
    for (int i = int(decoded.size()) - 1; i >= 0; --i) {
      int d = chebyshev(decoded[size_t(i)].bins, target);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best >= 0 && best_d <= 2) return best;
    diag.orphan_repairs.push_back(int(decoded.size()));
    return 0;  // skeleton root
  };

  auto emit_joint = [&](const std::array<int, 6>& sextet) {
    std::array<int, 3> self{sextet[0], sextet[1], sextet[2]};
    std::array<int, 3> parent{sextet[3], sextet[4], sextet[5]};
    Joint j;
    j.id = int(decoded.size());
    j.position = dequantize(self, vocab.resolution);

    if (decoded.empty()) {
      // first joint is the root regardless; a missing sentinel is repaired
      if (self != parent) diag.orphan_repairs.push_back(0);
    } else if (self == parent) {
      j.parent = skel.joints[size_t(repair_parent(self))].id;
    } else {
      int match = -1;
      for (int i = int(decoded.size()) - 1; i >= 0; --i) {
        if (decoded[size_t(i)].bins == parent) {
          match = i;
          break;
        }
      }
      j.parent = skel.joints[size_t(match >= 0 ? match : repair_parent(parent))].id;
    }
    skel.joints.push_back(j);
    decoded.push_back({self});
  };

  size_t pos = 0;
  const auto& toks = seq.tokens;
  // leading padding is tolerated
  while (pos < toks.size() && toks[pos] == vocab.pad()) ++pos;
  if (pos < toks.size() && toks[pos] == vocab.bos())
    ++pos;
  else
    diag.missing_bos = true;

  std::array<int, 6> buf{};
  int filled = 0;
  auto flush_partial = [&] {
    if (filled > 0) {
      ++diag.truncations;
      filled = 0;
    }
  };

  for (; pos < toks.size(); ++pos) {
    int t = toks[pos];
    if (t == vocab.eos()) {
      diag.reached_eos = true;
      break;
    }
    if (t == vocab.group()) {
      flush_partial();
      ++diag.group_count;
    } else if (vocab.is_coordinate(t)) {
      buf[size_t(filled++)] = t;
      if (filled == 6) {
        emit_joint(buf);
        filled = 0;
      }
    } else {
      ++diag.stray_tokens;  // PAD or repeated BOS inside the stream
    }
  }
  flush_partial();

  if (skel.joints.empty())
    throw Error(ErrorCode::EmptySequence, "no complete joint sextet in stream");
  skel.root = 0;
  return res;
}

struct SequenceStats {
  int joint_count = 0;
  int group_count = 0;
  int length = 0;
};

// Strict structural accounting; rejects anything that is not
// BOS (GROUP coord^(6m))+ EOS.
inline SequenceStats sequence_stats(const TokenSequence& seq) {
  const auto& t = seq.tokens;
  const Vocabulary& v = seq.vocab;
  auto fail = [](const std::string& why) -> SequenceStats {
    throw Error(ErrorCode::MalformedBlocks, why);
  };
  if (t.size() < 2 || t.front() != v.bos()) return fail("sequence must begin with BOS");
  if (t.back() != v.eos()) return fail("sequence must end with EOS");

  SequenceStats stats;
  stats.length = int(t.size());
  int coords_in_block = -1;  // -1: before the first GROUP
  for (size_t i = 1; i + 1 < t.size(); ++i) {
    if (t[i] == v.group()) {
      if (coords_in_block >= 0 && coords_in_block % 6 != 0)
        return fail("group block size not a multiple of 6");
      coords_in_block = 0;
      ++stats.group_count;
    } else if (v.is_coordinate(t[i])) {
      if (coords_in_block < 0) return fail("coordinate token before first GROUP");
      ++coords_in_block;
      ++stats.joint_count;
    } else {
      return fail("unexpected special token inside the stream");
    }
  }
  if (stats.group_count == 0) return fail("no GROUP block");
  if (coords_in_block % 6 != 0) return fail("group block size not a multiple of 6");
  stats.joint_count /= 6;
  return stats;
}

// ---- token stream file: 8-byte magic, u32 LE resolution, u16 LE ids ----

inline constexpr char kTokenMagic[8] = {'R', 'I', 'G', 'T', 'O', 'K', 'N', '1'};

inline void write_token_file(const std::string& path, const TokenSequence& seq) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  f.write(kTokenMagic, 8);
  auto put_u32 = [&f](uint32_t x) {
    char b[4] = {char(x & 0xff), char((x >> 8) & 0xff), char((x >> 16) & 0xff),
                 char((x >> 24) & 0xff)};
    f.write(b, 4);
  };
  put_u32(uint32_t(seq.vocab.resolution));
  for (int t : seq.tokens) {
    if (t < 0 || t > 0xffff) throw Error(ErrorCode::OutOfRange, "token id exceeds 16 bits");
    char b[2] = {char(t & 0xff), char((t >> 8) & 0xff)};
    f.write(b, 2);
  }
}

inline TokenSequence read_token_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  char magic[8];
  if (!f.read(magic, 8) || !std::equal(magic, magic + 8, kTokenMagic))
    throw Error(ErrorCode::ParseError, path + ": bad magic");
  unsigned char b4[4];
  if (!f.read(reinterpret_cast<char*>(b4), 4))
    throw Error(ErrorCode::ParseError, path + ": truncated header");
  uint32_t resolution = uint32_t(b4[0]) | uint32_t(b4[1]) << 8 | uint32_t(b4[2]) << 16 |
                        uint32_t(b4[3]) << 24;
  if (resolution < 2 || resolution > 0xfffc)
    throw Error(ErrorCode::ParseError, path + ": unreasonable resolution");
  TokenSequence seq;
  seq.vocab.resolution = int(resolution);
  seq.provenance = path;
  unsigned char b2[2];
  while (f.read(reinterpret_cast<char*>(b2), 2))
    seq.tokens.push_back(int(uint32_t(b2[0]) | uint32_t(b2[1]) << 8));
  return seq;
}

// Debug rendering: specials bracketed, coordinate runs grouped in x/y/z triples.
inline std::string to_debug_text(const TokenSequence& seq) {
  std::ostringstream out;
  const Vocabulary& v = seq.vocab;
  int in_triple = 0;
  bool first = true;
  auto sep = [&](bool triple_continues) -> std::ostream& {
    if (!first) out << (triple_continues ? "/" : " ");
    first = false;
    return out;
  };
  for (int t : seq.tokens) {
    if (v.is_coordinate(t)) {
      sep(in_triple > 0) << t;
      in_triple = (in_triple + 1) % 3;
    } else {
      in_triple = 0;
      if (t == v.bos()) sep(false) << "<BOS>";
      else if (t == v.eos()) sep(false) << "<EOS>";
      else if (t == v.group()) sep(false) << "<G>";
      else if (t == v.pad()) sep(false) << "<PAD>";
      else sep(false) << "<" << t << ">";
    }
  }
  return out.str();
}

}  // namespace rigkit
