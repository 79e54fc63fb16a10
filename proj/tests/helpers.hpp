#pragma once

#include <optional>
#include <vector>

#include "rigkit/core.hpp"
#include "rigkit/skeleton.hpp"

namespace test_helpers {

using rigkit::Skeleton;
using rigkit::Joint;
using rigkit::Vec3;

// chain 0 <- 1 <- 2 ... along +y
inline Skeleton make_chain(int k, double step = 0.1) {
  Skeleton s;
  for (int i = 0; i < k; ++i) {
    Joint j;
    j.id = i;
    j.position = {0.0, step * i, 0.0};
    if (i > 0) j.parent = i - 1;
    s.joints.push_back(j);
  }
  s.root = 0;
  return s;
}

// random valid tree with k joints: parent of i is a random earlier joint,
// positions spread over the unit cube
inline Skeleton make_random_tree(int k, rigkit::Rng& rng) {
  Skeleton s;
  for (int i = 0; i < k; ++i) {
    Joint j;
    j.id = i;
    j.position = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    if (i > 0) j.parent = int(rng.below(uint64_t(i)));
    s.joints.push_back(j);
  }
  s.root = 0;
  return s;
}

}  // namespace test_helpers
