#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rigkit {

enum class ErrorCode {
  OutOfRange,
  DegenerateExtent,
  EmptyMesh,
  DegenerateTriangleOnly,
  MissingLabel,
  UnknownFineId,
  DuplicateLabel,
  UnlabeledJoint,
  EmptySequence,
  MalformedBlocks,
  EmptySkeleton,
  NoBones,
  WidthMismatch,
  ContextOverflow,
  NaNLoss,
  ParseError,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateExtent: return "DegenerateExtent";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::DegenerateTriangleOnly: return "DegenerateTriangleOnly";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::UnknownFineId: return "UnknownFineId";
    case ErrorCode::DuplicateLabel: return "DuplicateLabel";
    case ErrorCode::UnlabeledJoint: return "UnlabeledJoint";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::MalformedBlocks: return "MalformedBlocks";
    case ErrorCode::EmptySkeleton: return "EmptySkeleton";
    case ErrorCode::NoBones: return "NoBones";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::ContextOverflow: return "ContextOverflow";
    case ErrorCode::NaNLoss: return "NaNLoss";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0.0 ? *this / n : Vec3{0, 0, 0};
  }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Strict weak order comparing (z, y, x); used wherever spatial ties must
// resolve deterministically.
inline bool zyx_less(const Vec3& a, const Vec3& b) {
  if (a.z != b.z) return a.z < b.z;
  if (a.y != b.y) return a.y < b.y;
  return a.x < b.x;
}

// Deterministic RNG wrapper. std:: distributions are avoided so that streams
// are reproducible independent of the standard library build.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix(seed)) {
    if (state_ == 0) state_ = 0x9e3779b97f4a7c15ull;
  }

  uint64_t next_u64() {
    // xorshift64*
    uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  // uniform in [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // uniform integer in [0, n)
  uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }
  int range(int lo, int hi) { return lo + int(below(uint64_t(hi - lo + 1))); }  // inclusive

  double normal() {
    // Box-Muller; one value per call keeps the stream layout simple.
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  Vec3 unit_vector() {
    // rejection sample inside the unit ball
    for (;;) {
      Vec3 v{uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)};
      double n2 = v.squared_norm();
      if (n2 > 1e-8 && n2 <= 1.0) return v / std::sqrt(n2);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  static uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }
  uint64_t state_;
};

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  if (x > 30.0) return x;  // log1p(exp(x)) == x to double precision
  return std::log1p(std::exp(x));
}

// inverse of softplus: y = log(1 + e^x)  =>  x = y + log(1 - e^-y)
inline double inv_softplus(double y) {
  return y + std::log(-std::expm1(-y));
}

}  // namespace rigkit
