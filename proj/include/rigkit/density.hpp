#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigkit/core.hpp"

namespace rigkit {

// Learnable soft binning of bone counts. Cutpoints are materialized from raw
// deltas through a cumulative softplus, which keeps them strictly increasing
// under any parameter update; every cutpoint (including the first) is
// parameterized the same way: c_i = e0 + sum_{j<=i} softplus(delta_j).
struct DensityBinner {
  int bins = 3;                              // K
  double edge_lo = 0.0, edge_hi = 400.0;     // e0, eK (fixed, non-trainable)
  std::vector<double> delta_raw;             // K-1 raw cutpoint increments
  std::vector<std::vector<double>> embeddings;  // K x C
  double tau = 5.0;                          // bin temperature (tau_bin)

  int width() const { return embeddings.empty() ? 0 : int(embeddings[0].size()); }

  bool valid() const {
    return bins >= 2 && width() >= 1 && int(delta_raw.size()) == bins - 1 &&
           int(embeddings.size()) == bins && tau > 0.0 && edge_lo < edge_hi;
  }
};

// Binner with the paper-level defaults: three bins cut at (50, 150) over bone
// counts in [0, 400].
inline DensityBinner default_density_binner(int embedding_width, uint64_t seed = 7) {
  DensityBinner b;
  b.bins = 3;
  b.edge_lo = 0.0;
  b.edge_hi = 400.0;
  b.delta_raw = {inv_softplus(50.0), inv_softplus(100.0)};
  b.tau = 5.0;
  Rng rng(seed);
  b.embeddings.assign(3, std::vector<double>(size_t(embedding_width)));
  for (auto& e : b.embeddings)
    for (auto& x : e) x = 0.02 * rng.normal();
  return b;
}

// Materialized cutpoints c_1..c_{K-1}, strictly increasing. The first cutpoint
// is clamped into (e0, eK]; with sane parameters the clamp is never active.
inline std::vector<double> cutpoints(const DensityBinner& b) {
  std::vector<double> c(size_t(b.bins - 1));
  double acc = b.edge_lo;
  for (int i = 0; i < b.bins - 1; ++i) {
    acc += softplus(b.delta_raw[size_t(i)]);
    if (i == 0) acc = std::min(acc, b.edge_hi);
    c[size_t(i)] = acc;
  }
  return c;
}

// left/right boundary of bin k (0-based) under the uniform notation:
// left_0 = e0, left_k = c_{k-1}; right_k = c_k, right_{K-1} = eK.
inline std::pair<double, double> bin_bounds(const DensityBinner& b,
                                            const std::vector<double>& cuts, int k) {
  double left = k == 0 ? b.edge_lo : cuts[size_t(k - 1)];
  double right = k == b.bins - 1 ? b.edge_hi : cuts[size_t(k)];
  return {left, right};
}

// Soft assignment p_k(n) = sigmoid((n-left_k)/tau) - sigmoid((n-right_k)/tau),
// normalized to sum to one. The normalizer is floored at 1e-12 so counts far
// outside [e0, eK] degrade instead of dividing by zero.
inline std::vector<double> soft_probs(const DensityBinner& b, double n) {
  auto cuts = cutpoints(b);
  std::vector<double> p(size_t(b.bins));
  double total = 0.0;
  for (int k = 0; k < b.bins; ++k) {
    auto [left, right] = bin_bounds(b, cuts, k);
    double s = sigmoid((n - left) / b.tau) - sigmoid((n - right) / b.tau);
    p[size_t(k)] = s;
    total += s;
  }
  double z = std::max(total, 1e-12);
  for (auto& x : p) x /= z;
  return p;
}

inline int hard_bin(const DensityBinner& b, double n) {
  auto p = soft_probs(b, n);
  int best = 0;
  for (int k = 1; k < b.bins; ++k)
    if (p[size_t(k)] > p[size_t(best)]) best = k;  // ties keep the lower index
  return best;
}

// 1-based density level (Level 1 = sparsest bin).
inline int density_level(const DensityBinner& b, double n) { return hard_bin(b, n) + 1; }

// F_density(n): probability-weighted embedding combination, or the argmax
// bin's embedding in hard mode.
inline std::vector<double> density_vector(const DensityBinner& b, double n,
                                          bool hard = false) {
  if (hard) return b.embeddings[size_t(hard_bin(b, n))];
  auto p = soft_probs(b, n);
  std::vector<double> f(size_t(b.width()), 0.0);
  for (int k = 0; k < b.bins; ++k)
    for (int c = 0; c < b.width(); ++c) f[size_t(c)] += p[size_t(k)] * b.embeddings[size_t(k)][size_t(c)];
  return f;
}

struct DensityGradients {
  std::vector<double> d_delta;                  // K-1
  std::vector<std::vector<double>> d_embeddings;  // K x C
  double d_tau = 0.0;
};

// Analytic partials of L = upstream . F_density(n) with respect to every raw
// parameter. `upstream` defaults to all-ones (the scalar probe loss used by
// grad_check).
inline DensityGradients density_gradients(const DensityBinner& b, double n,
                                          const std::vector<double>* upstream = nullptr) {
  const int K = b.bins;
  const int C = b.width();
  std::vector<double> g(size_t(C), 1.0);
  if (upstream) g = *upstream;

  auto cuts = cutpoints(b);
  std::vector<double> s(size_t(K)), u(size_t(K)), v(size_t(K));
  double z_raw = 0.0;
  for (int k = 0; k < K; ++k) {
    auto [left, right] = bin_bounds(b, cuts, k);
    u[size_t(k)] = (n - left) / b.tau;
    v[size_t(k)] = (n - right) / b.tau;
    s[size_t(k)] = sigmoid(u[size_t(k)]) - sigmoid(v[size_t(k)]);
    z_raw += s[size_t(k)];
  }
  const double z = std::max(z_raw, 1e-12);
  std::vector<double> p(size_t(K));
  for (int k = 0; k < K; ++k) p[size_t(k)] = s[size_t(k)] / z;

  // E_k = g . e_k; L = sum_k p_k E_k
  std::vector<double> E(size_t(K), 0.0);
  double L = 0.0;
  for (int k = 0; k < K; ++k) {
    for (int c = 0; c < C; ++c) E[size_t(k)] += g[size_t(c)] * b.embeddings[size_t(k)][size_t(c)];
    L += p[size_t(k)] * E[size_t(k)];
  }

  DensityGradients out;
  out.d_embeddings.assign(size_t(K), std::vector<double>(size_t(C)));
  for (int k = 0; k < K; ++k)
    for (int c = 0; c < C; ++c) out.d_embeddings[size_t(k)][size_t(c)] = p[size_t(k)] * g[size_t(c)];

  // dL/ds_k through the normalization; the 1e-12 floor is flat, so its branch
  // contributes zero exactly as in the forward value.
  std::vector<double> dL_ds(size_t(K), 0.0);
  if (z_raw >= 1e-12)
    for (int k = 0; k < K; ++k) dL_ds[size_t(k)] = (E[size_t(k)] - L) / z;
  else
    for (int k = 0; k < K; ++k) dL_ds[size_t(k)] = E[size_t(k)] / z;

  auto dsig = [](double x) {
    double sg = sigmoid(x);
    return sg * (1.0 - sg);
  };

  // dL/dc_m: c_m is the right edge of bin m and the left edge of bin m+1
  std::vector<double> dL_dc(size_t(K - 1), 0.0);
  for (int m = 0; m < K - 1; ++m) {
    dL_dc[size_t(m)] = dL_ds[size_t(m)] * (dsig(v[size_t(m)]) / b.tau) +
                       dL_ds[size_t(m + 1)] * (-dsig(u[size_t(m + 1)]) / b.tau);
  }

  out.d_delta.assign(size_t(K - 1), 0.0);
  for (int i = 0; i < K - 1; ++i) {
    double acc = 0.0;
    for (int m = i; m < K - 1; ++m) acc += dL_dc[size_t(m)];
    out.d_delta[size_t(i)] = acc * sigmoid(b.delta_raw[size_t(i)]);
  }

  double dtau = 0.0;
  for (int k = 0; k < K; ++k) {
    double ds_dtau =
        (dsig(v[size_t(k)]) * v[size_t(k)] - dsig(u[size_t(k)]) * u[size_t(k)]) / b.tau;
    dtau += dL_ds[size_t(k)] * ds_dtau;
  }
  out.d_tau = dtau;
  return out;
}

namespace detail {

inline double probe_loss(const DensityBinner& b, double n) {
  auto f = density_vector(b, n);
  double L = 0.0;
  for (double x : f) L += x;
  return L;
}

inline double rel_err(double a, double f) {
  double denom = std::max({std::abs(a), std::abs(f), 1e-8});
  return std::abs(a - f) / denom;
}

}  // namespace detail

// Compare every analytic partial against a central finite difference at step
// h; returns the worst relative error.
inline double grad_check(const DensityBinner& binner, double n, double h = 1e-5) {
  auto analytic = density_gradients(binner, n);
  double worst = 0.0;

  auto central = [&](DensityBinner& b, double* param) {
    double saved = *param;
    *param = saved + h;
    double up = detail::probe_loss(b, n);
    *param = saved - h;
    double dn = detail::probe_loss(b, n);
    *param = saved;
    return (up - dn) / (2.0 * h);
  };

  DensityBinner b = binner;
  for (int i = 0; i < b.bins - 1; ++i) {
    double fd = central(b, &b.delta_raw[size_t(i)]);
    worst = std::max(worst, detail::rel_err(analytic.d_delta[size_t(i)], fd));
  }
  for (int k = 0; k < b.bins; ++k) {
    for (int c = 0; c < b.width(); ++c) {
      double fd = central(b, &b.embeddings[size_t(k)][size_t(c)]);
      worst = std::max(worst, detail::rel_err(analytic.d_embeddings[size_t(k)][size_t(c)], fd));
    }
  }
  worst = std::max(worst, detail::rel_err(analytic.d_tau, central(b, &b.tau)));
  return worst;
}

// ---- parameter (de)serialization ----

inline nlohmann::ordered_json density_to_json(const DensityBinner& b) {
  return nlohmann::ordered_json{{"K", b.bins},       {"e0", b.edge_lo},
                                {"eK", b.edge_hi},   {"delta_raw", b.delta_raw},
                                {"embeddings", b.embeddings}, {"tau", b.tau}};
}

inline DensityBinner density_from_json(const nlohmann::json& j) {
  DensityBinner b;
  try {
    b.bins = j.at("K").get<int>();
    b.edge_lo = j.at("e0").get<double>();
    b.edge_hi = j.at("eK").get<double>();
    b.delta_raw = j.at("delta_raw").get<std::vector<double>>();
    b.embeddings = j.at("embeddings").get<std::vector<std::vector<double>>>();
    b.tau = j.at("tau").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("density params: ") + e.what());
  }
  if (!b.valid()) throw Error(ErrorCode::ParseError, "density params fail invariants");
  return b;
}

inline void write_density_file(const std::string& path, const DensityBinner& b) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  f << density_to_json(b).dump(2) << '\n';
}

inline DensityBinner read_density_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return density_from_json(j);
}

}  // namespace rigkit
