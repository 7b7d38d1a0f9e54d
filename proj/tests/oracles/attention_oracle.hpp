#pragma once

#include <cmath>
#include <vector>

#include "pcattn/attention/block.hpp"
#include "pcattn/attention/config.hpp"
#include "pcattn/attention/params.hpp"
#include "pcattn/neighborhood/knn.hpp"

namespace oracle {

using pcattn::attention::AttentionConfig;
using pcattn::attention::AttentionParams;
using pcattn::attention::Method;
using pcattn::attention::PositionEncoding;
using pcattn::attention::Scope;
using pcattn::numerics::LinearParams;
using pcattn::numerics::Value;
using Vec = std::vector<double>;

/// Row-vector times weight matrix, read straight from the stored values.
inline Vec affine(const LinearParams& p, const Vec& in) {
  const std::size_t rows = p.in();
  const std::size_t cols = p.out();
  const auto w = p.weight.data();
  Vec out(cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) out[c] += in.at(r) * w[r * cols + c];
    if (p.bias) out[c] += p.bias->data()[c];
  }
  return out;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec row(const Value& m, std::size_t i) {
  const std::size_t w = m.shape()[1];
  return Vec(m.data().begin() + static_cast<std::ptrdiff_t>(i * w),
             m.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * w));
}

inline Vec cat(Vec a, const Vec& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline Vec minus(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline bool scaled(Method m) {
  return m == Method::g_dot || m == Method::g_l2sub || m == Method::l_dot || m == Method::l_offset_dot;
}

/// phi written as explicit loops over points, neighbors and channels.
/// Returns the [N, d] output row-major.
inline Vec loop_phi(const AttentionConfig& cfg, const AttentionParams& prm, const Value& xv, const Value& cv,
                    const pcattn::neighborhood::NeighborIndex* nb) {
  const std::size_t n = xv.shape()[0];
  const std::size_t d = cfg.dim;
  const bool pe1 = cfg.pe == PositionEncoding::pe1;
  const double sc = scaled(cfg.method) ? 1.0 / std::sqrt(static_cast<double>(d)) : 1.0;
  std::vector<Vec> x(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = row(xv, i);
    p[i] = row(cv, i);
    q[i] = affine(prm.wq, pe1 ? cat(x[i], p[i]) : x[i]);
  }
  Vec out(n * d, 0.0);

  if (cfg.scope == Scope::global) {
    std::vector<Vec> k(n), v(n);
    for (std::size_t j = 0; j < n; ++j) {
      const Vec in = pe1 ? cat(x[j], p[j]) : x[j];
      k[j] = affine(prm.wk, in);
      v[j] = affine(prm.wv, in);
      if (prm.pe.value) {
        const Vec e = affine(*prm.pe.value, p[j]);
        for (std::size_t c = 0; c < d; ++c) v[j][c] += e[c];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      Vec s(n);
      for (std::size_t j = 0; j < n; ++j) {
        if (cfg.method == Method::g_dot) {
          s[j] = dot(q[i], k[j]);
        } else {
          const Vec diff = minus(q[i], k[j]);
          s[j] = -dot(diff, diff);
        }
        if (prm.pe.score) s[j] += affine(*prm.pe.score, p[j])[0];
        if (prm.pe.key) s[j] += dot(q[i], affine(*prm.pe.key, p[j]));
        if (prm.pe.query) s[j] += dot(affine(*prm.pe.query, p[i]), k[j]);
        s[j] *= sc;
      }
      double mx = s[0];
      for (double t : s) mx = std::max(mx, t);
      double z = 0;
      for (double& t : s) z += (t = std::exp(t - mx));
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t c = 0; c < d; ++c) out[i * d + c] += s[j] / z * v[j][c];
    }
    return out;
  }

  const bool vec = cfg.method == Method::l_vec_sub || cfg.method == Method::l_vec_add;
  for (std::size_t g = 0; g < nb->groups.size(); ++g) {
    const auto& ids = nb->groups[g].ids;
    const LinearParams& wk = g == 0 ? prm.wk : prm.extras[g - 1].wk;
    const LinearParams& wv = g == 0 ? prm.wv : prm.extras[g - 1].wv;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = ids.cols;
      std::vector<Vec> s(m), v(m);
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t t = ids.at(i, j);
        const Vec r = minus(p[t], p[i]);
        Vec agg;
        if (cfg.aggregation.center) agg = cat(agg, x[i]);
        if (cfg.aggregation.neighbor) agg = cat(agg, x[t]);
        if (cfg.aggregation.offset) agg = cat(agg, minus(x[t], x[i]));
        if (pe1) agg = cat(agg, r);
        const Vec k = affine(wk, agg);
        v[j] = affine(wv, agg);
        if (prm.pe.value) {
          const Vec e = affine(*prm.pe.value, r);
          for (std::size_t c = 0; c < d; ++c) v[j][c] += e[c];
        }
        if (vec) {
          s[j].resize(d);
          const double sign = cfg.method == Method::l_vec_sub ? -1.0 : 1.0;
          for (std::size_t c = 0; c < d; ++c) s[j][c] = q[i][c] + sign * k[c];
          if (prm.pe.score) {
            const Vec e = affine(*prm.pe.score, r);
            for (std::size_t c = 0; c < d; ++c) s[j][c] += e[c];
          }
          if (prm.pe.key) {
            const Vec e = affine(*prm.pe.key, r);
            for (std::size_t c = 0; c < d; ++c) s[j][c] += q[i][c] * (e.size() == 1 ? e[0] : e[c]);
          }
        } else {
          double t0 = 0;
          switch (cfg.method) {
            case Method::l_dot:
              t0 = dot(q[i], k);
              break;
            case Method::l_offset_dot:
              t0 = dot(q[i], minus(q[i], k));
              break;
            case Method::l_add:
              for (std::size_t c = 0; c < d; ++c) t0 += prm.omega->data()[c] * std::tanh(q[i][c] + k[c]);
              break;
            default:  // l_concat
              for (std::size_t c = 0; c < d; ++c) {
                t0 += prm.omega->data()[c] * std::tanh(q[i][c]) + prm.omega->data()[d + c] * std::tanh(k[c]);
              }
          }
          if (prm.pe.score) t0 += affine(*prm.pe.score, r)[0];
          if (prm.pe.key) t0 += dot(q[i], affine(*prm.pe.key, r));
          if (prm.pe.query) t0 += dot(affine(*prm.pe.query, r), k);
          s[j] = Vec(d, t0);
        }
        for (double& e : s[j]) e *= sc;
      }
      Vec o(d, 0.0);
      for (std::size_t c = 0; c < d; ++c) {
        double mx = s[0][c];
        for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, s[j][c]);
        double z = 0;
        for (std::size_t j = 0; j < m; ++j) z += std::exp(s[j][c] - mx);
        for (std::size_t j = 0; j < m; ++j) o[c] += std::exp(s[j][c] - mx) / z * v[j][c];
      }
      if (g > 0) o = affine(prm.extras[g - 1].wo, o);
      for (std::size_t c = 0; c < d; ++c) out[i * d + c] += o[c];
    }
  }
  return out;
}

/// Locality shapes small enough for an 8-point cloud.
struct Locality {
  std::size_t k;
  std::vector<std::size_t> scales;
  pcattn::neighborhood::KeyMode mode;
};

inline std::vector<Locality> small_localities() {
  using pcattn::neighborhood::KeyMode;
  return {{3, {0}, KeyMode::one},      {2, {1}, KeyMode::one},      {2, {0, 1}, KeyMode::one},
          {2, {0, 1}, KeyMode::separate}, {1, {0, 1, 2}, KeyMode::one}, {2, {0, 1, 2}, KeyMode::separate}};
}

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::g_dot,  Method::g_l2sub,   Method::l_dot,     Method::l_offset_dot,
                                     Method::l_add,  Method::l_concat,  Method::l_vec_sub, Method::l_vec_add};
  return m;
}

inline const std::vector<PositionEncoding>& all_pes() {
  static const std::vector<PositionEncoding> p{PositionEncoding::none, PositionEncoding::pe1, PositionEncoding::pe2,
                                               PositionEncoding::pe3, PositionEncoding::pe4};
  return p;
}

/// Every valid (method, aggregation, pe) at the given width, with default
/// single-scale locality.
inline std::vector<AttentionConfig> valid_configs(std::size_t dim, std::size_t ffn_hidden, std::size_t k) {
  std::vector<AttentionConfig> out;
  for (Method m : all_methods()) {
    for (const auto& agg : pcattn::attention::allowed_aggregations(m)) {
      for (PositionEncoding pe : all_pes()) {
        AttentionConfig cfg;
        cfg.method = m;
        cfg.scope = pcattn::attention::scope_of(m);
        cfg.aggregation = agg;
        cfg.pe = pe;
        cfg.dim = dim;
        cfg.ffn_hidden = ffn_hidden;
        cfg.k = k;
        if (!pcattn::attention::validation_error(cfg)) out.push_back(cfg);
      }
    }
  }
  return out;
}

}  // namespace oracle
