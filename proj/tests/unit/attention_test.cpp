#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "attention_oracle.hpp"
#include "pcattn/attention/block.hpp"
#include "pcattn/attention/position_encoding.hpp"
#include "pcattn/attention/scores.hpp"
#include "pcattn/errors.hpp"
#include "support.hpp"

using namespace pcattn;
using namespace pcattn::attention;
using numerics::Shape;
using numerics::Value;

namespace {

Value cloud_value(const std::vector<pcio::Vec3>& pts) {
  std::vector<double> flat;
  for (const auto& p : pts) flat.insert(flat.end(), p.begin(), p.end());
  return Value::constant(Shape{pts.size(), 3}, flat);
}

std::vector<double> as_vec(const Value& v) { return {v.data().begin(), v.data().end()}; }

std::string label(const AttentionConfig& cfg) { return describe(cfg); }

// Puts non-trivial values into every encoder so each PE term shows up.
AttentionParams params_for(const AttentionConfig& cfg, std::uint64_t seed) {
  numerics::Rng rng(seed);
  return make_attention_params(cfg, rng);
}

Value permute_rows(const Value& v, const std::vector<std::size_t>& perm) {
  const std::size_t w = v.shape()[1];
  std::vector<double> out(v.numel());
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t c = 0; c < w; ++c) out[i * w + c] = v.data()[perm[i] * w + c];
  return Value::constant(v.shape(), out);
}

}  // namespace

TEST(AggregationRules, AggregationMatrix) {
  const Aggregation N{false, true, false}, O{false, false, true}, CN{true, true, false}, CO{true, false, true},
      NO{false, true, true}, CNO{true, true, true}, C{true, false, false};
  const std::map<Method, std::set<std::string>> expected{
      {Method::g_dot, {to_string(Aggregation::none())}},
      {Method::g_l2sub, {to_string(Aggregation::none())}},
      {Method::l_dot, {to_string(N), to_string(O), to_string(CN), to_string(CO), to_string(NO), to_string(CNO)}},
      {Method::l_offset_dot, {to_string(N), to_string(CN)}},
      {Method::l_vec_sub, {to_string(N), to_string(CN)}},
      {Method::l_add, {to_string(N), to_string(O), to_string(NO)}},
      {Method::l_concat, {to_string(N), to_string(O), to_string(NO)}},
      {Method::l_vec_add, {to_string(N), to_string(O), to_string(NO)}},
  };
  std::size_t local_valid = 0;
  for (Method m : oracle::all_methods()) {
    std::set<std::string> accepted;
    for (int mask = 0; mask < 8; ++mask) {
      AttentionConfig cfg;
      cfg.method = m;
      cfg.scope = scope_of(m);
      cfg.aggregation = Aggregation::of(mask & 1, mask & 2, mask & 4);
      if (!validation_error(cfg)) accepted.insert(to_string(cfg.aggregation));
    }
    EXPECT_EQ(accepted, expected.at(m)) << to_string(m);
    if (scope_of(m) == Scope::local) local_valid += accepted.size();
  }
  EXPECT_EQ(local_valid, 6u + 2 + 2 + 3 + 3 + 3);
  (void)C;
}

TEST(AggregationRules, RejectionMessagesNameTheRule) {
  AttentionConfig cfg;
  cfg.method = Method::l_vec_sub;
  cfg.aggregation = Aggregation::of(false, false, true);
  EXPECT_NE(validation_error(cfg)->find("offset aggregation is implicit"), std::string::npos);
  cfg.method = Method::l_add;
  cfg.aggregation = Aggregation::of(true, true, false);
  EXPECT_NE(validation_error(cfg)->find("center aggregation is excluded"), std::string::npos);
  cfg.aggregation = Aggregation::none();
  EXPECT_NE(validation_error(cfg)->find("at least one aggregated feature"), std::string::npos);
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.method = Method::g_dot;
  cfg.scope = Scope::local;
  EXPECT_TRUE(validation_error(cfg).has_value());
  try {
    parse_method("g_add");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("too large"), std::string::npos);
  }
  EXPECT_THROW(parse_method("g_sub"), ConfigError);
  EXPECT_THROW(parse_method("l_bogus"), ConfigError);
}

TEST(AggregationRules, EveryValidPairConstructsAndRuns) {
  std::mt19937_64 rng(1);
  const auto pts = oracle::distinct_cloud(10, rng);
  const Value coords = cloud_value(pts);
  const Value x = oracle::random_const(Shape{10, 4}, rng);
  for (const auto& cfg : oracle::valid_configs(4, 8, 3)) {
    const auto prm = params_for(cfg, 2);
    const Value out = attention_block(cfg, prm, x, coords);
    EXPECT_EQ(out.shape(), (Shape{10, 4})) << label(cfg);
  }
}

TEST(AggregateLocal, Examples) {
  std::mt19937_64 rng(2);
  const Value center = oracle::random_const(Shape{3, 2}, rng);
  const Value grouped = oracle::random_const(Shape{3, 4, 2}, rng);
  const Value all = aggregate_local(center, grouped, Aggregation::of(true, true, true));
  ASSERT_EQ(all.shape(), (Shape{3, 4, 6}));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t c = 0; c < 2; ++c) {
        const double* r = all.data().data() + (i * 4 + j) * 6;
        EXPECT_EQ(r[c], center.data()[i * 2 + c]);
        EXPECT_EQ(r[2 + c], grouped.data()[(i * 4 + j) * 2 + c]);
        EXPECT_EQ(r[4 + c], r[2 + c] - r[c]);
      }
    }
  }
  const Value flat = Value::full(Shape{3, 4, 2}, 0.7);
  const Value off = aggregate_local(Value::full(Shape{3, 2}, 0.7), flat, Aggregation::of(false, false, true));
  for (double v : off.data()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(aggregate_local(center, grouped, Aggregation::none()), ConfigError);
  EXPECT_THROW(aggregate_local(center, oracle::random_const(Shape{2, 4, 2}, rng), Aggregation::of(0, 1, 0)),
               DimensionError);
}

TEST(PhiGlobal, DegenerateCases) {
  std::mt19937_64 rng(3);
  const Value v1 = oracle::random_const(Shape{1, 4}, rng);
  const Value q1 = oracle::random_const(Shape{1, 4}, rng);
  EXPECT_EQ(as_vec(phi_global_dot(q1, q1, v1)), as_vec(v1));
  EXPECT_LT(oracle::max_abs_diff(phi_global_l2(q1, q1, v1).data(), v1.data()), 1e-15);

  // Identical query and key rows: uniform weights, each output row is the V mean.
  std::vector<double> rep;
  for (int i = 0; i < 5; ++i) rep.insert(rep.end(), {0.3, -0.2, 0.9});
  const Value q = Value::constant(Shape{5, 3}, rep);
  const Value v = oracle::random_const(Shape{5, 3}, rng);
  const Value out = phi_global_dot(q, q, v);
  for (std::size_t c = 0; c < 3; ++c) {
    double mean = 0;
    for (std::size_t j = 0; j < 5; ++j) mean += v.data()[j * 3 + c] / 5;
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(out.data()[i * 3 + c], mean, 1e-12);
  }
}

TEST(PhiGlobal, L2SelfColumnDominates) {
  std::mt19937_64 rng(4);
  const std::size_t n = 6;
  const Value q = oracle::random_const(Shape{n, 5}, rng, -3, 3);
  std::vector<double> eye(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = 1.0;
  const Value out = phi_global_l2(q, q, Value::constant(Shape{n, n}, eye));
  const Value s = global_scores(Method::g_l2sub, q, q);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(s.data()[i * n + i], 0.0, 1e-12);
    const auto r = out.data().subspan(i * n, n);
    EXPECT_EQ(static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin()), i);
    for (std::size_t j = 0; j < n; ++j) EXPECT_LE(s.data()[i * n + j], 1e-12);
  }
}

TEST(PhiGlobal, L2ExpansionMatchesDirectSubtraction) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + t % 12, m = 1 + (t * 7) % 9, d = 1 + t % 6;
    const Value q = oracle::random_const(Shape{n, d}, rng, -2, 2);
    const Value k = oracle::random_const(Shape{m, d}, rng, -2, 2);
    const Value s = global_scores(Method::g_l2sub, q, k);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double direct = 0;
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = q.data()[i * d + c] - k.data()[j * d + c];
          direct -= diff * diff;
        }
        ASSERT_LT(std::abs(s.data()[i * m + j] - direct), 1e-9);
      }
    }
  }
}

TEST(PhiGlobal, DotMatchesLoopOracle) {
  std::mt19937_64 rng(6);
  const std::size_t n = 8, d = 4;
  const Value q = oracle::random_const(Shape{n, d}, rng), k = oracle::random_const(Shape{n, d}, rng),
              v = oracle::random_const(Shape{n, d}, rng);
  const Value out = phi_global_dot(q, k, v);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(n);
    double z = 0;
    for (std::size_t j = 0; j < n; ++j) {
      double dotp = 0;
      for (std::size_t c = 0; c < d; ++c) dotp += q.data()[i * d + c] * k.data()[j * d + c];
      z += s[j] = std::exp(dotp / 2.0);
    }
    for (std::size_t c = 0; c < d; ++c) {
      double o = 0;
      for (std::size_t j = 0; j < n; ++j) o += s[j] / z * v.data()[j * d + c];
      EXPECT_NEAR(out.data()[i * d + c], o, 1e-12);
    }
  }
}

TEST(PhiLocal, HandExamples) {
  // l_dot, N=2, two slots, d=1: scores q*k (scale 1 at d=1).
  const Value q = Value::constant(Shape{2, 1}, {1.0, -2.0});
  const Value k = Value::constant(Shape{2, 2, 1}, {0.5, 1.5, 1.0, 0.0});
  const Value v = Value::constant(Shape{2, 2, 1}, {10.0, 20.0, 3.0, 7.0});
  const Value out = phi_local_scalar(Method::l_dot, q, k, v);
  const double a0 = std::exp(0.5) / (std::exp(0.5) + std::exp(1.5));
  const double a1 = std::exp(-2.0) / (std::exp(-2.0) + std::exp(0.0));
  EXPECT_NEAR(out.data()[0], a0 * 10 + (1 - a0) * 20, 1e-14);
  EXPECT_NEAR(out.data()[1], a1 * 3 + (1 - a1) * 7, 1e-14);

  std::mt19937_64 rng(7);
  const Value vv = oracle::random_const(Shape{3, 4, 2}, rng);
  const Value qq = oracle::random_const(Shape{3, 2}, rng);
  const Value kk = oracle::random_const(Shape{3, 4, 2}, rng);
  auto neighbor_mean = [&](std::size_t i, std::size_t c) {
    double m = 0;
    for (std::size_t j = 0; j < 4; ++j) m += vv.data()[(i * 4 + j) * 2 + c] / 4;
    return m;
  };
  // omega = 0 gives uniform weights.
  const Value add_out = phi_local_scalar(Method::l_add, qq, kk, vv, Value::zeros(Shape{2}));
  // K_ij = Q_i zeroes the offset-dot and vector-sub scores.
  const Value qr = numerics::broadcast_to(numerics::reshape(qq, Shape{3, 1, 2}), Shape{3, 4, 2});
  const Value off_out = phi_local_scalar(Method::l_offset_dot, qq, qr, vv);
  const Value vec_out = phi_local_vector(Method::l_vec_sub, qq, qr, vv);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t c = 0; c < 2; ++c) {
      EXPECT_NEAR(add_out.data()[i * 2 + c], neighbor_mean(i, c), 1e-12);
      EXPECT_NEAR(off_out.data()[i * 2 + c], neighbor_mean(i, c), 1e-12);
      EXPECT_NEAR(vec_out.data()[i * 2 + c], neighbor_mean(i, c), 1e-12);
    }
  }
  // one slot: weights are all 1.
  const Value v1 = oracle::random_const(Shape{3, 1, 2}, rng);
  const Value one = phi_local_vector(Method::l_vec_add, qq, oracle::random_const(Shape{3, 1, 2}, rng), v1);
  EXPECT_LT(oracle::max_abs_diff(one.data(), v1.data()), 1e-15);

  EXPECT_THROW(phi_local_scalar(Method::l_add, qq, kk, vv), ConfigError);
  EXPECT_THROW(phi_local_scalar(Method::l_concat, qq, kk, vv, Value::zeros(Shape{2})), DimensionError);
}

TEST(PhiLocal, VectorMatchesTripleLoop) {
  std::mt19937_64 rng(8);
  const std::size_t n = 4, m = 3, d = 2;
  const Value q = oracle::random_const(Shape{n, d}, rng), k = oracle::random_const(Shape{n, m, d}, rng),
              v = oracle::random_const(Shape{n, m, d}, rng);
  for (Method method : {Method::l_vec_sub, Method::l_vec_add}) {
    const Value out = phi_local_vector(method, q, k, v);
    const double sign = method == Method::l_vec_sub ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d; ++c) {
        double z = 0, o = 0;
        for (std::size_t j = 0; j < m; ++j) z += std::exp(q.data()[i * d + c] + sign * k.data()[(i * m + j) * d + c]);
        for (std::size_t j = 0; j < m; ++j) {
          o += std::exp(q.data()[i * d + c] + sign * k.data()[(i * m + j) * d + c]) / z * v.data()[(i * m + j) * d + c];
        }
        EXPECT_NEAR(out.data()[i * d + c], o, 1e-12);
      }
    }
  }
}

TEST(PhiLocal, ScalarConvexity) {
  std::mt19937_64 rng(9);
  for (Method m : {Method::l_dot, Method::l_offset_dot, Method::l_add, Method::l_concat}) {
    const std::size_t n = 5, slots = 6, d = 3;
    const Value q = oracle::random_const(Shape{n, d}, rng, -4, 4);
    const Value k = oracle::random_const(Shape{n, slots, d}, rng, -4, 4);
    const Value per_point = oracle::random_const(Shape{n, 1, d}, rng);
    const Value v = numerics::broadcast_to(per_point, Shape{n, slots, d});
    std::optional<Value> omega;
    if (needs_omega(m)) omega = oracle::random_const(Shape{omega_length(m, d)}, rng, -3, 3);
    const Value out = phi_local_scalar(m, q, k, v, omega);
    EXPECT_LT(oracle::max_abs_diff(out.data(), per_point.data()), 1e-10) << to_string(m);
  }
}

TEST(PhiLocal, VectorWeightsSumToOnePerChannel) {
  std::mt19937_64 rng(10);
  const std::size_t n = 6, slots = 5, d = 4;
  const Value scores = oracle::random_const(Shape{n, slots, d}, rng, -20, 20);
  const Value ones = Value::full(Shape{n, slots, d}, 1.0);
  for (double v : as_vec(attend_vector(scores, ones))) EXPECT_NEAR(v, 1.0, 1e-9);
  const Value w = numerics::softmax(scores, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      double s = 0;
      for (std::size_t j = 0; j < slots; ++j) {
        const double a = w.data()[(i * slots + j) * d + c];
        EXPECT_GE(a, 0.0);
        s += a;
      }
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(AttentionPhi, MatchesLoopOracleEverywhere) {
  std::mt19937_64 rng(11);
  const std::size_t n = 8, d = 3;
  std::size_t cases = 0;
  for (const auto& base : oracle::valid_configs(d, 6, 3)) {
    for (const auto& loc : oracle::small_localities()) {
      for (Basis basis : {Basis::coords, Basis::features}) {
        AttentionConfig cfg = base;
        cfg.k = loc.k;
        cfg.scales = loc.scales;
        cfg.key_mode = loc.mode;
        cfg.basis = basis;
        if (cfg.scope == Scope::global && (cases % 7 != 0)) {
          ++cases;
          continue;  // locality is irrelevant for global methods
        }
        const auto pts = oracle::distinct_cloud(n, rng);
        const Value coords = cloud_value(pts);
        const Value x = oracle::random_const(Shape{n, d}, rng);
        const auto prm = params_for(cfg, cases);
        std::optional<neighborhood::NeighborIndex> nb;
        if (cfg.scope == Scope::local) nb = neighbors_for(cfg, x, coords);
        const auto want = oracle::loop_phi(cfg, prm, x, coords, nb ? &*nb : nullptr);
        for (KeyRoute route : {KeyRoute::expanded, KeyRoute::factored}) {
          const Value got = attention_phi(cfg, prm, x, coords, nb ? &*nb : nullptr, BlockOptions{route});
          ASSERT_LT(oracle::max_abs_diff(got.data(), want), 1e-10)
              << label(cfg) << (route == KeyRoute::expanded ? " expanded" : " factored");
        }
        ++cases;
      }
    }
  }
  EXPECT_GT(cases, 300u);
}

TEST(AttentionPhi, BiasedEncodersStillMatchAcrossRoutes) {
  std::mt19937_64 rng(12);
  for (auto cfg : oracle::valid_configs(3, 6, 3)) {
    if (cfg.scope != Scope::local || (cfg.pe != PositionEncoding::pe2 && cfg.pe != PositionEncoding::pe3)) continue;
    auto prm = params_for(cfg, 4);
    for (auto* e : {&prm.pe.score, &prm.pe.key, &prm.pe.query, &prm.pe.value}) {
      if (*e) (*e)->bias = oracle::random_param(Shape{(*e)->out()}, rng);
    }
    const auto pts = oracle::distinct_cloud(10, rng);
    const Value coords = cloud_value(pts);
    const Value x = oracle::random_const(Shape{10, 3}, rng);
    const auto nb = neighbors_for(cfg, x, coords);
    const auto want = oracle::loop_phi(cfg, prm, x, coords, &nb);
    for (KeyRoute route : {KeyRoute::expanded, KeyRoute::factored}) {
      EXPECT_LT(oracle::max_abs_diff(attention_phi(cfg, prm, x, coords, &nb, {route}).data(), want), 1e-10)
          << label(cfg);
    }
  }
}

TEST(PositionEncoding, ZeroEncodersAreIdentity) {
  std::mt19937_64 rng(13);
  const auto pts = oracle::distinct_cloud(12, rng);
  const Value coords = cloud_value(pts);
  const Value x = oracle::random_const(Shape{12, 4}, rng);
  for (auto cfg : oracle::valid_configs(4, 8, 3)) {
    if (cfg.pe != PositionEncoding::pe2 && cfg.pe != PositionEncoding::pe3 && cfg.pe != PositionEncoding::pe4) continue;
    auto prm = params_for(cfg, 5);
    for (auto* e : {&prm.pe.score, &prm.pe.key, &prm.pe.query, &prm.pe.value}) {
      if (*e) std::fill((*e)->weight.mutable_data().begin(), (*e)->weight.mutable_data().end(), 0.0);
    }
    AttentionConfig plain = cfg;
    plain.pe = PositionEncoding::none;
    AttentionParams plain_prm = prm;
    plain_prm.pe = {};
    EXPECT_LT(oracle::max_abs_diff(attention_phi(cfg, prm, x, coords).data(),
                                   attention_phi(plain, plain_prm, x, coords).data()),
              1e-14)
        << label(cfg);
  }
}

TEST(PositionEncoding, Pe1WithZeroExtendedWeightsIsIdentity) {
  std::mt19937_64 rng(14);
  const auto pts = oracle::distinct_cloud(12, rng);
  const Value coords = cloud_value(pts);
  const Value x = oracle::random_const(Shape{12, 4}, rng);
  auto extend = [](const numerics::LinearParams& p) {
    std::vector<double> w(p.weight.data().begin(), p.weight.data().end());
    w.resize(w.size() + 3 * p.out(), 0.0);
    return numerics::LinearParams{Value::parameter(Shape{p.in() + 3, p.out()}, w), std::nullopt};
  };
  for (auto cfg : oracle::valid_configs(4, 8, 3)) {
    if (cfg.pe != PositionEncoding::none) continue;
    const auto prm = params_for(cfg, 6);
    AttentionConfig with = cfg;
    with.pe = PositionEncoding::pe1;
    AttentionParams ext = prm;
    ext.wq = extend(prm.wq);
    ext.wk = extend(prm.wk);
    ext.wv = extend(prm.wv);
    EXPECT_LT(oracle::max_abs_diff(attention_phi(cfg, prm, x, coords).data(),
                                   attention_phi(with, ext, x, coords).data()),
              1e-14)
        << label(cfg);
  }
}

TEST(PositionEncoding, GlobalPe3ParameterDelta) {
  AttentionConfig cfg;
  cfg.scope = Scope::global;
  cfg.method = Method::g_l2sub;
  cfg.aggregation = Aggregation::none();
  const auto base = linear_weight_count(params_for(cfg, 0));
  cfg.pe = PositionEncoding::pe3;
  EXPECT_EQ(linear_weight_count(params_for(cfg, 0)) - base, 768u);
  EXPECT_EQ(linear_weight_count(params_for(cfg, 0)), 180992u);
}

TEST(PositionEncoding, RejectsBadCoordinates) {
  AttentionConfig cfg;
  cfg.pe = PositionEncoding::pe2;
  cfg.aggregation = Aggregation::of(false, true, false);
  cfg.dim = 2;
  const auto prm = params_for(cfg, 0);
  const Value q = Value::zeros(Shape{2, 2});
  ScoresAndValues sv{Value::zeros(Shape{2, 3}), Value::zeros(Shape{2, 3, 2})};
  EXPECT_THROW(apply_position_encoding(cfg, prm.pe, sv, q, Value::zeros(Shape{2, 3, 2}), Value::zeros(Shape{2, 3, 2})),
               DimensionError);
  cfg.method = Method::l_vec_sub;
  cfg.pe = PositionEncoding::pe4;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(AttentionBlock, ZeroValuesGiveFfnOfInput) {
  std::mt19937_64 rng(15);
  const auto pts = oracle::distinct_cloud(10, rng);
  const Value coords = cloud_value(pts);
  const Value x = oracle::random_const(Shape{10, 4}, rng);
  for (const auto& cfg : oracle::valid_configs(4, 8, 3)) {
    if (cfg.pe != PositionEncoding::none) continue;
    auto prm = params_for(cfg, 7);
    std::fill(prm.wv.weight.mutable_data().begin(), prm.wv.weight.mutable_data().end(), 0.0);
    const Value want = numerics::linear(numerics::relu(numerics::linear(x, prm.ffn1)), prm.ffn2);
    EXPECT_LT(oracle::max_abs_diff(attention_block(cfg, prm, x, coords).data(), want.data()), 1e-14) << label(cfg);
  }
}

TEST(AttentionBlock, PermutationEquivariance) {
  std::mt19937_64 rng(16);
  const std::size_t n = 24;
  for (const auto& base : oracle::valid_configs(4, 8, 4)) {
    for (Basis basis : {Basis::coords, Basis::features}) {
      AttentionConfig cfg = base;
      cfg.basis = basis;
      if (cfg.scope == Scope::local && basis == Basis::features) {
        cfg.scales = {0, 1};
        cfg.key_mode = KeyMode::separate;
      }
      const auto pts = oracle::distinct_cloud(n, rng);
      const Value coords = cloud_value(pts);
      const Value x = oracle::random_const(Shape{n, 4}, rng);
      const auto prm = params_for(cfg, 8);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      const Value out = attention_block(cfg, prm, x, coords);
      const Value out_p = attention_block(cfg, prm, permute_rows(x, perm), permute_rows(coords, perm));
      EXPECT_LT(oracle::max_abs_diff(out_p.data(), permute_rows(out, perm).data()), 1e-9) << label(cfg);
    }
  }
}

TEST(AttentionBlock, InputChecks) {
  AttentionConfig cfg;
  cfg.dim = 4;
  cfg.k = 3;
  const auto prm = params_for(cfg, 0);
  std::mt19937_64 rng(17);
  const Value coords = cloud_value(oracle::distinct_cloud(6, rng));
  EXPECT_THROW(attention_block(cfg, prm, Value::zeros(Shape{6, 5}), coords), DimensionError);
  EXPECT_THROW(attention_block(cfg, prm, Value::zeros(Shape{5, 4}), coords), DimensionError);
  cfg.k = 8;
  EXPECT_THROW(attention_block(cfg, params_for(cfg, 0), Value::zeros(Shape{6, 4}), coords), ContractError);
  AttentionConfig other = cfg;
  other.k = 3;
  other.aggregation = Aggregation::of(true, true, false);
  EXPECT_THROW(attention_block(other, prm, Value::zeros(Shape{6, 4}), coords), ContractError);
}

TEST(AttentionParams, ShapesAndNames) {
  AttentionConfig cfg;
  cfg.method = Method::l_concat;
  cfg.aggregation = Aggregation::of(false, true, true);
  cfg.scales = {0, 1, 2};
  cfg.key_mode = KeyMode::separate;
  cfg.pe = PositionEncoding::pe2;
  cfg.dim = 8;
  const auto prm = params_for(cfg, 0);
  EXPECT_EQ(prm.wk.in(), 16u);
  EXPECT_EQ(prm.omega->numel(), 16u);
  EXPECT_EQ(prm.extras.size(), 2u);
  EXPECT_EQ(prm.pe.score->out(), 1u);
  EXPECT_EQ(prm.pe.value->out(), 8u);
  EXPECT_EQ(vector_param_count(prm), 16u);
  std::set<std::string> names;
  for (const auto& [name, v] : named_parameters(prm, "b0.")) {
    EXPECT_EQ(name.rfind("b0.", 0), 0u);
    EXPECT_TRUE(names.insert(name).second) << name;
  }
  EXPECT_TRUE(names.count("b0.extra1.wk"));
  cfg.pe = PositionEncoding::pe1;
  EXPECT_EQ(query_input_width(cfg), 11u);
  EXPECT_EQ(key_input_width(cfg), 19u);
}
