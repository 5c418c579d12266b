#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"

#include "franson/analytics.hpp"
#include "franson/chsh.hpp"
#include "franson/fringe.hpp"

using namespace franson::analytics;
using franson::interferometer::Detector;

namespace {

constexpr double kPi = std::numbers::pi;

// Hand-derived closed forms for the ideal source (no background), intensity model.
double lag0_closed_form(double q, double dphi) { return q * q / 128 * (1 + std::cos(dphi)); }
double single_closed_form(double q, double phi) { return q / 8 * (1 + (1 - q) * std::cos(phi)); }

}  // namespace

TEST(CoincidenceRate, lag_zero_matches_closed_form) {
  ModelParams p;
  for (double q : {0.02, 0.1, 0.3}) {
    p.q = q;
    for (double pa : {0.0, 0.7, 2.0}) {
      for (double pb : {0.0, 1.3, kPi}) {
        EXPECT_NEAR(coincidence_rate(p, pa, pb, 0), lag0_closed_form(q, pa - pb), 1e-15);
      }
    }
  }
}

TEST(CoincidenceRate, lag_zero_other_pairs_are_complementary) {
  ModelParams p;
  const double pa = 0.4, pb = 1.1;
  const double r11 = coincidence_rate(p, pa, pb, 0, {Detector::kA1, Detector::kB1});
  const double r12 = coincidence_rate(p, pa, pb, 0, {Detector::kA1, Detector::kB2});
  const double r22 = coincidence_rate(p, pa, pb, 0, {Detector::kA2, Detector::kB2});
  EXPECT_NEAR(r11, r22, 1e-16);
  EXPECT_NEAR(r12, p.q * p.q / 128 * (1 - std::cos(pa - pb)), 1e-15);
}

TEST(CoincidenceRate, eq_zero_and_ratio_two) {
  ModelParams p;
  const double peak = coincidence_rate(p, 0.3, 0.3, 0);
  EXPECT_LT(coincidence_rate(p, 0.3 + kPi, 0.3, 0), 1e-12 * peak);
  EXPECT_NEAR(peak / coincidence_rate(p, kPi / 2, 0.0, 0), 2.0, 1e-9);
}

TEST(CoincidenceRate, direct_route_agrees) {
  ModelParams p;
  p.q = 0.2;
  for (int lag : {-3, -1, 0, 1, 2}) {
    const double h = coincidence_rate(p, 0.5, 2.1, lag, {Detector::kA2, Detector::kB1});
    const double d = coincidence_rate_direct(p, 0.5, 2.1, lag, {Detector::kA2, Detector::kB1});
    EXPECT_NEAR(h, d, 1e-14) << lag;
  }
  p.beta = 0.2;
  EXPECT_NEAR(coincidence_rate(p, 0.5, 2.1, 1), coincidence_rate_direct(p, 0.5, 2.1, 1), 1e-12);
}

TEST(CoincidenceRate, click_model_equals_intensity_at_lag_zero) {
  ModelParams p;
  ModelParams c = p;
  c.rate = RateModel::kClick;
  for (double d : {0.0, 1.0, 2.5}) EXPECT_NEAR(coincidence_rate(c, d, 0.0, 0), coincidence_rate(p, d, 0.0, 0), 1e-15);
}

TEST(CoincidenceRate, invalid_lag) {
  ModelParams p;
  p.n_bins = 3;
  EXPECT_THROW(coincidence_rate(p, 0, 0, 3), std::invalid_argument);
  EXPECT_NO_THROW(coincidence_rate(p, 0, 0, -2));
}

TEST(CoincidenceRate, swap_symmetry) {
  ModelParams p;
  const double r = coincidence_rate(p, 0.2, 1.0, 1, {Detector::kA1, Detector::kB2});
  EXPECT_NEAR(coincidence_rate(p, 0.2, 1.0, -1, {Detector::kB2, Detector::kA1}), r, 1e-16);
}

TEST(SingleRate, closed_form_and_visibility) {
  ModelParams p;
  for (double q : {0.02, 0.1, 0.5}) {
    p.q = q;
    for (double phi : {0.0, 1.0, kPi}) {
      EXPECT_NEAR(single_rate(p, phi, Detector::kA1), single_closed_form(q, phi), 1e-15);
      EXPECT_NEAR(single_rate(p, phi, Detector::kA2), single_closed_form(q, phi + kPi), 1e-15);
    }
  }
}

TEST(Baseline, factorizes_with_visibility_one_minus_q) {
  ModelParams p;
  p.q = 0.1;
  for (double pa : {0.0, 1.0, kPi}) {
    for (double pb : {0.3, 2.0}) {
      const double b = coincidence_rate(p, pa, pb, 2);
      const double expect = single_closed_form(p.q, pa) * single_closed_form(p.q, pb);
      EXPECT_NEAR(b / expect, 1.0, 1e-12);
      EXPECT_NEAR(coincidence_rate(p, pa, pb, 5), b, 1e-16);
    }
  }
}

TEST(Baseline, extreme_ratio) {
  ModelParams p;
  p.q = 0.02;
  const double v = 1 - p.q;
  const double ratio = coincidence_rate(p, kPi, kPi, 3) / coincidence_rate(p, 0, 0, 3);
  EXPECT_NEAR(ratio, std::pow((1 - v) / (1 + v), 2), 1e-12);
  EXPECT_NEAR(ratio, 1.03e-4, 0.02e-4);
}

TEST(Baseline, super_bunching_at_pi_pi) {
  ModelParams p;
  p.q = 0.1;
  double best = 0.0;
  std::pair<double, double> where;
  for (auto [pa, pb] : {std::pair{0.0, 0.0}, {0.0, kPi}, {kPi, 0.0}, {kPi, kPi}}) {
    const double g = coincidence_rate(p, pa, pb, 0) / coincidence_rate(p, pa, pb, 2);
    if (g > best) {
      best = g;
      where = {pa, pb};
    }
  }
  EXPECT_GT(best, 1.0);
  EXPECT_EQ(where, (std::pair{kPi, kPi}));
  EXPECT_NEAR(best, 1.0 / (p.q * p.q), 1e-9);
}

TEST(Background, lowers_lag_zero_visibility) {
  ModelParams p;
  p.beta = 0.3;
  for (auto mode : {BackgroundMode::kCoherent, BackgroundMode::kIncoherent}) {
    p.background = mode;
    const double hi = coincidence_rate(p, 0, 0, 0);
    const double lo = coincidence_rate(p, kPi, 0, 0);
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(lo, hi);
  }
}

TEST(SourceG2, zero_without_background_and_rising) {
  ModelParams p;
  EXPECT_NEAR(source_g2_zero(p), 0.0, 1e-15);
  double prev = 0.0;
  for (double beta : {0.1, 0.3, 0.5}) {
    p.beta = beta;
    p.background = BackgroundMode::kIncoherent;
    const double g = source_g2_zero(p);
    EXPECT_GT(g, prev);
    prev = g;
  }
}

TEST(G2Map, fringe_shift_between_phi_b_zero_and_pi) {
  ModelParams p;
  std::vector<double> grid;
  for (int i = 0; i < 24; ++i) grid.push_back(2 * kPi * i / 24);
  auto m0 = g2_map(grid, 0.0, p);
  auto mpi = g2_map(grid, kPi, p);
  const std::size_t zero = 3;  // dt = 0 with max_lag 3
  ASSERT_EQ(m0.dt[zero], 0.0);
  auto argmax = [&](const CorrelationMap& m) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (m.values[i][zero] > m.values[best][zero]) best = i;
    }
    return best;
  };
  EXPECT_EQ(argmax(m0), 0u);
  EXPECT_EQ(argmax(mpi), 12u);
  // Rescaled rows are shifted copies.
  const double s0 = m0.values[0][zero], spi = mpi.values[12][zero];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(m0.values[i][zero] / s0, mpi.values[(i + 12) % 24][zero] / spi, 1e-12);
  }
}

TEST(G2Map, common_phase_shift_invariance_at_zero_lag) {
  ModelParams p;
  std::vector<double> grid = {0.0, 1.0, 2.0};
  std::vector<double> shifted = {0.5, 1.5, 2.5};
  MapOptions o;
  o.max_lag = 0;
  auto a = g2_map(grid, 0.3, p, o);
  auto b = g2_map(shifted, 0.8, p, o);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.values[i][0], b.values[i][0], 1e-12);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(coincidence_rate(p, grid[i], 0.3, 0), coincidence_rate(p, shifted[i], 0.8, 0), 1e-16);
  }
}

TEST(G2Map, fine_grid_and_output_formats) {
  ModelParams p;
  MapOptions o;
  o.max_lag = 1;
  o.fine_steps = 4;
  auto m = g2_map({0.0, kPi}, 0.0, p, o);
  EXPECT_EQ(m.dt.size(), 9u);
  for (const auto& row : m.values) {
    for (double v : row) EXPECT_GE(v, 0.0);
  }
  const std::string csv = m.to_csv();
  EXPECT_EQ(csv.substr(0, 15), "phi_a,dt,value\n");
  EXPECT_EQ(m.to_json()["metadata"]["normalization"], "max");
  EXPECT_THROW(g2_map({}, 0.0, p), std::invalid_argument);
}

TEST(ChshAnalytic, ideal_model_reaches_tsirelson) {
  ModelParams p;
  auto r = chsh_analytic(p);
  EXPECT_NEAR(r.s, 2 * std::sqrt(2.0), 1e-9);
  for (const auto& c : r.correlations) EXPECT_LE(std::abs(c.e), 1.0 + 1e-12);
}

TEST(ChshAnalytic, background_sweep_is_decreasing) {
  ModelParams p;
  auto sweep = s_vs_background({0.0, 0.1, 0.2, 0.4, 0.6, 0.8}, p);
  ASSERT_EQ(sweep.rows.size(), 6u);
  EXPECT_NEAR(sweep.rows[0].s, 2 * std::sqrt(2.0), 1e-9);
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) EXPECT_LT(sweep.rows[i].s, sweep.rows[i - 1].s);
  ASSERT_TRUE(sweep.crossover_beta.has_value());
  EXPECT_GT(*sweep.crossover_beta, 0.0);
  EXPECT_THROW(s_vs_background({1.0}, p), std::invalid_argument);
}

TEST(Chsh, ideal_and_uniform_counts) {
  franson::chsh::Settings s;
  auto ideal = franson::chsh::chsh(franson::chsh::fringe_counts(s, 1.0, 1000));
  EXPECT_NEAR(ideal.s, 2 * std::sqrt(2.0), 1e-9);
  auto flat = franson::chsh::chsh(franson::chsh::fringe_counts(s, 0.0, 1000));
  EXPECT_NEAR(flat.s, 0.0, 1e-12);
  auto v = franson::chsh::chsh(franson::chsh::fringe_counts(s, 0.928, 1000));
  EXPECT_NEAR(v.s, 2.624, 1e-3);
}

TEST(Chsh, correlation_extremes_and_errors) {
  franson::chsh::Settings s{0.4, 0.4 + kPi, 0.4, 1.0};
  auto r = franson::chsh::chsh(franson::chsh::fringe_counts(s, 1.0, 50));
  EXPECT_NEAR(r.correlations[0].e, 1.0, 1e-9);
  EXPECT_NEAR(r.correlations[2].e, -1.0, 1e-9);
  franson::chsh::Counts zero;
  EXPECT_THROW(franson::chsh::chsh(zero), std::invalid_argument);
}

TEST(Chsh, common_phase_invariance_and_tsirelson) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 2 * kPi);
  for (int i = 0; i < 1000; ++i) {
    franson::chsh::Settings s{u(rng), u(rng), u(rng), u(rng)};
    const double v = franson::chsh::s_for_visibility(s, 1.0);
    EXPECT_LE(v, 2 * std::sqrt(2.0) + 1e-12);
    const double c = u(rng);
    franson::chsh::Settings t{s.a + c, s.a_prime + c, s.b + c, s.b_prime + c};
    EXPECT_NEAR(franson::chsh::s_for_visibility(t, 1.0), v, 1e-12);
  }
}

TEST(Chsh, sigma_matches_poisson_propagation) {
  // Single setting check by finite differences of E over each count.
  franson::chsh::Counts c = franson::chsh::fringe_counts({}, 0.9, 400);
  auto r = franson::chsh::chsh(c);
  const auto& pc = c.per_setting[0];
  std::array<double, 4> n = {pc.n11, pc.n12, pc.n21, pc.n22};
  std::array<double, 4> sign = {1, -1, -1, 1};
  auto e = [&](const std::array<double, 4>& m) {
    return (sign[0] * m[0] + sign[1] * m[1] + sign[2] * m[2] + sign[3] * m[3]) / (m[0] + m[1] + m[2] + m[3]);
  };
  double var = 0.0;
  for (int i = 0; i < 4; ++i) {
    auto up = n;
    up[static_cast<std::size_t>(i)] += 1e-4;
    const double d = (e(up) - e(n)) / 1e-4;
    var += d * d * n[static_cast<std::size_t>(i)];
  }
  EXPECT_NEAR(r.correlations[0].variance, var, 1e-6 * var);
}

TEST(Fringe, noiseless_full_visibility) {
  std::vector<franson::fringe::Point> pts;
  for (int i = 0; i < 12; ++i) {
    double phi = 2 * kPi * i / 12;
    pts.push_back({phi, 500 * (1 + std::cos(phi - 0.3))});
  }
  auto f = franson::fringe::fit_fringe(pts, 0.3);
  EXPECT_NEAR(f.visibility, 1.0, 1e-9);
  franson::fringe::FitOptions free;
  free.free_offset = true;
  auto g = franson::fringe::fit_fringe(pts, 0.0, free);
  EXPECT_NEAR(g.visibility, 1.0, 1e-9);
  EXPECT_NEAR(g.offset, 0.3, 1e-9);
}

TEST(Fringe, constant_input_has_zero_visibility) {
  std::vector<franson::fringe::Point> pts;
  for (int i = 0; i < 8; ++i) pts.push_back({2 * kPi * i / 8, 200});
  auto f = franson::fringe::fit_fringe(pts, 0.0);
  EXPECT_NEAR(f.visibility, 0.0, 1e-12);
  EXPECT_GT(f.sigma_visibility, 0.0);
}

TEST(Fringe, noisy_fringe_recovers_visibility) {
  std::mt19937_64 rng(42);
  int inside = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<franson::fringe::Point> pts;
    for (int i = 0; i < 16; ++i) {
      double phi = 2 * kPi * i / 16;
      std::poisson_distribution<int> d(100 * (1 + 0.928 * std::cos(phi)));
      pts.push_back({phi, static_cast<double>(d(rng))});
    }
    auto f = franson::fringe::fit_fringe(pts, 0.0);
    if (std::abs(f.visibility - 0.928) < 3 * f.sigma_visibility) ++inside;
  }
  EXPECT_GE(inside, 18);
}

TEST(Fringe, rejects_bad_input) {
  std::vector<franson::fringe::Point> few = {{0, 1}, {1, 2}, {2, 3}};
  EXPECT_THROW(franson::fringe::fit_fringe(few, 0.0), std::invalid_argument);
  std::vector<franson::fringe::Point> narrow;
  for (int i = 0; i < 6; ++i) narrow.push_back({0.1 * i, 10.0 + i});
  EXPECT_THROW(franson::fringe::fit_fringe(narrow, 0.0), std::invalid_argument);
  std::vector<franson::fringe::Point> same;
  for (int i = 0; i < 6; ++i) same.push_back({i % 2 == 0 ? 0.0 : 2 * kPi, 10.0});
  EXPECT_THROW(franson::fringe::fit_fringe(same, 0.0), std::domain_error);
}
