#include <cmath>
#include <numbers>

#include "gtest/gtest.h"

#include "franson/errors.hpp"
#include "franson/source.hpp"

using namespace franson::source;
using franson::fock::Occupation;

TEST(BinState, normalized_with_ancilla) {
  SourceParams p;
  p.q = 0.3;
  auto s = bin_state(p, 4, 0.7);
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-15);
  EXPECT_EQ(s.basis().modes()[0], photon_mode(4));
  EXPECT_EQ(s.basis().modes()[1], emitter_mode(4));
  // Photon probability q/2; emitter left excited with probability q/2.
  EXPECT_NEAR(s.mean_number(0), 0.15, 1e-15);
  EXPECT_NEAR(std::norm(s.amplitude({0, 1})), 0.15, 1e-15);
  EXPECT_NEAR(std::arg(s.amplitude({1, 0})), 0.7, 1e-15);
}

TEST(BinState, photon_coherence_matches_closed_form) {
  SourceParams p;
  for (double q : {0.0, 0.1, 0.5, 1.0}) {
    p.q = q;
    auto rho = franson::fock::reduced_density_matrix(bin_state(p, 0, 0.0), 0);
    EXPECT_NEAR(std::abs(rho(0, 1)), std::sqrt(q * (1 - q) / 2), 1e-15) << q;
  }
}

TEST(BinState, rejects_bad_q) {
  SourceParams p;
  p.q = 1.5;
  EXPECT_THROW(bin_state(p, 0, 0.0), franson::ConfigError);
  EXPECT_THROW(p.validate(), franson::ConfigError);
}

TEST(Background, coherent_state_statistics) {
  auto basis = franson::fock::make_basis({franson::fock::photonic("m", 0)}, 3);
  auto vac = franson::fock::FockState::vacuum(basis);
  auto d = displace(vac, 0, std::sqrt(0.05));
  // Truncated Poisson with mean 0.05: P(n) ~ e^{-x} x^n / n!, n <= 3.
  const double x = 0.05;
  double z = 0, m1 = 0, m2 = 0;
  for (int n = 0; n <= 3; ++n) {
    double pn = std::exp(-x) * std::pow(x, n) / std::tgamma(n + 1.0);
    z += pn;
    m1 += n * pn;
    m2 += n * (n - 1) * pn;
  }
  EXPECT_NEAR(d.truncated_weight, 1 - z, 1e-12);
  EXPECT_NEAR(g2_zero(d.state, 0), (m2 / z) / std::pow(m1 / z, 2), 1e-12);
  EXPECT_NEAR(g2_zero(d.state, 0), 1.0, 2e-3);
}

TEST(Background, beta_zero_is_identity_and_mean_scales) {
  SourceParams p;
  auto s = bin_state(p, 0, 0.0);
  auto same = add_laser_background(s, 0.0, 0.0);
  EXPECT_EQ(same.terms().size(), s.terms().size());
  EXPECT_NEAR(background_mean(0.5, 0.05), 0.05, 1e-15);
  EXPECT_THROW(background_mean(1.0, 0.05), franson::ConfigError);
}

TEST(Background, raises_photon_number) {
  SourceParams p;
  auto s = bin_state(p, 0, 0.3);
  auto b = add_laser_background(s, 0.2, 0.3);
  EXPECT_GT(b.mean_number(0), s.mean_number(0));
  EXPECT_NEAR(b.norm_squared(), 1.0, 1e-12);
}

TEST(Calibration, drive_power) {
  EXPECT_NEAR(power_calibration(0.01, 67.2e-12, 329.14e12) * 1e12, 32.454, 0.01);
  EXPECT_NEAR(power_calibration(9.81, 67.2e-12, 329.14e12), 3.1837e-8, 1e-11);
  EXPECT_THROW(power_calibration(0.0, 67.2e-12, 329.14e12), std::invalid_argument);
}

TEST(Autocorrelation, antibunching_and_background) {
  SourceParams p;
  EXPECT_NEAR(g2_source(p, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(g2_source(p, 1e-6), 1.0, 1e-12);
  p.beta = beta_for_g2_zero(0.037);
  EXPECT_NEAR(p.beta, 0.0187, 1e-4);
  EXPECT_NEAR(g2_source(p, 0.0), 0.037, 1e-12);
}

TEST(Params, json_round_trip_and_unknown_key) {
  SourceParams p;
  p.q = 0.2;
  p.beta = 0.05;
  auto back = source_params_from_json(to_json(p));
  EXPECT_DOUBLE_EQ(back.q, 0.2);
  EXPECT_NEAR(back.t1, p.t1, 1e-24);
  EXPECT_THROW(source_params_from_json({{"qq", 0.1}}), franson::ConfigError);
  EXPECT_THROW(p.check_timescales(1e-12), franson::ConfigError);
  EXPECT_NO_THROW(p.check_timescales(1.07e-9));
}
