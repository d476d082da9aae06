#include "dce/squid.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "dce/errors.hpp"

using namespace dce;
using namespace dce::squid;

namespace {

PumpConfig pump(double phi_dc, double phi_ac) {
  PumpConfig c;
  c.phi_dc = phi_dc;
  c.phi_ac = phi_ac;
  return c;
}

// Plain complex DFT of 1/L_J over one period with its own sampling.
std::complex<double> direct_harmonic(const PumpConfig& cfg, const SquidParams& p, int k, int n) {
  std::complex<double> sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * constants::kPi * i / n;
    const double g = 1.0 / josephson_inductance(cfg.phi_dc + cfg.phi_ac * std::sin(t), p);
    sum += g * std::exp(std::complex<double>(0.0, -k * t));
  }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST(Squid, InductanceAtZeroFlux) {
  const SquidParams p;
  const double want = 2.067833848e-15 / (2 * constants::kPi * 3.4e-6);
  EXPECT_NEAR(josephson_inductance(0.0, p), want, 1e-9 * want);
  EXPECT_NEAR(josephson_inductance(0.0, p), 9.68e-11, 0.01e-11);
  EXPECT_DOUBLE_EQ(josephson_inductance(1.0, p), josephson_inductance(0.0, p));
}

TEST(Squid, InductanceSingularAtHalfFlux) {
  EXPECT_THROW(josephson_inductance(0.5, SquidParams{}), SingularInductanceError);
  EXPECT_THROW(josephson_inductance(-1.5, SquidParams{}), SingularInductanceError);
}

TEST(Squid, InductanceEvenAndPeriodic) {
  const SquidParams p;
  for (double phi = -0.45; phi <= 0.45; phi += 0.01) {
    const double l = josephson_inductance(phi, p);
    EXPECT_NEAR(josephson_inductance(-phi, p), l, 1e-12 * l);
    EXPECT_NEAR(josephson_inductance(phi + 1.0, p), l, 1e-12 * l);
    EXPECT_NEAR(josephson_inductance(phi - 2.0, p), l, 1e-12 * l);
  }
}

TEST(Squid, ReflectionPhase) {
  SquidParams p;
  const double lj = p.flux_quantum_wb / (2 * constants::kPi * p.critical_current_a * std::cos(0.41 * constants::kPi));
  const double want = -2 * std::atan(2 * constants::kPi * 4.1e9 * lj / 50.0);
  EXPECT_NEAR(reflection_phase(4.1e9, -0.41, p), want, 1e-12);
  p.critical_current_a = 1.0;  // L_J tiny: near-perfect short
  EXPECT_NEAR(reflection_phase(4.1e9, 0.0, p), 0.0, 1e-6);
  p.critical_current_a = 1e3;
  const double small = reflection_phase(4.1e9, 0.0, p);
  const double small_angle = -4 * constants::kPi * 4.1e9 * josephson_inductance(0.0, p) / 50.0;
  EXPECT_NEAR(small, small_angle, 0.01 * std::abs(small_angle));
}

TEST(Squid, ReflectionPhaseEvenInFlux) {
  const SquidParams p;
  for (double phi = 0.0; phi < 0.45; phi += 0.05) {
    EXPECT_DOUBLE_EQ(reflection_phase(4.8e9, phi, p), reflection_phase(4.8e9, -phi, p));
  }
}

TEST(Squid, ReflectionIsLossless) {
  const SquidParams p;
  for (double f = 1e9; f < 10e9; f += 0.7e9) {
    for (double phi = -0.45; phi <= 0.45; phi += 0.05) {
      EXPECT_NEAR(std::abs(reflection_coefficient(f, phi, p)), 1.0, 1e-15);
    }
  }
}

TEST(Squid, MirrorSpeed) {
  const SquidParams p;
  EXPECT_EQ(effective_mirror_speed(pump(-0.41, 0.0), p), 0.0);
  const double v1 = effective_mirror_speed(pump(-0.41, 0.0025), p);
  const double v2 = effective_mirror_speed(pump(-0.41, 0.005), p);
  EXPECT_NEAR(v2 / v1, 2.0, 0.02);
  const double v20 = effective_mirror_speed(pump(-0.41, 0.020), p);
  EXPECT_GT(v20, 1e-3);
  EXPECT_LT(v20, 1e-1);
  double prev = 0.0;
  for (double a = 0.001; a <= 0.03; a += 0.001) {
    const double v = effective_mirror_speed(pump(-0.41, a), p);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Squid, MirrorSpeedRejectsSingularSwing) {
  EXPECT_THROW(effective_mirror_speed(pump(-0.45, 0.06), SquidParams{}), SingularInductanceError);
}

TEST(Squid, HarmonicsVanishWithoutDrive) {
  const auto s = harmonic_decomposition(pump(-0.41, 0.0), SquidParams{}, 8);
  for (const auto& a : s.amplitudes) EXPECT_LE(std::abs(a), 1e-15 * std::abs(s.dc_term));
}

TEST(Squid, HarmonicScaling) {
  const SquidParams p;
  const auto s1 = harmonic_decomposition(pump(-0.41, 0.001), p, 4);
  const auto s2 = harmonic_decomposition(pump(-0.41, 0.002), p, 4);
  EXPECT_NEAR(std::abs(s2.amplitudes[0]) / std::abs(s1.amplitudes[0]), 2.0, 0.01);
  EXPECT_NEAR(std::abs(s2.amplitudes[1]) / std::abs(s1.amplitudes[1]), 4.0, 0.04);
}

TEST(Squid, SymmetricPointHasOnlyEvenHarmonics) {
  const auto s = harmonic_decomposition(pump(0.0, 0.02), SquidParams{}, 6);
  const double a2 = std::abs(s.amplitudes[1]);
  EXPECT_GT(a2, 0.0);
  EXPECT_LT(std::abs(s.amplitudes[0]), 1e-12 * a2);
  EXPECT_LT(std::abs(s.amplitudes[2]), 1e-12 * a2);
  EXPECT_NEAR(dce_purity(pump(0.0, 0.02), SquidParams{}), 0.0, 1e-12);
}

TEST(Squid, SecondHarmonicRatioGrows) {
  const SquidParams p;
  double prev = 0.0;
  for (double a = 0.001; a <= 0.030 + 1e-12; a += 0.001) {
    const auto s = harmonic_decomposition(pump(-0.41, a), p, 4);
    const double ratio = std::abs(s.amplitudes[1]) / std::abs(s.amplitudes[0]);
    EXPECT_GT(ratio, prev) << "phi_ac=" << a;
    prev = ratio;
  }
}

TEST(Squid, HarmonicsMatchDirectDft) {
  const SquidParams p;
  for (const auto& cfg : {pump(-0.41, 0.013), pump(-0.41, 0.025), pump(0.2, 0.1), pump(0.0, 0.3)}) {
    const auto s = harmonic_decomposition(cfg, p, 8);
    const double scale = std::abs(direct_harmonic(cfg, p, 0, 1000));
    for (int k = 1; k <= 8; ++k) {
      const auto want = direct_harmonic(cfg, p, k, 1000);
      EXPECT_NEAR(std::abs(s.amplitudes[k - 1] - want), 0.0, 1e-12 * scale) << "k=" << k;
    }
  }
}

TEST(Squid, ParsevalAtSixteenHarmonics) {
  const SquidParams p;
  for (const auto& cfg : {pump(-0.41, 0.013), pump(-0.41, 0.03), pump(0.1, 0.2)}) {
    const auto s = harmonic_decomposition(cfg, p, 16);
    const int n = 4096;
    double power = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = 1.0 / josephson_inductance(cfg.phi_dc + cfg.phi_ac * std::sin(2 * constants::kPi * i / n), p);
      power += g * g;
    }
    power /= n;
    EXPECT_NEAR(s.series_power(), power, 1e-6 * power);
  }
}

TEST(Squid, PurityIsFundamentalFraction) {
  const SquidParams p;
  const auto cfg = pump(-0.41, 0.02);
  double total = 0.0;
  std::complex<double> a1;
  for (int k = 1; k <= 8; ++k) {
    const auto a = direct_harmonic(cfg, p, k, 2000);
    if (k == 1) a1 = a;
    total += std::norm(a);
  }
  EXPECT_NEAR(dce_purity(cfg, p), std::norm(a1) / total, 1e-10);
}

TEST(Squid, PurityTrend) {
  const SquidParams p;
  EXPECT_EQ(dce_purity(pump(-0.41, 0.0), p), 1.0);
  EXPECT_LT(dce_purity(pump(-0.41, 0.025), p), dce_purity(pump(-0.41, 0.005), p));
  for (double a = 0.001; a <= 0.03; a += 0.001) {
    const double mu = dce_purity(pump(-0.41, a), p);
    EXPECT_GT(mu, 0.0);
    EXPECT_LE(mu, 1.0);
  }
}

TEST(Squid, PeakDensity) {
  const SquidParams p = default_squid_params();
  EXPECT_EQ(dce_peak_density(pump(-0.41, 0.0), p), 0.0);
  EXPECT_NEAR(dce_peak_density(pump(-0.41, 0.013), p), 0.01, 1e-12);
  const double r = dce_peak_density(pump(-0.41, 0.002), p) / dce_peak_density(pump(-0.41, 0.001), p);
  EXPECT_NEAR(r, 4.0, 0.08);
  double prev = 0.0;
  for (double a = 0.001; a <= 0.030 + 1e-12; a += 0.001) {
    const double n = dce_peak_density(pump(-0.41, a), p);
    EXPECT_GT(n, prev);
    prev = n;
  }
}

TEST(Squid, BetaC) {
  EXPECT_NEAR(beta_c(1e-6, 1e-6), 4.0 / constants::kPi, 1e-12);
  EXPECT_NEAR(retrapping_current(3.4e-6, 1e4), 4.33e-10, 0.01e-10);
  EXPECT_NEAR(beta_c(3.4e-6, 4.33e-10), 1.0e4, 0.01e4);
  EXPECT_THROW(beta_c(1e-6, 0.0), DomainError);
}

TEST(Squid, IvFitRecoversResistance) {
  std::vector<IvPoint> pts;
  const double offset = 0.4e-6;
  for (double i = 6e-6; i <= 20e-6; i += 0.5e-6) {
    pts.push_back({i, 69.7 * (i - offset)});
    pts.push_back({-i, 69.7 * (-i + offset)});
  }
  pts.push_back({1e-6, 0.0});
  pts.push_back({3.4e-6, 0.0});
  const IvFit fit = iv_fit(pts);
  EXPECT_NEAR(fit.resistance_ohm, 69.7, 1e-9);
  EXPECT_NEAR(fit.critical_current_a, 3.4e-6, 1e-15);
}

TEST(Squid, IvFitTwoPoints) {
  const std::vector<IvPoint> pts{{10e-6, 500e-6}, {20e-6, 1200e-6}};
  EXPECT_NEAR(iv_fit(pts).resistance_ohm, 70.0, 1e-9);
}

TEST(Squid, IvFitNeedsResistiveBranch) {
  const std::vector<IvPoint> pts{{1e-6, 0.0}, {2e-6, 0.0}, {-1e-6, 0.0}};
  EXPECT_THROW(iv_fit(pts), FitError);
}
