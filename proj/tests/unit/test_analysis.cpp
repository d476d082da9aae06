#include "dce/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dce/constants.hpp"
#include "dce/errors.hpp"

using namespace dce;
using namespace dce::analysis;
using gaussian::CovMat4;

namespace {

squid::PumpConfig pump(double phi_ac) {
  squid::PumpConfig c;
  c.phi_ac = phi_ac;
  return c;
}

chain::ChainConfig run_chain(std::int64_t cycles, std::int64_t samples, std::uint64_t seed) {
  auto c = chain::reference_chain();
  c.cycles = cycles;
  c.samples_per_cycle = samples;
  c.seed = seed;
  return c;
}

std::pair<calibration::CalibrationFit, calibration::CalibrationFit> exact_calibs(const chain::ChainConfig& c,
                                                                                  const squid::PumpConfig& p) {
  calibration::CalibrationFit m, q;
  m.gain = 0.5 * (c.gain_start_minus + c.gain_end_minus);
  m.noise_temperature_k = c.noise_temperature_minus_k;
  m.frequency_hz = p.f_minus_hz;
  m.bandwidth_hz = c.bandwidth_hz;
  q.gain = 0.5 * (c.gain_start_plus + c.gain_end_plus);
  q.noise_temperature_k = c.noise_temperature_plus_k;
  q.frequency_hz = p.f_plus_hz;
  q.bandwidth_hz = c.bandwidth_hz;
  return {m, q};
}

const squid::SquidParams& params() {
  static const squid::SquidParams p = squid::default_squid_params();
  return p;
}

}  // namespace

TEST(ToDb, Examples) {
  EXPECT_EQ(to_db(1.0), 0.0);
  EXPECT_NEAR(to_db(std::pow(10.0, -0.009)), -0.09, 1e-12);
  EXPECT_NEAR(to_db(10.0), 10.0, 1e-12);
  EXPECT_THROW(to_db(0.0), DomainError);
}

TEST(InputReferred, EqualStatesGiveVacuum) {
  const CovMat4 v = gaussian::tmsv_covariance(0.3, 2.0);
  EXPECT_EQ(input_referred_state(v, v).elements(), CovMat4::vacuum().elements());
}

TEST(Estimate, OffStateCarriesAmplifierNoise) {
  const auto cfg = pump(0.0);
  const auto chain = run_chain(20, 50000, 3);
  const auto [cm, cp] = exact_calibs(chain, cfg);
  const auto ms = chain::pump_cycle_moments(cfg, params(), chain);
  const auto pair = estimate_covariance(ms, cm, cp);
  const double qm = constants::kBoltzmann * 3.71 / (constants::kPlanck * 4.1e9);
  const double qp = constants::kBoltzmann * 2.95 / (constants::kPlanck * 4.8e9);
  // Loss shrinks nothing here: the vacuum is invariant under loss.
  for (int k : {0, 1}) EXPECT_NEAR(pair.off(k, k), 0.5 + qm, 4 * pair.off.error(k, k) + 0.005 * qm);
  for (int k : {2, 3}) EXPECT_NEAR(pair.off(k, k), 0.5 + qp, 4 * pair.off.error(k, k) + 0.005 * qp);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      EXPECT_EQ(pair.on(i, j), pair.on(j, i));
      const double se = std::hypot(pair.on.error(i, j), pair.off.error(i, j));
      EXPECT_NEAR(pair.on(i, j) - pair.off(i, j), 0.0, 4 * se) << i << "," << j;
    }
  }
}

TEST(Estimate, ShuffleInvariantWithinCycles) {
  const auto cfg = pump(0.015);
  const auto chain = run_chain(3, 400, 8);
  auto rs = chain::pump_cycle_dataset(cfg, params(), chain);
  const auto [cm, cp] = exact_calibs(chain, cfg);
  const auto before = estimate_covariance(rs, cm, cp);
  std::mt19937_64 rng(1);
  std::shuffle(rs.records.begin(), rs.records.end(), rng);
  const auto after = estimate_covariance(rs, cm, cp);
  EXPECT_NEAR((before.on.elements() - after.on.elements()).norm(), 0.0, 1e-9 * before.on.elements().norm());
  EXPECT_NEAR((before.off.elements() - after.off.elements()).norm(), 0.0, 1e-9 * before.off.elements().norm());
}

TEST(Estimate, SplitHalfNull) {
  const auto cfg = pump(0.015);
  const auto chain = run_chain(20, 50000, 21);
  const auto [cm, cp] = exact_calibs(chain, cfg);
  auto ms = chain::pump_cycle_moments(cfg, params(), chain);
  // OFF cycles of the first half against OFF cycles of the second half.
  chain::CycleMomentSet halves;
  halves.meta = ms.meta;
  for (std::size_t c = 0; c < 10; ++c) {
    halves.on.push_back(ms.off[c]);
    halves.off.push_back(ms.off[c + 10]);
    halves.off.back().cycle = ms.off[c].cycle;
  }
  const auto pair = estimate_covariance(halves, cm, cp);
  const auto v = input_referred_state(pair.on, pair.off);
  // The halves sit at different points of the gain drift; allow for the
  // systematic drift ratio on the diagonal.
  const double drift = 0.5 * std::abs(chain.gain_start_minus - chain.gain_end_minus) / cm.gain;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double allowance = i == j ? drift * pair.off(i, i) : 0.0;
      EXPECT_NEAR(v(i, j), CovMat4::vacuum()(i, j), 4 * v.error(i, j) + allowance) << i << "," << j;
    }
  }
}

TEST(Estimate, CalibrationFrequencyMismatch) {
  const auto cfg = pump(0.013);
  const auto chain = run_chain(2, 100, 1);
  auto [cm, cp] = exact_calibs(chain, cfg);
  const auto ms = chain::pump_cycle_moments(cfg, params(), chain);
  std::swap(cm, cp);
  EXPECT_THROW(estimate_covariance(ms, cm, cp), ConfigError);
}

TEST(Estimate, NeedsTwoCycles) {
  const auto cfg = pump(0.013);
  const auto chain = run_chain(1, 100, 1);
  const auto [cm, cp] = exact_calibs(chain, cfg);
  const auto ms = chain::pump_cycle_moments(cfg, params(), chain);
  EXPECT_THROW(estimate_covariance(ms, cm, cp), DomainError);
}

TEST(Analyze, VacuumIsNull) {
  const auto cfg = pump(0.0);
  const auto chain = run_chain(20, 100000, 5);
  const auto [cm, cp] = exact_calibs(chain, cfg);
  const auto r = analyze(chain::pump_cycle_moments(cfg, params(), chain), cm, cp);
  EXPECT_NEAR(r.report.duan_minus.value, 1.0, 3 * r.report.duan_minus.error);
  EXPECT_NEAR(r.report.duan_plus.value, 1.0, 3 * r.report.duan_plus.error);
  EXPECT_GE(r.report.log_negativity.value, 0.0);
  EXPECT_LE(r.report.log_negativity.value, 3 * r.report.log_negativity.error + 1e-12);
  EXPECT_EQ(r.cycles, 20);
  EXPECT_GT(r.bootstrap_resamples, 150);
}

TEST(Analyze, ReferenceRunClosesOnTruth) {
  const auto cfg = pump(0.013);
  const auto chain = run_chain(40, 100000, 11);
  const auto [cm, cp] = exact_calibs(chain, cfg);
  const auto r = analyze(chain::pump_cycle_moments(cfg, params(), chain), cm, cp);
  const auto truth = gaussian::apply_loss(chain::device_covariance(cfg, params()), chain.eta_minus, chain.eta_plus);
  const auto want = gaussian::entanglement_report(truth);
  EXPECT_GT(r.report.log_negativity.value, 0.0);
  EXPECT_GE(r.report.log_negativity.value, 0.01);
  EXPECT_LE(r.report.log_negativity.value, 0.29 + 3 * r.report.log_negativity.error);
  EXPECT_NEAR(r.report.log_negativity.value, want.log_negativity.value, 3 * r.report.log_negativity.error);
  EXPECT_NEAR(r.report.duan_minus.value, want.duan_minus.value, 3 * r.report.duan_minus.error);
  EXPECT_LT(r.report.duan_minus.value, 1.0);
}

TEST(Analyze, DeterministicGivenSeed) {
  const auto cfg = pump(0.013);
  const auto chain = run_chain(5, 2000, 4);
  const auto [cm, cp] = exact_calibs(chain, cfg);
  const auto ms = chain::pump_cycle_moments(cfg, params(), chain);
  const auto a = analyze(ms, cm, cp);
  const auto b = analyze(ms, cm, cp);
  EXPECT_EQ(a.report.log_negativity.error, b.report.log_negativity.error);
  EXPECT_EQ(a.covariance.elements(), b.covariance.elements());
}

TEST(Analyze, ErrorBarsShrinkWithCycles) {
  const auto cfg = pump(0.015);
  double small = 0.0, large = 0.0;
  const int reps = 6;
  for (int k = 0; k < reps; ++k) {
    const auto c1 = run_chain(20, 20000, 100 + k);
    const auto c2 = run_chain(40, 20000, 200 + k);
    const auto [cm, cp] = exact_calibs(c1, cfg);
    small += analyze(chain::pump_cycle_moments(cfg, params(), c1), cm, cp).report.duan_minus.error;
    large += analyze(chain::pump_cycle_moments(cfg, params(), c2), cm, cp).report.duan_minus.error;
  }
  EXPECT_NEAR(large / small, 1.0 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));
}

TEST(Analyze, PlusRotationUndoesPhaseOffset) {
  const auto cfg = pump(0.015);
  auto chain = run_chain(6, 20000, 9);
  const auto [cm, cp] = exact_calibs(chain, cfg);
  auto rs = chain::pump_cycle_dataset(cfg, params(), chain);
  const double phi = 0.7;
  for (auto& r : rs.records) {
    const double i = r.i_plus, q = r.q_plus;
    r.i_plus = std::cos(phi) * i - std::sin(phi) * q;
    r.q_plus = std::sin(phi) * i + std::cos(phi) * q;
  }
  AnalysisOptions opt;
  opt.plus_rotation_rad = -phi;
  const auto fixed = estimate_covariance(rs, cm, cp, opt);
  const auto raw = estimate_covariance(chain::pump_cycle_dataset(cfg, params(), chain), cm, cp);
  EXPECT_NEAR((fixed.on.elements() - raw.on.elements()).norm(), 0.0, 1e-9 * raw.on.elements().norm());
}

TEST(Histogram, NoPumpIsConsistentWithZero) {
  const auto cfg = pump(0.0);
  const auto chain = run_chain(4, 25000, 12);
  auto rs = chain::pump_cycle_dataset(cfg, params(), chain);
  const auto [cm, cp] = exact_calibs(chain, cfg);
  for (auto& r : rs.records) {
    r.i_minus /= std::sqrt(cm.gain);
    r.q_minus /= std::sqrt(cm.gain);
    r.i_plus /= std::sqrt(cp.gain);
    r.q_plus /= std::sqrt(cp.gain);
  }
  const auto h = histogram2d(rs, QuadraturePair::kIMinusIPlus, 10, 10, {-12, 12, -12, 12});
  EXPECT_EQ(h.total(), 0);
  EXPECT_EQ(h.n_on, h.n_off);
  // Each bin difference is Skellam-like with variance n_on(bin) + n_off(bin);
  // approximate it by twice the expected count under H0.
  const auto hon = [&] {
    chain::RecordSet on = rs;
    std::erase_if(on.records, [](const auto& r) { return !r.pump_on; });
    return histogram2d(on, QuadraturePair::kIMinusIPlus, 10, 10, {-12, 12, -12, 12});
  }();
  double chi2 = 0.0;
  int dof = 0;
  for (int iy = 0; iy < 10; ++iy) {
    for (int ix = 0; ix < 10; ++ix) {
      const double var = 2.0 * static_cast<double>(hon.at(ix, iy));
      if (var < 20) continue;
      chi2 += std::pow(static_cast<double>(h.at(ix, iy)), 2) / var;
      ++dof;
    }
  }
  ASSERT_GT(dof, 20);
  // Upper 1% point of chi^2 by the Wilson-Hilferty approximation.
  const double z = 2.326;
  const double k = dof;
  const double crit = k * std::pow(1 - 2 / (9 * k) + z * std::sqrt(2 / (9 * k)), 3);
  EXPECT_LT(chi2, crit);
}

TEST(Histogram, RidgeOrientation) {
  // Strong squeezing makes the sign structure unmistakable.
  auto v = gaussian::tmsv_covariance(0.5, 0.0);
  chain::RecordSet rs;
  for (auto r : chain::sample_records(v, 200000, 1)) {
    r.pump_on = true;
    rs.records.push_back(r);
  }
  for (auto r : chain::sample_records(CovMat4::vacuum(), 200000, 2)) {
    r.pump_on = false;
    rs.records.push_back(r);
  }
  auto wedge_sums = [](const Histogram2D& h) {
    double diag = 0.0, anti = 0.0;
    for (int iy = 0; iy < h.bins_y; ++iy) {
      for (int ix = 0; ix < h.bins_x; ++ix) {
        const double x = ix - (h.bins_x - 1) / 2.0, y = iy - (h.bins_y - 1) / 2.0;
        if (std::abs(x - y) < std::abs(x + y)) diag += h.at(ix, iy);
        if (std::abs(x + y) < std::abs(x - y)) anti += h.at(ix, iy);
      }
    }
    return std::pair{diag, anti};
  };
  const auto [d_ii, a_ii] = wedge_sums(histogram2d(rs, QuadraturePair::kIMinusIPlus, 41, 41, {-4, 4, -4, 4}));
  const auto [d_qq, a_qq] = wedge_sums(histogram2d(rs, QuadraturePair::kQMinusQPlus, 41, 41, {-4, 4, -4, 4}));
  EXPECT_GT(d_ii, 0.0);
  EXPECT_LT(a_ii, 0.0);
  EXPECT_LT(d_qq, 0.0);
  EXPECT_GT(a_qq, 0.0);
}

TEST(Histogram, OutliersLandInEdgeBins) {
  chain::RecordSet rs;
  rs.records.push_back({0, true, 100.0, 0.0, -100.0, 0.0});
  rs.records.push_back({0, false, 0.0, 0.0, 0.0, 0.0});
  const auto h = histogram2d(rs, QuadraturePair::kIMinusIPlus, 5, 5, {-1, 1, -1, 1});
  EXPECT_EQ(h.at(4, 0), 1);
  EXPECT_EQ(h.at(2, 2), -1);
  EXPECT_EQ(h.total(), 0);
}

TEST(Histogram, BadArguments) {
  chain::RecordSet rs;
  EXPECT_THROW(histogram2d(rs, QuadraturePair::kIMinusIPlus, 5, 5, {}), DomainError);
  rs.records.push_back({});
  EXPECT_THROW(histogram2d(rs, QuadraturePair::kIMinusIPlus, 0, 5, {}), DomainError);
  EXPECT_THROW(histogram2d(rs, QuadraturePair::kIMinusIPlus, 5, 5, {1, -1, 0, 1}), DomainError);
}

TEST(Pairs, NamesRoundTrip) {
  for (auto p : {QuadraturePair::kIMinusIPlus, QuadraturePair::kQMinusQPlus, QuadraturePair::kIMinusQPlus,
                 QuadraturePair::kQMinusIPlus}) {
    EXPECT_EQ(parse_pair(pair_name(p)), p);
  }
  EXPECT_THROW(parse_pair("I+I+"), ConfigError);
}
