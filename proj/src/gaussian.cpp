#include "dce/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dce/errors.hpp"

namespace dce::gaussian {
namespace {

CovMat4::Matrix symmetrized(const CovMat4::Matrix& m) {
  CovMat4::Matrix out = m.triangularView<Eigen::Upper>();
  out.triangularView<Eigen::StrictlyLower>() = m.transpose().triangularView<Eigen::StrictlyLower>();
  return out;
}

void require_transmissivity(double eta, const char* name) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(eta));
  }
}

}  // namespace

CovMat4::CovMat4() : CovMat4(vacuum()) {}

CovMat4::CovMat4(const Matrix& elements) : CovMat4(elements, Matrix::Zero()) {}

CovMat4::CovMat4(const Matrix& elements, const Matrix& errors)
    : elements_(symmetrized(elements)), errors_(symmetrized(errors.cwiseAbs())) {}

CovMat4 CovMat4::vacuum() {
  return CovMat4(Matrix::Identity() * 0.5, Matrix::Zero());
}

CovMat4 tmsv_covariance(double r, double n_th) {
  if (!(r >= 0.0)) throw DomainError("squeezing parameter must be >= 0");
  if (!(n_th >= 0.0)) throw DomainError("thermal occupation must be >= 0");
  const double scale = (2.0 * n_th + 1.0) / 2.0;
  const double diag = scale * std::cosh(2.0 * r);
  const double corr = scale * std::sinh(2.0 * r);
  CovMat4::Matrix m = CovMat4::Matrix::Identity() * diag;
  m(kIMinus, kIPlus) = corr;
  m(kQMinus, kQPlus) = -corr;
  return CovMat4(m);
}

double symplectic_nu_minus(const CovMat4& v) {
  const double zeta =
      v.block_a().determinant() + v.block_b().determinant() - 2.0 * v.block_c().determinant();
  double radicand = zeta * zeta - 4.0 * v.determinant();
  if (radicand < -kRadicandTolerance) {
    throw NumericalError("negative radicand in symplectic eigenvalue: " + std::to_string(radicand),
                         radicand);
  }
  radicand = std::max(radicand, 0.0);
  double inner = 0.5 * zeta - 0.5 * std::sqrt(radicand);
  if (inner < -kRadicandTolerance) {
    throw NumericalError("covariance is too far from physical: nu_-^2 = " + std::to_string(inner),
                         inner);
  }
  return std::sqrt(std::max(inner, 0.0));
}

double log_negativity(const CovMat4& v) {
  return std::max(0.0, -std::log2(2.0 * symplectic_nu_minus(v)));
}

std::pair<double, double> duan_quantities(const CovMat4& v) {
  const double local = v(kIMinus, kIMinus) + v(kQMinus, kQMinus) + v(kIPlus, kIPlus) + v(kQPlus, kQPlus);
  // <(I+ - I-)^2> + <(Q+ + Q-)^2> = local - 2 V(I-,I+) + 2 V(Q-,Q+)
  const double cross = 2.0 * (v(kIMinus, kIPlus) - v(kQMinus, kQPlus));
  return {(local + cross) / 2.0, (local - cross) / 2.0};
}

double entropy_of_formation(double log_negativity) {
  if (!(log_negativity >= 0.0)) throw DomainError("log-negativity must be >= 0");
  if (log_negativity == 0.0) return 0.0;
  // With delta = 2^-N: delta^(-1/2) +- delta^(1/2) = 2 cosh(x), 2 sinh(x), x = N ln2 / 2.
  // The hyperbolic form avoids cancellation in c_- for small N.
  const double x = 0.5 * log_negativity * std::numbers::ln2;
  const double c_plus = std::cosh(x) * std::cosh(x);
  const double c_minus = std::sinh(x) * std::sinh(x);
  if (c_minus == 0.0) return 0.0;
  return c_plus * std::log2(c_plus) - c_minus * std::log2(c_minus);
}

CovMat4 apply_loss(const CovMat4& v, double eta_minus, double eta_plus, double n_add_minus,
                   double n_add_plus) {
  require_transmissivity(eta_minus, "eta_minus");
  require_transmissivity(eta_plus, "eta_plus");
  if (!(n_add_minus >= 0.0) || !(n_add_plus >= 0.0)) {
    throw DomainError("added occupation must be >= 0");
  }
  const std::array<double, 4> amp{std::sqrt(eta_minus), std::sqrt(eta_minus), std::sqrt(eta_plus),
                                  std::sqrt(eta_plus)};
  CovMat4::Matrix m = v.elements();
  CovMat4::Matrix e = v.errors();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      m(i, j) *= amp[i] * amp[j];
      e(i, j) *= amp[i] * amp[j];
    }
  }
  const double fill_minus = (1.0 - eta_minus) * (2.0 * n_add_minus + 1.0) / 2.0;
  const double fill_plus = (1.0 - eta_plus) * (2.0 * n_add_plus + 1.0) / 2.0;
  m(kIMinus, kIMinus) += fill_minus;
  m(kQMinus, kQMinus) += fill_minus;
  m(kIPlus, kIPlus) += fill_plus;
  m(kQPlus, kQPlus) += fill_plus;
  return CovMat4(m, e);
}

double purity(const CovMat4& v) {
  // Strongly squeezed states cancel heavily in det V; extended precision keeps
  // the result near machine precision.
  const double det = static_cast<double>(v.elements().cast<long double>().determinant());
  if (!(det > 0.0)) throw NumericalError("purity needs det V > 0, got " + std::to_string(det), det);
  return 1.0 / (4.0 * std::sqrt(det));
}

CovMat4 swap_modes(const CovMat4& v) {
  Eigen::PermutationMatrix<4> p;
  p.indices() << 2, 3, 0, 1;
  return CovMat4(p * v.elements() * p.transpose(), p * v.errors() * p.transpose());
}

EntanglementReport entanglement_report(const CovMat4& v) {
  EntanglementReport r;
  r.nu_minus.value = symplectic_nu_minus(v);
  r.log_negativity.value = std::max(0.0, -std::log2(2.0 * r.nu_minus.value));
  const auto [plus, minus] = duan_quantities(v);
  r.duan_plus.value = plus;
  r.duan_minus.value = minus;
  r.entropy_of_formation.value = entropy_of_formation(r.log_negativity.value);
  r.purity.value = purity(v);
  return r;
}

}  // namespace dce::gaussian
