#pragma once

// Two-mode Gaussian state algebra.
//
// Quadratures are ordered (I-, Q-, I+, Q+). Covariances use the convention
// in which the vacuum has <q^2> = 1/2, i.e. V_vac = diag(1/2, 1/2, 1/2, 1/2).
// Block names follow the usual partition
//
//        | A   C |
//    V = |       |     A: mode "-",  B: mode "+",  C: cross correlations.
//        | C^T B |

#include <array>
#include <string_view>
#include <utility>

#include <Eigen/Core>
#include <Eigen/LU>

namespace dce::gaussian {

/// Index of each quadrature inside a CovMat4.
enum Quadrature : int { kIMinus = 0, kQMinus = 1, kIPlus = 2, kQPlus = 3 };

/// Clamping tolerance for the radicand of the symplectic eigenvalue.
inline constexpr double kRadicandTolerance = 1e-10;

/// Symmetric 4x4 covariance matrix with per-element one-sigma errors.
///
/// Only the upper triangle of the inputs is read; the lower triangle is
/// mirrored from it, so the stored matrix is exactly symmetric.
class CovMat4 {
 public:
  using Matrix = Eigen::Matrix4d;

  CovMat4();  // vacuum
  explicit CovMat4(const Matrix& elements);
  CovMat4(const Matrix& elements, const Matrix& errors);

  static CovMat4 vacuum();

  double operator()(int i, int j) const { return elements_(i, j); }
  double error(int i, int j) const { return errors_(i, j); }

  const Matrix& elements() const { return elements_; }
  const Matrix& errors() const { return errors_; }

  Eigen::Matrix2d block_a() const { return elements_.block<2, 2>(0, 0); }
  Eigen::Matrix2d block_b() const { return elements_.block<2, 2>(2, 2); }
  Eigen::Matrix2d block_c() const { return elements_.block<2, 2>(0, 2); }

  double determinant() const { return elements_.determinant(); }

 private:
  Matrix elements_;
  Matrix errors_;
};

/// Zero-mean two-mode Gaussian state.
struct TwoModeState {
  static constexpr std::string_view kConvention = "vacuum-half";

  CovMat4 covariance;
  std::array<double, 4> mean{};
};

/// Value with a one-sigma uncertainty.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

struct EntanglementReport {
  Estimate nu_minus;
  Estimate log_negativity;
  Estimate duan_plus;
  Estimate duan_minus;
  Estimate entropy_of_formation;
  Estimate purity;
};

/// Two-mode squeezed thermal state with squeezing r and per-mode thermal
/// occupation n_th.
CovMat4 tmsv_covariance(double r, double n_th);

/// Smallest symplectic eigenvalue of the partial transpose.
/// Throws NumericalError (carrying the radicand) when the radicand is below
/// -kRadicandTolerance.
double symplectic_nu_minus(const CovMat4& v);

/// max(0, -log2(2 nu_-)).
double log_negativity(const CovMat4& v);

/// Combined quadrature variances (delta_IQ+, delta_IQ-), normalized so the
/// vacuum gives exactly (1, 1). delta_IQ- < 1 is the inseparability test.
std::pair<double, double> duan_quantities(const CovMat4& v);

/// Entanglement of formation (ebits) implied by a log-negativity.
double entropy_of_formation(double log_negativity);

/// Independent beam-splitter loss on each mode, mixing in a thermal state of
/// occupation n_add at the open port.
CovMat4 apply_loss(const CovMat4& v, double eta_minus, double eta_plus,
                   double n_add_minus = 0.0, double n_add_plus = 0.0);

/// Gaussian purity 1 / (4 sqrt(det V)); equals one for pure states.
double purity(const CovMat4& v);

/// Exchange the roles of the two modes (A <-> B, C <-> C^T).
CovMat4 swap_modes(const CovMat4& v);

/// All measures of an analytic covariance (errors are zero).
EntanglementReport entanglement_report(const CovMat4& v);

}  // namespace dce::gaussian
