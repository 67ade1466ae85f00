#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "snmap/map_model.hpp"
#include "snmap/polynomial.hpp"

namespace snmap {

/// A real number or +infinity, kept as a tag so tables never hold a float inf.
struct ExtendedReal {
  double value = 0.0;
  bool infinite = false;

  static ExtendedReal finite(double v) { return {v, false}; }
  static ExtendedReal infinity() { return {0.0, true}; }
  bool is_finite() const { return !infinite; }
  /// Float view, +inf for the infinite tag.
  double as_double() const { return infinite ? std::numeric_limits<double>::infinity() : value; }
};

/// Partial-fraction form of (Psi(beta) - qI)^{-1} = sum_k R_k / (beta - zeta_k).
struct SpectralRep {
  double q = 0.0;
  std::vector<Complex> roots;
  std::vector<CMatrix> residues;
  double phi_q = 0.0;    // the positive real root equal to Phi(q)
  Matrix generator;      // Q, needed for Z
  int states = 0;
  Polynomial determinant;  // det of the denominator-cleared matrix, spurious factors removed

  /// Roots with positive real part (there are exactly `states` of them).
  std::vector<Complex> up_roots() const;
};

/// Row i of Psi(z) - qI multiplied by the least common multiple of its
/// denominators, as a polynomial matrix (row-major, N*N entries).
std::vector<Polynomial> cleared_matrix(const MapModel& model, double q);
/// Determinant of a square polynomial matrix by fraction-free elimination.
Polynomial polynomial_determinant(std::vector<Polynomial> m, int n);

/// Throws DegenerateRoots or RootCountMismatch; requires q > 0.
SpectralRep spectral_decompose(const MapModel& model, double q);

/// A(z) = Psi(z) - qI and its adjugate.
CMatrix shifted_exponent(const MapModel& model, double q, Complex z);
CMatrix adjugate(const CMatrix& a);

Matrix eval_w(const SpectralRep& rep, double x);
Matrix eval_w_prime(const SpectralRep& rep, double x);
Matrix eval_z(const SpectralRep& rep, double x);
Matrix eval_z_prime(const SpectralRep& rep, double x);
/// sum_k R_k / (beta - zeta_k), the transform of eval_w.
CMatrix laplace_transform(const SpectralRep& rep, Complex beta);

/// Diagonal: 0 in ubv states, 1 / a_i in bv states.
Matrix w_zero_plus(const MapModel& model, double q);
/// Diagonal of W'(0+): 2 / sigma_i^2 in ubv states, (q + q_i + sum lambda) / a_i^2 in bv states.
std::vector<ExtendedReal> w_prime_zero_plus(const MapModel& model, double q);

/// Uniform-grid table of W, Z and their row sums on [0, x_max].
class ScaleTable {
 public:
  explicit ScaleTable(SpectralRep rep, double x_max = 5.0, double h = 1e-3);

  const SpectralRep& rep() const { return rep_; }
  double q() const { return rep_.q; }
  double x_max() const { return x_max_; }
  double step() const { return h_; }
  int states() const { return rep_.states; }
  std::size_t size() const { return grid_.size(); }
  const std::vector<double>& grid() const { return grid_; }

  const Matrix& w_at(std::size_t k) const { return w_[k]; }
  const Matrix& z_at(std::size_t k) const { return z_[k]; }
  const Vector& w_row_at(std::size_t k) const { return w_row_[k]; }
  const Vector& z_row_at(std::size_t k) const { return z_row_[k]; }
  const Vector& w_prime_row_at(std::size_t k) const { return w_prime_row_[k]; }

  /// Row sums by cubic Hermite interpolation (exact derivatives at the nodes).
  /// W row is 0 and Z row is 1 for x < 0; beyond x_max the representation is
  /// evaluated directly.
  double w_row(int j, double x) const;
  double z_row(int j, double x) const;
  double w_prime_row(int j, double x) const;
  /// Matrices by linear interpolation.
  Matrix w(double x) const;
  Matrix z(double x) const;

 private:
  double hermite(const std::vector<Vector>& f, const std::vector<Vector>& df, double dscale, int j,
                 double x) const;
  Matrix linear(const std::vector<Matrix>& m, double x) const;

  SpectralRep rep_;
  double x_max_;
  double h_;
  std::vector<double> grid_;
  std::vector<Matrix> w_, z_;
  std::vector<Vector> w_row_, z_row_, w_prime_row_;
};

/// First x > 0 with [Z 1]_j(x) <= 1, refined to 1e-8; infinite if none up to x_max.
ExtendedReal a_threshold(const ScaleTable& table, int j);
ExtendedReal a_threshold(const SpectralRep& rep, int j, double x_max = 5.0, double h = 1e-3);

/// Fixed-Talbot numerical inversion of (Psi(beta) - qI)^{-1} at x > 0, applied
/// to the transform shifted by Phi(q) + 1. Runs with `terms` and 2 * `terms`
/// nodes and throws InversionUnstable when the two differ by more than 1e-5
/// (relative to max(1, |W|)).
Matrix talbot_invert(const MapModel& model, double q, double x, int terms = 24);

/// Closed form for Markov-modulated driftless unit-variance Brownian motion:
/// W(x) = H diag((2 / alpha_i) sinh(alpha_i x)) H^{-1}, alpha_i = sqrt(2 (q - lambda_i)).
class WienerScale {
 public:
  /// Throws ModelShapeMismatch if the model is not of that form.
  WienerScale(const MapModel& model, double q);
  Matrix operator()(double x) const;
  const CVector& eigenvalues() const { return lambda_; }

 private:
  CMatrix h_, h_inv_;
  CVector lambda_, alpha_;
};

}  // namespace snmap
