#include "snmap/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "snmap/errors.hpp"

namespace snmap {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

Polynomial Polynomial::constant(double c) { return Polynomial({c}); }

Polynomial Polynomial::shifted_power(double shift, int power) {
  Polynomial out = constant(1.0);
  const Polynomial factor({shift, 1.0});
  for (int k = 0; k < power; ++k) out *= factor;
  return out;
}

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::magnitude_at(double z) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * std::abs(z) + std::abs(*it);
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0.0);
  for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] += rhs.coeffs_[k];
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0.0);
  for (std::size_t k = 0; k < rhs.coeffs_.size(); ++k) coeffs_[k] -= rhs.coeffs_[k];
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(const Polynomial& rhs) {
  if (coeffs_.empty() || rhs.coeffs_.empty()) {
    coeffs_.clear();
    return *this;
  }
  std::vector<double> out(coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
  for (std::size_t a = 0; a < coeffs_.size(); ++a)
    for (std::size_t b = 0; b < rhs.coeffs_.size(); ++b) out[a + b] += coeffs_[a] * rhs.coeffs_[b];
  coeffs_ = std::move(out);
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(double c) {
  for (double& v : coeffs_) v *= c;
  trim();
  return *this;
}

Polynomial Polynomial::quotient(const Polynomial& divisor) const {
  if (divisor.is_zero()) throw std::invalid_argument("polynomial division by zero");
  const int n = degree();
  const int m = divisor.degree();
  if (n < m) return {};
  std::vector<double> rem = coeffs_;
  std::vector<double> quot(static_cast<std::size_t>(n - m + 1), 0.0);
  const double lead = divisor.leading();
  for (int k = n - m; k >= 0; --k) {
    const double c = rem[static_cast<std::size_t>(k + m)] / lead;
    quot[static_cast<std::size_t>(k)] = c;
    for (int t = 0; t <= m; ++t) rem[static_cast<std::size_t>(k + t)] -= c * divisor.coeffs_[static_cast<std::size_t>(t)];
  }
  return Polynomial(std::move(quot));
}

Polynomial Polynomial::deflate(double root, double& remainder) const {
  if (coeffs_.empty()) {
    remainder = 0.0;
    return {};
  }
  const std::size_t n = coeffs_.size();
  std::vector<double> quot(n - 1, 0.0);
  double carry = coeffs_[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) {
    quot[k] = carry;
    carry = coeffs_[k] + carry * root;
  }
  remainder = carry;
  return Polynomial(std::move(quot));
}

std::vector<std::complex<double>> Polynomial::roots() const {
  const int n = degree();
  if (n < 1) return {};
  if (n == 1) return {std::complex<double>(-coeffs_[0] / coeffs_[1], 0.0)};

  // Companion matrix of the monic polynomial, upper Hessenberg form.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  const double lead = leading();
  for (int k = 0; k < n; ++k) companion(0, k) = -coeffs_[static_cast<std::size_t>(n - 1 - k)] / lead;
  for (int k = 1; k < n; ++k) companion(k, k - 1) = 1.0;

  // Diagonal balancing (Parlett-Reinsch) keeps the eigenvalues well conditioned.
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  for (int sweep = 0; sweep < 50; ++sweep) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(companion(j, i));
        r += std::abs(companion(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if ((c + r) < 0.95 * s) {
        changed = true;
        scale(i) *= f;
        companion.row(i) /= f;
        companion.col(i) *= f;
      }
    }
    if (!changed) break;
  }

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw EigenFailure("companion matrix eigensolver did not converge");
  std::vector<std::complex<double>> out(solver.eigenvalues().begin(), solver.eigenvalues().end());
  return out;
}

}  // namespace snmap
