#pragma once

#include <complex>
#include <vector>

namespace snmap {

/// Dense real polynomial, coefficients stored in ascending powers.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  static Polynomial constant(double c);
  /// (z + shift)^power
  static Polynomial shifted_power(double shift, int power);

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }

  template <class T>
  T operator()(T z) const {
    T acc{0};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + T(*it);
    return acc;
  }

  /// Sum of |c_k| |z|^k; the natural scale for judging whether p(z) vanishes.
  double magnitude_at(double z) const;

  Polynomial derivative() const;

  Polynomial& operator+=(const Polynomial& rhs);
  Polynomial& operator-=(const Polynomial& rhs);
  Polynomial& operator*=(const Polynomial& rhs);
  Polynomial& operator*=(double c);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Polynomial& b) { return a *= b; }
  friend Polynomial operator*(Polynomial a, double c) { return a *= c; }
  friend Polynomial operator*(double c, Polynomial a) { return a *= c; }

  /// Quotient of long division by `divisor`; the remainder is discarded.
  Polynomial quotient(const Polynomial& divisor) const;

  /// Synthetic division by (z - root). Returns the quotient, stores p(root).
  Polynomial deflate(double root, double& remainder) const;

  /// All complex roots, as eigenvalues of the (balanced) companion matrix.
  std::vector<std::complex<double>> roots() const;

 private:
  void trim();
  std::vector<double> coeffs_;
};

}  // namespace snmap
