#include <algorithm>
#include <complex>

#include "doctest.h"
#include "snmap/polynomial.hpp"

using snmap::Polynomial;

TEST_CASE("arithmetic and evaluation") {
  const Polynomial p({1.0, -3.0, 2.0});  // (1 - z)(1 - 2z)
  CHECK(p.degree() == 2);
  CHECK(p(1.0) == doctest::Approx(0.0));
  CHECK(p(0.5) == doctest::Approx(0.0));
  CHECK(p(2.0) == doctest::Approx(3.0));

  const Polynomial sq = Polynomial::shifted_power(2.0, 2);  // z^2 + 4z + 4
  REQUIRE(sq.degree() == 2);
  CHECK(sq.coeffs()[0] == 4.0);
  CHECK(sq.coeffs()[1] == 4.0);
  CHECK(sq.coeffs()[2] == 1.0);

  const Polynomial prod = p * sq;
  for (double z : {-1.3, 0.2, 2.7}) CHECK(prod(z) == doctest::Approx(p(z) * sq(z)));
  CHECK((prod - prod).is_zero());
  CHECK((p + Polynomial({0.0, 3.0})).degree() == 2);
  CHECK(p.derivative()(1.0) == doctest::Approx(1.0));
}

TEST_CASE("exact quotient and deflation") {
  const Polynomial a({-1.0, 0.0, 1.0});  // z^2 - 1
  const Polynomial b({3.0, 1.0});
  const Polynomial q = (a * b).quotient(b);
  REQUIRE(q.degree() == 2);
  for (int k = 0; k < 3; ++k) CHECK(q.coeffs()[static_cast<std::size_t>(k)] == doctest::Approx(a.coeffs()[static_cast<std::size_t>(k)]));

  double rem = 1.0;
  const Polynomial d = a.deflate(1.0, rem);
  CHECK(rem == doctest::Approx(0.0));
  CHECK(d.degree() == 1);
  CHECK(d(-1.0) == doctest::Approx(0.0));
}

TEST_CASE("roots of a polynomial with complex pair") {
  // (z - 2)(z + 0.5)(z^2 + 2z + 5): roots 2, -0.5, -1 +/- 2i
  const Polynomial p = Polynomial({-2.0, 1.0}) * Polynomial({0.5, 1.0}) * Polynomial({5.0, 2.0, 1.0});
  auto roots = p.roots();
  REQUIRE(roots.size() == 4);
  const std::complex<double> expected[] = {{2.0, 0.0}, {-0.5, 0.0}, {-1.0, 2.0}, {-1.0, -2.0}};
  for (const auto& e : expected) {
    const auto it = std::min_element(roots.begin(), roots.end(),
                                     [&](auto a, auto b) { return std::abs(a - e) < std::abs(b - e); });
    CHECK(std::abs(*it - e) < 1e-12);
  }
}

TEST_CASE("roots survive badly scaled coefficients") {
  // roots 1e-3 and 1e3
  const Polynomial p = Polynomial({-1e-3, 1.0}) * Polynomial({-1e3, 1.0});
  auto roots = p.roots();
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) { return a.real() < b.real(); });
  CHECK(std::abs(roots[0] - 1e-3) < 1e-12);
  CHECK(std::abs(roots[1] - 1e3) < 1e-9);
}
