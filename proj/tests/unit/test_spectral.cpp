#include <cmath>
#include <map>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "fixtures.hpp"
#include "snmap/errors.hpp"
#include "snmap/spectral.hpp"

using namespace snmap;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// det of A(z) times the row denominators r_i(z), for comparison with the
// cleared polynomial determinant
Complex cleared_det_direct(const MapModel& m, double q, Complex z) {
  Complex scale = 1.0;
  for (int i = 0; i < m.states(); ++i) {
    std::map<double, int> f;
    for (const auto& jp : m.component(i).jumps)
      for (const auto& ph : jp.law.phases()) f[ph.rate] = std::max(f[ph.rate], ph.shape);
    for (int j = 0; j < m.states(); ++j)
      for (const auto& ph : m.switch_jump(i, j).phases()) f[ph.rate] = std::max(f[ph.rate], ph.shape);
    for (auto [mu, k] : f) scale *= std::pow(z + mu, k);
  }
  return shifted_exponent(m, q, z).determinant() * scale;
}

}  // namespace

TEST_CASE("scalar Brownian motion inverts by hand") {
  const MapModel b = fixtures::brownian();
  for (double q : {0.5, 1.5, 5.0}) {
    const SpectralRep rep = spectral_decompose(b, q);
    REQUIRE(rep.roots.size() == 2);
    const double r = std::sqrt(2.0 * q);
    CHECK(rep.roots[0].real() == doctest::Approx(r));
    CHECK(rep.roots[1].real() == doctest::Approx(-r));
    CHECK(rep.phi_q == doctest::Approx(r));
    for (double x : {0.0, 0.3, 1.0, 2.5}) {
      const double expected = std::sqrt(2.0 / q) * std::sinh(r * x);
      CHECK(std::abs(eval_w(rep, x)(0, 0) - expected) <= 1e-12 * std::max(1.0, expected));
      // Z = 1 + q int_0^x W = cosh(r x)
      CHECK(eval_z(rep, x)(0, 0) == doctest::Approx(std::cosh(r * x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("polynomial determinant matches direct evaluation") {
  std::mt19937_64 rng(11);
  std::vector<MapModel> models{fixtures::two_state_jump(), fixtures::wiener()};
  for (int k = 0; k < 4; ++k) models.push_back(fixtures::random_model(rng, 3 + k % 2));
  for (const auto& m : models) {
    const double q = 1.3;
    const Polynomial det = polynomial_determinant(cleared_matrix(m, q), m.states());
    for (Complex z : {Complex(0.3, 0.1), Complex(1.7, -0.4), Complex(-0.2, 1.1)}) {
      const Complex direct = cleared_det_direct(m, q, z);
      CHECK(std::abs(det(z) - direct) <= 1e-7 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_CASE("roots of the two-state jump model") {
  const MapModel m = fixtures::two_state_jump();
  for (double q : {1.5, 1.8, 5.0}) {
    const SpectralRep rep = spectral_decompose(m, q);
    CHECK(rep.roots.size() == 6);
    CHECK(rep.up_roots().size() == 2);
    CHECK(std::abs(rep.phi_q - phi(m, q)) <= 1e-9);
    for (const auto& z : rep.roots) CHECK(std::abs(shifted_exponent(m, q, z).determinant()) < 1e-9);
  }
}

TEST_CASE("boundary values at zero") {
  const MapModel m = fixtures::two_state_jump();
  for (double q : {0.7, 1.5, 1.8, 5.0}) {
    const SpectralRep rep = spectral_decompose(m, q);
    CMatrix sum = CMatrix::Zero(2, 2);
    CMatrix dsum = CMatrix::Zero(2, 2);
    for (std::size_t k = 0; k < rep.roots.size(); ++k) {
      sum += rep.residues[k];
      dsum += rep.residues[k] * rep.roots[k];
    }
    Matrix expected = Matrix::Zero(2, 2);
    expected(1, 1) = 0.5;
    CHECK(max_abs(sum.real() - expected) <= 1e-8);
    CHECK(sum.imag().cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(max_abs(w_zero_plus(m, q) - expected) == 0.0);

    const auto wp = w_prime_zero_plus(m, q);
    REQUIRE(wp.size() == 2);
    CHECK(wp[0].value == doctest::Approx(2.0));
    CHECK(wp[1].value == doctest::Approx(dsum(1, 1).real()).epsilon(1e-8));
    CHECK(dsum(0, 0).real() == doctest::Approx(2.0).epsilon(1e-8));
  }
  const MapModel w = fixtures::wiener();
  CHECK(max_abs(w_zero_plus(w, 1.0)) == 0.0);
  for (const auto& e : w_prime_zero_plus(w, 1.0)) CHECK(e.value == 2.0);
  // a bounded-variation state with no drift has W'(0+) = +infinity
  CHECK(w_prime_zero_plus(MapModel(Matrix::Zero(1, 1), {LevyComponent{0.0, 0.0, {}}}), 1.0)[0].infinite);
}

TEST_CASE("evaluation on the negative half-line and at zero") {
  const SpectralRep rep = spectral_decompose(fixtures::two_state_jump(), 1.5);
  CHECK(max_abs(eval_w(rep, -1.0)) == 0.0);
  CHECK(eval_z(rep, 0.0) == Matrix::Identity(2, 2));
  CHECK(eval_z(rep, -0.3) == Matrix::Identity(2, 2));
}

TEST_CASE("imaginary parts cancel") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 3; ++k) {
    const MapModel m = fixtures::random_model(rng, 3);
    const SpectralRep rep = spectral_decompose(m, 1.0);
    for (double x : {0.0, 0.2, 1.0, 3.0}) {
      CMatrix acc = CMatrix::Zero(3, 3);
      for (std::size_t r = 0; r < rep.roots.size(); ++r) acc += rep.residues[r] * std::exp(rep.roots[r] * x);
      CHECK(acc.imag().cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, acc.real().cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("Laplace round trip") {
  const MapModel m = fixtures::two_state_jump();
  for (double q : {1.5, 5.0}) {
    const SpectralRep rep = spectral_decompose(m, q);
    for (double extra : {0.5, 1.0, 2.0, 4.0, 10.0}) {
      const double beta = rep.phi_q + extra;
      const Matrix inv = shifted_exponent(m, q, beta).real().inverse();
      const Matrix lt = laplace_transform(rep, beta).real();
      CHECK(max_abs(lt - inv) <= 1e-6 * max_abs(inv));
    }
    // numeric transform of eval_w; the integral converges right of the largest root
    const double beta = rep.roots.front().real() + 2.0;
    Matrix num(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        num(i, j) = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            [&](double x) { return std::exp(-beta * x) * eval_w(rep, x)(i, j); }, 0.0, 60.0, 15, 1e-13);
    CHECK(max_abs(num - shifted_exponent(m, q, beta).real().inverse()) <= 1e-6);
  }
}

TEST_CASE("Z row sums against quadrature of W") {
  const MapModel m = fixtures::two_state_jump();
  const double q = 1.5;
  const SpectralRep rep = spectral_decompose(m, q);
  for (int j = 0; j < 2; ++j)
    for (double x : {0.1, 0.5, 1.0, 2.0}) {
      const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double y) { return eval_w(rep, y).row(j).sum(); }, 0.0, x, 10, 1e-13);
      CHECK(std::abs(eval_z(rep, x).row(j).sum() - (1.0 + q * integral)) <= 1e-8);
    }
  // Z' = W (qI - Q)
  const Matrix qmq = q * Matrix::Identity(2, 2) - m.generator();
  for (double x : {0.2, 0.9, 3.0}) {
    const Matrix fd = (eval_z(rep, x + 1e-6) - eval_z(rep, x - 1e-6)) / 2e-6;
    CHECK(max_abs(fd - eval_w(rep, x) * qmq) <= 1e-6 * std::max(1.0, max_abs(fd)));
    CHECK(max_abs(eval_z_prime(rep, x) - eval_w(rep, x) * qmq) == 0.0);
    const Matrix wd = (eval_w(rep, x + 1e-6) - eval_w(rep, x - 1e-6)) / 2e-6;
    CHECK(max_abs(wd - eval_w_prime(rep, x)) <= 1e-6 * std::max(1.0, max_abs(wd)));
  }
}

TEST_CASE("scale table") {
  const MapModel m = fixtures::two_state_jump();
  const ScaleTable t(spectral_decompose(m, 1.5));
  CHECK(t.size() == 5001);
  CHECK(t.z_at(0) == Matrix::Identity(2, 2));
  CHECK(t.w_row(0, -0.1) == 0.0);
  CHECK(t.z_row(1, -0.1) == 1.0);
  CHECK(max_abs(t.w(-0.5)) == 0.0);
  CHECK(t.z(-0.5) == Matrix::Identity(2, 2));
  for (double x : {0.0004, 0.1234567, 0.87, 2.3456, 4.9999}) {
    for (int j = 0; j < 2; ++j) {
      const double w = eval_w(t.rep(), x).row(j).sum();
      const double z = eval_z(t.rep(), x).row(j).sum();
      CHECK(std::abs(t.w_row(j, x) - w) <= 1e-9 * std::max(1.0, std::abs(w)));
      CHECK(std::abs(t.z_row(j, x) - z) <= 1e-9 * std::max(1.0, std::abs(z)));
    }
    const Matrix w = eval_w(t.rep(), x);
    CHECK(max_abs(t.w(x) - w) <= 1e-5 * std::max(1.0, max_abs(w)));
  }
  // d/dx [Z 1]_j = q [W 1]_j on the grid (Simpson rule per cell)
  for (std::size_t k = 1; k < t.size(); k += 97)
    for (int j = 0; j < 2; ++j) {
      const double dz = t.z_row_at(k)(j) - t.z_row_at(k - 1)(j);
      const double mid = eval_w(t.rep(), t.grid()[k] - 0.5 * t.step()).row(j).sum();
      const double simpson = 1.5 * t.step() / 6.0 * (t.w_row_at(k - 1)(j) + 4.0 * mid + t.w_row_at(k)(j));
      CHECK(std::abs(dz - simpson) <= 1e-12 * std::max(1.0, std::abs(t.z_row_at(k)(j))));
    }
  // beyond the grid the representation is used directly
  CHECK(t.w_row(0, 7.0) == doctest::Approx(eval_w(t.rep(), 7.0).row(0).sum()));
}

TEST_CASE("sign change of the bounded-variation row sum and thresholds a(j)") {
  const MapModel m = fixtures::two_state_jump();
  const ScaleTable t15(spectral_decompose(m, 1.5));
  double crossing = -1.0;
  for (std::size_t k = 1; k < t15.size(); ++k)
    if (t15.w_row_at(k - 1)(1) > 0.0 && t15.w_row_at(k)(1) <= 0.0) {
      crossing = t15.grid()[k];
      break;
    }
  CHECK(crossing > 0.85);
  CHECK(crossing < 0.89);

  const ExtendedReal a1 = a_threshold(t15, 0);
  const ExtendedReal a2 = a_threshold(t15, 1);
  CHECK(a1.infinite);
  REQUIRE(a2.is_finite());
  CHECK(a2.value > 0.87);
  CHECK(eval_z(t15.rep(), a2.value).row(1).sum() == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(a_threshold(t15.rep(), 1).value == doctest::Approx(a2.value).epsilon(1e-8));

  const ScaleTable t18(spectral_decompose(m, 1.8));
  CHECK(a_threshold(t18, 1).as_double() > 0.88);
  const ScaleTable t5(spectral_decompose(m, 5.0));
  CHECK(a_threshold(t5, 1).as_double() > 1.2);
  for (const ScaleTable* t : {&t15, &t18, &t5})
    for (int j = 0; j < 2; ++j) CHECK(a_threshold(*t, j).as_double() > 0.0);
}

TEST_CASE("row sums are positive near zero") {
  std::mt19937_64 rng(5);
  std::vector<MapModel> models{fixtures::two_state_jump(), fixtures::wiener(), fixtures::random_model(rng, 3)};
  for (const auto& m : models) {
    const SpectralRep rep = spectral_decompose(m, 1.5);
    for (double x : {1e-4, 1e-3, 1e-2})
      for (int j = 0; j < m.states(); ++j) CHECK(eval_w(rep, x).row(j).sum() > 0.0);
  }
}

TEST_CASE("ratio Z/W is governed by the largest root") {
  // The row sums grow like exp(zeta_max x), where zeta_max is the largest
  // positive root of det(Psi(z) - qI); Z 1 / W 1 therefore tends to q / zeta_max.
  const MapModel m = fixtures::two_state_jump();
  const double q = 1.5;
  const SpectralRep rep = spectral_decompose(m, q);
  const double zeta_max = rep.roots.front().real();
  CHECK(rep.roots.front().imag() == 0.0);
  CHECK(zeta_max > rep.phi_q);
  const Vector w = eval_w(rep, 20.0).rowwise().sum();
  const Vector z = eval_z(rep, 20.0).rowwise().sum();
  CHECK(w(0) > 0.0);
  CHECK(w(1) < 0.0);
  for (int j = 0; j < 2; ++j) CHECK(std::abs(z(j) / w(j) / (q / zeta_max) - 1.0) <= 1e-3);

  // in the scalar case the largest root is Phi(q)
  const SpectralRep b = spectral_decompose(fixtures::brownian(0.3, 1.0), q);
  const double ratio = eval_z(b, 20.0)(0, 0) / eval_w(b, 20.0)(0, 0);
  CHECK(std::abs(ratio / (q / b.phi_q) - 1.0) <= 1e-3);
}

TEST_CASE("scale matrix under the Phi(q) tilt") {
  const MapModel m = fixtures::two_state_jump();
  const double q = 1.5;
  const SpectralRep rep = spectral_decompose(m, q);
  const Vector v = perron_vector(m, rep.phi_q);
  auto tilted = [&](double x) {
    return Matrix(std::exp(-rep.phi_q * x) * v.cwiseInverse().asDiagonal() * eval_w(rep, x) * v.asDiagonal());
  };
  double biggest = 0.0;
  for (double x = 0.0; x <= 5.0; x += 0.01) biggest = std::max(biggest, max_abs(tilted(x)));
  CHECK(std::isfinite(biggest));
  // its transform is the inverse exponent of the tilted model at q = 0
  const MapModel t = esscher_tilt(m, rep.phi_q);
  for (double beta : {3.5, 5.0, 8.0}) {
    const Matrix lhs = (v.cwiseInverse().asDiagonal() * laplace_transform(rep, beta + rep.phi_q).real() *
                        v.asDiagonal());
    const Matrix rhs = big_psi(t, beta).inverse();
    CHECK(max_abs(lhs - rhs) <= 1e-8 * max_abs(rhs));
  }
}

TEST_CASE("Wiener closed form") {
  const MapModel b = fixtures::brownian();
  const WienerScale ws1(b, 1.5);
  CHECK(ws1(0.7)(0, 0) == doctest::Approx(std::sqrt(2.0 / 1.5) * std::sinh(std::sqrt(3.0) * 0.7)));

  const MapModel w = fixtures::wiener(3.0, 1.0);
  for (double q : {0.5, 1.5, 5.0}) {
    const WienerScale ws(w, q);
    const SpectralRep rep = spectral_decompose(w, q);
    CHECK(max_abs(ws(0.0)) == 0.0);
    for (double x = 0.0; x <= 3.0; x += 0.25)
      CHECK(max_abs(ws(x) - eval_w(rep, x)) <= 1e-8 * std::max(1.0, max_abs(ws(x))));
  }
  CHECK_THROWS_AS(WienerScale(fixtures::two_state_jump(), 1.5), ModelShapeMismatch);
}

TEST_CASE("Talbot inversion agrees with the spectral backend") {
  const MapModel b = fixtures::brownian();
  for (double x : {0.1, 0.5, 1.0, 2.0})
    CHECK(std::abs(talbot_invert(b, 1.5, x)(0, 0) - std::sqrt(2.0 / 1.5) * std::sinh(std::sqrt(3.0) * x)) <= 1e-6);

  std::mt19937_64 rng(21);
  std::vector<MapModel> models{fixtures::two_state_jump(), fixtures::wiener()};
  for (int k = 0; k < 3; ++k) models.push_back(fixtures::random_model(rng, 2 + k));
  for (const auto& m : models) {
    const SpectralRep rep = spectral_decompose(m, 1.5);
    for (double x : {0.1, 0.5, 1.0, 2.0}) {
      const Matrix spec = eval_w(rep, x);
      CHECK(max_abs(talbot_invert(m, 1.5, x) - spec) <= 1e-5 * std::max(1.0, max_abs(spec)));
    }
  }
  // approaches W(0+) from the right
  const MapModel iv = fixtures::two_state_jump();
  CHECK(std::abs(talbot_invert(iv, 1.5, 1e-3)(1, 1) - 0.5) < 5e-3);
}
