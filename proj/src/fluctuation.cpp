#include "snmap/fluctuation.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "snmap/errors.hpp"

namespace snmap {

namespace {

Matrix checked_inverse(const Matrix& w) {
  Eigen::JacobiSVD<Matrix> svd(w);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  if (!(smallest > 0.0) || s(0) / smallest > 1e12)
    throw SingularScaleMatrix("W(a) is numerically singular (condition number above 1e12)");
  return w.inverse();
}

// int_0^inf f(x - y) F(dy) for a jump law F on (0, inf), with f = 1 on (-inf, 0]
template <class F>
double jump_average(const JumpLaw& law, double x, F f, double tol, double& err_out) {
  if (law.is_none()) return f(x);
  if (x <= 0.0) return 1.0;
  double err = 0.0;
  const double inner = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double y) { return f(x - y) * law.density(y); }, 0.0, x, 15, tol, &err);
  err_out += err;
  return inner + law.survival(x);
}

}  // namespace

Matrix FirstPassageRep::matrix(double x, double a) const {
  const auto n = up_roots.size();
  if (x >= a) return Matrix::Identity(n, n);
  CVector d(n);
  for (Eigen::Index k = 0; k < n; ++k) d(k) = std::exp(-up_roots(k) * (a - x));
  return (up_vectors * d.asDiagonal() * up_vectors_inv).real();
}

FirstPassageRep first_passage(const MapModel& model, const SpectralRep& rep) {
  const auto up = rep.up_roots();
  const auto n = static_cast<Eigen::Index>(up.size());
  FirstPassageRep fp;
  fp.q = rep.q;
  fp.up_roots.resize(n);
  fp.up_vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    fp.up_roots(k) = up[static_cast<std::size_t>(k)];
    Eigen::JacobiSVD<CMatrix> svd(shifted_exponent(model, rep.q, fp.up_roots(k)), Eigen::ComputeFullV);
    fp.up_vectors.col(k) = svd.matrixV().col(n - 1);
  }
  fp.up_vectors_inv = fp.up_vectors.inverse();
  return fp;
}

Matrix one_sided_up(const MapModel& model, double q, double x, double a) {
  return first_passage(model, spectral_decompose(model, q)).matrix(x, a);
}

double one_sided_up(const MapModel& model, double q, double x, double a, int i, int j) {
  return one_sided_up(model, q, x, a)(i, j);
}

Matrix two_sided_up(const SpectralRep& rep, double x, double a) {
  if (x >= a) return Matrix::Identity(rep.states, rep.states);
  return eval_w(rep, x) * checked_inverse(eval_w(rep, a));
}

Matrix two_sided_down(const SpectralRep& rep, double x, double a) {
  if (x < 0.0) return Matrix::Identity(rep.states, rep.states);
  if (x >= a) return Matrix::Zero(rep.states, rep.states);
  return eval_z(rep, x) - eval_w(rep, x) * checked_inverse(eval_w(rep, a)) * eval_z(rep, a);
}

double generator_check(const MapModel& model, const SpectralRep& rep, double x, int i) {
  const double q = rep.q;
  const int n = model.states();
  const auto& comp = model.component(i);
  const double tol = 1e-12;
  double err = 0.0;
  auto f = [&](int k) { return [&rep, k](double y) { return eval_z(rep, y).row(k).sum(); }; };
  const double fi = eval_z(rep, x).row(i).sum();

  double out = -q * fi;
  if (x > 0.0) {
    out += comp.drift * q * eval_w(rep, x).row(i).sum();
    out += 0.5 * comp.sigma2 * q * eval_w_prime(rep, x).row(i).sum();
  }
  for (const auto& jp : comp.jumps) out += jp.rate * (jump_average(jp.law, x, f(i), tol, err) - fi);
  for (int k = 0; k < n; ++k) {
    const double rate = model.generator()(i, k);
    if (k == i || rate == 0.0) continue;
    out += rate * (jump_average(model.switch_jump(i, k), x, f(k), tol, err) - fi);
  }
  if (err > 1e-6 * (1.0 + std::abs(q)))
    throw QuadratureFailure("jump integral error estimate " + std::to_string(err));
  return out;
}

}  // namespace snmap
