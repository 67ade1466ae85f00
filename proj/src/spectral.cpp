#include "snmap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "snmap/errors.hpp"

namespace snmap {

namespace {

using Factors = std::map<double, int>;  // pole rate mu -> power of (z + mu)

void add_law_factors(Factors& f, const JumpLaw& law) {
  for (const auto& ph : law.phases()) {
    int& p = f[ph.rate];
    p = std::max(p, ph.shape);
  }
}

// prod over f of (z + mu)^p, with the power of `mu` lowered by `drop`
Polynomial factor_product(const Factors& f, double mu = 0.0, int drop = 0) {
  Polynomial out = Polynomial::constant(1.0);
  for (const auto& [rate, power] : f) {
    const int p = rate == mu ? power - drop : power;
    if (p > 0) out *= Polynomial::shifted_power(rate, p);
  }
  return out;
}

// r_i(z) * G(z) for a law whose poles all appear in `f`
Polynomial cleared_transform(const Factors& f, const JumpLaw& law) {
  if (law.is_none()) return factor_product(f);
  Polynomial out;
  for (const auto& ph : law.phases())
    out += factor_product(f, ph.rate, ph.shape) * (ph.weight * std::pow(ph.rate, ph.shape));
  return out;
}

Complex exp_minus_one_over(Complex zeta, double x) {
  const Complex zx = zeta * x;
  if (std::abs(zx) < 1e-8) return x * (1.0 + 0.5 * zx);
  return (std::exp(zx) - 1.0) / zeta;
}

// a - b, dropping leading coefficients that are pure cancellation noise
Polynomial cancelling_difference(const Polynomial& a, const Polynomial& b) {
  const auto& ca = a.coeffs();
  const auto& cb = b.coeffs();
  std::vector<double> d(std::max(ca.size(), cb.size()), 0.0);
  std::vector<double> mag(d.size(), 0.0);
  for (std::size_t k = 0; k < ca.size(); ++k) {
    d[k] += ca[k];
    mag[k] += std::abs(ca[k]);
  }
  for (std::size_t k = 0; k < cb.size(); ++k) {
    d[k] -= cb[k];
    mag[k] += std::abs(cb[k]);
  }
  while (!d.empty() && std::abs(d.back()) <= 1e-12 * mag[d.size() - 1]) d.pop_back();
  return Polynomial(std::move(d));
}

Complex newton_polish(const MapModel& model, double q, Complex z) {
  const int n = model.states();
  for (int it = 0; it < 10; ++it) {
    CMatrix a;
    try {
      a = shifted_exponent(model, q, z);
    } catch (const PoleHit&) {
      return z;
    }
    const Complex det = a.determinant();
    const Complex deriv = (adjugate(a) * big_psi_derivative(model, z)).trace();
    if (deriv == Complex(0.0) || n == 0) return z;
    const Complex step = det / deriv;
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return z;
    // keep the step only if it reduces the residual
    const Complex next = z - step;
    Complex next_det;
    try {
      next_det = shifted_exponent(model, q, next).determinant();
    } catch (const PoleHit&) {
      return z;
    }
    if (std::abs(next_det) > std::abs(det)) return z;
    z = next;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
  }
  return z;
}

}  // namespace

std::vector<Complex> SpectralRep::up_roots() const {
  std::vector<Complex> out;
  for (const auto& r : roots)
    if (r.real() > 0.0) out.push_back(r);
  return out;
}

CMatrix shifted_exponent(const MapModel& model, double q, Complex z) {
  CMatrix a = big_psi(model, z);
  a.diagonal().array() -= q;
  return a;
}

CMatrix adjugate(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  CMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1.0;
    return adj;
  }
  CMatrix minor(n - 1, n - 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      // minor without row r and column c
      for (Eigen::Index i = 0, mi = 0; i < n; ++i) {
        if (i == r) continue;
        for (Eigen::Index j = 0, mj = 0; j < n; ++j) {
          if (j == c) continue;
          minor(mi, mj++) = a(i, j);
        }
        ++mi;
      }
      const double sign = ((r + c) % 2 == 0) ? 1.0 : -1.0;
      adj(c, r) = sign * (n == 2 ? minor(0, 0) : minor.determinant());
    }
  }
  return adj;
}

std::vector<Polynomial> cleared_matrix(const MapModel& model, double q) {
  const int n = model.states();
  const Matrix& Q = model.generator();
  std::vector<Polynomial> m(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    Factors f;
    const auto& comp = model.component(i);
    for (const auto& jp : comp.jumps) add_law_factors(f, jp.law);
    for (int j = 0; j < n; ++j) add_law_factors(f, model.switch_jump(i, j));

    for (int j = 0; j < n; ++j) {
      Polynomial& e = m[static_cast<std::size_t>(i * n + j)];
      if (i != j) {
        if (Q(i, j) != 0.0) e = cleared_transform(f, model.switch_jump(i, j)) * Q(i, j);
        continue;
      }
      const Polynomial base({Q(i, i) - q - comp.total_jump_rate(), comp.drift, 0.5 * comp.sigma2});
      e = base * factor_product(f);
      for (const auto& jp : comp.jumps) e += cleared_transform(f, jp.law) * jp.rate;
    }
  }
  return m;
}

Polynomial polynomial_determinant(std::vector<Polynomial> m, int n) {
  auto at = [&](int i, int j) -> Polynomial& { return m[static_cast<std::size_t>(i * n + j)]; };
  if (n == 1) return at(0, 0);
  double sign = 1.0;
  Polynomial prev = Polynomial::constant(1.0);
  for (int k = 0; k < n - 1; ++k) {
    if (at(k, k).is_zero()) {
      int r = k + 1;
      while (r < n && at(r, k).is_zero()) ++r;
      if (r == n) return Polynomial{};
      for (int j = 0; j < n; ++j) std::swap(at(k, j), at(r, j));
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) at(i, j) = cancelling_difference(at(k, k) * at(i, j), at(i, k) * at(k, j)).quotient(prev);
      at(i, k) = Polynomial{};
    }
    prev = at(k, k);
  }
  return at(n - 1, n - 1) * sign;
}

SpectralRep spectral_decompose(const MapModel& model, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("spectral_decompose requires q > 0");
  const int n = model.states();
  SpectralRep rep;
  rep.q = q;
  rep.states = n;
  rep.generator = model.generator();

  Polynomial det = polynomial_determinant(cleared_matrix(model, q), n);
  // Zeros at -mu come from clearing denominators, not from det(Psi - qI).
  for (double mu : model.pole_rates()) {
    while (det.degree() > 0 && std::abs(det(-mu)) <= 1e-10 * det.magnitude_at(-mu)) {
      double rem = 0.0;
      det = det.deflate(-mu, rem);
    }
  }
  rep.determinant = det;

  for (Complex z : det.roots()) {
    z = newton_polish(model, q, z);
    if (std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z))) z = {z.real(), 0.0};
    const CMatrix a = shifted_exponent(model, q, z);
    // Hadamard's bound: |det A| <= prod of row norms
    const double bound = a.rowwise().norm().prod();
    if (std::abs(a.determinant()) > 1e-8 * std::max(1.0, bound))
      throw EigenFailure("root of the cleared determinant does not solve det(Psi(z) - qI) = 0");
    rep.roots.push_back(z);
  }
  std::sort(rep.roots.begin(), rep.roots.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  for (std::size_t a = 0; a < rep.roots.size(); ++a)
    for (std::size_t b = a + 1; b < rep.roots.size(); ++b)
      if (std::abs(rep.roots[a] - rep.roots[b]) < 1e-7)
        throw DegenerateRoots("two roots of det(Psi - qI) closer than 1e-7; rerun with q +/- 1e-6");

  const auto up = rep.up_roots().size();
  if (static_cast<int>(up) != n)
    throw RootCountMismatch("found " + std::to_string(up) + " roots with positive real part, expected " +
                            std::to_string(n));

  for (const Complex& z : rep.roots) {
    const CMatrix a = shifted_exponent(model, q, z);
    const CMatrix adj = adjugate(a);
    const Complex jac = (adj * big_psi_derivative(model, z)).trace();
    rep.residues.push_back(adj / jac);
  }

  const double phi_q = phi(model, q);
  double best = std::numeric_limits<double>::infinity();
  for (const Complex& z : rep.roots) {
    if (z.imag() != 0.0 || z.real() <= 0.0) continue;
    if (std::abs(z.real() - phi_q) < best) {
      best = std::abs(z.real() - phi_q);
      rep.phi_q = z.real();
    }
  }
  return rep;
}

Matrix eval_w(const SpectralRep& rep, double x) {
  if (x < 0.0) return Matrix::Zero(rep.states, rep.states);
  CMatrix acc = CMatrix::Zero(rep.states, rep.states);
  for (std::size_t k = 0; k < rep.roots.size(); ++k) acc += rep.residues[k] * std::exp(rep.roots[k] * x);
  return acc.real();
}

Matrix eval_w_prime(const SpectralRep& rep, double x) {
  if (x < 0.0) return Matrix::Zero(rep.states, rep.states);
  CMatrix acc = CMatrix::Zero(rep.states, rep.states);
  for (std::size_t k = 0; k < rep.roots.size(); ++k)
    acc += rep.residues[k] * (rep.roots[k] * std::exp(rep.roots[k] * x));
  return acc.real();
}

Matrix eval_z(const SpectralRep& rep, double x) {
  const int n = rep.states;
  if (x <= 0.0) return Matrix::Identity(n, n);
  CMatrix acc = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < rep.roots.size(); ++k) acc += rep.residues[k] * exp_minus_one_over(rep.roots[k], x);
  const Matrix qi_minus_q = rep.q * Matrix::Identity(n, n) - rep.generator;
  return Matrix::Identity(n, n) + acc.real() * qi_minus_q;
}

Matrix eval_z_prime(const SpectralRep& rep, double x) {
  const int n = rep.states;
  if (x <= 0.0) return Matrix::Zero(n, n);
  return eval_w(rep, x) * (rep.q * Matrix::Identity(n, n) - rep.generator);
}

CMatrix laplace_transform(const SpectralRep& rep, Complex beta) {
  CMatrix acc = CMatrix::Zero(rep.states, rep.states);
  for (std::size_t k = 0; k < rep.roots.size(); ++k) acc += rep.residues[k] / (beta - rep.roots[k]);
  return acc;
}

Matrix w_zero_plus(const MapModel& model, double /*q*/) {
  const int n = model.states();
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& c = model.component(i);
    if (c.variation() == PathVariation::Bounded) w(i, i) = 1.0 / c.drift;
  }
  return w;
}

std::vector<ExtendedReal> w_prime_zero_plus(const MapModel& model, double q) {
  std::vector<ExtendedReal> out;
  for (int i = 0; i < model.states(); ++i) {
    const auto& c = model.component(i);
    if (c.sigma2 > 0.0) {
      out.push_back(ExtendedReal::finite(2.0 / c.sigma2));
    } else if (c.drift > 0.0) {
      const double qi = -model.generator()(i, i);
      out.push_back(ExtendedReal::finite((q + qi + c.total_jump_rate()) / (c.drift * c.drift)));
    } else {
      out.push_back(ExtendedReal::infinity());
    }
  }
  return out;
}

// --- ScaleTable ------------------------------------------------------------

ScaleTable::ScaleTable(SpectralRep rep, double x_max, double h) : rep_(std::move(rep)), x_max_(x_max), h_(h) {
  if (!(h > 0.0) || !(x_max > h)) throw std::invalid_argument("ScaleTable needs 0 < h < x_max");
  const auto count = static_cast<std::size_t>(std::llround(x_max / h)) + 1;
  x_max_ = static_cast<double>(count - 1) * h;
  grid_.resize(count);
  w_.resize(count);
  z_.resize(count);
  w_row_.resize(count);
  z_row_.resize(count);
  w_prime_row_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double x = static_cast<double>(k) * h;
    grid_[k] = x;
    w_[k] = eval_w(rep_, x);
    z_[k] = k == 0 ? Matrix::Identity(rep_.states, rep_.states) : eval_z(rep_, x);
    w_row_[k] = w_[k].rowwise().sum();
    z_row_[k] = z_[k].rowwise().sum();
    w_prime_row_[k] = eval_w_prime(rep_, x).rowwise().sum();
  }
}

double ScaleTable::hermite(const std::vector<Vector>& f, const std::vector<Vector>& df, double dscale, int j,
                           double x) const {
  auto k = static_cast<std::size_t>(x / h_);
  k = std::min(k, grid_.size() - 2);
  const double t = (x - grid_[k]) / h_;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * f[k](j) + h10 * h_ * dscale * df[k](j) + h01 * f[k + 1](j) + h11 * h_ * dscale * df[k + 1](j);
}

Matrix ScaleTable::linear(const std::vector<Matrix>& m, double x) const {
  auto k = static_cast<std::size_t>(x / h_);
  k = std::min(k, grid_.size() - 2);
  const double t = (x - grid_[k]) / h_;
  return (1.0 - t) * m[k] + t * m[k + 1];
}

double ScaleTable::w_row(int j, double x) const {
  if (x < 0.0) return 0.0;
  if (x > x_max_) return eval_w(rep_, x).row(j).sum();
  return hermite(w_row_, w_prime_row_, 1.0, j, x);
}

double ScaleTable::z_row(int j, double x) const {
  if (x <= 0.0) return 1.0;
  if (x > x_max_) return eval_z(rep_, x).row(j).sum();
  return hermite(z_row_, w_row_, rep_.q, j, x);
}

double ScaleTable::w_prime_row(int j, double x) const {
  if (x < 0.0) return 0.0;
  if (x > x_max_) return eval_w_prime(rep_, x).row(j).sum();
  auto k = std::min(static_cast<std::size_t>(x / h_), grid_.size() - 2);
  const double t = (x - grid_[k]) / h_;
  return (1.0 - t) * w_prime_row_[k](j) + t * w_prime_row_[k + 1](j);
}

Matrix ScaleTable::w(double x) const {
  if (x < 0.0) return Matrix::Zero(states(), states());
  if (x > x_max_) return eval_w(rep_, x);
  return linear(w_, x);
}

Matrix ScaleTable::z(double x) const {
  if (x <= 0.0) return Matrix::Identity(states(), states());
  if (x > x_max_) return eval_z(rep_, x);
  return linear(z_, x);
}

// --- a(j) ------------------------------------------------------------------

namespace {

template <class ZRow>
ExtendedReal first_down_crossing(ZRow zrow, double x_max, double h) {
  const auto count = static_cast<std::size_t>(std::llround(x_max / h));
  double prev = 0.0;
  for (std::size_t k = 1; k <= count; ++k) {
    const double x = static_cast<double>(k) * h;
    if (zrow(x) <= 1.0) {
      double lo = prev;
      double hi = x;
      while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        if (zrow(mid) <= 1.0)
          hi = mid;
        else
          lo = mid;
      }
      return ExtendedReal::finite(hi);
    }
    prev = x;
  }
  return ExtendedReal::infinity();
}

}  // namespace

ExtendedReal a_threshold(const ScaleTable& table, int j) {
  const SpectralRep& rep = table.rep();
  // Grid values for the scan, direct evaluation for the refinement.
  const auto zrow = [&](double x) {
    const double k = x / table.step();
    const auto idx = static_cast<std::size_t>(std::llround(k));
    if (std::abs(k - static_cast<double>(idx)) < 1e-9 && idx < table.size()) return table.z_row_at(idx)(j);
    return eval_z(rep, x).row(j).sum();
  };
  return first_down_crossing(zrow, table.x_max(), table.step());
}

ExtendedReal a_threshold(const SpectralRep& rep, int j, double x_max, double h) {
  return first_down_crossing([&](double x) { return eval_z(rep, x).row(j).sum(); }, x_max, h);
}

// --- Talbot ----------------------------------------------------------------

namespace {

Matrix talbot_once(const MapModel& model, double q, double shift, double t, int m) {
  const int n = model.states();
  const double r = 2.0 * m / (5.0 * t);
  auto transform = [&](Complex s) -> CMatrix {
    return shifted_exponent(model, q, s + shift).partialPivLu().inverse();
  };
  CMatrix acc = 0.5 * std::exp(r * t) * transform(Complex(r, 0.0));
  for (int k = 1; k < m; ++k) {
    const double theta = k * std::numbers::pi / m;
    const double cot = 1.0 / std::tan(theta);
    const Complex s(r * theta * cot, r * theta);
    const double sigma = theta + (theta * cot - 1.0) * cot;
    acc += (std::exp(t * s) * Complex(1.0, sigma)) * transform(s);
  }
  Matrix out = (r / m) * acc.real();
  (void)n;
  return out * std::exp(shift * t);
}

}  // namespace

Matrix talbot_invert(const MapModel& model, double q, double x, int terms) {
  if (!(x > 0.0)) throw std::invalid_argument("talbot_invert requires x > 0");
  const double shift = phi(model, q) + 1.0;
  const Matrix coarse = talbot_once(model, q, shift, x, terms);
  const Matrix fine = talbot_once(model, q, shift, x, 2 * terms);
  const double scale = std::max(1.0, coarse.cwiseAbs().maxCoeff());
  const double diff = (coarse - fine).cwiseAbs().maxCoeff();
  if (diff > 1e-5 * scale) throw InversionUnstable("Talbot estimates disagree by " + std::to_string(diff));
  return coarse;
}

// --- Wiener closed form ----------------------------------------------------

WienerScale::WienerScale(const MapModel& model, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("WienerScale requires q > 0");
  const int n = model.states();
  for (int i = 0; i < n; ++i) {
    const auto& c = model.component(i);
    if (c.sigma2 != 1.0 || c.drift != 0.0 || !c.jumps.empty())
      throw ModelShapeMismatch("closed form needs driftless unit-variance Brownian components");
    for (int j = 0; j < n; ++j)
      if (!model.switch_jump(i, j).is_none()) throw ModelShapeMismatch("closed form needs no switch jumps");
  }
  Eigen::EigenSolver<Matrix> solver(model.generator());
  if (solver.info() != Eigen::Success) throw EigenFailure("eigensolver failed on Q");
  h_ = solver.eigenvectors();
  h_inv_ = h_.inverse();
  lambda_ = solver.eigenvalues();
  alpha_ = (2.0 * (Complex(q, 0.0) - lambda_.array())).sqrt().matrix();
}

Matrix WienerScale::operator()(double x) const {
  const auto n = h_.rows();
  if (x < 0.0) return Matrix::Zero(n, n);
  CVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = 2.0 / alpha_(i) * std::sinh(alpha_(i) * x);
  return (h_ * d.asDiagonal() * h_inv_).real();
}

}  // namespace snmap
