#include "snmap/map_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "snmap/errors.hpp"

namespace snmap {

double LevyComponent::total_jump_rate() const {
  double r = 0.0;
  for (const auto& j : jumps) r += j.rate;
  return r;
}

Complex LevyComponent::exponent(Complex z) const {
  Complex out = drift * z + 0.5 * sigma2 * z * z;
  for (const auto& j : jumps) out += j.rate * (j.law.transform(z) - 1.0);
  return out;
}

Complex LevyComponent::exponent_derivative(Complex z) const {
  Complex out = drift + sigma2 * z;
  for (const auto& j : jumps) out += j.rate * j.law.transform_derivative(z);
  return out;
}

MapModel::MapModel(Matrix generator, std::vector<LevyComponent> components,
                   std::vector<std::vector<JumpLaw>> switch_jumps)
    : q_(std::move(generator)), components_(std::move(components)), switch_(std::move(switch_jumps)) {
  const auto n = static_cast<std::size_t>(q_.rows());
  if (q_.rows() < 1 || q_.rows() != q_.cols())
    throw ModelShapeMismatch("generator must be a non-empty square matrix");
  if (components_.size() != n) throw ModelShapeMismatch("one Levy component per state required");
  if (switch_.empty()) switch_.assign(n, std::vector<JumpLaw>(n));
  if (switch_.size() != n) throw ModelShapeMismatch("switch-jump table must be N x N");
  for (auto& row : switch_)
    if (row.size() != n) throw ModelShapeMismatch("switch-jump table must be N x N");
  for (std::size_t i = 0; i < n; ++i) switch_[i][i] = JumpLaw::none();
}

const JumpLaw& MapModel::switch_jump(int i, int j) const {
  static const JumpLaw kNone;
  if (i == j || q_(i, j) == 0.0) return kNone;
  return switch_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
}

std::vector<PathVariation> MapModel::variation() const {
  std::vector<PathVariation> out;
  for (const auto& c : components_) out.push_back(c.variation());
  return out;
}

std::vector<double> MapModel::pole_rates() const {
  std::vector<double> rates;
  auto add = [&](const JumpLaw& law) {
    for (const auto& ph : law.phases()) rates.push_back(ph.rate);
  };
  for (const auto& c : components_)
    for (const auto& j : c.jumps) add(j.law);
  for (int i = 0; i < states(); ++i)
    for (int j = 0; j < states(); ++j) add(switch_jump(i, j));
  std::sort(rates.begin(), rates.end());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
  return rates;
}

bool operator==(const MapModel& a, const MapModel& b) {
  if (a.states() != b.states() || a.q_ != b.q_) return false;
  for (int i = 0; i < a.states(); ++i) {
    const auto& ca = a.component(i);
    const auto& cb = b.component(i);
    if (ca.drift != cb.drift || ca.sigma2 != cb.sigma2 || ca.jumps.size() != cb.jumps.size()) return false;
    for (std::size_t k = 0; k < ca.jumps.size(); ++k)
      if (ca.jumps[k].rate != cb.jumps[k].rate || !(ca.jumps[k].law == cb.jumps[k].law)) return false;
    for (int j = 0; j < a.states(); ++j)
      if (!(a.switch_jump(i, j) == b.switch_jump(i, j))) return false;
  }
  return true;
}

CMatrix big_psi(const MapModel& model, Complex z) {
  const int n = model.states();
  CMatrix psi(n, n);
  const Matrix& q = model.generator();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j)
        psi(i, j) = model.component(i).exponent(z) + q(i, i);
      else
        psi(i, j) = q(i, j) * model.switch_jump(i, j).transform(z);
    }
  }
  return psi;
}

Matrix big_psi(const MapModel& model, double beta) { return big_psi(model, Complex(beta, 0.0)).real(); }

CMatrix big_psi_derivative(const MapModel& model, Complex z) {
  const int n = model.states();
  CMatrix d(n, n);
  const Matrix& q = model.generator();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j)
        d(i, j) = model.component(i).exponent_derivative(z);
      else
        d(i, j) = q(i, j) * model.switch_jump(i, j).transform_derivative(z);
    }
  }
  return d;
}

namespace {

struct PerronPair {
  double value;
  Vector vector;
};

PerronPair perron_pair(const MapModel& model, double theta) {
  const Matrix psi = big_psi(model, theta);
  Eigen::EigenSolver<Matrix> solver(psi, true);
  if (solver.info() != Eigen::Success) throw EigenFailure("eigensolver did not converge for Psi(theta)");
  const auto& ev = solver.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < ev.size(); ++k)
    if (ev(k).real() > ev(best).real()) best = k;
  const Complex lead = ev(best);
  if (std::abs(lead.imag()) > 1e-10 * std::max(1.0, std::abs(lead)))
    throw EigenFailure("Perron root has a non-negligible imaginary part");
  CVector cv = solver.eigenvectors().col(best);
  // rotate so that the largest component is real and positive
  Eigen::Index big = 0;
  cv.cwiseAbs().maxCoeff(&big);
  cv *= std::conj(cv(big)) / std::abs(cv(big));
  return {lead.real(), cv.real()};
}

}  // namespace

double kappa(const MapModel& model, double theta) {
  if (theta == 0.0) return 0.0;  // Psi(0) = Q is conservative
  return perron_pair(model, theta).value;
}

Vector stationary_distribution(const MapModel& model) {
  const int n = model.states();
  if (n == 1) return Vector::Ones(1);
  Matrix a(n + 1, n);
  a.topRows(n) = model.generator().transpose();
  a.row(n).setOnes();
  Vector b = Vector::Zero(n + 1);
  b(n) = 1.0;
  Vector pi = a.colPivHouseholderQr().solve(b);
  return pi;
}

Vector perron_vector(const MapModel& model, double theta) {
  const int n = model.states();
  if (theta == 0.0 || n == 1) return Vector::Ones(n);
  Vector v = perron_pair(model, theta).vector;
  const Vector pi = stationary_distribution(model);
  v /= pi.dot(v);
  if ((v.array() <= 0.0).any()) throw EigenFailure("Perron vector is not strictly positive");
  return v;
}

double phi(const MapModel& model, double q, double theta_max) {
  if (q < 0.0) throw std::invalid_argument("phi requires q >= 0");
  if (q == 0.0) {
    // kappa'(0+) = pi . Psi'(0) 1, the asymptotic mean drift
    const Vector pi = stationary_distribution(model);
    const double drift = (pi.transpose() * big_psi_derivative(model, 0.0).real()).sum();
    if (drift >= 0.0) return 0.0;
  }
  double lo = 0.0;
  double hi = 1.0;
  while (kappa(model, hi) <= q) {
    lo = hi;
    hi *= 2.0;
    if (hi > theta_max) throw BracketFailure("no theta <= theta_max with kappa(theta) > q");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (kappa(model, mid) <= q)
      lo = mid;
    else
      hi = mid;
  }
  // lo satisfies kappa <= q, hi satisfies kappa > q; pick the closer value
  return std::abs(kappa(model, lo) - q) <= std::abs(kappa(model, hi) - q) ? lo : hi;
}

MapModel esscher_tilt(const MapModel& model, double gamma) {
  if (gamma == 0.0) return model;
  const int n = model.states();
  const Vector v = perron_vector(model, gamma);
  std::vector<LevyComponent> comps;
  for (int i = 0; i < n; ++i) {
    const auto& c = model.component(i);
    LevyComponent t;
    t.sigma2 = c.sigma2;
    t.drift = c.drift + c.sigma2 * gamma;
    for (const auto& jp : c.jumps)
      t.jumps.push_back({jp.rate * jp.law.transform(gamma).real(), jp.law.tilted(gamma)});
    comps.push_back(std::move(t));
  }
  Matrix q = Matrix::Zero(n, n);
  std::vector<std::vector<JumpLaw>> sw(static_cast<std::size_t>(n), std::vector<JumpLaw>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    double out_rate = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j || model.generator()(i, j) == 0.0) continue;
      const JumpLaw& law = model.switch_jump(i, j);
      q(i, j) = model.generator()(i, j) * law.transform(gamma).real() * v(j) / v(i);
      sw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = law.tilted(gamma);
      out_rate += q(i, j);
    }
    q(i, i) = -out_rate;
  }
  return MapModel(std::move(q), std::move(comps), std::move(sw));
}

ValidationReport validate(const MapModel& model) {
  ValidationReport report;
  report.variation = model.variation();
  const int n = model.states();
  const Matrix& q = model.generator();
  auto add = [&](int state, std::string code, std::string msg) {
    report.violations.push_back({state, std::move(code), std::move(msg)});
  };

  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      row += q(i, j);
      if (i != j && q(i, j) < 0.0) add(i, "negative_rate", "off-diagonal generator entry is negative");
      if (!std::isfinite(q(i, j))) add(i, "non_finite_rate", "generator entry is not finite");
    }
    if (std::abs(row) > 1e-10 * std::max(1.0, std::abs(q(i, i)))) {
      std::ostringstream os;
      os << "generator row sums to " << row << ", not 0";
      add(i, "row_sum", os.str());
    }
  }

  if (n >= 2) {
    // irreducibility: every state reaches every other along positive rates
    for (int s = 0; s < n; ++s) {
      std::vector<bool> seen(static_cast<std::size_t>(n), false);
      std::vector<int> stack{s};
      seen[static_cast<std::size_t>(s)] = true;
      while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int j = 0; j < n; ++j)
          if (i != j && q(i, j) > 0.0 && !seen[static_cast<std::size_t>(j)]) {
            seen[static_cast<std::size_t>(j)] = true;
            stack.push_back(j);
          }
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        add(s, "reducible", "modulator is not irreducible");
        break;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    const auto& c = model.component(i);
    if (!(c.sigma2 >= 0.0)) add(i, "negative_variance", "sigma2 must be >= 0");
    if (!std::isfinite(c.drift)) add(i, "non_finite_drift", "drift must be finite");
    for (const auto& jp : c.jumps) {
      if (!(jp.rate > 0.0)) add(i, "jump_rate", "compound-Poisson rate must be positive");
      if (jp.law.is_none()) add(i, "jump_law", "Levy jump law must not be of kind none");
      if (auto msg = jp.law.check(); !msg.empty()) add(i, "jump_law", msg);
    }
    if (c.sigma2 == 0.0 && !(c.drift > 0.0))
      add(i, "non_increasing",
          "bounded-variation component needs a positive drift (paths would be non-increasing)");
    for (int j = 0; j < n; ++j)
      if (auto msg = model.switch_jump(i, j).check(); !msg.empty()) add(i, "switch_jump", msg);
  }
  return report;
}

}  // namespace snmap
