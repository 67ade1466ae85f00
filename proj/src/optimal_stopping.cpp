#include "snmap/optimal_stopping.hpp"

#include <algorithm>
#include <cmath>

#include "snmap/errors.hpp"

namespace snmap {

const char* to_string(Regime r) {
  switch (r) {
    case Regime::ZeroBoundary:
      return "ZeroBoundary";
    case Regime::InteriorRoot:
      return "InteriorRoot";
    case Regime::NoRootOnRange:
      return "NoRootOnRange";
    case Regime::Unbounded:
      return "Unbounded";
  }
  return "?";
}

const char* to_string(OdeStatus s) {
  switch (s) {
    case OdeStatus::Ok:
      return "Ok";
    case OdeStatus::BlowUp:
      return "BlowUp";
    case OdeStatus::ConstraintViolation:
      return "ConstraintViolation";
    case OdeStatus::DivisionNearZero:
      return "DivisionNearZero";
  }
  return "?";
}

double u_fn(const SpectralRep& rep, int j, double x) {
  x = std::max(x, 0.0);
  return eval_z(rep, x).row(j).sum() - rep.q * eval_w(rep, x).row(j).sum();
}

double u_fn(const ScaleTable& table, int j, double x) {
  x = std::max(x, 0.0);
  return table.z_row(j, x) - table.q() * table.w_row(j, x);
}

// --- StopSolution ------------------------------------------------------------

StopSolution::StopSolution(double q, double kappa1, GainSpec gain, std::shared_ptr<const ScaleTable> table,
                           std::vector<StateStop> states)
    : q_(q), kappa1_(kappa1), gain_(std::move(gain)), table_(std::move(table)), states_(std::move(states)) {}

bool StopSolution::complete() const {
  return std::all_of(states_.begin(), states_.end(), [](const StateStop& s) { return s.c.has_value(); });
}

std::vector<double> StopSolution::boundaries() const {
  std::vector<double> c;
  for (std::size_t j = 0; j < states_.size(); ++j) {
    if (!states_[j].c) throw BoundaryMissing("state " + std::to_string(j + 1) + " has no boundary on the grid");
    c.push_back(*states_[j].c);
  }
  return c;
}

double StopSolution::value(double x, double s, int i, int j) const {
  if (x > s) throw InvalidConfig("value needs x <= s");
  const auto& st = state(j);
  if (!st.c) throw BoundaryMissing("state " + std::to_string(j + 1) + " has no boundary on the grid");
  return gain_.f(s, j) * table_->z_row(i, x - s + *st.c);
}

// --- exponential gain, constant boundaries -----------------------------------

StopSolution solve_shepp(const MapModel& model, double q, const Vector& h, double x_max, double step) {
  if (h.size() != model.states()) throw InvalidConfig("h needs one weight per state");
  GainSpec gain = GainSpec::shepp(h);
  const double k1 = kappa(model, 1.0);
  if (!(q > k1))
    throw Unbounded("q = " + std::to_string(q) + " <= kappa(1) = " + std::to_string(k1) +
                    ": the value is infinite");

  auto table = std::make_shared<const ScaleTable>(spectral_decompose(model, q), x_max, step);
  const SpectralRep& rep = table->rep();
  const Matrix w0 = w_zero_plus(model, q);
  std::vector<StateStop> states;
  for (int j = 0; j < model.states(); ++j) {
    StateStop st;
    st.w_row_zero = w0.row(j).sum();
    st.a = a_threshold(*table, j);
    if (st.w_row_zero >= 1.0 / q) {
      st.regime = Regime::ZeroBoundary;
      st.c = 0.0;
    } else {
      // first grid point with u_j <= 0, then bisection on the representation
      for (std::size_t k = 1; k < table->size(); ++k) {
        const double uk = table->z_row_at(k)(j) - q * table->w_row_at(k)(j);
        if (uk > 0.0) continue;
        double lo = table->grid()[k - 1], hi = table->grid()[k];
        while (hi - lo > 1e-9) {
          const double mid = 0.5 * (lo + hi);
          (u_fn(rep, j, mid) > 0.0 ? lo : hi) = mid;
        }
        st.regime = Regime::InteriorRoot;
        st.c = hi;
        break;
      }
    }
    if (st.c && st.a.is_finite() && *st.c > st.a.value)
      throw InvalidSolution("state " + std::to_string(j + 1) + ": c = " + std::to_string(*st.c) + " exceeds a = " +
                            std::to_string(st.a.value));
    states.push_back(st);
  }
  return StopSolution(q, k1, std::move(gain), std::move(table), std::move(states));
}

// --- general boundary ODE --------------------------------------------------------

namespace {

struct OdeFailure {
  OdeStatus status;
  std::string message;
};

class BoundaryRhs {
 public:
  BoundaryRhs(const ScaleTable& table, const GainSpec& gain, int j, double x_max)
      : table_(table), gain_(gain), j_(j), x_max_(x_max) {}

  // returns false with `fail` filled when the right side cannot be evaluated
  bool operator()(double s, double g, double& out, OdeFailure& fail) const {
    if (!(g >= 0.0) || g > x_max_) {
      fail = {OdeStatus::BlowUp, "g = " + std::to_string(g) + " left [0, x_max] at s = " + std::to_string(s)};
      return false;
    }
    const double denom = table_.q() * table_.w_row(j_, g);
    if (denom < 1e-10) {
      fail = {OdeStatus::DivisionNearZero, "q [W 1](g) < 1e-10 at s = " + std::to_string(s)};
      return false;
    }
    out = 1.0 - gain_.df(s, j_) / gain_.f(s, j_) * table_.z_row(j_, g) / denom;
    if (!std::isfinite(out)) {
      fail = {OdeStatus::BlowUp, "non-finite slope at s = " + std::to_string(s)};
      return false;
    }
    return true;
  }

 private:
  const ScaleTable& table_;
  const GainSpec& gain_;
  int j_;
  double x_max_;
};

bool rk4_step(const BoundaryRhs& f, double s, double g, double h, double& out, OdeFailure& fail) {
  double k1, k2, k3, k4;
  if (!f(s, g, k1, fail)) return false;
  if (!f(s + h / 2, g + h / 2 * k1, k2, fail)) return false;
  if (!f(s + h / 2, g + h / 2 * k2, k3, fail)) return false;
  if (!f(s + h, g + h * k3, k4, fail)) return false;
  out = g + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  return true;
}

}  // namespace

std::vector<BoundaryCurve> solve_boundary_ode(const MapModel& model, double q, const GainSpec& gain, double s0,
                                              double s1, const std::vector<double>& init, const OdeOptions& opt) {
  const int n = model.states();
  if (static_cast<int>(init.size()) != n) throw InvalidConfig("one initial value per state is required");
  if (gain.states() != n) throw InvalidConfig("gain and model disagree on the number of states");
  if (!(opt.step > 0.0) || !(opt.min_step > 0.0)) throw InvalidConfig("ODE steps must be positive");
  if (std::min(s0, s1) < gain.s_min() || std::max(s0, s1) > gain.s_max())
    throw InvalidConfig("s-range leaves the domain of the gain");

  const ScaleTable table(spectral_decompose(model, q), opt.x_max, opt.grid_step);
  const double dir = s1 >= s0 ? 1.0 : -1.0;
  std::vector<BoundaryCurve> curves;
  for (int j = 0; j < n; ++j) {
    BoundaryCurve c;
    c.min_step = opt.step;
    const ExtendedReal a = a_threshold(table, j);
    const BoundaryRhs f(table, gain, j, opt.x_max);
    double s = s0, g = init[static_cast<std::size_t>(j)], h = opt.step;
    c.s.push_back(s);
    c.g.push_back(g);
    OdeFailure fail{OdeStatus::Ok, ""};
    auto violates_a = [&](double v) { return a.is_finite() && v > a.value; };
    if (violates_a(g)) fail = {OdeStatus::ConstraintViolation, "initial g exceeds a_j"};
    while (fail.status == OdeStatus::Ok && dir * (s1 - s) > 1e-14) {
      h = std::min(h, dir * (s1 - s));
      double full, half, twice;
      if (!rk4_step(f, s, g, dir * h, full, fail) || !rk4_step(f, s, g, dir * h / 2, half, fail) ||
          !rk4_step(f, s + dir * h / 2, half, dir * h / 2, twice, fail)) {
        // a failed evaluation inside the step: shrink before giving up
        if (h / 2 >= opt.min_step) {
          fail = {OdeStatus::Ok, ""};
          h /= 2;
          ++c.halvings;
          c.min_step = std::min(c.min_step, h);
          continue;
        }
        break;
      }
      const double err = std::abs(twice - full) / 15.0;
      if (err > opt.tolerance * std::max(1.0, std::abs(g)) && h / 2 >= opt.min_step) {
        h /= 2;
        ++c.halvings;
        c.min_step = std::min(c.min_step, h);
        continue;
      }
      const double g_new = twice + (twice - full) / 15.0;
      double slope;
      if (f(s + dir * h / 2, 0.5 * (g + g_new), slope, fail) && dir * (g_new - g) / h > slope + 1e-6 * (1.0 + std::abs(slope)))
        ++c.weak_violations;
      if (fail.status != OdeStatus::Ok) break;
      s += dir * h;
      g = g_new;
      c.s.push_back(s);
      c.g.push_back(g);
      if (g < 0.0 || g > opt.x_max) {
        fail = {OdeStatus::BlowUp, "g = " + std::to_string(g) + " left [0, x_max] at s = " + std::to_string(s)};
      } else if (violates_a(g)) {
        fail = {OdeStatus::ConstraintViolation,
                "g = " + std::to_string(g) + " exceeds a_j = " + std::to_string(a.value) + " at s = " + std::to_string(s)};
      }
      if (err < opt.tolerance / 64.0) h = std::min(2.0 * h, opt.step);
    }
    c.status = fail.status;
    c.message = fail.message;
    curves.push_back(std::move(c));
  }
  return curves;
}

// --- regime report ----------------------------------------------------------------

RegimeReport regime_report(const MapModel& model, double q) {
  RegimeReport r;
  r.q = q;
  r.kappa1 = kappa(model, 1.0);
  r.bounded = q > r.kappa1;
  const Matrix w0 = w_zero_plus(model, q);
  const SpectralRep rep = spectral_decompose(model, q);
  for (int j = 0; j < model.states(); ++j) {
    RegimeReport::State st;
    st.w_row_zero = w0.row(j).sum();
    st.a = a_threshold(rep, j);
    st.boundary_case = st.w_row_zero >= 1.0 / q ? 1 : 2;
    r.states.push_back(st);
  }
  return r;
}

}  // namespace snmap
