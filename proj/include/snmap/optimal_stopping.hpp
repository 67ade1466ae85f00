#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "snmap/gain.hpp"
#include "snmap/map_model.hpp"
#include "snmap/spectral.hpp"

namespace snmap {

enum class Regime { ZeroBoundary, InteriorRoot, NoRootOnRange, Unbounded };
const char* to_string(Regime r);

/// u_j(x) = [Z 1]_j(x) - q [W 1]_j(x), evaluated from the representation or
/// interpolated from a table. At x = 0 the right limit is used.
double u_fn(const SpectralRep& rep, int j, double x);
double u_fn(const ScaleTable& table, int j, double x);

struct StateStop {
  Regime regime = Regime::NoRootOnRange;
  std::optional<double> c;  // absent for NoRootOnRange
  ExtendedReal a;           // inf{x > 0 : [Z 1]_j(x) <= 1}
  double w_row_zero = 0.0;  // [W 1]_j(0+)
};

/// Constant drawdown boundaries c_j for the gain e^s h_j.
class StopSolution {
 public:
  StopSolution(double q, double kappa1, GainSpec gain, std::shared_ptr<const ScaleTable> table,
               std::vector<StateStop> states);

  double q() const { return q_; }
  double kappa1() const { return kappa1_; }
  const GainSpec& gain() const { return gain_; }
  const ScaleTable& table() const { return *table_; }
  const std::vector<StateStop>& states() const { return states_; }
  const StateStop& state(int j) const { return states_[static_cast<std::size_t>(j)]; }
  /// Every state has a boundary (and c_j <= a_j, which construction enforces).
  bool complete() const;
  /// c_j per state; throws BoundaryMissing if some state has none.
  std::vector<double> boundaries() const;

  /// V(x, s, i, j) = f(s, j) [Z(x - s + c_j) 1]_i with Z(y) = I for y <= 0.
  /// Requires x <= s; throws BoundaryMissing when state j has no boundary.
  double value(double x, double s, int i, int j) const;

 private:
  double q_, kappa1_;
  GainSpec gain_;
  std::shared_ptr<const ScaleTable> table_;
  std::vector<StateStop> states_;
};

/// Throws Unbounded when q <= kappa(1), InvalidSolution when some c_j > a_j,
/// InvalidConfig for non-positive h.
StopSolution solve_shepp(const MapModel& model, double q, const Vector& h, double x_max = 5.0, double step = 1e-3);

enum class OdeStatus { Ok, BlowUp, ConstraintViolation, DivisionNearZero };
const char* to_string(OdeStatus s);

struct BoundaryCurve {
  std::vector<double> s, g;
  OdeStatus status = OdeStatus::Ok;
  std::string message;
  int weak_violations = 0;  // accepted steps where g' exceeded the right side
  int halvings = 0;         // step reductions by the error control
  double min_step = 0.0;
};

struct OdeOptions {
  double step = 1e-3;
  double tolerance = 1e-9;  // per-step error target of the step-doubling control
  double min_step = 1e-10;
  double x_max = 5.0;
  double grid_step = 1e-3;
};

/// Integrates g'(s, j) = 1 - (f'/f)(s, j) [Z 1]_j(g) / (q [W 1]_j(g)) for
/// every state from s0 to s1 (either direction) by classical Runge-Kutta
/// with step doubling, starting at init[j]. Failures end that state's curve
/// and are reported in its status.
std::vector<BoundaryCurve> solve_boundary_ode(const MapModel& model, double q, const GainSpec& gain, double s0,
                                              double s1, const std::vector<double>& init,
                                              const OdeOptions& options = {});

struct RegimeReport {
  double q = 0.0;
  double kappa1 = 0.0;
  bool bounded = false;  // q > kappa(1)
  struct State {
    double w_row_zero = 0.0;
    ExtendedReal a;
    int boundary_case = 2;  // 1: [W 1]_j(0+) >= 1/q, c_j = 0; 2: otherwise
  };
  std::vector<State> states;
};

/// Never throws for valid models with q > 0.
RegimeReport regime_report(const MapModel& model, double q);

}  // namespace snmap
