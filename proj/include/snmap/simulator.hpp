#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "snmap/gain.hpp"
#include "snmap/map_model.hpp"

namespace snmap {

struct SimConfig {
  double dt = 1e-3;  // Euler step for states with a Brownian part
  double horizon = 50.0;
  std::int64_t n_paths = 100000;
  std::uint64_t master_seed = 20240601;
  int threads = 0;  // 0: hardware concurrency
  /// Brownian-bridge refinement between grid points: crossing tests for the
  /// exit levels and the drawdown boundary, and a sampled in-step maximum for
  /// stopped gains. Off means plain grid monitoring.
  bool bridge = true;

  /// Throws InvalidConfig (dt > 0, horizon > 0, n_paths >= 100).
  void check() const;
};

/// Estimates with per-entry standard errors (1x1 for scalar functionals).
struct PathEstimate {
  Matrix value;
  Matrix std_error;
  std::int64_t n_effective = 0;
};

struct PathPoint {
  double t = 0.0;
  double x = 0.0;
  int j = 0;
  double xbar = 0.0;  // running maximum
  int jbar = 0;       // modulator state when the maximum was last attained
};

/// Engine for path index `path`: a pure function of (master_seed, path).
std::mt19937_64 path_engine(std::uint64_t master_seed, std::uint64_t path);

/// One path from (x, i) up to the configured horizon. Modulator holding
/// times and jump times are exact; the Brownian part moves on the dt grid.
/// Records every grid point and every event.
std::vector<PathPoint> sample_path(const MapModel& model, const SimConfig& config, std::uint64_t path_index,
                                   double x = 0.0, int i = 0);

struct ExitEstimates {
  PathEstimate id0;  // E[e^{-q tau_a^+}; J = j]
  PathEstimate id1;  // E[e^{-q tau_a^+}; tau_a^+ < tau_0^-, J = j]
  PathEstimate id2;  // E[e^{-q tau_0^-}; tau_0^- < tau_a^+, J = j]
};

/// n_paths paths per starting state. In Brownian states crossings are
/// detected at grid resolution (bias of order sqrt(dt)), refined by the bridge
/// test when enabled; drift-only states hit the upper level exactly. Throws HorizonTooShort when more than 1% of the paths
/// neither exit nor see the discount fall below 1e-8; InvalidConfig when
/// dt > 1e-3 or x > a.
ExitEstimates estimate_exit(const MapModel& model, const SimConfig& config, double q, double x, double a);

/// Stopping boundary g(s, j) >= 0 on the drawdown s - x.
using BoundaryFn = std::function<double(double s, int j)>;

/// E_{(x,s,i,j)}[e^{-q tau_g} f(Xbar_{tau_g}, Jbar_{tau_g})] with
/// tau_g = inf{u : Xbar_u - X_u > g(Xbar_u, Jbar_u)}. Paths are keyed by
/// index, so two calls with the same config share random numbers.
PathEstimate estimate_stopped_gain(const MapModel& model, const SimConfig& config, double q, const GainSpec& gain,
                                   const BoundaryFn& boundary, double x, double s, int i, int j);
PathEstimate estimate_stopped_gain(const MapModel& model, const SimConfig& config, double q, const GainSpec& gain,
                                   const std::vector<double>& c, double x, double s, int i, int j);

/// Share of paths from (x, s, i, j) still running at the horizon under the
/// constant boundaries c (no discount truncation).
double unstopped_fraction(const MapModel& model, const SimConfig& config, const std::vector<double>& c, double x,
                          double s, int i, int j);

struct MgfCheck {
  PathEstimate empirical;  // E_{(0,i)}[e^{z X_t}; J_t = j]
  Matrix analytic;         // e^{Psi(z) t}
};

/// n_paths paths per starting state.
MgfCheck verify_mgf(const MapModel& model, const SimConfig& config, double z, double t);

}  // namespace snmap
