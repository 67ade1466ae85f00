#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "snmap/jump_law.hpp"

namespace snmap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Compound-Poisson part of a Levy component: jumps at `rate`, sizes from `law`.
struct JumpPart {
  double rate = 0.0;
  JumpLaw law;
};

enum class PathVariation { Bounded, Unbounded };

/// Spectrally negative Levy component with exponent
///   psi(z) = a z + sigma2 z^2 / 2 + sum_k rate_k (G_k(z) - 1).
struct LevyComponent {
  double drift = 0.0;
  double sigma2 = 0.0;
  std::vector<JumpPart> jumps;

  PathVariation variation() const {
    return sigma2 > 0.0 ? PathVariation::Unbounded : PathVariation::Bounded;
  }
  double total_jump_rate() const;
  Complex exponent(Complex z) const;
  Complex exponent_derivative(Complex z) const;
};

/// Spectrally negative Markov additive process: modulator generator Q,
/// per-state Levy components and switch-jump laws. Immutable.
class MapModel {
 public:
  /// Throws ModelShapeMismatch on inconsistent dimensions. Content is not
  /// validated here; see validate().
  MapModel(Matrix generator, std::vector<LevyComponent> components,
           std::vector<std::vector<JumpLaw>> switch_jumps = {});

  int states() const { return static_cast<int>(q_.rows()); }
  const Matrix& generator() const { return q_; }
  const LevyComponent& component(int i) const { return components_[static_cast<std::size_t>(i)]; }
  const std::vector<LevyComponent>& components() const { return components_; }

  /// Law of U_{i,j}; kind none on the diagonal and wherever q_{i,j} = 0.
  const JumpLaw& switch_jump(int i, int j) const;
  /// Law as stored, even where it is ignored.
  const JumpLaw& stored_switch_jump(int i, int j) const {
    return switch_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }

  std::vector<PathVariation> variation() const;

  /// Distinct pole locations (the jump rates mu > 0; poles at -mu).
  std::vector<double> pole_rates() const;

  friend bool operator==(const MapModel& a, const MapModel& b);

 private:
  Matrix q_;
  std::vector<LevyComponent> components_;
  std::vector<std::vector<JumpLaw>> switch_;
};

/// Psi(z) = diag(psi_i(z)) + Q o G(z).
CMatrix big_psi(const MapModel& model, Complex z);
Matrix big_psi(const MapModel& model, double beta);
/// d/dz Psi(z), analytic.
CMatrix big_psi_derivative(const MapModel& model, Complex z);

/// Perron-Frobenius eigenvalue of Psi(theta). Exactly 0 at theta = 0.
double kappa(const MapModel& model, double theta);
/// Right Perron eigenvector, positive, normalised so that pi . v = 1.
Vector perron_vector(const MapModel& model, double theta);
/// Stationary law of Q (normalised left null vector).
Vector stationary_distribution(const MapModel& model);
/// Phi(q) = sup{theta >= 0 : kappa(theta) = q}.
double phi(const MapModel& model, double q, double theta_max = 1e3);

/// The MAP under the exponential change of measure with parameter gamma.
MapModel esscher_tilt(const MapModel& model, double gamma);

struct Violation {
  int state = -1;  // -1: model-wide, otherwise 0-based state (or row)
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<PathVariation> variation;
  bool ok() const { return violations.empty(); }
};

/// Checks every model invariant; never throws.
ValidationReport validate(const MapModel& model);

}  // namespace snmap
