#pragma once

#include <complex>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace snmap {

/// One Erlang component of a jump law: weight * Erlang(shape, rate).
struct ErlangPhase {
  double weight = 1.0;
  int shape = 1;
  double rate = 1.0;
};

/// Law of a non-positive jump U. A draw is minus an Erlang-mixture sample, so
/// G(z) = E[e^{zU}] = sum_m w_m (mu_m / (mu_m + z))^{k_m} is rational with
/// poles at -mu_m only.
class JumpLaw {
 public:
  enum class Kind { None, Exponential, Erlang, Mixture };

  JumpLaw() = default;  // kind none

  static JumpLaw none() { return {}; }
  static JumpLaw exponential(double rate);
  static JumpLaw erlang(int shape, double rate);
  static JumpLaw mixture(std::vector<ErlangPhase> phases);

  Kind kind() const { return kind_; }
  bool is_none() const { return kind_ == Kind::None; }
  std::span<const ErlangPhase> phases() const { return phases_; }
  std::string kind_name() const;

  /// E[e^{zU}]; throws PoleHit within 1e-12 of a pole.
  std::complex<double> transform(std::complex<double> z) const;
  std::complex<double> transform_derivative(std::complex<double> z) const;

  /// E|U|.
  double mean_size() const;
  /// Density of |U| at y > 0 (zero for kind none).
  double density(double y) const;
  /// P(|U| > y).
  double survival(double y) const;

  /// Exponentially tilted law: density proportional to e^{gamma u} P(U in du).
  /// Requires gamma > -min rate.
  JumpLaw tilted(double gamma) const;

  /// Empty string when the parameters are admissible.
  std::string check() const;

  template <class Engine>
  double sample(Engine& engine) const {
    if (kind_ == Kind::None) return 0.0;
    std::size_t m = 0;
    if (phases_.size() > 1) {
      double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine);
      while (m + 1 < phases_.size() && u >= phases_[m].weight) {
        u -= phases_[m].weight;
        ++m;
      }
    }
    const auto& ph = phases_[m];
    std::gamma_distribution<double> erl(static_cast<double>(ph.shape), 1.0 / ph.rate);
    return -erl(engine);
  }

  friend bool operator==(const JumpLaw& a, const JumpLaw& b);

 private:
  Kind kind_ = Kind::None;
  std::vector<ErlangPhase> phases_;
};

}  // namespace snmap
