#include "snmap/jump_law.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "snmap/errors.hpp"

namespace snmap {

JumpLaw JumpLaw::exponential(double rate) {
  JumpLaw law;
  law.kind_ = Kind::Exponential;
  law.phases_ = {{1.0, 1, rate}};
  return law;
}

JumpLaw JumpLaw::erlang(int shape, double rate) {
  JumpLaw law;
  law.kind_ = shape == 1 ? Kind::Exponential : Kind::Erlang;
  law.phases_ = {{1.0, shape, rate}};
  return law;
}

JumpLaw JumpLaw::mixture(std::vector<ErlangPhase> phases) {
  JumpLaw law;
  law.kind_ = Kind::Mixture;
  law.phases_ = std::move(phases);
  return law;
}

std::string JumpLaw::kind_name() const {
  switch (kind_) {
    case Kind::None: return "none";
    case Kind::Exponential: return "exponential";
    case Kind::Erlang: return "erlang";
    case Kind::Mixture: return "mixture";
  }
  return "unknown";
}

std::string JumpLaw::check() const {
  if (kind_ == Kind::None) return {};
  if (phases_.empty()) return "jump law has no components";
  double total = 0.0;
  for (const auto& ph : phases_) {
    if (!(ph.rate > 0.0) || !std::isfinite(ph.rate)) return "jump rate must be positive";
    if (ph.shape < 1) return "Erlang shape must be >= 1";
    if (!(ph.weight > 0.0)) return "mixture weights must be positive";
    total += ph.weight;
  }
  if (std::abs(total - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "mixture weights sum to " << total << ", not 1";
    return os.str();
  }
  return {};
}

std::complex<double> JumpLaw::transform(std::complex<double> z) const {
  if (kind_ == Kind::None) return 1.0;
  std::complex<double> out = 0.0;
  for (const auto& ph : phases_) {
    const std::complex<double> den = ph.rate + z;
    if (std::abs(den) < 1e-12) throw PoleHit("jump transform evaluated at its pole");
    out += ph.weight * std::pow(ph.rate / den, ph.shape);
  }
  return out;
}

std::complex<double> JumpLaw::transform_derivative(std::complex<double> z) const {
  if (kind_ == Kind::None) return 0.0;
  std::complex<double> out = 0.0;
  for (const auto& ph : phases_) {
    const std::complex<double> den = ph.rate + z;
    if (std::abs(den) < 1e-12) throw PoleHit("jump transform evaluated at its pole");
    out += -ph.weight * static_cast<double>(ph.shape) * std::pow(ph.rate / den, ph.shape) / den;
  }
  return out;
}

double JumpLaw::mean_size() const {
  double m = 0.0;
  for (const auto& ph : phases_) m += ph.weight * ph.shape / ph.rate;
  return m;
}

double JumpLaw::density(double y) const {
  if (y <= 0.0) return 0.0;
  double d = 0.0;
  for (const auto& ph : phases_) {
    const double k = ph.shape;
    d += ph.weight * std::exp(k * std::log(ph.rate) + (k - 1.0) * std::log(y) - ph.rate * y - std::lgamma(k));
  }
  return d;
}

double JumpLaw::survival(double y) const {
  if (kind_ == Kind::None) return 0.0;
  if (y <= 0.0) return 1.0;
  double s = 0.0;
  for (const auto& ph : phases_) s += ph.weight * boost::math::gamma_q(static_cast<double>(ph.shape), ph.rate * y);
  return s;
}

JumpLaw JumpLaw::tilted(double gamma) const {
  if (kind_ == Kind::None) return *this;
  JumpLaw out = *this;
  double norm = 0.0;
  for (auto& ph : out.phases_) {
    if (ph.rate + gamma <= 0.0) throw PoleHit("tilt parameter at or beyond a jump-transform pole");
    ph.weight *= std::pow(ph.rate / (ph.rate + gamma), ph.shape);
    ph.rate += gamma;
    norm += ph.weight;
  }
  for (auto& ph : out.phases_) ph.weight /= norm;
  return out;
}

bool operator==(const JumpLaw& a, const JumpLaw& b) {
  if (a.kind_ != b.kind_ || a.phases_.size() != b.phases_.size()) return false;
  for (std::size_t m = 0; m < a.phases_.size(); ++m) {
    const auto& p = a.phases_[m];
    const auto& q = b.phases_[m];
    if (p.weight != q.weight || p.shape != q.shape || p.rate != q.rate) return false;
  }
  return true;
}

}  // namespace snmap
