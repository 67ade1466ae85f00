#pragma once

#include <vector>

#include "snmap/map_model.hpp"

namespace snmap {

/// Gain f(s, j) of the maximum-functional stopping problem.
///   shepp:  f = e^s h_j
///   capped: f = (e^{min(s, eps)} - K)^+ h_j, s above log K
///   custom: f and f' tabulated on an increasing s-grid (rows) per state (columns),
///           linearly interpolated.
class GainSpec {
 public:
  enum class Kind { Shepp, Capped, Custom };

  /// All factories throw InvalidConfig on inadmissible parameters.
  static GainSpec shepp(Vector h);
  static GainSpec capped(Vector h, double K, double eps);
  static GainSpec custom(std::vector<double> s_grid, Matrix f, Matrix df);

  Kind kind() const { return kind_; }
  int states() const;
  const Vector& h() const { return h_; }
  double K() const { return K_; }
  double eps() const { return eps_; }

  double f(double s, int j) const;
  double df(double s, int j) const;
  /// Lower end of the s-domain where f > 0 (log K for capped, first grid
  /// point for custom, -infinity for shepp).
  double s_min() const;
  /// Upper end (last grid point for custom, +infinity otherwise).
  double s_max() const;

 private:
  Kind kind_ = Kind::Shepp;
  Vector h_;
  double K_ = 0.0, eps_ = 0.0;
  std::vector<double> s_grid_;
  Matrix f_tab_, df_tab_;
};

}  // namespace snmap
