#include "snmap/gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snmap/errors.hpp"

namespace snmap {

namespace {

void check_h(const Vector& h) {
  if (h.size() == 0) throw InvalidConfig("gain needs at least one state");
  for (Eigen::Index j = 0; j < h.size(); ++j)
    if (!(h(j) > 0.0) || !std::isfinite(h(j))) throw InvalidConfig("gain weights h_j must be positive");
}

// piecewise linear in s, constant outside the grid
double interpolate(const std::vector<double>& g, const Matrix& tab, double s, int j) {
  if (s <= g.front()) return tab(0, j);
  if (s >= g.back()) return tab(tab.rows() - 1, j);
  const auto k = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), s) - g.begin()) - 1;
  const double w = (s - g[k]) / (g[k + 1] - g[k]);
  const auto r = static_cast<Eigen::Index>(k);
  return (1.0 - w) * tab(r, j) + w * tab(r + 1, j);
}

}  // namespace

GainSpec GainSpec::shepp(Vector h) {
  check_h(h);
  GainSpec g;
  g.kind_ = Kind::Shepp;
  g.h_ = std::move(h);
  return g;
}

GainSpec GainSpec::capped(Vector h, double K, double eps) {
  check_h(h);
  if (!(K > 0.0)) throw InvalidConfig("capped gain needs K > 0");
  if (!(eps > std::log(K))) throw InvalidConfig("capped gain needs eps > log K");
  GainSpec g;
  g.kind_ = Kind::Capped;
  g.h_ = std::move(h);
  g.K_ = K;
  g.eps_ = eps;
  return g;
}

GainSpec GainSpec::custom(std::vector<double> s_grid, Matrix f, Matrix df) {
  const auto n = static_cast<Eigen::Index>(s_grid.size());
  if (n < 2) throw InvalidConfig("custom gain needs at least two grid points");
  if (f.rows() != n || df.rows() != n || f.cols() != df.cols() || f.cols() == 0)
    throw InvalidConfig("custom gain tables do not match the s-grid");
  if (!std::is_sorted(s_grid.begin(), s_grid.end()) ||
      std::adjacent_find(s_grid.begin(), s_grid.end()) != s_grid.end())
    throw InvalidConfig("custom gain s-grid must be strictly increasing");
  if (!(f.array() > 0.0).all()) throw InvalidConfig("custom gain must be positive on its grid");
  GainSpec g;
  g.kind_ = Kind::Custom;
  g.h_ = Vector::Ones(f.cols());
  g.s_grid_ = std::move(s_grid);
  g.f_tab_ = std::move(f);
  g.df_tab_ = std::move(df);
  return g;
}

int GainSpec::states() const { return static_cast<int>(h_.size()); }

double GainSpec::f(double s, int j) const {
  switch (kind_) {
    case Kind::Shepp:
      return std::exp(s) * h_(j);
    case Kind::Capped:
      return std::max(std::exp(std::min(s, eps_)) - K_, 0.0) * h_(j);
    case Kind::Custom:
      return interpolate(s_grid_, f_tab_, s, j);
  }
  return 0.0;
}

double GainSpec::df(double s, int j) const {
  switch (kind_) {
    case Kind::Shepp:
      return std::exp(s) * h_(j);
    case Kind::Capped:
      return (s > std::log(K_) && s < eps_) ? std::exp(s) * h_(j) : 0.0;
    case Kind::Custom:
      return interpolate(s_grid_, df_tab_, s, j);
  }
  return 0.0;
}

double GainSpec::s_min() const {
  switch (kind_) {
    case Kind::Shepp:
      return -std::numeric_limits<double>::infinity();
    case Kind::Capped:
      return std::log(K_);
    case Kind::Custom:
      return s_grid_.front();
  }
  return 0.0;
}

double GainSpec::s_max() const {
  return kind_ == Kind::Custom ? s_grid_.back() : std::numeric_limits<double>::infinity();
}

}  // namespace snmap
