#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>

#include "snmap/map_model.hpp"

namespace fixtures {

using snmap::JumpLaw;
using snmap::LevyComponent;
using snmap::MapModel;
using snmap::Matrix;

// Two-state model with exponent
//   [ -3 - b + b^2/2    12/(2+b)^2         ]
//   [  1                -2 + 2b + 3/(3+b)  ]
inline MapModel two_state_jump() {
  Matrix q(2, 2);
  q << -3, 3, 1, -1;
  LevyComponent s1{-1.0, 1.0, {}};
  LevyComponent s2{2.0, 0.0, {{1.0, JumpLaw::exponential(3.0)}}};
  std::vector<std::vector<JumpLaw>> sw(2, std::vector<JumpLaw>(2));
  sw[0][1] = JumpLaw::erlang(2, 2.0);
  return MapModel(q, {s1, s2}, sw);
}

// Driftless unit-variance Brownian motion modulated by a two-state chain.
inline MapModel wiener(double q1 = 3.0, double q2 = 1.0) {
  Matrix q(2, 2);
  q << -q1, q1, q2, -q2;
  return MapModel(q, {LevyComponent{0.0, 1.0, {}}, LevyComponent{0.0, 1.0, {}}});
}

inline MapModel brownian(double drift = 0.0, double sigma2 = 1.0) {
  return MapModel(Matrix::Zero(1, 1), {LevyComponent{drift, sigma2, {}}});
}

// Irreducible model with `n` states; every third state is bounded variation.
// Jump rates come from a small pool so the cleared determinant keeps a
// moderate degree.
inline MapModel random_model(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double pool[] = {1.5, 2.5, 4.0};
  auto rate = [&] { return pool[static_cast<int>(3.0 * u(rng)) % 3]; };
  Matrix q = Matrix::Zero(n, n);
  std::vector<std::vector<JumpLaw>> sw(static_cast<std::size_t>(n), std::vector<JumpLaw>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      q(i, j) = 0.5 + 2.0 * u(rng);
      if (u(rng) < 0.4) sw[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = JumpLaw::erlang(1 + (u(rng) < 0.5), rate());
    }
  for (int i = 0; i < n; ++i) q(i, i) = -(q.row(i).sum() - q(i, i));
  std::vector<LevyComponent> comps;
  for (int i = 0; i < n; ++i) {
    LevyComponent c;
    const bool bv = (i % 3 == 2);
    c.sigma2 = bv ? 0.0 : 0.5 + u(rng);
    c.drift = bv ? 0.5 + 2.0 * u(rng) : -1.0 + 2.0 * u(rng);
    if (bv || u(rng) < 0.5) c.jumps.push_back({0.5 + u(rng), JumpLaw::exponential(rate())});
    comps.push_back(c);
  }
  return MapModel(q, comps, sw);
}

inline std::filesystem::path models_dir() {
  if (const char* env = std::getenv("SNMAP_MODELS_DIR")) return env;
  return std::filesystem::path(SNMAP_SOURCE_DIR) / "models";
}

}  // namespace fixtures
