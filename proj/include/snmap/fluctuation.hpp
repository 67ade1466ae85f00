#pragma once

#include "snmap/map_model.hpp"
#include "snmap/spectral.hpp"

namespace snmap {

/// Upward first passage: E_{(x,i)}[e^{-q tau_a^+}; J_{tau_a^+} = j] as the
/// matrix H diag(e^{-zeta_k (a - x)}) H^{-1}, where zeta_k are the roots of
/// det(Psi(z) - qI) with positive real part and (Psi(zeta_k) - qI) h_k = 0.
struct FirstPassageRep {
  double q = 0.0;
  CVector up_roots;
  CMatrix up_vectors;  // columns h_k
  CMatrix up_vectors_inv;

  /// Identity for x >= a.
  Matrix matrix(double x, double a) const;
};

FirstPassageRep first_passage(const MapModel& model, const SpectralRep& rep);

/// Throws RootCountMismatch through spectral_decompose.
double one_sided_up(const MapModel& model, double q, double x, double a, int i, int j);
Matrix one_sided_up(const MapModel& model, double q, double x, double a);

/// E_{(x,i)}[e^{-q tau_a^+}; tau_a^+ < tau_0^-, J = j] = W(x) W(a)^{-1}.
/// Throws SingularScaleMatrix when W(a) has condition number above 1e12.
Matrix two_sided_up(const SpectralRep& rep, double x, double a);
/// E_{(x,i)}[e^{-q tau_0^-}; tau_0^- < tau_a^+, J = j] = Z(x) - W(x) W(a)^{-1} Z(a);
/// identity for x < 0.
Matrix two_sided_down(const SpectralRep& rep, double x, double a);

/// Generator of the MAP applied to f = Z 1 in state i, minus q f_i:
///   a_i f_i' + sigma_i^2 / 2 f_i'' + sum lambda int (f_i(x+y) - f_i(x)) F(dy)
///   + sum_{k != i} q_ik int (f_k(x+y) - f_i(x)) F_ik(dy) - q f_i(x).
/// Zero for x > 0 and -q for x < 0. Jump integrals are split at y = -x (where
/// f = 1) and integrated adaptively; throws QuadratureFailure when the error
/// estimate exceeds 1e-6 (1 + q).
double generator_check(const MapModel& model, const SpectralRep& rep, double x, int i);

}  // namespace snmap
