/**
 * @file extension.hpp
 * @brief Group one-cocycles, the induced two-cocycles, centrally extended
 *        coadjoint actions, Lie-Poisson data and the momentum shift.
 *
 * A cocycle C maps the group into dual coordinates and satisfies
 * C(l k) = coad(l) C(k) + C(l). Its linearization chat = -dC at the identity
 * induces the bilinear form c(X, Y) = <chat X, Y>, and theta-shifts replace C
 * by C - B_theta with B_theta(l) = coad(l) theta - theta.
 */
#pragma once

#include <string>

#include "orbidual/groups.hpp"
#include "orbidual/types.hpp"

namespace orbidual {

/// Point of the centrally extended dual: a dual-coordinate vector and the
/// central charge.
struct ExtendedPoint {
  Vec xi;
  double b = 1.0;
};

/// Finite-dimensional group one-cocycle in the coboundary family, closed
/// under theta-shifts. The referenced group must outlive the cocycle.
class GroupCocycle {
public:
  static GroupCocycle zero(const DoubleLieGroup& g);
  static GroupCocycle coboundary(const DoubleLieGroup& g, Vec theta);

  /// The shifted cocycle C - B_theta.
  GroupCocycle shifted(const Vec& theta) const;

  /// C(l) in dual coordinates.
  Vec value(const CMat& l) const;

  /// Matrix of -dC at the identity (algebra -> dual coordinates).
  const Mat& chat() const { return chat_; }

  /// c(X, Y) = <chat X, Y>; antisymmetric and closed.
  double two_cocycle(const Vec& X, const Vec& Y) const;

  /// Extended coadjoint action: (xi, b) -> (coad(l) xi + b C(l), b).
  ExtendedPoint extended_coad(const CMat& l, const ExtendedPoint& p) const;

  const DoubleLieGroup& group() const { return *group_; }

private:
  GroupCocycle(const DoubleLieGroup& g, Vec mu);
  const DoubleLieGroup* group_;
  Vec mu_;    // value(l) = coad(l) mu - mu
  Mat chat_;  // columns ad_star(e_i) mu
};

// ── Lie-Poisson data on the extended dual ───────────────────────────────────

/// {F, G}(xi, b) = <xi, [dF, dG]> + b c(dF, dG) for gradients dF, dG.
double lie_poisson_bracket(const LieAlgebra& h, const Mat& chat,
                           const ExtendedPoint& p, const Vec& dF,
                           const Vec& dG);

/// Right-hand side of the Hamiltonian flow on the extended dual:
/// xid = -ad_star(dH) xi - b chat dH (the central charge is constant).
Vec lie_poisson_rhs(const LieAlgebra& h, const Mat& chat,
                    const ExtendedPoint& p, const Vec& dH);

/// Affine bracket evaluated at a base point Z of the double (algebra
/// coordinates) on linear directions X, Y:
/// {X, Y}(Z) = ([X, Y], Z) + c(X, Y) with the invariant pairing.
double affine_bracket(const DoubleLieAlgebra& dbl, const Mat& chat,
                      const Vec& Z, const Vec& X, const Vec& Y);

/// Momentum shift by a dual vector: (xi, b) -> (xi + b alpha, b). Interchanges
/// the extended structures for cocycles differing by the alpha coboundary.
ExtendedPoint shift_point(const ExtendedPoint& p, const Vec& alpha);

// ── registry ────────────────────────────────────────────────────────────────

/// Parsed cocycle description: "zero", "coboundary:[...]" (dual coordinates
/// as a JSON array), or "loop_k:<level>".
struct CocycleSpec {
  enum class Kind { Zero, Coboundary, LoopLevel } kind = Kind::Zero;
  Vec theta;
  double level = 1.0;
};

CocycleSpec parse_cocycle(const std::string& text);

/// Instantiate a parsed description on a finite-dimensional double group.
/// Loop-level descriptions are rejected here (they live on loop groups).
GroupCocycle make_cocycle(const DoubleLieGroup& g, const CocycleSpec& spec);

}  // namespace orbidual
