/**
 * @file hamspaces.hpp
 * @brief Trivialized phase spaces over the factors of a double, the group
 *        actions on them, their momentum maps, and Poisson diagnostics.
 *
 * A phase point is a pair (m, eta): a base matrix in the chosen subgroup and
 * a fiber coordinate vector. Tangents are body-framed pairs (a, rho), and the
 * two-form is
 *   omega((a,rho),(b,sigma)) = -<rho,b> + <sigma,a> + <eta + shift, [a,b]>
 *                              - c(Ad_m a, Ad_m b)
 * with all decorations optional. Hamiltonian fields solve i_V omega = dH.
 */
#pragma once

#include <optional>

#include "orbidual/extension.hpp"
#include "orbidual/groups.hpp"
#include "orbidual/types.hpp"

namespace orbidual {

/// Base matrix plus fiber coordinates.
struct PhasePoint {
  CMat m;
  Vec eta;
};

/// Which subgroup the base of a phase space ranges over.
enum class BaseKind { Factor, Dual, Full };

/// Frame the cocycle decoration is evaluated in. Body adds + c(a, b) on body
/// tangents (left-trivialized decoration, used on the factor cotangent
/// spaces); Space adds - c(Ad_m a, Ad_m b) (right-type decoration, used on
/// the full-group space).
enum class CocycleFrame { Body, Space };

class PhaseSpace {
public:
  PhaseSpace(const DoubleLieGroup& dg, BaseKind base);

  /// Adds the cocycle term in the requested frame.
  PhaseSpace& with_cocycle(const GroupCocycle& c, CocycleFrame frame);
  /// Adds a constant fiber offset inside the bracket term.
  PhaseSpace& with_fiber_shift(Vec shift);

  const DoubleLieGroup& group() const { return *dg_; }
  BaseKind base_kind() const { return base_; }
  /// Dimension d of the base algebra (= fiber dimension).
  int dim() const;
  int phase_dim() const { return 2 * dim(); }
  /// Algebra whose bracket enters the eta-term.
  const LieAlgebra& base_algebra() const;

  /// Embed a base-algebra coordinate vector into double coordinates.
  Vec embed(const Vec& a) const;
  /// Exponential of a base direction inside the double group.
  CMat base_exp(const Vec& a) const;
  /// Identity-based point with the given fiber.
  PhasePoint point(const Vec& eta) const;

  /// Matrix of the two-form on body tangents (u^T Omega v).
  Mat omega(const PhasePoint& p) const;
  /// Hamiltonian field of a body-frame gradient: solves i_V omega = grad.
  Vec ham_field(const PhasePoint& p, const Vec& grad) const;
  /// Bracket orientation used throughout: {f, g} = df(V_g).
  double bracket(const PhasePoint& p, const Vec& df, const Vec& dgrad) const;

  /// Move a point along a body tangent: (m exp(dt a), eta + dt rho).
  PhasePoint step(const PhasePoint& p, const Vec& tangent, double dt) const;

private:
  const DoubleLieGroup* dg_;
  BaseKind base_;
  std::optional<GroupCocycle> cocycle_;
  CocycleFrame frame_ = CocycleFrame::Body;
  Vec shift_;
};

// ── actions ─────────────────────────────────────────────────────────────────

/// Left action of the double group on the factor cotangent space: the base
/// moves by the dressed translate and the fiber by the dressed-dual transport
/// plus the cocycle. `tol` bounds the allowed leak out of the fiber block.
PhasePoint dhat_act(const DoubleLieGroup& dg, const GroupCocycle& c,
                    const CMat& h, const PhasePoint& p, double tol = 1e-9);

/// Residual of the compatibility condition on a dual-factor direction alpha:
/// max over factor basis X of |Pi_dual [alpha, X]|.
double alpha_compatibility_residual(const DoubleLieAlgebra& dbl,
                                    const Vec& alpha3);

/// dhat with the cocycle shifted by -alpha; requires the compatibility
/// condition and throws DomainError when it fails.
PhasePoint dhat_alpha_act(const DoubleLieGroup& dg, const GroupCocycle& c,
                          const Vec& alpha3, const CMat& h,
                          const PhasePoint& p, double tol = 1e-9);

/// Left action on the dual-side space (base in the dual factor, fiber in the
/// factor algebra), built from the dual-first refactorization; requires the
/// same compatibility condition on alpha.
PhasePoint bhat_act(const DoubleLieGroup& dg, const GroupCocycle& c,
                    const Vec& alpha3, const CMat& h, const PhasePoint& p,
                    double tol = 1e-9);

/// Right translation action on the full-group space: (l, eta) -> (l k^-1,
/// coad(k) eta).
PhasePoint chiral_right_act(const DoubleLieGroup& dg, const CMat& k,
                            const PhasePoint& p);

// ── momentum maps ───────────────────────────────────────────────────────────

enum class MomentumTag {
  LeftZero,    ///< factor space, plain cocycle transport
  LeftAlpha,   ///< factor space, cocycle shifted by -alpha
  AlphaAlpha,  ///< same value as LeftAlpha, attached to the shifted form
  DualPhi,     ///< dual-side space, value Ad(h)(X + alpha) + cocycle
  DualAlpha,   ///< DualPhi minus alpha
  ChiralRight  ///< full-group space, right-invariant value
};

/// Momentum value in dual coordinates with unit central charge.
ExtendedPoint momentum(MomentumTag tag, const DoubleLieGroup& dg,
                       const GroupCocycle& c, const Vec& alpha3,
                       const PhasePoint& p);

/// Exact differential of the momentum value along a body tangent (a, rho).
Vec momentum_differential(MomentumTag tag, const DoubleLieGroup& dg,
                          const GroupCocycle& c, const Vec& alpha3,
                          const PhasePoint& p, const Vec& a, const Vec& rho);

/// chat of the extended bracket each tag maps into.
Mat momentum_target_chat(MomentumTag tag, const GroupCocycle& c,
                         const Vec& alpha3);

/// Max over basis-pair linear observables (X, Y) of
/// |{F_X o mu, F_Y o mu}_space - {F_X, F_Y}_target o mu| at p. The
/// right-invariant tag is compared against the opposite target bracket.
double poisson_map_residual(MomentumTag tag, const PhaseSpace& space,
                            const GroupCocycle& c, const Vec& alpha3,
                            const PhasePoint& p);

/// Closed-form bracket defect of the dual-side map at the identity base
/// point: <Pi_f dG, Pi_d [dF, alpha]> + <Pi_f [dG, alpha], Pi_d dF>.
double dual_map_obstruction(const DoubleLieAlgebra& dbl, const Vec& alpha3,
                            const Vec& dF, const Vec& dG);

// ── reduced-space maps and kernels ──────────────────────────────────────────

/// Equivariant maps from the full group to the extended dual built from the
/// shifted cocycle: variant 0 appends + alpha (transport by the unshifted
/// cocycle), variant 1 does not (transport by the shifted one).
ExtendedPoint reduced_space_map(const DoubleLieGroup& dg,
                                const GroupCocycle& c, const Vec& alpha3,
                                int variant, const CMat& l);

/// Orthonormal basis of the kernel of a matrix via SVD.
Mat kernel_basis(const Mat& m, double tol = 1e-10);

// ── dualizable level sets ───────────────────────────────────────────────────

enum class LevelSetTag { LeftZeroOrbit, LeftAlphaOrbit, DualPhiOrbit };

struct LevelSetReport {
  enum class Status { Member, NonMember, Inconclusive } status;
  double distance = 0.0;
  Vec argmin;
};

/// Multistart descent deciding whether the fiber of p lies on the matching
/// dualizable level set; distances below tol are members, converged runs far
/// above tol are non-members, everything else is inconclusive.
LevelSetReport dualizable_level_set(LevelSetTag tag, const DoubleLieGroup& dg,
                                    const GroupCocycle& c, const Vec& alpha3,
                                    const PhasePoint& p, double tol = 1e-6,
                                    int iters = 200, std::uint64_t seed = 1);

}  // namespace orbidual
