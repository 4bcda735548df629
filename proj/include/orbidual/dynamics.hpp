/**
 * @file dynamics.hpp
 * @brief Flows: extended coadjoint dynamics, group-curve reconstruction,
 *        collective vs direct trajectories, the duality engine, and the
 *        involutive-operator / Lagrangian toolkit.
 */
#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "orbidual/hamspaces.hpp"

namespace orbidual {

// ── Hamiltonians on the extended dual ───────────────────────────────────────

/// Observable on the extended dual with an explicit gradient (valued in
/// algebra coordinates), either a quadratic form or user-supplied callables.
class CollectiveHamiltonian {
public:
  /// h(xi) = xi^T Q xi / 2; Q must be symmetric to 1e-12.
  static CollectiveHamiltonian quadratic(Mat Q);
  static CollectiveHamiltonian custom(
      std::function<double(const ExtendedPoint&)> value,
      std::function<Vec(const ExtendedPoint&)> gradient);

  double value(const ExtendedPoint& p) const;
  Vec gradient(const ExtendedPoint& p) const;

private:
  CollectiveHamiltonian() = default;
  Mat q_;
  std::function<double(const ExtendedPoint&)> value_;
  std::function<Vec(const ExtendedPoint&)> grad_;
};

// ── trajectories ────────────────────────────────────────────────────────────

/// Sampled flow: times, coordinate states, and (optionally) group elements.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<CMat> bases;  ///< empty when no group curve is attached
  int projections = 0;      ///< membership renormalizations applied

  /// Comma-separated dump: header t,s0,...  plus mRC_re/mRC_im columns when
  /// group elements are present.
  void to_csv(std::ostream& os) const;
};

// ── coordinate and group integrators ────────────────────────────────────────

/// One classical fourth-order Runge-Kutta step.
Vec rk4_step(const std::function<Vec(double, const Vec&)>& f, double t,
             const Vec& y, double dt);

/// One Munthe-Kaas fourth-order step for dl/dt = hat(a(t, l)) l: stage
/// increments are corrected by the truncated inverse-dexp series and the
/// update is exp(Theta) l.
CMat rkmk4_step(const LieGroup& G,
                const std::function<Vec(double, const CMat&)>& a, double t,
                const CMat& l, double dt);

// ── flows ───────────────────────────────────────────────────────────────────

/// RK4 trajectory of xi' = -ad*_{grad} xi - b chat grad on the constant-b
/// slice. States carry the central charge as a trailing component. Throws
/// IntegrationError with a time stamp on blow-up.
Trajectory lie_poisson_flow(const LieAlgebra& alg, const Mat& chat,
                            const CollectiveHamiltonian& h,
                            const ExtendedPoint& xi0, double T, double dt);

/// Fills the group curve of g' g^-1 = gradient(xi(t)), g(0) = e, along an
/// extended-dual trajectory (Munthe-Kaas steps, stage values from half-step
/// re-integration). `vel_map` converts gradient coordinates into the
/// coordinates of G's algebra (empty = identity). Elements drifting out of
/// the group beyond 1e-6 are re-projected through log/exp and counted;
/// failure after projection raises IntegrationError.
Trajectory reconstruct_group_curve(const LieGroup& G, const LieAlgebra& alg,
                                   const Mat& chat,
                                   const CollectiveHamiltonian& h,
                                   const Trajectory& xi, Mat vel_map = Mat());

/// Observable on a phase space with a body-frame gradient.
struct PhaseObservable {
  std::function<double(const PhasePoint&)> value;
  std::function<Vec(const PhasePoint&)> gradient;
};

/// RK4 in the exponential chart on the Hamiltonian field obtained by the
/// pointwise linear solve omega(V, .) = dH.
Trajectory direct_trajectory(const PhaseSpace& space, const PhasePoint& p0,
                             const PhaseObservable& H, double T, double dt);

// ── collective bundles and the duality engine ───────────────────────────────

/// A phase space with the action of the double group and the matching
/// momentum map: everything the collective construction needs. The space and
/// cocycle are referenced, not owned.
struct CollectiveSpace {
  const PhaseSpace* space = nullptr;
  MomentumTag tag = MomentumTag::LeftZero;
  const GroupCocycle* cocycle = nullptr;
  Vec alpha3;

  const DoubleLieGroup& group() const { return space->group(); }
  /// Action matching the tag (left translations for the left tags, the
  /// refactorization action for the dual tags).
  PhasePoint act(const CMat& h, const PhasePoint& p) const;
  ExtendedPoint momentum_at(const PhasePoint& p) const;
  /// chat of the extended structure the momentum map lands in.
  Mat target_chat() const;
};

/// Pullback h o momentum as a phase-space observable, with the exact
/// chain-rule gradient.
PhaseObservable collective_observable(const CollectiveSpace& cs,
                                      const CollectiveHamiltonian& h);

/// p(t) = act(g(t), p0) with g reconstructed from the extended flow started
/// at the momentum of p0.
Trajectory collective_trajectory(const CollectiveSpace& cs,
                                 const PhasePoint& p0,
                                 const CollectiveHamiltonian& h, double T,
                                 double dt);

struct DualityReport {
  double T = 0.0;
  double dt = 0.0;
  double residual_A = 0.0;       ///< sup |collective - direct| on side A
  double residual_B = 0.0;       ///< same on side B
  double momentum_drift = 0.0;   ///< sup |momentum(p(t)) - xi(t)|
  double energy_drift = 0.0;     ///< |h(xi(T)) - h(xi(0))|
};

/// Two spaces, one shared group curve: runs the extended flow from the common
/// momentum, transports both initial points, and measures each side against
/// its own direct integration. Initial momenta must agree to 1e-8; the
/// mismatch error names both values.
DualityReport duality_run(const CollectiveSpace& A, const PhasePoint& p0A,
                          const CollectiveSpace& B, const PhasePoint& p0B,
                          const CollectiveHamiltonian& h, double T, double dt);

// ── involutive operators and sigma blocks ───────────────────────────────────

/// Validates that E is an involution, self-adjoint for the pairing, with an
/// invertible upper off-diagonal block; throws StructureError otherwise.
void validate_sigma_operator(const DoubleLieAlgebra& dbl, const Mat& E,
                             double tol = 1e-12);

/// The pairing matrix itself: the block-swap operator (valid whenever the
/// duality matrix is orthogonal).
Mat sigma_swap(const DoubleLieAlgebra& dbl);

/// Random involutive self-adjoint operator with invertible blocks: conjugates
/// a paired sign pattern by a pairing-orthogonal exponential; resamples until
/// the off-diagonal block condition number is below `cond_bound`.
Mat random_sigma_operator(const DoubleLieAlgebra& dbl, Rng& rng,
                          double cond_bound = 1e6);

struct SigmaBlocks {
  Mat Eg;  ///< Ad(g^-1) E Ad(g)
  Mat G;   ///< inverse of the factor-to-dual off-block, symmetric
  Mat B;   ///< -G composed with the factor-to-factor block, antisymmetric
};

/// Blocks of the transported operator with the factor half as position
/// coordinates; throws FactorizationError (naming the element) when the
/// off-block is singular beyond condition 1e12.
SigmaBlocks sigma_blocks(const DoubleLieGroup& dg, const Mat& E,
                         const CMat& g);
/// Same with the dual half as position coordinates.
SigmaBlocks sigma_blocks_dual(const DoubleLieGroup& dg, const Mat& E,
                              const CMat& htilde);

// ── quadratic chiral Hamiltonians ───────────────────────────────────────────

enum class WznwVariant { Plain, Shifted };

/// Quadratic Hamiltonian on the full-group space built from two self-adjoint
/// operators, a dual direction, and the group cocycle; Plain keeps the bare
/// cocycle background, Shifted subtracts the constant dual direction from it
/// and decorates the form with the shifted cocycle.
class WznwHamiltonian {
public:
  WznwHamiltonian(const DoubleLieGroup& dg, const GroupCocycle& c, Mat L2,
                  Mat L3, Vec alpha3, WznwVariant variant);

  double value(const PhasePoint& p) const;
  /// Exact body-frame gradient (base then fiber slots).
  Vec gradient(const PhasePoint& p) const;
  double l3_condition() const { return l3_cond_; }
  /// Background term of the momentum decomposition at l.
  Vec background(const CMat& l) const;
  /// Space momentum Ad_l psibar(eta).
  Vec space_momentum(const PhasePoint& p) const;
  /// Cocycle decorating the flow form for this variant.
  const GroupCocycle& flow_cocycle() const { return flow_c_; }
  /// The decorated full-group phase space the flow lives on.
  PhaseSpace flow_space() const;
  PhaseObservable observable() const;

private:
  const DoubleLieGroup* dg_;
  GroupCocycle c_;
  GroupCocycle flow_c_;
  Mat l2_, l3_, l3_inv_;
  Vec alpha3_;
  WznwVariant variant_;
  double l3_cond_ = 0.0;
};

// ── Lagrangian families ─────────────────────────────────────────────────────

enum class LagrangianFamily { Lc0, LcMinusAlpha, Lsigma0, LsigmaAlpha,
                              LtildeAlpha };

/// Data shared by the Lagrangian families; only the members a family reads
/// need to be populated.
struct LagrangianParams {
  const DoubleLieGroup* dg = nullptr;
  const GroupCocycle* c = nullptr;
  Vec alpha3;
  Mat E;       ///< sigma families
  Mat L2, L3;  ///< chiral families
};

/// Second-order master value (G q', B q' coupling included):
/// (qdot^T G qdot - qp^T G qp + 2 qdot^T B qp) / 2.
double master_lagrangian(const Mat& G, const Mat& B, const Vec& qdot,
                         const Vec& qp);

/// On-shell Lagrangian value. Velocity is body-frame for the sigma and dual
/// families (half coordinates) and space-frame full coordinates for the
/// chiral families.
double lagrangian_eval(LagrangianFamily fam, const LagrangianParams& prm,
                       const CMat& state, const Vec& velocity);

/// Conjugate fiber of the family's Legendre transformation at the same
/// arguments (dual coordinates; full-size for the chiral families).
Vec legendre_fiber(LagrangianFamily fam, const LagrangianParams& prm,
                   const CMat& state, const Vec& velocity);

}  // namespace orbidual
