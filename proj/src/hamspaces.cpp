/**
 * @file hamspaces.cpp
 * @brief Phase spaces, group actions, momentum maps, and Poisson diagnostics.
 */
#include "orbidual/hamspaces.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace orbidual {

namespace {

Vec unit(int i, int n) {
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

/// Cocycle with its generator shifted so that transports pick up the extra
/// coboundary of the dual direction alpha.
GroupCocycle shifted_by_alpha(const GroupCocycle& c, const Vec& alpha3) {
  const DoubleLieAlgebra& dbl = c.group().double_algebra();
  return c.shifted(-dbl.psi(dbl.embed_dual(alpha3)));
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

// ── PhaseSpace ──────────────────────────────────────────────────────────────

PhaseSpace::PhaseSpace(const DoubleLieGroup& dg, BaseKind base)
    : dg_(&dg), base_(base) {}

PhaseSpace& PhaseSpace::with_cocycle(const GroupCocycle& c,
                                     CocycleFrame frame) {
  if (&c.group() != dg_) {
    throw PreconditionError("cocycle is attached to a different double group");
  }
  cocycle_ = c;
  frame_ = frame;
  return *this;
}

PhaseSpace& PhaseSpace::with_fiber_shift(Vec shift) {
  if (static_cast<int>(shift.size()) != dim()) {
    throw PreconditionError("fiber shift has dimension " +
                            std::to_string(shift.size()) + ", expected " +
                            std::to_string(dim()));
  }
  shift_ = std::move(shift);
  return *this;
}

int PhaseSpace::dim() const {
  return base_ == BaseKind::Full ? dg_->double_algebra().dim()
                                 : dg_->double_algebra().half_dim();
}

const LieAlgebra& PhaseSpace::base_algebra() const {
  switch (base_) {
    case BaseKind::Factor:
      return dg_->double_algebra().factor();
    case BaseKind::Dual:
      return dg_->double_algebra().dual_factor();
    default:
      return dg_->double_algebra().algebra();
  }
}

Vec PhaseSpace::embed(const Vec& a) const {
  if (static_cast<int>(a.size()) != dim()) {
    throw PreconditionError("base direction has dimension " +
                            std::to_string(a.size()) + ", expected " +
                            std::to_string(dim()));
  }
  switch (base_) {
    case BaseKind::Factor:
      return dg_->double_algebra().embed_factor(a);
    case BaseKind::Dual:
      return dg_->double_algebra().embed_dual(a);
    default:
      return a;
  }
}

CMat PhaseSpace::base_exp(const Vec& a) const { return dg_->exp(embed(a)); }

PhasePoint PhaseSpace::point(const Vec& eta) const {
  if (static_cast<int>(eta.size()) != dim()) {
    throw PreconditionError("fiber has dimension " + std::to_string(eta.size()) +
                            ", expected " + std::to_string(dim()));
  }
  return {dg_->identity(), eta};
}

Mat PhaseSpace::omega(const PhasePoint& p) const {
  const int d = dim();
  Vec etat = p.eta;
  if (shift_.size() > 0) etat += shift_;
  const LieAlgebra& ba = base_algebra();
  // K_{ij} = <eta + shift, [e_i, e_j]>.
  Mat K(d, d);
  for (int i = 0; i < d; ++i) {
    K.row(i) = (ba.ad_basis(i).transpose() * etat).transpose();
  }
  if (cocycle_) {
    Mat E(dg_->double_algebra().dim(), d);
    for (int j = 0; j < d; ++j) E.col(j) = embed(unit(j, d));
    if (frame_ == CocycleFrame::Body) {
      K += E.transpose() * cocycle_->chat().transpose() * E;
    } else {
      Mat S = dg_->Ad(p.m) * E;
      K -= S.transpose() * cocycle_->chat().transpose() * S;
    }
  }
  Mat O = Mat::Zero(2 * d, 2 * d);
  O.topLeftCorner(d, d) = K;
  O.topRightCorner(d, d) = Mat::Identity(d, d);
  O.bottomLeftCorner(d, d) = -Mat::Identity(d, d);
  return O;
}

Vec PhaseSpace::ham_field(const PhasePoint& p, const Vec& grad) const {
  if (static_cast<int>(grad.size()) != phase_dim()) {
    throw PreconditionError("gradient has dimension " +
                            std::to_string(grad.size()) + ", expected " +
                            std::to_string(phase_dim()));
  }
  return omega(p).transpose().partialPivLu().solve(grad);
}

double PhaseSpace::bracket(const PhasePoint& p, const Vec& df,
                           const Vec& dgrad) const {
  return df.dot(ham_field(p, dgrad));
}

PhasePoint PhaseSpace::step(const PhasePoint& p, const Vec& tangent,
                            double dt) const {
  const int d = dim();
  if (static_cast<int>(tangent.size()) != 2 * d) {
    throw PreconditionError("tangent has dimension " +
                            std::to_string(tangent.size()) + ", expected " +
                            std::to_string(2 * d));
  }
  Vec a = dt * tangent.head(d);
  return {p.m * base_exp(a), p.eta + dt * tangent.tail(d)};
}

// ── actions ─────────────────────────────────────────────────────────────────

namespace {

/// Shared body of the factor-side actions: base by dressed translation, fiber
/// by adjoint transport of the dressed-dual piece plus the cocycle value.
PhasePoint dhat_core(const DoubleLieGroup& dg, const GroupCocycle& action_c,
                     const CMat& h, const PhasePoint& p, double tol) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  const int n = dbl.half_dim();
  if (!dg.contains(h)) {
    throw RepresentationError("acting element is not in the double group");
  }
  if (!dg.in_factor(p.m)) {
    throw DomainError("phase point base is not in the factor subgroup");
  }
  auto f = dg.factorize(h, DoubleLieGroup::Order::FactorFirst);
  CMat dressed = dg.dress(f.dual, p.m);
  CMat k = dg.dressed_dual(f.dual, p.m);
  Vec w = dg.Ad(k) * dbl.embed_dual(p.eta) + dbl.psi_inv(action_c.value(k));
  const double leak = w.head(n).cwiseAbs().maxCoeff();
  if (leak > tol) {
    throw DomainError("action transport leaves the fiber block (leak " +
                      fmt(leak) + ")");
  }
  return {f.factor * dressed, w.tail(n)};
}

}  // namespace

PhasePoint dhat_act(const DoubleLieGroup& dg, const GroupCocycle& c,
                    const CMat& h, const PhasePoint& p, double tol) {
  return dhat_core(dg, c, h, p, tol);
}

double alpha_compatibility_residual(const DoubleLieAlgebra& dbl,
                                    const Vec& alpha3) {
  const Vec as = dbl.embed_dual(alpha3);
  double worst = 0.0;
  for (int i = 0; i < dbl.half_dim(); ++i) {
    Vec br = dbl.algebra().bracket(as, dbl.embed_factor(unit(i, dbl.half_dim())));
    worst = std::max(worst, dbl.part_dual(br).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

void require_compatible_alpha(const DoubleLieAlgebra& dbl, const Vec& alpha3) {
  const double r = alpha_compatibility_residual(dbl, alpha3);
  if (r > 1e-10) {
    throw DomainError(
        "dual direction fails the compatibility condition (dual-block residual "
        "of [alpha, factor] is " +
        fmt(r) + ")");
  }
}

}  // namespace

PhasePoint dhat_alpha_act(const DoubleLieGroup& dg, const GroupCocycle& c,
                          const Vec& alpha3, const CMat& h,
                          const PhasePoint& p, double tol) {
  require_compatible_alpha(dg.double_algebra(), alpha3);
  return dhat_core(dg, shifted_by_alpha(c, alpha3), h, p, tol);
}

PhasePoint bhat_act(const DoubleLieGroup& dg, const GroupCocycle& c,
                    const Vec& alpha3, const CMat& h, const PhasePoint& p,
                    double tol) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  require_compatible_alpha(dbl, alpha3);
  const int n = dbl.half_dim();
  if (!dg.contains(h)) {
    throw RepresentationError("acting element is not in the double group");
  }
  if (!dg.in_dual(p.m)) {
    throw DomainError("phase point base is not in the dual subgroup");
  }
  auto f = dg.factorize(h, DoubleLieGroup::Order::DualFirst);
  auto rf = dg.factorize(f.factor * p.m, DoubleLieGroup::Order::DualFirst);
  GroupCocycle cma = shifted_by_alpha(c, alpha3);
  Vec w = dg.Ad(rf.factor) * dbl.embed_factor(p.eta) +
          dbl.psi_inv(cma.value(rf.factor));
  const double leak = w.tail(n).cwiseAbs().maxCoeff();
  if (leak > tol) {
    throw DomainError("action transport leaves the fiber block (leak " +
                      fmt(leak) + ")");
  }
  return {f.dual * rf.dual, w.head(n)};
}

PhasePoint chiral_right_act(const DoubleLieGroup& dg, const CMat& k,
                            const PhasePoint& p) {
  if (!dg.contains(k)) {
    throw RepresentationError("acting element is not in the double group");
  }
  return {p.m * k.inverse(), dg.coad(k) * p.eta};
}

// ── momentum maps ───────────────────────────────────────────────────────────

ExtendedPoint momentum(MomentumTag tag, const DoubleLieGroup& dg,
                       const GroupCocycle& c, const Vec& alpha3,
                       const PhasePoint& p) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  switch (tag) {
    case MomentumTag::LeftZero: {
      Vec xi = dg.coad(p.m) * dbl.psi(dbl.embed_dual(p.eta)) + c.value(p.m);
      return {xi, 1.0};
    }
    case MomentumTag::LeftAlpha:
    case MomentumTag::AlphaAlpha: {
      GroupCocycle cma = shifted_by_alpha(c, alpha3);
      Vec xi = dg.coad(p.m) * dbl.psi(dbl.embed_dual(p.eta)) + cma.value(p.m);
      return {xi, 1.0};
    }
    case MomentumTag::DualPhi:
    case MomentumTag::DualAlpha: {
      Vec inner = dbl.embed_factor(p.eta) + dbl.embed_dual(alpha3);
      Vec xi = dg.coad(p.m) * dbl.psi(inner) + c.value(p.m);
      if (tag == MomentumTag::DualAlpha) xi -= dbl.psi(dbl.embed_dual(alpha3));
      return {xi, 1.0};
    }
    default: {  // ChiralRight
      Vec xi = p.eta - dg.coad(p.m.inverse()) * c.value(p.m);
      return {xi, 1.0};
    }
  }
}

Vec momentum_differential(MomentumTag tag, const DoubleLieGroup& dg,
                          const GroupCocycle& c, const Vec& alpha3,
                          const PhasePoint& p, const Vec& a, const Vec& rho) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  const LieAlgebra& h = dbl.algebra();
  switch (tag) {
    case MomentumTag::LeftZero:
    case MomentumTag::LeftAlpha:
    case MomentumTag::AlphaAlpha: {
      const GroupCocycle cc = tag == MomentumTag::LeftZero
                                  ? c
                                  : shifted_by_alpha(c, alpha3);
      Vec A = dbl.embed_factor(a);
      Vec inner = -h.ad_star(A) * dbl.psi(dbl.embed_dual(p.eta)) -
                  cc.chat() * A + dbl.psi(dbl.embed_dual(rho));
      return dg.coad(p.m) * inner;
    }
    case MomentumTag::DualPhi:
    case MomentumTag::DualAlpha: {
      Vec A = dbl.embed_dual(a);
      Vec inner =
          -h.ad_star(A) *
              dbl.psi(dbl.embed_factor(p.eta) + dbl.embed_dual(alpha3)) -
          c.chat() * A + dbl.psi(dbl.embed_factor(rho));
      return dg.coad(p.m) * inner;
    }
    default: {  // ChiralRight
      Vec base = dg.coad(p.m.inverse()) * c.value(p.m);
      return -h.ad_star(a) * base + c.chat() * a + rho;
    }
  }
}

Mat momentum_target_chat(MomentumTag tag, const GroupCocycle& c,
                         const Vec& alpha3) {
  switch (tag) {
    case MomentumTag::LeftAlpha:
    case MomentumTag::AlphaAlpha:
    case MomentumTag::DualAlpha:
      return shifted_by_alpha(c, alpha3).chat();
    default:
      return c.chat();
  }
}

double poisson_map_residual(MomentumTag tag, const PhaseSpace& space,
                            const GroupCocycle& c, const Vec& alpha3,
                            const PhasePoint& p) {
  const DoubleLieGroup& dg = space.group();
  const int d = space.dim();
  const int D = dg.double_algebra().dim();
  // Row u holds the momentum differential along the u-th body frame tangent,
  // so column a is the body-frame gradient of the linear observable <., e_a>.
  Mat dmuT(2 * d, D);
  const Vec zero = Vec::Zero(d);
  for (int u = 0; u < d; ++u) {
    dmuT.row(u) =
        momentum_differential(tag, dg, c, alpha3, p, unit(u, d), zero)
            .transpose();
    dmuT.row(d + u) =
        momentum_differential(tag, dg, c, alpha3, p, zero, unit(u, d))
            .transpose();
  }
  ExtendedPoint mu = momentum(tag, dg, c, alpha3, p);
  Mat chat_t = momentum_target_chat(tag, c, alpha3);
  const LieAlgebra& h = dg.double_algebra().algebra();
  Eigen::PartialPivLU<Mat> lu(space.omega(p).transpose());
  // The right-invariant map lands in the opposite bracket.
  const double sign = tag == MomentumTag::ChiralRight ? -1.0 : 1.0;
  double worst = 0.0;
  for (int b = 0; b < D; ++b) {
    Vec field = lu.solve(Vec(dmuT.col(b)));
    for (int a = 0; a < D; ++a) {
      const double space_side = dmuT.col(a).dot(field);
      const double target_side =
          sign * lie_poisson_bracket(h, chat_t, mu, unit(a, D), unit(b, D));
      worst = std::max(worst, std::abs(space_side - target_side));
    }
  }
  return worst;
}

double dual_map_obstruction(const DoubleLieAlgebra& dbl, const Vec& alpha3,
                            const Vec& dF, const Vec& dG) {
  const LieAlgebra& h = dbl.algebra();
  const Vec as = dbl.embed_dual(alpha3);
  const double t1 =
      h.pair(dbl.project_factor(dG), dbl.project_dual(h.bracket(dF, as)));
  const double t2 =
      h.pair(dbl.project_factor(h.bracket(dG, as)), dbl.project_dual(dF));
  return t1 + t2;
}

// ── reduced-space maps and kernels ──────────────────────────────────────────

ExtendedPoint reduced_space_map(const DoubleLieGroup& dg,
                                const GroupCocycle& c, const Vec& alpha3,
                                int variant, const CMat& l) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  const Vec psi_alpha = dbl.psi(dbl.embed_dual(alpha3));
  GroupCocycle cma = c.shifted(-psi_alpha);
  switch (variant) {
    case 0:
      return {cma.value(l) + psi_alpha, 1.0};
    case 1:
      return {cma.value(l), 1.0};
    default:
      throw DomainError("reduced-space map variant must be 0 or 1");
  }
}

Mat kernel_basis(const Mat& m, double tol) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double scale = sv.size() > 0 ? std::max(1.0, sv(0)) : 1.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * scale) ++rank;
  }
  return svd.matrixV().rightCols(m.cols() - rank);
}

// ── dualizable level sets ───────────────────────────────────────────────────

LevelSetReport dualizable_level_set(LevelSetTag tag, const DoubleLieGroup& dg,
                                    const GroupCocycle& c, const Vec& alpha3,
                                    const PhasePoint& p, double tol, int iters,
                                    std::uint64_t seed) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  const int n = dbl.half_dim();
  GroupCocycle cma = shifted_by_alpha(c, alpha3);

  // Fiber reached from a parameter z, plus the part leaking off the fiber
  // block (a nonzero leak means the parametrized orbit leaves the space).
  auto fiber_of = [&](const Vec& z) -> std::pair<Vec, Vec> {
    switch (tag) {
      case LevelSetTag::LeftZeroOrbit: {
        CMat kt = dg.exp_dual(z);
        Vec w = dg.Ad(kt) * dbl.embed_dual(alpha3) + dbl.psi_inv(c.value(kt));
        return {w.tail(n), w.head(n)};
      }
      case LevelSetTag::LeftAlphaOrbit: {
        CMat kt = dg.exp_dual(z);
        Vec w = dbl.psi_inv(cma.value(kt));
        return {w.tail(n), w.head(n)};
      }
      default: {  // DualPhiOrbit
        CMat am = dg.exp_factor(z);
        Vec w = dbl.psi_inv(cma.value(am));
        return {w.head(n), w.tail(n)};
      }
    }
  };
  auto objective = [&](const Vec& z) {
    auto [fib, leak] = fiber_of(z);
    return (p.eta - fib).squaredNorm() + leak.squaredNorm();
  };

  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  Vec best_z = Vec::Zero(n);
  double best_grad = std::numeric_limits<double>::infinity();
  const double fd = 1e-6;
  for (int start = 0; start < 4; ++start) {
    Vec z = start == 0 ? Vec::Zero(n) : Vec(0.5 * rng.gaussian_vec(n));
    double f = objective(z);
    double gnorm = std::numeric_limits<double>::infinity();
    for (int it = 0; it < iters; ++it) {
      Vec g(n);
      for (int i = 0; i < n; ++i) {
        Vec e = unit(i, n);
        g(i) = (objective(z + fd * e) - objective(z - fd * e)) / (2.0 * fd);
      }
      gnorm = g.norm();
      if (gnorm < 1e-10 || f < 1e-20) break;
      double t = 1.0;
      bool moved = false;
      for (int halvings = 0; halvings < 40; ++halvings) {
        Vec zn = z - t * g;
        const double fn = objective(zn);
        if (fn < f) {
          z = zn;
          f = fn;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
    }
    if (f < best) {
      best = f;
      best_z = z;
      best_grad = gnorm;
    }
  }

  LevelSetReport report;
  report.distance = std::sqrt(best);
  report.argmin = best_z;
  if (report.distance < tol) {
    report.status = LevelSetReport::Status::Member;
  } else if (best_grad < 1e-7 && report.distance > 1e-3) {
    report.status = LevelSetReport::Status::NonMember;
  } else {
    report.status = LevelSetReport::Status::Inconclusive;
  }
  return report;
}

}  // namespace orbidual
