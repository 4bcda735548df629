/**
 * @file dynamics.cpp
 * @brief Flows, reconstruction, the duality engine, and the Lagrangian
 *        toolkit.
 */
#include "orbidual/dynamics.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <utility>

namespace orbidual {
namespace {

constexpr double kBlowupNorm = 1e12;
constexpr double kMembershipTol = 1e-8;
constexpr double kBlockCondBound = 1e12;

std::string fmt_num(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

std::string fmt_vec(const Vec& v) {
  std::ostringstream os;
  os << std::setprecision(6) << "[";
  for (Eigen::Index i = 0; i < v.size(); ++i)
    os << (i ? ", " : "") << v(i);
  os << "]";
  return os.str();
}

std::string fmt_cmat(const CMat& m) {
  std::ostringstream os;
  os << std::setprecision(6) << m;
  return os.str();
}

/// Truncated inverse right-trivialized differential of exp: for a space
/// velocity a, theta' = a - [theta, a]/2 + [theta, [theta, a]]/12.
Vec dexpinv(const LieAlgebra& alg, const Vec& theta, const Vec& a) {
  Vec c1 = alg.bracket(theta, a);
  Vec c2 = alg.bracket(theta, c1);
  return a - 0.5 * c1 + c2 / 12.0;
}

double condition_number(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

/// Split a (xi, b) state vector, tolerating a missing charge slot.
ExtendedPoint unpack_extended(const Vec& y, int d) {
  if (y.size() == d + 1) return ExtendedPoint{y.head(d), y(d)};
  if (y.size() == d) return ExtendedPoint{y, 1.0};
  throw PreconditionError("extended state has size " +
                          std::to_string(y.size()) + ", expected " +
                          std::to_string(d) + " or " + std::to_string(d + 1));
}

int step_count(double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0))
    throw PreconditionError("time horizon and step must be positive");
  return static_cast<int>(std::max<long long>(1, std::llround(T / dt)));
}

}  // namespace

// ── CollectiveHamiltonian ───────────────────────────────────────────────────

CollectiveHamiltonian CollectiveHamiltonian::quadratic(Mat Q) {
  if (Q.rows() != Q.cols())
    throw PreconditionError("quadratic form matrix must be square");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw StructureError("quadratic form matrix is not symmetric to 1e-12");
  CollectiveHamiltonian h;
  h.q_ = std::move(Q);
  return h;
}

CollectiveHamiltonian CollectiveHamiltonian::custom(
    std::function<double(const ExtendedPoint&)> value,
    std::function<Vec(const ExtendedPoint&)> gradient) {
  if (!value || !gradient)
    throw PreconditionError("custom Hamiltonian needs value and gradient");
  CollectiveHamiltonian h;
  h.value_ = std::move(value);
  h.grad_ = std::move(gradient);
  return h;
}

double CollectiveHamiltonian::value(const ExtendedPoint& p) const {
  if (value_) return value_(p);
  return 0.5 * p.xi.dot(q_ * p.xi);
}

Vec CollectiveHamiltonian::gradient(const ExtendedPoint& p) const {
  if (grad_) return grad_(p);
  return q_ * p.xi;
}

// ── Trajectory ──────────────────────────────────────────────────────────────

void Trajectory::to_csv(std::ostream& os) const {
  const int ns = states.empty() ? 0 : static_cast<int>(states.front().size());
  const int ms = bases.empty() ? 0 : static_cast<int>(bases.front().rows());
  os << "t";
  for (int i = 0; i < ns; ++i) os << ",s" << i;
  for (int r = 0; r < ms; ++r)
    for (int c = 0; c < ms; ++c)
      os << ",m" << r << c << "_re,m" << r << c << "_im";
  os << "\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << times[k];
    if (k < states.size())
      for (int i = 0; i < ns; ++i) os << "," << states[k](i);
    if (k < bases.size())
      for (int r = 0; r < ms; ++r)
        for (int c = 0; c < ms; ++c)
          os << "," << bases[k](r, c).real() << "," << bases[k](r, c).imag();
    os << "\n";
  }
}

// ── integrators ─────────────────────────────────────────────────────────────

Vec rk4_step(const std::function<Vec(double, const Vec&)>& f, double t,
             const Vec& y, double dt) {
  Vec k1 = f(t, y);
  Vec k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
  Vec k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
  Vec k4 = f(t + dt, y + dt * k3);
  return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

CMat rkmk4_step(const LieGroup& G,
                const std::function<Vec(double, const CMat&)>& a, double t,
                const CMat& l, double dt) {
  const LieAlgebra& alg = G.algebra();
  Vec k1 = a(t, l);
  Vec u2 = 0.5 * dt * k1;
  Vec k2 = dexpinv(alg, u2, a(t + 0.5 * dt, G.exp(u2) * l));
  Vec u3 = 0.5 * dt * k2;
  Vec k3 = dexpinv(alg, u3, a(t + 0.5 * dt, G.exp(u3) * l));
  Vec u4 = dt * k3;
  Vec k4 = dexpinv(alg, u4, a(t + dt, G.exp(u4) * l));
  Vec theta = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return G.exp(theta) * l;
}

// ── extended flow ───────────────────────────────────────────────────────────

Trajectory lie_poisson_flow(const LieAlgebra& alg, const Mat& chat,
                            const CollectiveHamiltonian& h,
                            const ExtendedPoint& xi0, double T, double dt) {
  const int d = alg.dim();
  if (xi0.xi.size() != d)
    throw PreconditionError("initial state has wrong dimension");
  Mat ch = chat.size() ? chat : Mat::Zero(d, d);
  if (ch.rows() != d || ch.cols() != d)
    throw PreconditionError("cocycle matrix has wrong dimension");

  auto f = [&](double, const Vec& y) -> Vec {
    ExtendedPoint p = unpack_extended(y, d);
    Vec out = Vec::Zero(d + 1);
    out.head(d) = lie_poisson_rhs(alg, ch, p, h.gradient(p));
    return out;
  };

  const int n = step_count(T, dt);
  Trajectory traj;
  traj.times.reserve(n + 1);
  traj.states.reserve(n + 1);
  Vec y(d + 1);
  y.head(d) = xi0.xi;
  y(d) = xi0.b;
  traj.times.push_back(0.0);
  traj.states.push_back(y);
  for (int k = 0; k < n; ++k) {
    y = rk4_step(f, k * dt, y, dt);
    double t = (k + 1) * dt;
    if (!y.allFinite() || y.norm() > kBlowupNorm)
      throw IntegrationError("extended flow blew up at t = " + fmt_num(t));
    traj.times.push_back(t);
    traj.states.push_back(y);
  }
  return traj;
}

Trajectory reconstruct_group_curve(const LieGroup& G, const LieAlgebra& alg,
                                   const Mat& chat,
                                   const CollectiveHamiltonian& h,
                                   const Trajectory& xi, Mat vel_map) {
  const int d = alg.dim();
  if (xi.times.size() < 2 || xi.states.size() != xi.times.size())
    throw PreconditionError("state trajectory is empty or inconsistent");
  Mat vmap = vel_map.size() ? std::move(vel_map)
                            : Mat(Mat::Identity(G.dim(), d));
  if (vmap.rows() != G.dim() || vmap.cols() != d)
    throw PreconditionError("velocity map has wrong dimensions");
  Mat ch = chat.size() ? chat : Mat::Zero(d, d);

  auto rhs = [&](double, const Vec& y) -> Vec {
    ExtendedPoint p = unpack_extended(y, d);
    Vec out = Vec::Zero(y.size());
    out.head(d) = lie_poisson_rhs(alg, ch, p, h.gradient(p));
    return out;
  };
  auto group_vel = [&](const Vec& y) -> Vec {
    ExtendedPoint p = unpack_extended(y, d);
    return vmap * h.gradient(p);
  };

  Trajectory out;
  out.times = xi.times;
  out.states = xi.states;
  out.bases.resize(xi.times.size());
  out.bases[0] = G.identity();
  const LieAlgebra& galg = G.algebra();
  CMat g = G.identity();
  for (std::size_t k = 0; k + 1 < xi.times.size(); ++k) {
    const double t = xi.times[k];
    const double hstep = xi.times[k + 1] - t;
    Vec yk = xi.states[k];
    Vec yhalf = rk4_step(rhs, t, yk, 0.5 * hstep);
    Vec a0 = group_vel(yk);
    Vec amid = group_vel(yhalf);
    Vec aend = group_vel(xi.states[k + 1]);

    Vec k1 = a0;
    Vec k2 = dexpinv(galg, Vec(0.5 * hstep * k1), amid);
    Vec k3 = dexpinv(galg, Vec(0.5 * hstep * k2), amid);
    Vec k4 = dexpinv(galg, Vec(hstep * k3), aend);
    Vec theta = hstep / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    g = G.exp(theta) * g;

    if (!G.contains(g, kMembershipTol)) {
      try {
        g = G.exp(G.log_coords(g));
      } catch (const std::exception& e) {
        throw IntegrationError(
            "group curve left the group at t = " + fmt_num(xi.times[k + 1]) +
            " and projection failed: " + e.what());
      }
      ++out.projections;
      if (!G.contains(g, kMembershipTol))
        throw IntegrationError("group curve remains off the group at t = " +
                               fmt_num(xi.times[k + 1]) +
                               " after projection");
    }
    out.bases[k + 1] = g;
  }
  return out;
}

// ── direct phase-space integration ──────────────────────────────────────────

Trajectory direct_trajectory(const PhaseSpace& space, const PhasePoint& p0,
                             const PhaseObservable& H, double T, double dt) {
  if (!H.value || !H.gradient)
    throw PreconditionError("observable needs value and gradient callables");
  const LieAlgebra& balg = space.base_algebra();
  const int nb = balg.dim();
  if (p0.eta.size() != nb)
    throw PreconditionError("initial fiber has wrong dimension");

  const int n = step_count(T, dt);
  Trajectory traj;
  traj.times.reserve(n + 1);
  traj.states.reserve(n + 1);
  traj.bases.reserve(n + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(p0.eta);
  traj.bases.push_back(p0.m);

  CMat m = p0.m;
  Vec eta = p0.eta;
  for (int k = 0; k < n; ++k) {
    // Chart field: theta' carries the inverse-dexp correction for the body
    // velocity, the fiber is flat.
    auto f = [&](double, const Vec& y) -> Vec {
      Vec theta = y.head(nb);
      PhasePoint p{m * space.base_exp(theta), y.tail(nb)};
      Vec V = space.ham_field(p, H.gradient(p));
      Vec a = V.head(nb);
      Vec c1 = balg.bracket(theta, a);
      Vec c2 = balg.bracket(theta, c1);
      Vec out(2 * nb);
      out.head(nb) = a + 0.5 * c1 + c2 / 12.0;
      out.tail(nb) = V.tail(nb);
      return out;
    };
    Vec y = Vec::Zero(2 * nb);
    y.tail(nb) = eta;
    y = rk4_step(f, k * dt, y, dt);
    if (!y.allFinite() || y.norm() > kBlowupNorm)
      throw IntegrationError("phase flow blew up at t = " +
                             fmt_num((k + 1) * dt));
    m = m * space.base_exp(y.head(nb));
    eta = y.tail(nb);
    traj.times.push_back((k + 1) * dt);
    traj.states.push_back(eta);
    traj.bases.push_back(m);
  }
  return traj;
}

// ── collective bundles ──────────────────────────────────────────────────────

PhasePoint CollectiveSpace::act(const CMat& h, const PhasePoint& p) const {
  switch (tag) {
    case MomentumTag::LeftZero:
      return dhat_act(group(), *cocycle, h, p);
    case MomentumTag::LeftAlpha:
    case MomentumTag::AlphaAlpha:
      return dhat_alpha_act(group(), *cocycle, alpha3, h, p);
    case MomentumTag::DualPhi:
    case MomentumTag::DualAlpha:
      return bhat_act(group(), *cocycle, alpha3, h, p);
    case MomentumTag::ChiralRight:
      break;
  }
  throw DomainError(
      "the right-invariant momentum tag has no left collective action");
}

ExtendedPoint CollectiveSpace::momentum_at(const PhasePoint& p) const {
  return momentum(tag, group(), *cocycle, alpha3, p);
}

Mat CollectiveSpace::target_chat() const {
  return momentum_target_chat(tag, *cocycle, alpha3);
}

PhaseObservable collective_observable(const CollectiveSpace& cs,
                                      const CollectiveHamiltonian& h) {
  const CollectiveSpace bundle = cs;  // copy small POD-like struct
  PhaseObservable obs;
  obs.value = [bundle, h](const PhasePoint& p) {
    return h.value(bundle.momentum_at(p));
  };
  obs.gradient = [bundle, h](const PhasePoint& p) -> Vec {
    const int nb = bundle.space->base_algebra().dim();
    Vec lh = h.gradient(bundle.momentum_at(p));
    Vec grad(2 * nb);
    for (int i = 0; i < 2 * nb; ++i) {
      Vec a = Vec::Zero(nb), rho = Vec::Zero(nb);
      if (i < nb)
        a(i) = 1.0;
      else
        rho(i - nb) = 1.0;
      Vec dmu = momentum_differential(bundle.tag, bundle.group(),
                                      *bundle.cocycle, bundle.alpha3, p, a,
                                      rho);
      grad(i) = dmu.dot(lh);
    }
    return grad;
  };
  return obs;
}

Trajectory collective_trajectory(const CollectiveSpace& cs,
                                 const PhasePoint& p0,
                                 const CollectiveHamiltonian& h, double T,
                                 double dt) {
  const DoubleLieGroup& dg = cs.group();
  const LieAlgebra& halg = dg.double_algebra().algebra();
  ExtendedPoint mu0 = cs.momentum_at(p0);
  Trajectory xi = lie_poisson_flow(halg, cs.target_chat(), h, mu0, T, dt);
  Trajectory g = reconstruct_group_curve(dg, halg, cs.target_chat(), h, xi);
  Trajectory out;
  out.times = xi.times;
  out.projections = g.projections;
  out.states.reserve(xi.times.size());
  out.bases.reserve(xi.times.size());
  for (std::size_t k = 0; k < g.bases.size(); ++k) {
    PhasePoint pk = cs.act(g.bases[k], p0);
    out.states.push_back(pk.eta);
    out.bases.push_back(pk.m);
  }
  return out;
}

DualityReport duality_run(const CollectiveSpace& A, const PhasePoint& p0A,
                          const CollectiveSpace& B, const PhasePoint& p0B,
                          const CollectiveHamiltonian& h, double T,
                          double dt) {
  ExtendedPoint muA = A.momentum_at(p0A);
  ExtendedPoint muB = B.momentum_at(p0B);
  double mu_gap = std::max((muA.xi - muB.xi).cwiseAbs().maxCoeff(),
                           std::abs(muA.b - muB.b));
  if (mu_gap > 1e-8)
    throw PreconditionError(
        "initial momenta disagree: side A gives " + fmt_vec(muA.xi) +
        " (charge " + fmt_num(muA.b) + "), side B gives " + fmt_vec(muB.xi) +
        " (charge " + fmt_num(muB.b) + ")");
  Mat chA = A.target_chat();
  Mat chB = B.target_chat();
  if ((chA - chB).cwiseAbs().maxCoeff() > 1e-10)
    throw PreconditionError(
        "the two sides target different extended structures");

  const DoubleLieGroup& dg = A.group();
  const LieAlgebra& halg = dg.double_algebra().algebra();
  Trajectory xi = lie_poisson_flow(halg, chA, h, muA, T, dt);
  Trajectory g = reconstruct_group_curve(dg, halg, chA, h, xi);

  Trajectory dirA = direct_trajectory(*A.space, p0A,
                                      collective_observable(A, h), T, dt);
  Trajectory dirB = direct_trajectory(*B.space, p0B,
                                      collective_observable(B, h), T, dt);

  DualityReport rep;
  rep.T = T;
  rep.dt = dt;
  const int d = halg.dim();
  for (std::size_t k = 0; k < g.bases.size(); ++k) {
    PhasePoint pA = A.act(g.bases[k], p0A);
    PhasePoint pB = B.act(g.bases[k], p0B);
    double rA = std::max((pA.m - dirA.bases[k]).cwiseAbs().maxCoeff(),
                         (pA.eta - dirA.states[k]).cwiseAbs().maxCoeff());
    double rB = std::max((pB.m - dirB.bases[k]).cwiseAbs().maxCoeff(),
                         (pB.eta - dirB.states[k]).cwiseAbs().maxCoeff());
    rep.residual_A = std::max(rep.residual_A, rA);
    rep.residual_B = std::max(rep.residual_B, rB);
    Vec xik = xi.states[k].head(d);
    double drift =
        std::max((A.momentum_at(pA).xi - xik).cwiseAbs().maxCoeff(),
                 (B.momentum_at(pB).xi - xik).cwiseAbs().maxCoeff());
    rep.momentum_drift = std::max(rep.momentum_drift, drift);
  }
  rep.energy_drift = std::abs(
      h.value(unpack_extended(xi.states.back(), d)) -
      h.value(unpack_extended(xi.states.front(), d)));
  return rep;
}

// ── involutive operators ────────────────────────────────────────────────────

void validate_sigma_operator(const DoubleLieAlgebra& dbl, const Mat& E,
                             double tol) {
  const int n2 = dbl.dim();
  const int n = dbl.half_dim();
  if (E.rows() != n2 || E.cols() != n2)
    throw PreconditionError("operator has wrong dimensions");
  const Mat& P = dbl.algebra().pairing();
  if ((E * E - Mat::Identity(n2, n2)).cwiseAbs().maxCoeff() > tol)
    throw StructureError("operator is not involutive to tolerance");
  if ((E.transpose() * P - P * E).cwiseAbs().maxCoeff() > tol)
    throw StructureError(
        "operator is not self-adjoint for the pairing to tolerance");
  if (condition_number(E.topRightCorner(n, n)) > kBlockCondBound)
    throw StructureError(
        "dual-to-factor block of the operator is not invertible");
}

Mat sigma_swap(const DoubleLieAlgebra& dbl) {
  return dbl.algebra().pairing();
}

Mat random_sigma_operator(const DoubleLieAlgebra& dbl, Rng& rng,
                          double cond_bound) {
  const int n2 = dbl.dim();
  const int n = dbl.half_dim();
  const Mat& P = dbl.algebra().pairing();
  const Mat& Pinv = dbl.pairing_inverse();
  for (int attempt = 0; attempt < 500; ++attempt) {
    Mat X = 0.35 * rng.gaussian_mat(n2, n2);
    Mat Y = X - Pinv * X.transpose() * P;  // infinitesimally pairing-orthogonal
    Mat S = Y.exp();
    // Base reflection: a sign-decorated block swap. It commutes with the
    // pairing (so the conjugate stays self-adjoint) and splits the spectrum
    // evenly, which keeps the dual-to-factor block invertible; a plain
    // diagonal sign pattern would make that block singular.
    Mat D0 = Mat::Zero(n2, n2);
    for (int i = 0; i < n; ++i) {
      double s = rng.uniform() < 0.5 ? -1.0 : 1.0;
      D0(i, n + i) = s;
      D0(n + i, i) = s;
    }
    Mat E = S * D0 * S.inverse();
    if (condition_number(E.topRightCorner(n, n)) > cond_bound) continue;
    try {
      validate_sigma_operator(dbl, E, 1e-12);
    } catch (const StructureError&) {
      continue;
    }
    return E;
  }
  throw StructureError("could not sample a well-conditioned involution");
}

namespace {

SigmaBlocks blocks_impl(const DoubleLieGroup& dg, const Mat& E, const CMat& g,
                        bool dual_position) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  const int n = dbl.half_dim();
  const int n2 = dbl.dim();
  if (E.rows() != n2 || E.cols() != n2)
    throw PreconditionError("operator has wrong dimensions");
  SigmaBlocks out;
  out.Eg = dg.Ad(CMat(g.inverse())) * E * dg.Ad(g);
  Mat off = dual_position ? out.Eg.bottomLeftCorner(n, n)
                          : out.Eg.topRightCorner(n, n);
  if (condition_number(off) > kBlockCondBound)
    throw FactorizationError(
        "position block of the transported operator is singular at the "
        "element\n" +
        fmt_cmat(g));
  out.G = off.inverse();
  Mat diag_block = dual_position ? out.Eg.bottomRightCorner(n, n)
                                 : out.Eg.topLeftCorner(n, n);
  out.B = -out.G * diag_block;
  return out;
}

}  // namespace

SigmaBlocks sigma_blocks(const DoubleLieGroup& dg, const Mat& E,
                         const CMat& g) {
  return blocks_impl(dg, E, g, false);
}

SigmaBlocks sigma_blocks_dual(const DoubleLieGroup& dg, const Mat& E,
                              const CMat& htilde) {
  return blocks_impl(dg, E, htilde, true);
}

// ── quadratic chiral Hamiltonians ───────────────────────────────────────────

WznwHamiltonian::WznwHamiltonian(const DoubleLieGroup& dg,
                                 const GroupCocycle& c, Mat L2, Mat L3,
                                 Vec alpha3, WznwVariant variant)
    : dg_(&dg),
      c_(c),
      flow_c_(c),
      l2_(std::move(L2)),
      l3_(std::move(L3)),
      alpha3_(std::move(alpha3)),
      variant_(variant) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  const int n2 = dbl.dim();
  const Mat& P = dbl.algebra().pairing();
  if (l2_.rows() != n2 || l2_.cols() != n2 || l3_.rows() != n2 ||
      l3_.cols() != n2)
    throw PreconditionError("operator fields have wrong dimensions");
  if (alpha3_.size() != dbl.half_dim())
    throw PreconditionError("dual direction has wrong dimension");
  if ((l2_.transpose() * P - P * l2_).cwiseAbs().maxCoeff() > 1e-12)
    throw StructureError("first operator field is not self-adjoint to 1e-12");
  if ((l3_.transpose() * P - P * l3_).cwiseAbs().maxCoeff() > 1e-12)
    throw StructureError("second operator field is not self-adjoint to 1e-12");
  l3_cond_ = condition_number(l3_);
  if (!(l3_cond_ < kBlockCondBound))
    throw StructureError("second operator field is not invertible (condition "
                         "number " + fmt_num(l3_cond_) + ")");
  l3_inv_ = l3_.inverse();
  if (variant_ == WznwVariant::Shifted)
    flow_c_ = c_.shifted(-dbl.psi(dbl.embed_dual(alpha3_)));
}

Vec WznwHamiltonian::background(const CMat& l) const {
  const DoubleLieAlgebra& dbl = dg_->double_algebra();
  Vec w = dbl.psi_inv(c_.value(l)) +
          dg_->Ad(l) * dbl.embed_dual(alpha3_);
  if (variant_ == WznwVariant::Shifted) w -= dbl.embed_dual(alpha3_);
  return w;
}

Vec WznwHamiltonian::space_momentum(const PhasePoint& p) const {
  return dg_->Ad(p.m) * dg_->double_algebra().psi_inv(p.eta);
}

double WznwHamiltonian::value(const PhasePoint& p) const {
  const DoubleLieAlgebra& dbl = dg_->double_algebra();
  const Mat& P = dbl.algebra().pairing();
  Vec M = space_momentum(p);
  Vec W = background(p.m);
  auto pairP = [&](const Vec& x, const Vec& y) { return x.dot(P * y); };
  return 0.5 * pairP(M, l3_ * M) + pairP(M, l2_ * W) -
         0.5 * pairP(W, l2_ * W);
}

Vec WznwHamiltonian::gradient(const PhasePoint& p) const {
  const DoubleLieAlgebra& dbl = dg_->double_algebra();
  const LieAlgebra& halg = dbl.algebra();
  const Mat& P = halg.pairing();
  const int n2 = dbl.dim();
  Mat Adl = dg_->Ad(p.m);
  Mat Adlinv = dg_->Ad(CMat(p.m.inverse()));
  Vec M = space_momentum(p);
  Vec W = background(p.m);
  Vec R = l3_ * M + l2_ * W;
  Vec L2MW = l2_ * (M - W);
  Vec A = Adl * dbl.embed_dual(alpha3_);
  Vec grad(2 * n2);
  for (int i = 0; i < n2; ++i) {
    Vec Xsp = Adl.col(i);
    Vec dM = halg.bracket(Xsp, M);
    Vec dW = halg.bracket(Xsp, A) - Adl * dbl.psi_inv(c_.chat().col(i));
    grad(i) = dM.dot(P * R) + dW.dot(P * L2MW);
  }
  grad.tail(n2) = Adlinv * R;
  return grad;
}

PhaseSpace WznwHamiltonian::flow_space() const {
  PhaseSpace sp(*dg_, BaseKind::Full);
  sp.with_cocycle(flow_c_, CocycleFrame::Space);
  return sp;
}

PhaseObservable WznwHamiltonian::observable() const {
  PhaseObservable obs;
  const WznwHamiltonian* self = this;
  obs.value = [self](const PhasePoint& p) { return self->value(p); };
  obs.gradient = [self](const PhasePoint& p) { return self->gradient(p); };
  return obs;
}

// ── Lagrangian families ─────────────────────────────────────────────────────

double master_lagrangian(const Mat& G, const Mat& B, const Vec& qdot,
                         const Vec& qp) {
  return 0.5 * (qdot.dot(G * qdot) - qp.dot(G * qp)) + qdot.dot(B * qp);
}

namespace {

/// Factor-valued avatar of the cocycle at the inverse state.
Vec sigma_qprime(const DoubleLieAlgebra& dbl, const GroupCocycle& c,
                 const CMat& g) {
  return -dbl.part_factor(dbl.psi_inv(c.value(CMat(g.inverse()))));
}

struct ChiralData {
  Vec W;       // background in double coordinates
  Vec M;       // Legendre image of the space velocity
  Mat l3_inv;
};

ChiralData chiral_data(const LagrangianParams& prm, const CMat& l,
                       const Vec& u, bool with_alpha) {
  const DoubleLieAlgebra& dbl = prm.dg->double_algebra();
  const int n2 = dbl.dim();
  if (prm.L2.rows() != n2 || prm.L3.rows() != n2)
    throw PreconditionError("operator fields have wrong dimensions");
  if (u.size() != n2)
    throw PreconditionError("chiral velocity must have full dimension");
  GroupCocycle cma = prm.c->shifted(-dbl.psi(dbl.embed_dual(prm.alpha3)));
  ChiralData d;
  d.W = dbl.psi_inv(cma.value(l));
  if (with_alpha) d.W += dbl.embed_dual(prm.alpha3);
  d.l3_inv = prm.L3.inverse();
  d.M = d.l3_inv * (u - prm.L2 * d.W);
  return d;
}

}  // namespace

double lagrangian_eval(LagrangianFamily fam, const LagrangianParams& prm,
                       const CMat& state, const Vec& velocity) {
  if (!prm.dg || !prm.c)
    throw PreconditionError("family parameters need the group and cocycle");
  const DoubleLieGroup& dg = *prm.dg;
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  switch (fam) {
    case LagrangianFamily::Lsigma0:
    case LagrangianFamily::LsigmaAlpha: {
      SigmaBlocks bl = sigma_blocks(dg, prm.E, state);
      Vec qp = sigma_qprime(dbl, *prm.c, state);
      double L = master_lagrangian(bl.G, bl.B, velocity, qp);
      if (fam == LagrangianFamily::LsigmaAlpha)
        L -= prm.alpha3.dot(velocity);
      return L;
    }
    case LagrangianFamily::LtildeAlpha: {
      SigmaBlocks bl = sigma_blocks_dual(dg, prm.E, state);
      Vec qp = prm.alpha3 -
               dbl.part_dual(dbl.psi_inv(prm.c->value(CMat(state.inverse()))));
      return master_lagrangian(bl.G, bl.B, velocity, qp);
    }
    case LagrangianFamily::Lc0:
    case LagrangianFamily::LcMinusAlpha: {
      ChiralData d =
          chiral_data(prm, state, velocity, fam == LagrangianFamily::Lc0);
      const Mat& P = dbl.algebra().pairing();
      auto pairP = [&](const Vec& x, const Vec& y) { return x.dot(P * y); };
      Vec l3iu = d.l3_inv * velocity;
      Vec l2w = prm.L2 * d.W;
      return 0.5 * pairP(l3iu, velocity) - pairP(d.l3_inv * l2w, velocity) +
             0.5 * (pairP(d.W, l2w) + pairP(d.W, prm.L2 * (d.l3_inv * l2w)));
    }
  }
  throw PreconditionError("unknown Lagrangian family");
}

Vec legendre_fiber(LagrangianFamily fam, const LagrangianParams& prm,
                   const CMat& state, const Vec& velocity) {
  if (!prm.dg || !prm.c)
    throw PreconditionError("family parameters need the group and cocycle");
  const DoubleLieGroup& dg = *prm.dg;
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  switch (fam) {
    case LagrangianFamily::Lsigma0:
    case LagrangianFamily::LsigmaAlpha: {
      SigmaBlocks bl = sigma_blocks(dg, prm.E, state);
      Vec qp = sigma_qprime(dbl, *prm.c, state);
      Vec lam = bl.G * velocity + bl.B * qp;
      if (fam == LagrangianFamily::LsigmaAlpha) lam -= prm.alpha3;
      return lam;
    }
    case LagrangianFamily::LtildeAlpha: {
      SigmaBlocks bl = sigma_blocks_dual(dg, prm.E, state);
      Vec qp = prm.alpha3 -
               dbl.part_dual(dbl.psi_inv(prm.c->value(CMat(state.inverse()))));
      return bl.G * velocity + bl.B * qp;
    }
    case LagrangianFamily::Lc0:
    case LagrangianFamily::LcMinusAlpha: {
      ChiralData d =
          chiral_data(prm, state, velocity, fam == LagrangianFamily::Lc0);
      return dbl.psi(dg.Ad(CMat(state.inverse())) * d.M);
    }
  }
  throw PreconditionError("unknown Lagrangian family");
}

}  // namespace orbidual
