#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "orbidual/dynamics.hpp"

using namespace orbidual;

namespace {

Vec unit3(int i) {
  Vec e = Vec::Zero(3);
  e(i) = 1.0;
  return e;
}

/// Structure constants adapted to the rigid-body/pendulum pair: the scaled
/// translation directions make the conserved quadratic a Casimir.
LieAlgebra adapted_se2() {
  return LieAlgebra(3, {"E1", "E2", "E3"},
                    {{2, 0, 1, 0.5}, {2, 1, 0, -2.0}});
}

/// Rigid-body Hamiltonian in the adapted coordinates (inertia 1, 2, 3).
CollectiveHamiltonian rigid_body_h() {
  Mat Q = Mat::Zero(3, 3);
  Q(1, 1) = 0.25;
  Q(2, 2) = 1.0 / 3.0;
  return CollectiveHamiltonian::quadratic(Q);
}

/// Conserved quadratic of the rigid-body flow: (4 b1^2 + b2^2) / 12.
double rigid_casimir(const Vec& beta) {
  return (4.0 * beta(0) * beta(0) + beta(1) * beta(1)) / 12.0;
}

double casimir_drift(const Trajectory& traj) {
  double c0 = rigid_casimir(traj.states.front().head(3));
  double worst = 0.0;
  for (const Vec& s : traj.states)
    worst = std::max(worst, std::abs(rigid_casimir(s.head(3)) - c0));
  return worst;
}

double energy_drift(const CollectiveHamiltonian& h, const Trajectory& traj) {
  int d = static_cast<int>(traj.states.front().size()) - 1;
  auto val = [&](const Vec& y) {
    return h.value(ExtendedPoint{y.head(d), y(d)});
  };
  double h0 = val(traj.states.front());
  double worst = 0.0;
  for (const Vec& s : traj.states)
    worst = std::max(worst, std::abs(val(s) - h0));
  return worst;
}

Mat quadratic_from_operator(const DoubleLieAlgebra& dbl, const Mat& E) {
  Mat Q = E * dbl.pairing_inverse();
  return 0.5 * (Q + Q.transpose());
}

}  // namespace

TEST_CASE("collective hamiltonians validate and evaluate") {
  Mat Q(2, 2);
  Q << 2.0, 0.5, 0.5, 1.0;
  auto h = CollectiveHamiltonian::quadratic(Q);
  Vec xi(2);
  xi << 1.0, -2.0;
  ExtendedPoint p{xi, 1.0};
  CHECK(h.value(p) == doctest::Approx(0.5 * xi.dot(Q * xi)));
  CHECK((h.gradient(p) - Q * xi).norm() == doctest::Approx(0.0));

  Mat bad(2, 2);
  bad << 1.0, 0.3, 0.2, 1.0;
  CHECK_THROWS_AS(CollectiveHamiltonian::quadratic(bad), StructureError);

  auto hc = CollectiveHamiltonian::custom(
      [](const ExtendedPoint& q) { return q.xi(0) * q.b; },
      [](const ExtendedPoint& q) { return Vec(unit3(0) * q.b); });
  CHECK(hc.value({xi, 2.0}) == doctest::Approx(2.0));
  CHECK(hc.gradient({xi, 2.0})(0) == doctest::Approx(2.0));
}

TEST_CASE("rigid-body flow conserves the orbit quadratic and the energy") {
  LieAlgebra alg = adapted_se2();
  auto h = rigid_body_h();
  Vec xi0(3);
  xi0 << 0.8, -0.5, 0.6;

  auto traj = lie_poisson_flow(alg, Mat(), h, {xi0, 1.0}, 1.0, 1e-3);
  CHECK(traj.times.size() == 1001);
  CHECK(casimir_drift(traj) < 1e-8);
  CHECK(energy_drift(h, traj) < 1e-8);

  // Fourth-order step: halving the step shrinks the drift by about 2^4.
  double d1 = energy_drift(h, lie_poisson_flow(alg, Mat(), h,
                                               {4.0 * xi0, 1.0}, 1.0, 8e-3));
  double d2 = energy_drift(h, lie_poisson_flow(alg, Mat(), h,
                                               {4.0 * xi0, 1.0}, 1.0, 4e-3));
  CHECK(d1 / d2 > 6.0);
  CHECK(d1 / d2 < 60.0);
}

TEST_CASE("diverging flows stop with a timed blow-up error") {
  LieAlgebra abelian(3, {"A1", "A2", "A3"}, {});
  Mat chat = Mat::Zero(3, 3);
  chat(0, 1) = -1.0;
  chat(1, 0) = 1.0;
  auto h = CollectiveHamiltonian::custom(
      [](const ExtendedPoint& p) { return 0.25 * std::pow(p.xi(0), 4.0); },
      [](const ExtendedPoint& p) {
        return Vec(unit3(1) * std::pow(p.xi(0), 3.0));
      });
  try {
    lie_poisson_flow(abelian, chat, h, {Vec(3.0 * unit3(0)), 1.0}, 1.0, 1e-3);
    FAIL("expected a blow-up error");
  } catch (const IntegrationError& e) {
    CHECK(std::string(e.what()).find("blew up at t") != std::string::npos);
  }
}

TEST_CASE("group curves of constant gradients are one-parameter subgroups") {
  auto dg = make_double_group("lu_weinstein_su2");
  const LieAlgebra& halg = dg->double_algebra().algebra();
  Rng rng(23);
  Vec X = 0.5 * rng.gaussian_vec(6);
  auto h = CollectiveHamiltonian::custom(
      [X](const ExtendedPoint& p) { return X.dot(p.xi); },
      [X](const ExtendedPoint&) { return X; });

  auto xi = lie_poisson_flow(halg, Mat(), h, {rng.gaussian_vec(6), 1.0}, 0.5,
                             1e-2);
  auto g = reconstruct_group_curve(*dg, halg, Mat(), h, xi);
  CHECK(g.projections == 0);
  for (std::size_t k = 0; k < g.times.size(); k += 10) {
    CMat expect = dg->exp(Vec(g.times[k] * X));
    CHECK((g.bases[k] - expect).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(dg->contains(g.bases[k], 1e-8));
  }
}

TEST_CASE("reconstruction transports the initial momentum along the curve") {
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  Rng rng(31);
  auto c = GroupCocycle::coboundary(*dg, rng.gaussian_vec(6));
  Mat E = random_sigma_operator(dbl, rng);
  auto h = CollectiveHamiltonian::quadratic(quadratic_from_operator(dbl, E));

  ExtendedPoint xi0{0.7 * rng.gaussian_vec(6), 1.0};
  auto xi = lie_poisson_flow(dbl.algebra(), c.chat(), h, xi0, 0.5, 1e-3);
  auto g = reconstruct_group_curve(*dg, dbl.algebra(), c.chat(), h, xi);
  for (std::size_t k = 0; k < g.times.size(); k += 50) {
    ExtendedPoint moved = c.extended_coad(g.bases[k], xi0);
    CHECK((moved.xi - xi.states[k].head(6)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(moved.b == doctest::Approx(1.0));
  }
}

TEST_CASE("collective sigma fields obey the block closed form") {
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  Rng rng(37);
  auto c = GroupCocycle::coboundary(
      *dg, dbl.psi(dbl.embed_dual(rng.gaussian_vec(3))));
  Mat E = random_sigma_operator(dbl, rng);
  auto h = CollectiveHamiltonian::quadratic(quadratic_from_operator(dbl, E));

  auto sp = PhaseSpace(*dg, BaseKind::Factor).with_cocycle(c,
                                                           CocycleFrame::Body);
  CollectiveSpace cs{&sp, MomentumTag::LeftZero, &c, Vec::Zero(3)};
  auto obs = collective_observable(cs, h);

  for (int s = 0; s < 10; ++s) {
    PhasePoint p{dg->exp_factor(0.6 * rng.gaussian_vec(3)),
                 rng.gaussian_vec(3)};
    Vec V = sp.ham_field(p, obs.gradient(p));
    SigmaBlocks bl = sigma_blocks(*dg, E, p.m);
    Vec cav = dbl.psi_inv(c.value(CMat(p.m.inverse())));
    Mat Ginv = bl.G.inverse();
    Vec expect = Ginv * (p.eta - dbl.part_dual(cav)) +
                 Ginv * bl.B * dbl.part_factor(cav);
    CHECK((V.head(3) - expect).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("collective trajectories ride the momentum flow") {
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  Rng rng(41);
  auto c = GroupCocycle::coboundary(
      *dg, dbl.psi(dbl.embed_dual(rng.gaussian_vec(3))));
  Mat E = random_sigma_operator(dbl, rng);
  auto h = CollectiveHamiltonian::quadratic(quadratic_from_operator(dbl, E));

  auto sp = PhaseSpace(*dg, BaseKind::Factor).with_cocycle(c,
                                                           CocycleFrame::Body);
  CollectiveSpace cs{&sp, MomentumTag::LeftZero, &c, Vec::Zero(3)};
  PhasePoint p0{dg->exp_factor(0.4 * rng.gaussian_vec(3)),
                rng.gaussian_vec(3)};

  auto xi = lie_poisson_flow(dbl.algebra(), cs.target_chat(), h,
                             cs.momentum_at(p0), 0.3, 1e-3);
  auto traj = collective_trajectory(cs, p0, h, 0.3, 1e-3);
  REQUIRE(traj.times.size() == xi.times.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); k += 25) {
    PhasePoint pk{traj.bases[k], traj.states[k]};
    worst = std::max(worst, (cs.momentum_at(pk).xi - xi.states[k].head(6))
                                .cwiseAbs()
                                .maxCoeff());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("duality runs share one group curve between the two models") {
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  Rng rng(43);
  auto c = GroupCocycle::zero(*dg);
  Vec alpha = 0.4 * unit3(2);
  Mat E = random_sigma_operator(dbl, rng);
  auto h = CollectiveHamiltonian::quadratic(quadratic_from_operator(dbl, E));

  auto spA = PhaseSpace(*dg, BaseKind::Factor);
  auto spB = PhaseSpace(*dg, BaseKind::Dual);
  CollectiveSpace A{&spA, MomentumTag::LeftZero, &c, Vec::Zero(3)};
  CollectiveSpace B{&spB, MomentumTag::DualPhi, &c, alpha};

  PhasePoint p0A{dg->identity(), alpha};
  PhasePoint p0B{dg->identity(), Vec::Zero(3)};
  auto rep = duality_run(A, p0A, B, p0B, h, 0.25, 2.5e-3);
  CHECK(rep.residual_A < 1e-5);
  CHECK(rep.residual_B < 1e-5);
  CHECK(rep.momentum_drift < 1e-6);
  CHECK(rep.energy_drift < 1e-8);

  // A mismatched start is refused, and the message names both momenta.
  try {
    duality_run(A, p0A, B, {dg->identity(), Vec(0.1 * unit3(0))}, h, 0.1,
                1e-3);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    std::string msg = e.what();
    CHECK(msg.find("side A gives") != std::string::npos);
    CHECK(msg.find("side B gives") != std::string::npos);
  }
}

TEST_CASE("sigma blocks transform, invert, and reassemble") {
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  Rng rng(47);

  // The swap operator at the identity: unit metric block, no torsion block.
  Mat swap = sigma_swap(dbl);
  validate_sigma_operator(dbl, swap);
  SigmaBlocks ble = sigma_blocks(*dg, swap, dg->identity());
  CHECK((ble.G - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ble.B.cwiseAbs().maxCoeff() < 1e-12);
  SigmaBlocks bld = sigma_blocks_dual(*dg, swap, dg->identity());
  CHECK((bld.G - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(bld.B.cwiseAbs().maxCoeff() < 1e-12);

  for (int s = 0; s < 20; ++s) {
    Mat E = random_sigma_operator(dbl, rng);
    validate_sigma_operator(dbl, E);
    CMat g = dg->exp(0.5 * rng.gaussian_vec(6));
    SigmaBlocks bl = sigma_blocks(*dg, E, g);
    CHECK((bl.G - bl.G.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((bl.B + bl.B.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Mat Ginv = bl.G.inverse();
    Mat re(6, 6);
    re.topLeftCorner(3, 3) = -Ginv * bl.B;
    re.topRightCorner(3, 3) = Ginv;
    re.bottomLeftCorner(3, 3) = bl.G - bl.B * Ginv * bl.B;
    re.bottomRightCorner(3, 3) = bl.B * Ginv;
    CHECK((re - bl.Eg).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Ad acts trivially on the abelian double, so nothing is transported.
  auto ab = make_double_group("abelian_double");
  Mat Eab = random_sigma_operator(ab->double_algebra(), rng);
  CMat gab = ab->exp(rng.gaussian_vec(6));
  CHECK((sigma_blocks(*ab, Eab, gab).Eg - Eab).cwiseAbs().maxCoeff() < 1e-10);

  // The identity has no dual-to-factor block at all.
  CHECK_THROWS_AS(sigma_blocks(*dg, Mat(Mat::Identity(6, 6)),
                               dg->identity()),
                  FactorizationError);
}

TEST_CASE("chiral quadratic hamiltonians validate and differentiate") {
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  const Mat P = dbl.algebra().pairing();
  Rng rng(53);
  auto c = GroupCocycle::coboundary(*dg, rng.gaussian_vec(6));
  Mat L2 = 0.5 * Mat::Identity(6, 6) - 0.2 * P;
  Mat L3 = 1.3 * Mat::Identity(6, 6) + 0.4 * P;
  Vec alpha = 0.3 * unit3(2);

  Mat bad = L2;
  bad(0, 1) += 1e-6;
  CHECK_THROWS_AS(WznwHamiltonian(*dg, c, bad, L3, alpha,
                                  WznwVariant::Plain),
                  StructureError);
  CHECK_THROWS_AS(WznwHamiltonian(*dg, c, L2, Mat(Mat::Zero(6, 6)), alpha,
                                  WznwVariant::Plain),
                  StructureError);

  for (WznwVariant variant : {WznwVariant::Plain, WznwVariant::Shifted}) {
    WznwHamiltonian H(*dg, c, L2, L3, alpha, variant);
    CHECK(H.l3_condition() < 10.0);
    PhaseSpace sp = H.flow_space();
    const double fd = 1e-6;
    for (int s = 0; s < 6; ++s) {
      PhasePoint p{dg->exp(0.5 * rng.gaussian_vec(6)), rng.gaussian_vec(6)};
      Vec grad = H.gradient(p);
      for (int i = 0; i < 12; ++i) {
        Vec u = Vec::Zero(12);
        u(i) = 1.0;
        double num = (H.value(sp.step(p, u, fd)) -
                      H.value(sp.step(p, u, -fd))) /
                     (2.0 * fd);
        CHECK(grad(i) == doctest::Approx(num).epsilon(5e-6));
      }
    }

    // The decorated flow conserves the Hamiltonian.
    PhasePoint p0{dg->exp(0.4 * rng.gaussian_vec(6)),
                  0.7 * rng.gaussian_vec(6)};
    auto traj = direct_trajectory(sp, p0, H.observable(), 0.5, 2e-3);
    double h0 = H.value(p0);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k)
      worst = std::max(worst, std::abs(H.value({traj.bases[k],
                                                traj.states[k]}) - h0));
    CHECK(worst < 1e-7);
  }
}

TEST_CASE("the master identity links both quadratic routes") {
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  const Mat P = dbl.algebra().pairing();
  Rng rng(59);
  for (int s = 0; s < 20; ++s) {
    Mat E = random_sigma_operator(dbl, rng);
    CMat g = dg->exp(0.5 * rng.gaussian_vec(6));
    SigmaBlocks bl = sigma_blocks(*dg, E, g);
    Vec qdot = rng.gaussian_vec(3);
    Vec qp = rng.gaussian_vec(3);

    double lhs = 0.5 * (qdot - qp).dot((bl.G + bl.B) * (qdot + qp));
    CHECK(lhs ==
          doctest::Approx(master_lagrangian(bl.G, bl.B, qdot, qp))
              .epsilon(1e-12));

    Vec p = bl.G * qdot + bl.B * qp;
    Vec w = dbl.embed_dual(p) + dbl.embed_factor(qp);
    double rhs = p.dot(qdot) - 0.5 * w.dot(P * (bl.Eg * w));
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("lagrangian families close their legendre transformations") {
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  const Mat P = dbl.algebra().pairing();
  Rng rng(61);
  auto c = GroupCocycle::coboundary(
      *dg, dbl.psi(dbl.embed_dual(rng.gaussian_vec(3))));
  Vec alpha = 0.4 * unit3(2);
  Mat E = random_sigma_operator(dbl, rng);
  Mat L2 = 0.5 * Mat::Identity(6, 6) - 0.2 * P;
  Mat L3 = 1.3 * Mat::Identity(6, 6) + 0.4 * P;

  LagrangianParams prm;
  prm.dg = dg.get();
  prm.c = &c;
  prm.alpha3 = alpha;
  prm.E = E;
  prm.L2 = L2;
  prm.L3 = L3;

  auto sigma_energy = [&](const CMat& g, const Vec& fiber, const Vec& qp) {
    SigmaBlocks bl = sigma_blocks(*dg, E, g);
    Vec w = dbl.embed_dual(fiber) + dbl.embed_factor(qp);
    return 0.5 * w.dot(P * (bl.Eg * w));
  };
  auto dual_energy = [&](const CMat& ht, const Vec& fiber, const Vec& qp) {
    SigmaBlocks bl = sigma_blocks_dual(*dg, E, ht);
    Vec w = dbl.embed_factor(fiber) + dbl.embed_dual(qp);
    return 0.5 * w.dot(P * (bl.Eg * w));
  };

  for (int s = 0; s < 10; ++s) {
    // Factor-side family, with and without the linear twist.
    CMat g = dg->exp_factor(0.5 * rng.gaussian_vec(3));
    Vec v = rng.gaussian_vec(3);
    Vec qp = -dbl.part_factor(dbl.psi_inv(c.value(CMat(g.inverse()))));

    double L0 = lagrangian_eval(LagrangianFamily::Lsigma0, prm, g, v);
    Vec lam0 = legendre_fiber(LagrangianFamily::Lsigma0, prm, g, v);
    CHECK(std::abs(lam0.dot(v) - sigma_energy(g, lam0, qp) - L0) < 1e-10);

    double La = lagrangian_eval(LagrangianFamily::LsigmaAlpha, prm, g, v);
    Vec lama = legendre_fiber(LagrangianFamily::LsigmaAlpha, prm, g, v);
    CHECK(std::abs(lama.dot(v) - sigma_energy(g, Vec(lama + alpha), qp) -
                   La) < 1e-10);

    // Dual-side family.
    CMat ht = dg->exp_dual(0.5 * rng.gaussian_vec(3));
    Vec vt = rng.gaussian_vec(3);
    Vec qpt = alpha -
              dbl.part_dual(dbl.psi_inv(c.value(CMat(ht.inverse()))));
    double Lt = lagrangian_eval(LagrangianFamily::LtildeAlpha, prm, ht, vt);
    Vec X = legendre_fiber(LagrangianFamily::LtildeAlpha, prm, ht, vt);
    CHECK(std::abs(X.dot(vt) - dual_energy(ht, X, qpt) - Lt) < 1e-10);

    // Chiral families close against the quadratic chiral Hamiltonian.
    CMat l = dg->exp(0.5 * rng.gaussian_vec(6));
    Vec u = rng.gaussian_vec(6);
    Vec body = dg->Ad(CMat(l.inverse())) * u;
    {
      double Lc = lagrangian_eval(LagrangianFamily::Lc0, prm, l, u);
      Vec eta = legendre_fiber(LagrangianFamily::Lc0, prm, l, u);
      WznwHamiltonian H(*dg, c, L2, L3, alpha, WznwVariant::Plain);
      CHECK(std::abs(eta.dot(body) - H.value({l, eta}) - Lc) < 1e-10);
    }
    {
      double Lc = lagrangian_eval(LagrangianFamily::LcMinusAlpha, prm, l, u);
      Vec eta = legendre_fiber(LagrangianFamily::LcMinusAlpha, prm, l, u);
      WznwHamiltonian H(*dg, c, L2, L3, alpha, WznwVariant::Shifted);
      CHECK(std::abs(eta.dot(body) - H.value({l, eta}) - Lc) < 1e-10);
    }
  }

  // Zero velocity leaves the pure potential term.
  LagrangianParams prm0 = prm;
  prm0.alpha3 = Vec::Zero(3);
  CMat g = dg->exp_factor(0.6 * rng.gaussian_vec(3));
  SigmaBlocks bl = sigma_blocks(*dg, E, g);
  Vec cav = dbl.part_factor(dbl.psi_inv(c.value(CMat(g.inverse()))));
  double L = lagrangian_eval(LagrangianFamily::Lsigma0, prm0, g,
                             Vec(Vec::Zero(3)));
  CHECK(L == doctest::Approx(-0.5 * cav.dot(bl.G * cav)).epsilon(1e-10));
}

TEST_CASE("trajectories serialize to comma-separated tables") {
  Trajectory traj;
  traj.times = {0.0, 0.5};
  traj.states = {Vec(unit3(0).head(2)), Vec(unit3(1).head(2))};
  CMat m = CMat::Identity(2, 2);
  traj.bases = {m, m};
  std::ostringstream os;
  traj.to_csv(os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header ==
        "t,s0,s1,m00_re,m00_im,m01_re,m01_im,m10_re,m10_im,m11_re,m11_im");
  std::string row;
  int rows = 0;
  while (std::getline(is, row))
    if (!row.empty()) ++rows;
  CHECK(rows == 2);
  CHECK(os.str().find("0.5,0,1,1,0,0,0,0,0,1,0") != std::string::npos);
}
