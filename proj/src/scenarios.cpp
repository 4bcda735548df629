/**
 * @file scenarios.cpp
 * @brief Scenario engines, the scenario registry, artifact emission, and the
 *        module-level invariant check suites.
 */
#include "orbidual/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "orbidual/extension.hpp"
#include "orbidual/hamspaces.hpp"

namespace orbidual {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.14159265358979323846264338327950288;

/// Floor a detection-mode residual must exceed before an instability counts
/// as detected.
constexpr double kDetectionFloor = 1e-3;
/// Compatibility residual below which a decoration counts as torus-stable.
constexpr double kStableTol = 1e-10;
/// Floor the enlarged multiplier must move by for the pair to count as live.
constexpr double kLambdaFloor = 1e-6;

Vec unit3(int i) {
  Vec e = Vec::Zero(3);
  e(i) = 1.0;
  return e;
}

Vec unitn(int n, int i) {
  Vec e = Vec::Zero(n);
  e(i) = 1.0;
  return e;
}

/// Pull the nearest 2*pi-translate of `raw` to `prev` (angle unwrapping).
double unwrap_near(double raw, double prev) {
  while (raw - prev > kPi) raw -= kTwoPi;
  while (raw - prev < -kPi) raw += kTwoPi;
  return raw;
}

/// Energy quadratic whose gradient is the operator read through the pairing.
Mat quadratic_from_operator(const DoubleLieAlgebra& dbl, const Mat& E) {
  Mat Q = E * dbl.pairing_inverse();
  return 0.5 * (Q + Q.transpose());
}

/// Closed path exp(sin(s) * hat(w)) on the uniform grid.
LoopGroupPath sine_wave_path(const DoubleLieGroup& dg, const Vec& w, int P) {
  LoopGroupPath out;
  out.dg = &dg;
  const CMat W = dg.hat(w);
  out.samples.resize(P);
  for (int j = 0; j < P; ++j)
    out.samples[j] = CMat(std::sin(kTwoPi * j / P) * W).exp();
  out.monodromy = CMat::Identity(dg.matrix_size(), dg.matrix_size());
  return out;
}

/// Closed dual-group path swept by two fixed dual directions.
LoopGroupPath dual_wave_path(const DoubleLieGroup& dg, const Vec& a3,
                             const Vec& b3, int P) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  LoopGroupPath out;
  out.dg = &dg;
  out.samples.resize(P);
  for (int j = 0; j < P; ++j) {
    const double s = kTwoPi * j / P;
    const Vec z = std::sin(s) * a3 + std::cos(s) * b3;
    out.samples[j] = CMat(dg.hat(dbl.embed_dual(z))).exp();
  }
  out.monodromy = CMat::Identity(dg.matrix_size(), dg.matrix_size());
  return out;
}

// ── the adapted plane-motion group ──────────────────────────────────────────

/// Plane motions realized with translation directions scaled by `ratio`, so
/// the pair's conserved quadratic becomes a polynomial invariant.
class AdaptedPlaneGroup final : public LieGroup {
 public:
  explicit AdaptedPlaneGroup(double ratio)
      : LieGroup(plane_algebra(ratio), plane_basis(ratio)) {
    check_representation(1e-12);
  }

  bool contains(const CMat& g, double tol = 1e-9) const override {
    if (g.rows() != 3 || g.cols() != 3) return false;
    if (g.imag().cwiseAbs().maxCoeff() > tol) return false;
    Mat gr = g.real();
    if (std::abs(gr(2, 0)) > tol || std::abs(gr(2, 1)) > tol ||
        std::abs(gr(2, 2) - 1.0) > tol) {
      return false;
    }
    Mat R = gr.topLeftCorner(2, 2);
    return (R.transpose() * R - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <
               tol &&
           std::abs(R.determinant() - 1.0) < tol;
  }

  static LieAlgebra plane_algebra(double r) {
    return LieAlgebra(3, {"E1", "E2", "E3"},
                      {{2, 0, 1, 1.0 / r}, {2, 1, 0, -r}});
  }

 private:
  static std::vector<CMat> plane_basis(double r) {
    std::vector<CMat> B(3, CMat::Zero(3, 3));
    B[0](0, 2) = 1.0;   // first translation
    B[1](1, 2) = r;     // second translation, scaled
    B[2](0, 1) = -1.0;  // rotation
    B[2](1, 0) = 1.0;
    return B;
  }
};

/// Derived constants of the collective pair.
struct PlanePair {
  double c1 = 0.0, c2 = 0.0;  ///< invariant coefficients
  double r = 0.0;             ///< translation scaling ratio
  double q2 = 0.0, q3 = 0.0;  ///< reduced energy coefficients
  double k1 = 0.0, k2 = 0.0;  ///< cylinder chart scales
  double rho = 0.0;           ///< cylinder radius for the requested level
  double law = 0.0;           ///< coefficient of sin(2 theta) in the angle law
};

PlanePair plane_pair(const RigidPendulumParams& prm) {
  if (!(prm.I1 > 0.0 && prm.I1 < prm.I2 && prm.I2 < prm.I3))
    throw DomainError("inertias must satisfy 0 < I1 < I2 < I3");
  if (prm.dt <= 0.0 || prm.T <= 0.0)
    throw DomainError("the time grid needs T > 0 and dt > 0");
  if (prm.level <= 0.0)
    throw DomainError("the invariant level must be positive");
  PlanePair d;
  const double u = 1.0 / prm.I1, v = 1.0 / prm.I2, w = 1.0 / prm.I3;
  d.c1 = 0.5 * (u - w);
  d.c2 = 0.5 * (v - w);
  d.r = std::sqrt(d.c1 / d.c2);
  d.q2 = w * (u - v) / (u - w);
  d.q3 = w;
  d.k1 = std::sqrt(prm.I3 / d.r);
  d.k2 = d.r * d.k1;
  d.rho = std::sqrt(prm.level / (d.c1 * d.k1 * d.k1));
  d.law = 0.5 * d.q2 * d.q3 * d.k2 * d.k2 * d.rho * d.rho;
  return d;
}

}  // namespace

// ── rigid-body / pendulum pair ──────────────────────────────────────────────

LieAlgebra adapted_plane_algebra() {
  return AdaptedPlaneGroup::plane_algebra(plane_pair(RigidPendulumParams{}).r);
}

double plane_invariant(const RigidPendulumParams& prm, const Vec& beta) {
  const PlanePair d = plane_pair(prm);
  return d.c1 * beta(0) * beta(0) + d.c2 * beta(1) * beta(1);
}

Mat plane_energy_form(const RigidPendulumParams& prm) {
  const PlanePair d = plane_pair(prm);
  Mat Q = Mat::Zero(3, 3);
  Q(1, 1) = d.q2;
  Q(2, 2) = d.q3;
  return Q;
}

double pendulum_law_coefficient(const RigidPendulumParams& prm) {
  return plane_pair(prm).law;
}

RigidPendulumResult run_rigid_pendulum(const RigidPendulumParams& prm) {
  const PlanePair d = plane_pair(prm);
  AdaptedPlaneGroup G(d.r);
  const LieAlgebra& alg = G.algebra();
  const auto h = CollectiveHamiltonian::quadratic(plane_energy_form(prm));

  Vec beta0(3);
  beta0 << d.k1 * d.rho * std::cos(prm.theta0),
      d.k2 * d.rho * std::sin(prm.theta0), d.k1 * d.k2 * prm.p0;

  const Mat chat = Mat::Zero(3, 3);
  const Trajectory flow =
      lie_poisson_flow(alg, chat, h, {beta0, 1.0}, prm.T, prm.dt);
  const Trajectory curve = reconstruct_group_curve(G, alg, chat, h, flow);

  RigidPendulumResult res;
  res.times = flow.times;
  res.reprojections = curve.projections;
  const std::size_t n = flow.times.size();
  res.beta_direct.reserve(n);
  res.beta_shared.reserve(n);
  res.theta_shared.reserve(n);
  res.p_shared.reserve(n);

  const double h0 = h.value({beta0, 1.0});
  const double level0 = plane_invariant(prm, beta0);
  double prev_theta = prm.theta0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec bd = flow.states[k].head(3);
    const Vec bs = Mat(G.Ad(CMat(curve.bases[k].inverse())).transpose()) * beta0;
    res.beta_direct.push_back(bd);
    res.beta_shared.push_back(bs);

    const double raw =
        std::atan2(bs(1) / (d.k2 * d.rho), bs(0) / (d.k1 * d.rho));
    const double th = unwrap_near(raw, prev_theta);
    prev_theta = th;
    res.theta_shared.push_back(th);
    res.p_shared.push_back(bs(2) / (d.k1 * d.k2));

    res.rigid_residual =
        std::max(res.rigid_residual, (bs - bd).cwiseAbs().maxCoeff());
    res.invariant_drift = std::max(
        res.invariant_drift, std::abs(plane_invariant(prm, bd) - level0));
    res.energy_drift =
        std::max(res.energy_drift, std::abs(h.value({bd, 1.0}) - h0));
  }

  // The pendulum integrated on its own terms in the same chart.
  const double vscale = d.q3 * d.k1 * d.k2;
  const double force = d.q2 * d.k2 * d.rho * d.rho / (2.0 * d.k1);
  const auto pend_rhs = [&](double, const Vec& y) -> Vec {
    Vec dy(2);
    dy << vscale * y(1), -force * std::sin(2.0 * y(0));
    return dy;
  };
  Vec y(2);
  y << prm.theta0, prm.p0;
  res.theta_direct.reserve(n);
  res.p_direct.reserve(n);
  res.theta_direct.push_back(y(0));
  res.p_direct.push_back(y(1));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    y = rk4_step(pend_rhs, flow.times[k], y, flow.times[k + 1] - flow.times[k]);
    res.theta_direct.push_back(y(0));
    res.p_direct.push_back(y(1));
  }

  for (std::size_t k = 0; k < n; ++k) {
    const double dth = std::abs(res.theta_shared[k] - res.theta_direct[k]);
    const double dp = std::abs(res.p_shared[k] - res.p_direct[k]);
    res.pendulum_residual = std::max(res.pendulum_residual, std::max(dth, dp));
  }

  // Second-difference check of the angle law on the uniform interior.
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double dt1 = res.times[k] - res.times[k - 1];
    const double dt2 = res.times[k + 1] - res.times[k];
    if (std::abs(dt1 - dt2) > 1e-12) continue;  // trailing partial step
    const double acc = (res.theta_shared[k + 1] - 2.0 * res.theta_shared[k] +
                        res.theta_shared[k - 1]) /
                       (dt1 * dt1);
    res.fd_residual = std::max(
        res.fd_residual,
        std::abs(acc + d.law * std::sin(2.0 * res.theta_shared[k])));
  }
  return res;
}

// ── duality on the compact/triangular double ────────────────────────────────

SuDualityResult run_su2_duality(const SuDualityParams& prm,
                                std::uint64_t seed) {
  if (prm.dt <= 0.0 || prm.T <= 0.0)
    throw DomainError("the time grid needs T > 0 and dt > 0");
  if (prm.poisson_samples < 1)
    throw DomainError("poisson_samples must be at least 1");
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  const Vec alpha = prm.alpha.size() == 0 ? Vec(0.4 * unit3(2)) : prm.alpha;
  if (alpha.size() != 3)
    throw DomainError("alpha must carry 3 dual coordinates");

  Mat E;
  if (prm.operator_kind == "swap") {
    E = sigma_swap(dbl);
  } else if (prm.operator_kind == "random") {
    Rng orng(prm.operator_seed);
    E = random_sigma_operator(dbl, orng);
  } else {
    throw DomainError("unknown operator kind \"" + prm.operator_kind +
                      "\"; use \"swap\" or \"random\"");
  }

  const GroupCocycle c = GroupCocycle::zero(*dg);
  SuDualityResult out;
  out.condition_residual = alpha_compatibility_residual(dbl, alpha);

  Rng rng(seed);
  PhaseSpace spB(*dg, BaseKind::Dual);
  double worst = 0.0;
  for (int s = 0; s < prm.poisson_samples; ++s) {
    PhasePoint pd{dg->exp_dual(Vec(0.5 * rng.gaussian_vec(3))),
                  rng.gaussian_vec(3)};
    worst = std::max(worst, poisson_map_residual(MomentumTag::DualPhi, spB, c,
                                                 alpha, pd));
  }
  out.poisson_residual = worst;

  if (out.condition_residual > kStableTol) {
    out.detection_mode = true;
    try {
      bhat_act(*dg, c, alpha, dg->exp(Vec(0.3 * rng.gaussian_vec(6))),
               {dg->identity(), Vec::Zero(3)});
      out.action_refused = false;
    } catch (const DomainError&) {
      out.action_refused = true;
    }
    return out;
  }

  PhaseSpace spA(*dg, BaseKind::Factor);
  const CollectiveSpace A{&spA, MomentumTag::LeftZero, &c, Vec::Zero(3)};
  const CollectiveSpace B{&spB, MomentumTag::DualPhi, &c, alpha};
  const PhasePoint p0A{dg->identity(), alpha};
  const PhasePoint p0B{dg->identity(), Vec::Zero(3)};
  const auto h =
      CollectiveHamiltonian::quadratic(quadratic_from_operator(dbl, E));

  out.report = duality_run(A, p0A, B, p0B, h, prm.T, prm.dt);
  out.side_a = collective_trajectory(A, p0A, h, prm.T, prm.dt);
  out.side_b = collective_trajectory(B, p0B, h, prm.T, prm.dt);
  out.side_a_direct =
      direct_trajectory(spA, p0A, collective_observable(A, h), prm.T, prm.dt);
  out.side_b_direct =
      direct_trajectory(spB, p0B, collective_observable(B, h), prm.T, prm.dt);
  return out;
}

// ── monodromic string ───────────────────────────────────────────────────────

StringResult run_monodromic_string(const StringParams& prm,
                                   std::uint64_t seed) {
  if (prm.P < 8 || prm.P % 2 != 0)
    throw DomainError("the sample count P must be even and at least 8");
  if (prm.n_max < 1) throw DomainError("n_max must be at least 1");
  if (prm.dt <= 0.0 || prm.T <= 0.0 || prm.enlarged_dt <= 0.0 ||
      prm.enlarged_T <= 0.0)
    throw DomainError("the time grids need positive T and dt");

  std::shared_ptr<const DoubleLieGroup> dg =
      make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  Rng rng(seed);
  StringResult out;
  out.group = dg;
  out.alpha = prm.alpha_mag * unit3(2);

  // Period map of the constant decoration against its exponential.
  const LoopGroupPath hpath =
      monodromy_path(*dg, FourierLoop::constant(out.alpha), prm.P);
  const CMat target =
      CMat(kTwoPi * dg->hat(dbl.embed_dual(out.alpha))).exp();
  out.constant_monodromy_error =
      (hpath.monodromy - target).cwiseAbs().maxCoeff();

  // Decorated chiral flow from a seeded factor wave.
  const Vec wf = dbl.embed_factor(Vec(prm.wave_mag * rng.gaussian_vec(3)));
  const LoopGroupPath l0 = sine_wave_path(*dg, wf, prm.P);
  const Mat E = sigma_swap(dbl);
  out.flow = wznw_flow(*dg, E, l0, out.alpha, prm.T, prm.dt, prm.n_max,
                       prm.mode);
  out.max_tail_energy = out.flow.max_tail_energy;
  out.aliasing_events = out.flow.aliasing_events;

  // Energy along every record; period-map spectra along a coarse subset.
  const Mat& P_alg = dbl.algebra().pairing();
  const auto momentum_samples = [&](const LoopGroupPath& path) {
    return chiral_momentum_samples(path, out.alpha);
  };
  const auto energy_of = [&](const std::vector<Vec>& X) {
    double e = 0.0;
    for (const Vec& x : X) e += x.dot(P_alg * (E * x));
    return e / (2.0 * static_cast<double>(X.size()));
  };
  double e0 = 0.0;
  for (std::size_t k = 0; k < out.flow.paths.size(); ++k) {
    const double ek = energy_of(momentum_samples(out.flow.paths[k]));
    if (k == 0)
      e0 = ek;
    else
      out.chiral_energy_drift =
          std::max(out.chiral_energy_drift, std::abs(ek - e0));
  }

  const std::size_t last = out.flow.paths.size() - 1;
  std::vector<std::size_t> picks = {0, last / 4, last / 2, (3 * last) / 4,
                                    last};
  picks.erase(std::unique(picks.begin(), picks.end()), picks.end());
  CVec ev0;
  for (std::size_t idx : picks) {
    const std::vector<Vec> X = momentum_samples(out.flow.paths[idx]);
    const CVec ev =
        sorted_eigenvalues(coefficient_monodromy(*dg, X, prm.P / 2 - 1, 2));
    out.spectrum_times.push_back(out.flow.times[idx]);
    out.spectra.push_back(ev);
    if (idx == 0)
      ev0 = ev;
    else
      out.chiral_spectrum_drift =
          std::max(out.chiral_spectrum_drift, spectrum_drift(ev, ev0));
  }

  // Enlarged system with the multiplier pair.
  EnlargedState s0;
  s0.gtilde = dual_wave_path(*dg, Vec(0.3 * rng.gaussian_vec(3)),
                             Vec(0.2 * rng.gaussian_vec(3)), prm.P);
  s0.Z.resize(prm.P);
  for (int j = 0; j < prm.P; ++j)
    s0.Z[j] = 0.2 * std::cos(kTwoPi * j / prm.P) * unit3(0) + 0.15 * unit3(1);
  s0.alpha3 = out.alpha;
  s0.lambda3 = Vec::Zero(3);
  const std::vector<Vec> dirs = {unit3(2)};

  out.enlarged = enlarged_flow(*dg, E, prm.k, s0, dirs, prm.enlarged_T,
                               prm.enlarged_dt, prm.n_max, prm.mode);
  for (const EnlargedState& st : out.enlarged.states)
    out.enlarged_alpha_drift = std::max(
        out.enlarged_alpha_drift,
        (st.alpha3 - s0.alpha3).cwiseAbs().maxCoeff());
  out.enlarged_lambda_change =
      (out.enlarged.states.back().lambda3 - s0.lambda3).cwiseAbs().maxCoeff();
  const CVec mev0 = out.enlarged.momentum_eigenvalues.front();
  for (const CVec& ev : out.enlarged.momentum_eigenvalues)
    out.enlarged_spectrum_drift =
        std::max(out.enlarged_spectrum_drift, spectrum_drift(ev, mev0));
  return out;
}

// ── registry ────────────────────────────────────────────────────────────────

ScenarioBook::ScenarioBook() {
  entries_ = {
      {"rigidbody-pendulum",
       "planar rigid-body flow against the pendulum read off the shared "
       "group curve",
       "rigidbody-pendulum"},
      {"lu-weinstein-su2",
       "two-model duality on the compact/triangular double; unstable "
       "decorations switch the run into detection mode",
       "lu-weinstein-su2"},
      {"monodromic-string",
       "decorated chiral field at collocation resolution with period-map "
       "tracking and the enlarged multiplier pair",
       "monodromic-string"},
  };
}

void ScenarioBook::register_preset(const std::string& name,
                                   const std::string& base,
                                   const nlohmann::json& params,
                                   const std::string& description) {
  if (has(name))
    throw DomainError("scenario name \"" + name + "\" is already registered");
  const bool builtin =
      std::any_of(entries_.begin(), entries_.end(), [&](const ScenarioInfo& e) {
        return e.name == base && e.base == e.name;
      });
  if (!builtin)
    throw DomainError("preset base \"" + base +
                      "\" is not a built-in scenario");
  if (!params.is_null() && !params.is_object())
    throw DomainError("preset parameters must be a JSON object");
  entries_.push_back(
      {name, description.empty() ? ("preset on " + base) : description, base});
  if (params.is_object() && !params.empty()) preset_params_[name] = params;
}

void ScenarioBook::register_from(const nlohmann::json& plugin) {
  if (!plugin.is_object() || !plugin.contains("scenarios"))
    throw DomainError("a plugin description needs a \"scenarios\" array");
  const nlohmann::json& arr = plugin.at("scenarios");
  if (!arr.is_array())
    throw DomainError("\"scenarios\" must be an array of entries");
  for (const nlohmann::json& item : arr) {
    if (!item.is_object() || !item.contains("name") || !item.contains("base"))
      throw DomainError(
          "each plugin scenario needs \"name\" and \"base\" fields");
    register_preset(item.at("name").get<std::string>(),
                    item.at("base").get<std::string>(),
                    item.value("params", nlohmann::json::object()),
                    item.value("description", std::string()));
  }
}

std::vector<ScenarioInfo> ScenarioBook::list() const { return entries_; }

bool ScenarioBook::has(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const ScenarioInfo& e) { return e.name == name; });
}

std::pair<std::string, nlohmann::json> ScenarioBook::resolve(
    const std::string& name, const nlohmann::json& user_params) const {
  const auto it =
      std::find_if(entries_.begin(), entries_.end(),
                   [&](const ScenarioInfo& e) { return e.name == name; });
  if (it == entries_.end()) {
    std::string names;
    for (const ScenarioInfo& e : entries_)
      names += (names.empty() ? "" : ", ") + e.name;
    throw DomainError("unknown scenario \"" + name + "\"; registered: " +
                      names);
  }
  nlohmann::json merged = nlohmann::json::object();
  const auto pit = preset_params_.find(name);
  if (pit != preset_params_.end()) merged = pit->second;
  if (user_params.is_object())
    merged.update(user_params);
  else if (!user_params.is_null())
    throw DomainError("scenario parameters must be a JSON object");
  return {it->base, merged};
}

// ── scenario runner ─────────────────────────────────────────────────────────

namespace {

double num_or(const nlohmann::json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  const nlohmann::json& v = p.at(key);
  if (!v.is_number())
    throw DomainError(std::string("parameter \"") + key +
                      "\" must be numeric");
  return v.get<double>();
}

int int_or(const nlohmann::json& p, const char* key, int fallback) {
  if (!p.contains(key)) return fallback;
  const nlohmann::json& v = p.at(key);
  if (!v.is_number_integer())
    throw DomainError(std::string("parameter \"") + key +
                      "\" must be an integer");
  return v.get<int>();
}

bool bool_or(const nlohmann::json& p, const char* key, bool fallback) {
  if (!p.contains(key)) return fallback;
  const nlohmann::json& v = p.at(key);
  if (!v.is_boolean())
    throw DomainError(std::string("parameter \"") + key +
                      "\" must be a boolean");
  return v.get<bool>();
}

std::string str_or(const nlohmann::json& p, const char* key,
                   const std::string& fallback) {
  if (!p.contains(key)) return fallback;
  const nlohmann::json& v = p.at(key);
  if (!v.is_string())
    throw DomainError(std::string("parameter \"") + key +
                      "\" must be a string");
  return v.get<std::string>();
}

Vec vec3_or(const nlohmann::json& p, const char* key, const Vec& fallback) {
  if (!p.contains(key)) return fallback;
  const nlohmann::json& v = p.at(key);
  if (!v.is_array() || v.size() != 3)
    throw DomainError(std::string("parameter \"") + key +
                      "\" must be an array of 3 numbers");
  Vec out(3);
  for (int i = 0; i < 3; ++i) {
    if (!v.at(i).is_number())
      throw DomainError(std::string("parameter \"") + key +
                        "\" must be an array of 3 numbers");
    out(i) = v.at(i).get<double>();
  }
  return out;
}

void check_keys(const nlohmann::json& p,
                std::initializer_list<const char*> allowed,
                const std::string& scenario) {
  for (auto it = p.begin(); it != p.end(); ++it) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return it.key() == k; });
    if (!known) {
      std::string keys;
      for (const char* k : allowed) keys += std::string(keys.empty() ? "" : ", ") + k;
      throw DomainError("unknown parameter \"" + it.key() +
                        "\" for scenario " + scenario + "; allowed: " + keys);
    }
  }
}

void apply_tolerance_overrides(const nlohmann::json& p,
                               std::map<std::string, double>& tol,
                               const std::string& scenario) {
  if (!p.contains("tolerances")) return;
  const nlohmann::json& t = p.at("tolerances");
  if (!t.is_object())
    throw DomainError("\"tolerances\" must be an object of positive numbers");
  for (auto it = t.begin(); it != t.end(); ++it) {
    const auto found = tol.find(it.key());
    if (found == tol.end())
      throw DomainError("unknown tolerance \"" + it.key() + "\" for scenario " +
                        scenario);
    if (!it.value().is_number() || it.value().get<double>() <= 0.0)
      throw DomainError("tolerance \"" + it.key() +
                        "\" must be a positive number");
    found->second = it.value().get<double>();
  }
}

void write_artifact(const std::string& dir, const std::string& fname,
                    const std::string& content,
                    std::vector<std::string>& names) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream os(fs::path(dir) / fname, std::ios::binary);
  if (!os)
    throw DomainError("cannot open artifact file " + fname + " under " + dir);
  os << content;
  names.push_back(fname);
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  traj.to_csv(os);
  return os.str();
}

RigidPendulumParams rigid_params(const nlohmann::json& p,
                                 const std::string& scenario) {
  check_keys(p, {"I1", "I2", "I3", "theta0", "p0", "level", "T", "dt",
                 "tolerances"},
             scenario);
  RigidPendulumParams prm;
  prm.I1 = num_or(p, "I1", prm.I1);
  prm.I2 = num_or(p, "I2", prm.I2);
  prm.I3 = num_or(p, "I3", prm.I3);
  prm.theta0 = num_or(p, "theta0", prm.theta0);
  prm.p0 = num_or(p, "p0", prm.p0);
  prm.level = num_or(p, "level", prm.level);
  prm.T = num_or(p, "T", prm.T);
  prm.dt = num_or(p, "dt", prm.dt);
  return prm;
}

void rigid_scenario(const nlohmann::json& p, const std::string& outdir,
                    ScenarioRunResult& res) {
  const RigidPendulumParams prm = rigid_params(p, res.scenario);
  const RigidPendulumResult r = run_rigid_pendulum(prm);

  res.metrics["angle_law_fd_residual"] = r.fd_residual;
  res.metrics["pendulum_shared_vs_direct"] = r.pendulum_residual;
  res.metrics["momentum_transport_vs_flow"] = r.rigid_residual;
  res.metrics["orbit_invariant_drift"] = r.invariant_drift;
  res.metrics["energy_drift"] = r.energy_drift;
  res.metrics["reprojections"] = static_cast<double>(r.reprojections);
  res.tolerances = {{"angle_law_fd_residual", 1e-4},
                    {"pendulum_shared_vs_direct", 1e-6},
                    {"momentum_transport_vs_flow", 1e-6},
                    {"orbit_invariant_drift", 1e-8},
                    {"energy_drift", 1e-7}};
  apply_tolerance_overrides(p, res.tolerances, res.scenario);

  if (outdir.empty()) return;
  std::ostringstream rb;
  rb << std::setprecision(17);
  rb << "t,b1,b2,b3,b1_transport,b2_transport,b3_transport,invariant\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    rb << r.times[k];
    for (int i = 0; i < 3; ++i) rb << "," << r.beta_direct[k](i);
    for (int i = 0; i < 3; ++i) rb << "," << r.beta_shared[k](i);
    rb << "," << plane_invariant(prm, r.beta_direct[k]) << "\n";
  }
  write_artifact(outdir, "rigid_body.csv", rb.str(), res.artifacts);

  const auto pend_csv = [&](const std::vector<double>& th,
                            const std::vector<double>& pp) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "t,theta,p\n";
    for (std::size_t k = 0; k < r.times.size(); ++k)
      os << r.times[k] << "," << th[k] << "," << pp[k] << "\n";
    return os.str();
  };
  write_artifact(outdir, "pendulum_shared.csv",
                 pend_csv(r.theta_shared, r.p_shared), res.artifacts);
  write_artifact(outdir, "pendulum_direct.csv",
                 pend_csv(r.theta_direct, r.p_direct), res.artifacts);
}

SuDualityParams duality_params(const nlohmann::json& p,
                               const std::string& scenario) {
  check_keys(p, {"alpha", "operator", "operator_seed", "T", "dt",
                 "poisson_samples", "tolerances"},
             scenario);
  SuDualityParams prm;
  prm.alpha = vec3_or(p, "alpha", Vec(0.4 * unit3(2)));
  prm.operator_kind = str_or(p, "operator", prm.operator_kind);
  prm.operator_seed = static_cast<std::uint64_t>(
      int_or(p, "operator_seed", static_cast<int>(prm.operator_seed)));
  prm.T = num_or(p, "T", prm.T);
  prm.dt = num_or(p, "dt", prm.dt);
  prm.poisson_samples = int_or(p, "poisson_samples", prm.poisson_samples);
  return prm;
}

void duality_scenario(const nlohmann::json& p, const std::string& outdir,
                      std::uint64_t seed, ScenarioRunResult& res) {
  const SuDualityParams prm = duality_params(p, res.scenario);
  const SuDualityResult r = run_su2_duality(prm, seed);

  if (r.detection_mode) {
    res.metrics["condition_residual"] = r.condition_residual;
    res.metrics["poisson_residual"] = r.poisson_residual;
    res.metrics["condition_floor_gap"] =
        std::max(0.0, kDetectionFloor - r.condition_residual);
    res.metrics["poisson_floor_gap"] =
        std::max(0.0, kDetectionFloor - r.poisson_residual);
    res.metrics["action_refusal_gap"] = r.action_refused ? 0.0 : 1.0;
    res.tolerances = {{"condition_floor_gap", 0.0},
                      {"poisson_floor_gap", 0.0},
                      {"action_refusal_gap", 0.0}};
    apply_tolerance_overrides(p, res.tolerances, res.scenario);
    if (!outdir.empty()) {
      std::ostringstream os;
      os << std::setprecision(17);
      os << "metric,value\n";
      os << "condition_residual," << r.condition_residual << "\n";
      os << "poisson_residual," << r.poisson_residual << "\n";
      os << "action_refused," << (r.action_refused ? 1 : 0) << "\n";
      write_artifact(outdir, "detection.csv", os.str(), res.artifacts);
    }
    return;
  }

  res.metrics["residual_A"] = r.report.residual_A;
  res.metrics["residual_B"] = r.report.residual_B;
  res.metrics["momentum_drift"] = r.report.momentum_drift;
  res.metrics["energy_drift"] = r.report.energy_drift;
  res.metrics["poisson_residual"] = r.poisson_residual;
  res.metrics["condition_residual"] = r.condition_residual;
  res.tolerances = {{"residual_A", 1e-5},      {"residual_B", 1e-5},
                    {"momentum_drift", 1e-6},  {"energy_drift", 1e-8},
                    {"poisson_residual", 1e-8}, {"condition_residual", 1e-12}};
  apply_tolerance_overrides(p, res.tolerances, res.scenario);

  if (outdir.empty()) return;
  write_artifact(outdir, "side_a_collective.csv", trajectory_csv(r.side_a),
                 res.artifacts);
  write_artifact(outdir, "side_a_direct.csv", trajectory_csv(r.side_a_direct),
                 res.artifacts);
  write_artifact(outdir, "side_b_collective.csv", trajectory_csv(r.side_b),
                 res.artifacts);
  write_artifact(outdir, "side_b_direct.csv", trajectory_csv(r.side_b_direct),
                 res.artifacts);
}

StringParams string_params(const nlohmann::json& p,
                           const std::string& scenario) {
  check_keys(p, {"alpha_mag", "wave_mag", "P", "n_max", "T", "dt", "k",
                 "enlarged_T", "enlarged_dt", "parallel", "tolerances"},
             scenario);
  StringParams prm;
  prm.alpha_mag = num_or(p, "alpha_mag", prm.alpha_mag);
  prm.wave_mag = num_or(p, "wave_mag", prm.wave_mag);
  prm.P = int_or(p, "P", prm.P);
  prm.n_max = int_or(p, "n_max", prm.n_max);
  prm.T = num_or(p, "T", prm.T);
  prm.dt = num_or(p, "dt", prm.dt);
  prm.k = num_or(p, "k", prm.k);
  prm.enlarged_T = num_or(p, "enlarged_T", prm.enlarged_T);
  prm.enlarged_dt = num_or(p, "enlarged_dt", prm.enlarged_dt);
  prm.mode = bool_or(p, "parallel", true) ? ExecMode::Parallel
                                          : ExecMode::Serial;
  return prm;
}

void string_scenario(const nlohmann::json& p, const std::string& outdir,
                     std::uint64_t seed, ScenarioRunResult& res) {
  const StringParams prm = string_params(p, res.scenario);
  const StringResult r = run_monodromic_string(prm, seed);

  res.metrics["constant_monodromy_error"] = r.constant_monodromy_error;
  res.metrics["chiral_spectrum_drift"] = r.chiral_spectrum_drift;
  res.metrics["chiral_energy_drift"] = r.chiral_energy_drift;
  res.metrics["max_tail_energy"] = r.max_tail_energy;
  res.metrics["aliasing_events"] = static_cast<double>(r.aliasing_events);
  res.metrics["enlarged_alpha_drift"] = r.enlarged_alpha_drift;
  res.metrics["enlarged_lambda_floor_gap"] =
      std::max(0.0, kLambdaFloor - r.enlarged_lambda_change);
  res.metrics["enlarged_spectrum_drift"] = r.enlarged_spectrum_drift;
  res.tolerances = {{"constant_monodromy_error", 1e-8},
                    {"chiral_spectrum_drift", 1e-5},
                    {"chiral_energy_drift", 1e-7},
                    {"max_tail_energy", 1e-6},
                    {"enlarged_alpha_drift", 0.0},
                    {"enlarged_lambda_floor_gap", 0.0},
                    {"enlarged_spectrum_drift", 1e-5}};
  apply_tolerance_overrides(p, res.tolerances, res.scenario);

  if (outdir.empty()) return;
  {
    std::ostringstream os;
    os << std::setprecision(17);
    const int m = static_cast<int>(r.spectra.front().size());
    os << "t";
    for (int i = 0; i < m; ++i) os << ",ev" << i << "_re,ev" << i << "_im";
    os << "\n";
    for (std::size_t k = 0; k < r.spectrum_times.size(); ++k) {
      os << r.spectrum_times[k];
      for (int i = 0; i < m; ++i)
        os << "," << r.spectra[k](i).real() << "," << r.spectra[k](i).imag();
      os << "\n";
    }
    write_artifact(outdir, "chiral_spectrum.csv", os.str(), res.artifacts);
  }
  const auto momentum_csv = [&](const LoopGroupPath& path) {
    const FourierLoop loop = FourierLoop::from_samples(
        chiral_momentum_samples(path, r.alpha), path.P() / 2 - 1);
    std::ostringstream os;
    os << std::setprecision(17);
    loop_to_csv(loop, os);
    return os.str();
  };
  write_artifact(outdir, "momentum_initial.csv",
                 momentum_csv(r.flow.paths.front()), res.artifacts);
  write_artifact(outdir, "momentum_final.csv",
                 momentum_csv(r.flow.paths.back()), res.artifacts);
  {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "t,lambda1,lambda2,lambda3,alpha1,alpha2,alpha3\n";
    for (std::size_t k = 0; k < r.enlarged.times.size(); ++k) {
      os << r.enlarged.times[k];
      for (int i = 0; i < 3; ++i) os << "," << r.enlarged.states[k].lambda3(i);
      for (int i = 0; i < 3; ++i) os << "," << r.enlarged.states[k].alpha3(i);
      os << "\n";
    }
    write_artifact(outdir, "multiplier.csv", os.str(), res.artifacts);
  }
}

}  // namespace

ScenarioRunResult run_scenario(const ScenarioBook& book,
                               const std::string& name,
                               const nlohmann::json& params,
                               const std::string& output_dir,
                               std::uint64_t seed) {
  const auto resolved = book.resolve(name, params);
  const std::string& base = resolved.first;
  const nlohmann::json& p = resolved.second;

  ScenarioRunResult res;
  res.scenario = name;
  if (base == "rigidbody-pendulum") {
    rigid_scenario(p, output_dir, res);
  } else if (base == "lu-weinstein-su2") {
    duality_scenario(p, output_dir, seed, res);
  } else if (base == "monodromic-string") {
    string_scenario(p, output_dir, seed, res);
  } else {
    throw DomainError("scenario base \"" + base + "\" has no engine");
  }

  res.pass = true;
  for (const auto& gate : res.tolerances) {
    const auto it = res.metrics.find(gate.first);
    if (it == res.metrics.end() || !(it->second <= gate.second))
      res.pass = false;
  }
  return res;
}

nlohmann::json duality_report(const ScenarioBook& book,
                              const std::string& name,
                              const nlohmann::json& params,
                              std::uint64_t seed) {
  const auto resolved = book.resolve(name, params);
  const std::string& base = resolved.first;
  const nlohmann::json& p = resolved.second;

  nlohmann::json rep;
  rep["scenario"] = name;
  if (base == "lu-weinstein-su2") {
    const SuDualityParams prm = duality_params(p, name);
    const SuDualityResult r = run_su2_duality(prm, seed);
    if (r.detection_mode)
      throw PreconditionError(
          "the decoration is unstable (compatibility residual " +
          std::to_string(r.condition_residual) +
          "), so no two-model run exists; use a torus direction");
    rep["T"] = r.report.T;
    rep["dt"] = r.report.dt;
    rep["residual_A"] = r.report.residual_A;
    rep["residual_B"] = r.report.residual_B;
    rep["momentum_drift"] = r.report.momentum_drift;
    rep["energy_drift"] = r.report.energy_drift;
  } else if (base == "rigidbody-pendulum") {
    const RigidPendulumParams prm = rigid_params(p, name);
    const RigidPendulumResult r = run_rigid_pendulum(prm);
    rep["T"] = prm.T;
    rep["dt"] = prm.dt;
    rep["residual_A"] = r.rigid_residual;
    rep["residual_B"] = r.pendulum_residual;
    rep["momentum_drift"] = r.rigid_residual;
    rep["energy_drift"] = r.energy_drift;
  } else {
    throw DomainError("scenario \"" + name +
                      "\" is not a two-model scenario");
  }
  return rep;
}

// ── invariant check suites ──────────────────────────────────────────────────

namespace {

void add_row(std::vector<CheckRow>& rows, const std::string& suite,
             const std::string& check, double residual, double tol,
             std::string note = "") {
  rows.push_back(
      {suite, check, residual, tol, residual <= tol, std::move(note)});
}

double antisym_residual(const LieAlgebra& a) {
  double worst = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) {
      const Vec e_i = unitn(a.dim(), i), e_j = unitn(a.dim(), j);
      worst = std::max(worst, (a.bracket(e_i, e_j) + a.bracket(e_j, e_i))
                                  .cwiseAbs()
                                  .maxCoeff());
    }
  return worst;
}

double jacobi_residual(const LieAlgebra& a) {
  double worst = 0.0;
  const int n = a.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const Vec ei = unitn(n, i), ej = unitn(n, j), ek = unitn(n, k);
        const Vec r = a.bracket(ei, a.bracket(ej, ek)) +
                      a.bracket(ej, a.bracket(ek, ei)) +
                      a.bracket(ek, a.bracket(ei, ej));
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
  return worst;
}

void suite_liecore(std::vector<CheckRow>& rows, bool corrupt) {
  const std::string s = "liecore";
  double worst_anti = 0.0, worst_jac = 0.0;
  for (const std::string& name : algebra_names()) {
    const LieAlgebra a = make_algebra(name);
    worst_anti = std::max(worst_anti, antisym_residual(a));
    worst_jac = std::max(worst_jac, jacobi_residual(a));
  }
  std::string note;
  if (corrupt) {
    // Injected defect: an extra bracket entry that breaks the closure of the
    // triangular table. The validator has to trip on it.
    const LieAlgebra bad(3, {"N1", "N2", "N3"},
                         {{2, 0, 0, -2.0}, {2, 1, 1, -2.0}, {0, 1, 2, 0.01}});
    worst_jac = std::max(worst_jac, jacobi_residual(bad));
    try {
      bad.validate(1e-12);
      note = "corrupted table slipped through the validator";
    } catch (const StructureError& e) {
      note = std::string("validator tripped: ") + e.what();
    }
  }
  add_row(rows, s, "bracket antisymmetry (builtin tables)", worst_anti, 1e-12);
  add_row(rows, s, "Jacobi identity (builtin tables)", worst_jac, 1e-12, note);

  const DoubleLieAlgebra dbl = make_double("lu_weinstein_su2");
  const LieAlgebra& h = dbl.algebra();
  const int n = h.dim();
  double worst_inv = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        const Vec ea = unitn(n, a), eb = unitn(n, b), ec = unitn(n, c);
        worst_inv = std::max(worst_inv,
                             std::abs(h.pair(h.bracket(ea, eb), ec) +
                                      h.pair(eb, h.bracket(ea, ec))));
      }
  add_row(rows, s, "pairing invariance on the double", worst_inv, 1e-12);

  double worst_iso = 0.0;
  for (int a = 0; a < dbl.half_dim(); ++a)
    for (int b = 0; b < dbl.half_dim(); ++b) {
      worst_iso = std::max(
          worst_iso, std::abs(h.pair(dbl.embed_factor(unit3(a)),
                                     dbl.embed_factor(unit3(b)))));
      worst_iso = std::max(
          worst_iso, std::abs(h.pair(dbl.embed_dual(unit3(a)),
                                     dbl.embed_dual(unit3(b)))));
    }
  add_row(rows, s, "isotropy of both halves", worst_iso, 1e-12);
}

void suite_groups(std::vector<CheckRow>& rows) {
  const std::string s = "groups";
  auto dg = make_double_group("lu_weinstein_su2");
  Rng rng(1001);

  double worst_hv = 0.0, worst_el = 0.0, worst_ad = 0.0;
  double worst_fac = 0.0, worst_mem = 0.0, worst_dress = 0.0;
  for (int t = 0; t < 12; ++t) {
    const Vec x = rng.gaussian_vec(6);
    worst_hv = std::max(worst_hv,
                        (dg->vee(dg->hat(x)) - x).cwiseAbs().maxCoeff());
    const Vec y = 0.4 * rng.gaussian_vec(6);
    worst_el = std::max(
        worst_el, (dg->log_coords(dg->exp(y)) - y).cwiseAbs().maxCoeff());

    const CMat g = dg->exp(Vec(0.4 * rng.gaussian_vec(6)));
    const CMat k = dg->exp(Vec(0.4 * rng.gaussian_vec(6)));
    worst_ad = std::max(worst_ad, (dg->Ad(CMat(g * k)) - dg->Ad(g) * dg->Ad(k))
                                      .cwiseAbs()
                                      .maxCoeff());

    const CMat m = dg->exp(Vec(0.5 * rng.gaussian_vec(6)));
    for (const auto order : {DoubleLieGroup::Order::FactorFirst,
                             DoubleLieGroup::Order::DualFirst}) {
      const auto f = dg->factorize(m, order);
      const CMat prod = order == DoubleLieGroup::Order::FactorFirst
                            ? CMat(f.factor * f.dual)
                            : CMat(f.dual * f.factor);
      worst_fac = std::max(worst_fac, (m - prod).cwiseAbs().maxCoeff());
      worst_mem = std::max(
          worst_mem, (dg->in_factor(f.factor, 1e-8) ? 0.0 : 1.0) +
                         (dg->in_dual(f.dual, 1e-8) ? 0.0 : 1.0));
    }

    const CMat h1 = dg->exp_dual(Vec(0.4 * rng.gaussian_vec(3)));
    const CMat h2 = dg->exp_dual(Vec(0.4 * rng.gaussian_vec(3)));
    const CMat gf = dg->exp_factor(Vec(0.4 * rng.gaussian_vec(3)));
    worst_dress = std::max(
        worst_dress, (dg->dress(CMat(h1 * h2), gf) -
                      dg->dress(h1, dg->dress(h2, gf)))
                         .cwiseAbs()
                         .maxCoeff());
  }
  add_row(rows, s, "hat/vee round trip", worst_hv, 1e-10);
  add_row(rows, s, "exponential/log round trip", worst_el, 1e-8);
  add_row(rows, s, "adjoint is a homomorphism", worst_ad, 1e-9);
  add_row(rows, s, "ordered factorizations recompose", worst_fac, 1e-9);
  add_row(rows, s, "factor parts land in their subgroups", worst_mem, 0.0);
  add_row(rows, s, "dressing composes as a left action", worst_dress, 1e-8);
}

void suite_extension(std::vector<CheckRow>& rows) {
  const std::string s = "extension";
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  const LieAlgebra& halg = dg->algebra();
  Rng rng(1003);
  const GroupCocycle C = GroupCocycle::coboundary(*dg, rng.gaussian_vec(6));

  double worst_comp = 0.0;
  for (int t = 0; t < 10; ++t) {
    const CMat l = dg->exp(Vec(0.4 * rng.gaussian_vec(6)));
    const CMat k = dg->exp(Vec(0.4 * rng.gaussian_vec(6)));
    worst_comp = std::max(
        worst_comp, (C.value(CMat(l * k)) -
                     (dg->coad(l) * C.value(k) + C.value(l)))
                        .cwiseAbs()
                        .maxCoeff());
  }
  add_row(rows, s, "one-cocycle composition law", worst_comp, 1e-9);

  const int n = halg.dim();
  double worst_anti = 0.0, worst_closed = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Vec ea = unitn(n, a), eb = unitn(n, b);
      worst_anti = std::max(
          worst_anti, std::abs(C.two_cocycle(ea, eb) + C.two_cocycle(eb, ea)));
      for (int c = 0; c < n; ++c) {
        const Vec ec = unitn(n, c);
        worst_closed = std::max(
            worst_closed,
            std::abs(C.two_cocycle(halg.bracket(ea, eb), ec) +
                     C.two_cocycle(halg.bracket(eb, ec), ea) +
                     C.two_cocycle(halg.bracket(ec, ea), eb)));
      }
    }
  add_row(rows, s, "induced form is antisymmetric", worst_anti, 1e-10);
  add_row(rows, s, "induced form is closed", worst_closed, 1e-10);

  const Vec alpha = rng.gaussian_vec(6);
  const GroupCocycle Cma = C.shifted(Vec(-alpha));
  double worst_shift = 0.0;
  for (int t = 0; t < 10; ++t) {
    const ExtendedPoint pt{rng.gaussian_vec(6), rng.uniform(0.5, 2.0)};
    const Vec X = rng.gaussian_vec(6), Y = rng.gaussian_vec(6);
    const ExtendedPoint q = shift_point(pt, alpha);
    worst_shift = std::max(
        worst_shift, std::abs(lie_poisson_bracket(halg, C.chat(), q, X, Y) -
                              lie_poisson_bracket(halg, Cma.chat(), pt, X, Y)));
    worst_shift = std::max(worst_shift,
                           (lie_poisson_rhs(halg, C.chat(), q, X) -
                            lie_poisson_rhs(halg, Cma.chat(), pt, X))
                               .cwiseAbs()
                               .maxCoeff());
  }
  add_row(rows, s, "momentum shift interchanges the structures", worst_shift,
          1e-10);

  double worst_aff = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Vec Z = rng.gaussian_vec(6), X = rng.gaussian_vec(6),
              Y = rng.gaussian_vec(6);
    worst_aff = std::max(
        worst_aff,
        std::abs(affine_bracket(dbl, C.chat(), Z, X, Y) -
                 lie_poisson_bracket(halg, C.chat(),
                                     ExtendedPoint{dbl.psi(Z), 1.0}, X, Y)));
  }
  add_row(rows, s, "affine bracket matches through the pairing", worst_aff,
          1e-10);
}

void suite_hamspaces(std::vector<CheckRow>& rows) {
  const std::string s = "hamspaces";
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  Rng rng(1007);
  const GroupCocycle zero = GroupCocycle::zero(*dg);
  const GroupCocycle cdual = GroupCocycle::coboundary(
      *dg, dbl.psi(dbl.embed_dual(rng.gaussian_vec(3))));
  const GroupCocycle cfull = GroupCocycle::coboundary(*dg, rng.gaussian_vec(6));
  const Vec alpha = 0.4 * unit3(2);
  const Vec psi_alpha = dbl.psi(dbl.embed_dual(alpha));

  double worst_eq = 0.0;
  const auto gap = [](const ExtendedPoint& x, const ExtendedPoint& y) {
    return std::max((x.xi - y.xi).cwiseAbs().maxCoeff(), std::abs(x.b - y.b));
  };
  for (int t = 0; t < 8; ++t) {
    const CMat h = dg->exp(Vec(0.4 * rng.gaussian_vec(6)));
    const PhasePoint pf{dg->exp_factor(Vec(0.6 * rng.gaussian_vec(3))),
                        rng.gaussian_vec(3)};
    worst_eq = std::max(
        worst_eq,
        gap(momentum(MomentumTag::LeftZero, *dg, cdual, alpha,
                     dhat_act(*dg, cdual, h, pf)),
            cdual.extended_coad(
                h, momentum(MomentumTag::LeftZero, *dg, cdual, alpha, pf))));
    worst_eq = std::max(
        worst_eq,
        gap(momentum(MomentumTag::LeftAlpha, *dg, cdual, alpha,
                     dhat_alpha_act(*dg, cdual, alpha, h, pf)),
            cdual.shifted(Vec(-psi_alpha))
                .extended_coad(h, momentum(MomentumTag::LeftAlpha, *dg, cdual,
                                           alpha, pf))));
    const PhasePoint pd{dg->exp_dual(Vec(0.6 * rng.gaussian_vec(3))),
                        rng.gaussian_vec(3)};
    worst_eq = std::max(
        worst_eq,
        gap(momentum(MomentumTag::DualPhi, *dg, zero, alpha,
                     bhat_act(*dg, zero, alpha, h, pd)),
            zero.extended_coad(
                h, momentum(MomentumTag::DualPhi, *dg, zero, alpha, pd))));
    const PhasePoint pl{dg->exp(Vec(0.4 * rng.gaussian_vec(6))),
                        rng.gaussian_vec(6)};
    worst_eq = std::max(
        worst_eq,
        gap(momentum(MomentumTag::ChiralRight, *dg, cfull, alpha,
                     chiral_right_act(*dg, h, pl)),
            cfull.extended_coad(h, momentum(MomentumTag::ChiralRight, *dg,
                                            cfull, alpha, pl))));
  }
  add_row(rows, s, "momentum equivariance (four transports)", worst_eq, 1e-9);

  double worst_po = 0.0;
  PhaseSpace plain(*dg, BaseKind::Factor);
  PhaseSpace spd(*dg, BaseKind::Dual);
  for (int t = 0; t < 5; ++t) {
    const PhasePoint pf{dg->exp_factor(Vec(0.5 * rng.gaussian_vec(3))),
                        rng.gaussian_vec(3)};
    worst_po = std::max(worst_po, poisson_map_residual(MomentumTag::LeftZero,
                                                       plain, zero, alpha, pf));
    const PhasePoint pd{dg->exp_dual(Vec(0.5 * rng.gaussian_vec(3))),
                        rng.gaussian_vec(3)};
    worst_po = std::max(worst_po, poisson_map_residual(MomentumTag::DualPhi,
                                                       spd, zero, alpha, pd));
  }
  add_row(rows, s, "maps are Poisson for torus decorations", worst_po, 1e-8);

  const Vec root = 0.4 * unit3(0);
  const PhasePoint pe{dg->identity(), rng.gaussian_vec(3)};
  const double broken =
      poisson_map_residual(MomentumTag::DualPhi, spd, zero, root, pe);
  const double cond = alpha_compatibility_residual(dbl, root);
  const double det_gap = std::max(
      std::max(0.0, kDetectionFloor - broken),
      std::max(0.0, kDetectionFloor - cond));
  add_row(rows, s, "unstable decorations are flagged", det_gap, 0.0);

  double worst_fd = 0.0;
  const double eps = 1e-6;
  PhaseSpace spf(*dg, BaseKind::Factor);
  for (int t = 0; t < 5; ++t) {
    const PhasePoint pf{dg->exp_factor(Vec(0.5 * rng.gaussian_vec(3))),
                        rng.gaussian_vec(3)};
    const Vec a = rng.gaussian_vec(3), rho = rng.gaussian_vec(3);
    Vec tangent(6);
    tangent << a, rho;
    const Vec plus =
        momentum(MomentumTag::LeftZero, *dg, cdual, alpha,
                 spf.step(pf, tangent, eps))
            .xi;
    const Vec minus =
        momentum(MomentumTag::LeftZero, *dg, cdual, alpha,
                 spf.step(pf, tangent, -eps))
            .xi;
    const Vec exact =
        momentum_differential(MomentumTag::LeftZero, *dg, cdual, alpha, pf, a,
                              rho);
    worst_fd = std::max(
        worst_fd, ((plus - minus) / (2.0 * eps) - exact).cwiseAbs().maxCoeff());
  }
  add_row(rows, s, "momentum differentials match finite differences", worst_fd,
          5e-6);
}

void suite_dynamics(std::vector<CheckRow>& rows) {
  const std::string s = "dynamics";
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  const Mat& P = dbl.algebra().pairing();
  Rng rng(1013);

  // Transported-block identities are checked away from the cell boundary:
  // the stored metric block comes through one inversion, so its residual
  // grows like the squared conditioning of the position block. Samples with
  // conditioning above 300 are redrawn (the boundary itself is guarded by
  // FactorizationError inside the block transport).
  double worst_inv = 0.0, worst_re = 0.0, worst_leg = 0.0;
  int kept = 0, draws = 0;
  while (kept < 10 && draws < 200) {
    ++draws;
    const Mat E = random_sigma_operator(dbl, rng);
    worst_inv = std::max(worst_inv,
                         (E * E - Mat::Identity(6, 6)).cwiseAbs().maxCoeff());
    worst_inv = std::max(worst_inv,
                         (E.transpose() * P - P * E).cwiseAbs().maxCoeff());

    const CMat g = dg->exp(Vec(0.5 * rng.gaussian_vec(6)));
    const SigmaBlocks bl = sigma_blocks(*dg, E, g);
    const Mat off = bl.Eg.topRightCorner(3, 3);
    Eigen::JacobiSVD<Mat> svd(off);
    if (svd.singularValues()(0) > 300.0 * svd.singularValues()(2)) continue;
    ++kept;
    const Mat Ginv = bl.G.inverse();
    Mat re(6, 6);
    re.topLeftCorner(3, 3) = -Ginv * bl.B;
    re.topRightCorner(3, 3) = Ginv;
    re.bottomLeftCorner(3, 3) = bl.G - bl.B * Ginv * bl.B;
    re.bottomRightCorner(3, 3) = bl.B * Ginv;
    worst_re = std::max(worst_re, (re - bl.Eg).cwiseAbs().maxCoeff());

    const Vec qdot = rng.gaussian_vec(3), qp = rng.gaussian_vec(3);
    const double lhs = master_lagrangian(bl.G, bl.B, qdot, qp);
    const Vec pp = bl.G * qdot + bl.B * qp;
    const Vec w = dbl.embed_dual(pp) + dbl.embed_factor(qp);
    const double rhs = pp.dot(qdot) - 0.5 * w.dot(P * (bl.Eg * w));
    worst_leg = std::max(worst_leg, std::abs(lhs - rhs));
  }
  add_row(rows, s, "involutions square and self-pair", worst_inv, 1e-12);
  add_row(rows, s, "transported blocks reassemble", worst_re, 1e-10);
  add_row(rows, s, "conjugate-variable closure", worst_leg, 1e-10);

  const Mat E = sigma_swap(dbl);
  const GroupCocycle c = GroupCocycle::zero(*dg);
  const Vec alpha = 0.4 * unit3(2);
  PhaseSpace spA(*dg, BaseKind::Factor);
  PhaseSpace spB(*dg, BaseKind::Dual);
  const CollectiveSpace A{&spA, MomentumTag::LeftZero, &c, Vec::Zero(3)};
  const CollectiveSpace B{&spB, MomentumTag::DualPhi, &c, alpha};
  const auto h =
      CollectiveHamiltonian::quadratic(quadratic_from_operator(dbl, E));
  const DualityReport rep =
      duality_run(A, {dg->identity(), alpha}, B, {dg->identity(), Vec::Zero(3)},
                  h, 0.25, 2.5e-3);
  add_row(rows, s, "short two-model run matches both sides",
          std::max(rep.residual_A, rep.residual_B), 1e-5);
  add_row(rows, s, "shared momentum stays on the flow", rep.momentum_drift,
          1e-6);
}

void suite_loopx(std::vector<CheckRow>& rows) {
  const std::string s = "loopx";
  auto dg = make_double_group("lu_weinstein_su2");
  const DoubleLieAlgebra& dbl = dg->double_algebra();
  const LieAlgebra& halg = dbl.algebra();
  Rng rng(1019);

  const Vec A = rng.gaussian_vec(6), Bv = rng.gaussian_vec(6);
  FourierLoop X(6, 1), Y(6, 1);
  X.set_real_pair(1, (0.5 * A).cast<Complex>());  // A cos s
  CVec yb = CVec::Zero(6);
  for (int i = 0; i < 6; ++i) yb(i) = Complex(0.0, -0.5 * Bv(i));
  Y.set_coeff(1, yb);  // B sin s
  Y.set_coeff(-1, yb.conjugate());
  const double k = 1.7;
  const double closed_gap =
      std::abs(gamma_cocycle(halg, k, X, Y) -
               0.5 * k * A.dot(halg.pairing() * Bv));
  add_row(rows, s, "level term closed form", closed_gap, 1e-12);
  add_row(rows, s, "level term antisymmetry",
          std::abs(gamma_cocycle(halg, k, X, Y) +
                   gamma_cocycle(halg, k, Y, X)),
          1e-12);

  const Vec alpha = 0.3 * unit3(2);
  const LoopGroupPath hp =
      monodromy_path(*dg, FourierLoop::constant(alpha), 64);
  const CMat tgt = CMat(kTwoPi * dg->hat(dbl.embed_dual(alpha))).exp();
  add_row(rows, s, "constant decoration period map",
          (hp.monodromy - tgt).cwiseAbs().maxCoeff(), 1e-8);

  TruncationPolicy pol;
  FourierLoop U(6, 1), V(6, 1), W(6, 1);
  U.set_real_pair(1, rng.gaussian_vec(6).cast<Complex>());
  V.set_real_pair(1, rng.gaussian_vec(6).cast<Complex>());
  W.set_real_pair(1, rng.gaussian_vec(6).cast<Complex>());
  const FourierLoop j1 = loop_bracket(halg, U, loop_bracket(halg, V, W, pol),
                                      pol);
  const FourierLoop j2 = loop_bracket(halg, V, loop_bracket(halg, W, U, pol),
                                      pol);
  const FourierLoop j3 = loop_bracket(halg, W, loop_bracket(halg, U, V, pol),
                                      pol);
  double worst_jac = 0.0;
  for (int m = -3; m <= 3; ++m)
    worst_jac = std::max(worst_jac, (j1.coeff(m) + j2.coeff(m) + j3.coeff(m))
                                        .cwiseAbs()
                                        .maxCoeff());
  add_row(rows, s, "loop bracket Jacobi identity", worst_jac, 1e-12);

  const LoopGroupPath l0 = sine_wave_path(
      *dg, dbl.embed_factor(Vec(0.4 * rng.gaussian_vec(3))), 32);
  const Mat D = spectral_derivative_matrix(32);
  const Mat Eop = sigma_swap(dbl);
  const auto rs = chiral_rhs(*dg, Eop, l0.samples, alpha, D, ExecMode::Serial);
  const auto rp =
      chiral_rhs(*dg, Eop, l0.samples, alpha, D, ExecMode::Parallel);
  double worst_par = 0.0;
  for (std::size_t j = 0; j < rs.size(); ++j)
    worst_par = std::max(worst_par, (rs[j] - rp[j]).cwiseAbs().maxCoeff());
  add_row(rows, s, "serial and threaded kernels agree bitwise", worst_par, 0.0);
}

}  // namespace

std::vector<std::string> check_suite_names() {
  return {"liecore", "groups", "extension", "hamspaces", "dynamics", "loopx"};
}

std::vector<CheckRow> run_check_suites(const std::string& filter,
                                       bool corrupt) {
  std::vector<CheckRow> rows;
  const auto want = [&](const char* name) {
    return filter.empty() || std::string(name).find(filter) !=
                                 std::string::npos;
  };
  bool any = false;
  if (want("liecore")) {
    suite_liecore(rows, corrupt);
    any = true;
  }
  if (want("groups")) {
    suite_groups(rows);
    any = true;
  }
  if (want("extension")) {
    suite_extension(rows);
    any = true;
  }
  if (want("hamspaces")) {
    suite_hamspaces(rows);
    any = true;
  }
  if (want("dynamics")) {
    suite_dynamics(rows);
    any = true;
  }
  if (want("loopx")) {
    suite_loopx(rows);
    any = true;
  }
  if (!any) {
    std::string names;
    for (const std::string& n : check_suite_names())
      names += (names.empty() ? "" : ", ") + n;
    throw DomainError("no suite matches filter \"" + filter + "\"; suites: " +
                      names);
  }
  return rows;
}

}  // namespace orbidual
