/**
 * @file scenarios.hpp
 * @brief Named end-to-end scenarios, the registry behind the command line
 *        tool, artifact emission, and the module-level invariant check suites.
 *
 * Three engines cover the library end to end:
 *  - the planar rigid-body / pendulum collective pair on the adapted
 *    plane-motion algebra;
 *  - the two-model duality run on the compact/triangular double;
 *  - the monodromic string: decorated chiral flow, monodromy tracking, and the
 *    enlarged multiplier system at collocation resolution.
 * Each engine returns raw trajectories plus gated residual metrics; the
 * scenario runner wraps them behind names, parameter schemas, and artifact
 * files.
 */
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "orbidual/dynamics.hpp"
#include "orbidual/loopx.hpp"

namespace orbidual {

// ── rigid-body / pendulum pair ──────────────────────────────────────────────

/// Parameters of the collective pair. The inertias must be ordered
/// I1 < I2 < I3; the level fixes the conserved-quadratic value (the orbit
/// cylinder) the initial data sits on.
struct RigidPendulumParams {
  double I1 = 1.0, I2 = 2.0, I3 = 3.0;
  double theta0 = 0.7;  ///< initial pendulum angle
  double p0 = 0.3;      ///< initial pendulum momentum
  double level = 1.0;   ///< conserved-quadratic value of the initial momentum
  double T = 5.0;
  double dt = 1e-3;
};

struct RigidPendulumResult {
  std::vector<double> times;
  std::vector<Vec> beta_direct;  ///< integrated momentum flow
  std::vector<Vec> beta_shared;  ///< coadjoint transport through the group curve
  std::vector<double> theta_shared, p_shared;  ///< pendulum read off the curve
  std::vector<double> theta_direct, p_direct;  ///< pendulum integrated directly
  double fd_residual = 0.0;        ///< second-difference law residual
  double pendulum_residual = 0.0;  ///< shared vs direct pendulum sup distance
  double rigid_residual = 0.0;     ///< transported vs integrated momentum sup
  double invariant_drift = 0.0;    ///< conserved-quadratic drift along the flow
  double energy_drift = 0.0;
  int reprojections = 0;  ///< group-membership renormalizations in the curve
};

/// Plane-motion structure constants in the basis scaled so the conserved
/// quadratic of the pair is a polynomial invariant of the bracket.
LieAlgebra adapted_plane_algebra();

/// The conserved quadratic (level-set label of the orbit cylinders).
double plane_invariant(const RigidPendulumParams& prm, const Vec& beta);

/// Energy quadratic form in the adapted coordinates, reduced by the invariant
/// so the angle chart carries a clean potential.
Mat plane_energy_form(const RigidPendulumParams& prm);

/// Angular frequency-squared scale of the recovered angle law:
/// thetadd + law_coefficient * sin(2 theta) = 0.
double pendulum_law_coefficient(const RigidPendulumParams& prm);

RigidPendulumResult run_rigid_pendulum(const RigidPendulumParams& prm);

// ── duality on the compact/triangular double ────────────────────────────────

struct SuDualityParams {
  Vec alpha;                           ///< decoration (3 dual coordinates)
  std::string operator_kind = "swap";  ///< "swap" or "random"
  std::uint64_t operator_seed = 1;     ///< seed for the random operator
  double T = 1.0;
  double dt = 1e-3;
  int poisson_samples = 20;  ///< sample count for the map-residual sweep
};

struct SuDualityResult {
  bool detection_mode = false;  ///< decoration failed the stability condition
  double condition_residual = 0.0;
  double poisson_residual = 0.0;  ///< worst dual-side map residual over samples
  // populated when the decoration is stable:
  DualityReport report;
  Trajectory side_a, side_b;  ///< collective trajectories (bases attached)
  Trajectory side_a_direct, side_b_direct;
  // populated in detection mode:
  bool action_refused = false;  ///< the decorated dual action raised as required
};

/// Runs the two-model engine when alpha is torus-stable; otherwise verifies
/// that checker, map residual, and action guard all flag the instability.
SuDualityResult run_su2_duality(const SuDualityParams& prm, std::uint64_t seed);

// ── monodromic string ───────────────────────────────────────────────────────

struct StringParams {
  double alpha_mag = 0.3;  ///< torus-direction decoration magnitude
  double wave_mag = 0.35;  ///< seeding factor-wave magnitude
  int P = 64;
  int n_max = 8;
  double T = 1.0;
  double dt = 2e-3;
  double k = 1.0;  ///< level of the loop cocycle / action density
  double enlarged_T = 0.3;
  double enlarged_dt = 2e-3;
  ExecMode mode = ExecMode::Parallel;
};

struct StringResult {
  /// Owns the group the loop paths reference; the path handles inside `flow`
  /// and `enlarged` stay valid exactly as long as this result does.
  std::shared_ptr<const DoubleLieGroup> group;
  Vec alpha;  ///< decoration actually used
  double constant_monodromy_error = 0.0;  ///< period-map defect vs exp(2 pi a)
  LoopTrajectory flow;
  std::vector<double> spectrum_times;
  std::vector<CVec> spectra;  ///< chiral momentum period-map spectra
  double chiral_spectrum_drift = 0.0;
  double chiral_energy_drift = 0.0;
  double max_tail_energy = 0.0;
  int aliasing_events = 0;
  EnlargedTrajectory enlarged;
  double enlarged_alpha_drift = 0.0;   ///< must stay exactly zero
  double enlarged_lambda_change = 0.0; ///< must move
  double enlarged_spectrum_drift = 0.0;
};

StringResult run_monodromic_string(const StringParams& prm, std::uint64_t seed);

// ── registry ────────────────────────────────────────────────────────────────

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::string base;  ///< engine the name resolves to
};

/// Scenario registry: the built-ins plus presets loaded from config includes.
/// Mutating registrations happen during setup only; afterwards every lookup is
/// const, so one instance can serve a concurrent batch.
class ScenarioBook {
 public:
  ScenarioBook();

  /// Registers a preset: an alias of a built-in with overriding parameters.
  /// Throws DomainError for unknown bases or name collisions.
  void register_preset(const std::string& name, const std::string& base,
                       const nlohmann::json& params,
                       const std::string& description);
  /// Loads presets from {"scenarios": [{"name", "base", "params",
  /// "description"}, ...]}.
  void register_from(const nlohmann::json& plugin);

  std::vector<ScenarioInfo> list() const;
  bool has(const std::string& name) const;
  /// Engine name plus merged parameters (preset values first, then the user's
  /// overrides on top).
  std::pair<std::string, nlohmann::json> resolve(
      const std::string& name, const nlohmann::json& user_params) const;

 private:
  std::vector<ScenarioInfo> entries_;
  std::map<std::string, nlohmann::json> preset_params_;
};

// ── scenario runner ─────────────────────────────────────────────────────────

struct ScenarioRunResult {
  std::string scenario;
  bool pass = false;
  /// Residual-like values; entries that also appear in `tolerances` gate the
  /// run (pass iff every gated metric is <= its tolerance), the rest are
  /// informational.
  std::map<std::string, double> metrics;
  std::map<std::string, double> tolerances;
  std::vector<std::string> artifacts;  ///< file names written to output_dir
};

/// Runs a named scenario with the given parameter overrides, writes trajectory
/// tables under output_dir (created on demand; empty string = no files), and
/// returns the gated metrics. Throws DomainError for unknown names or
/// out-of-schema parameters.
ScenarioRunResult run_scenario(const ScenarioBook& book,
                               const std::string& name,
                               const nlohmann::json& params,
                               const std::string& output_dir,
                               std::uint64_t seed);

///// Two-model report alone: {"scenario", "T", "dt", "residual_A", "residual_B",
/// "momentum_drift", "energy_drift"}. Defined for the duality-capable
/// scenarios; DomainError for scenarios with no two-model form, and
/// PreconditionError when the decoration is unstable (detection mode), since
/// then no dual pair exists to report on.
nlohmann::json duality_report(const ScenarioBook& book, const std::string& name,
                              const nlohmann::json& params,
                              std::uint64_t seed);

// ── invariant check suites ──────────────────────────────────────────────────

struct CheckRow {
  std::string suite;  ///< module-level grouping
  std::string check;  ///< identity under inspection
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;  ///< failure detail (validator messages are kept loud)
};

/// Residual sweep across the module suites. `filter` restricts to suites whose
/// name contains it (empty = all; no match throws DomainError naming the
/// suites). `corrupt` injects a defective structure constant so the validators
/// must trip — a negative test of the harness itself.
std::vector<CheckRow> run_check_suites(const std::string& filter, bool corrupt);

std::vector<std::string> check_suite_names();

}  // namespace orbidual
