#pragma once
/// @file loopx.hpp
/// @brief Loop-algebra and loop-group layer: truncated Fourier loops, the level-k
///        central term, monodromy solves, monodromic embeddings, the chiral field
///        flow at collocation points, and the two routes to the monodromic
///        Lagrangian.
///
/// Loops are kept in two interchangeable representations:
///   * FourierLoop — a band-limited coefficient table, used wherever algebraic
///     exactness matters (brackets, the level cocycle, reality constraints);
///   * LoopGroupPath — P collocation samples on the uniform grid s_j = 2*pi*j/P
///     together with a monodromy matrix M, representing a possibly non-closed
///     path with l(s + 2*pi) = l(s) * M.
/// Conversions between the two are plain DFTs on the uniform grid.

#include <complex>
#include <functional>
#include <iosfwd>
#include <vector>

#include "orbidual/groups.hpp"
#include "orbidual/liecore.hpp"
#include "orbidual/types.hpp"

#include "json.hpp"

namespace orbidual {

// ── band-limited loops ───────────────────────────────────────────────────────

/// Band-limited loop s -> X(s) = sum_{|m| <= band} a_m e^{i m s} with values in
/// R^dim (coordinates of a Lie algebra element). The reality flag asserts
/// a_{-m} = conj(a_m); real-valued evaluation enforces it.
class FourierLoop {
 public:
  FourierLoop() = default;
  /// Zero loop with the given value dimension and band.
  FourierLoop(int dim, int band, bool real = true);

  /// Constant loop (band 0).
  static FourierLoop constant(const Vec& a);
  /// Least-band loop through the P uniform samples: a_m = (1/P) sum_j X_j e^{-i m s_j}.
  /// Requires P > 2*band so the coefficients are alias-free.
  static FourierLoop from_samples(const std::vector<Vec>& samples, int band);

  int dim() const { return dim_; }
  int band() const { return band_; }
  bool real_flag() const { return real_; }

  /// Coefficient a_m (zero outside the band).
  CVec coeff(int m) const;
  /// Set a_m alone. Widens nothing: |m| must be within the band.
  void set_coeff(int m, const CVec& a);
  /// Set a_m and a_{-m} = conj(a_m) in one go (keeps the loop real-valued).
  void set_real_pair(int m, const CVec& a);

  /// True when a_{-m} = conj(a_m) holds within tol for every m.
  bool is_real(double tol = 1e-12) const;

  /// Complex value sum a_m e^{i m s}.
  CVec cvalue(double s) const;
  /// Real value; throws StructureError if the reality flag is set and the
  /// imaginary part of the sum exceeds 1e-12.
  Vec value(double s) const;

  /// Coefficient-wise derivative d/ds: a_m -> i*m*a_m.
  FourierLoop derivative() const;

  /// Values on the uniform grid s_j = 2*pi*j/P.
  std::vector<Vec> samples(int P) const;

  /// Fraction of the coefficient energy sitting strictly beyond |m| = n_max.
  double tail_energy(int n_max) const;

  /// Sum of |a_m|^2 over the band.
  double energy() const;

 private:
  int dim_ = 0;
  int band_ = 0;
  bool real_ = true;
  std::vector<CVec> c_;  ///< index m + band_
};

/// How products that widen the band are handled.
struct TruncationPolicy {
  enum class Mode {
    ExactDoubleBand,  ///< keep every coefficient; operand bands must sum within n_max_total
    ProjectToBand     ///< truncate the result to the band budget
  };
  Mode mode = Mode::ExactDoubleBand;
  /// Band budget: in exact mode the operand bands may sum up to 2*n_max (the
  /// result is kept in full); in projection mode results are cut at n_max.
  int n_max = 8;
};

/// Pointwise bracket of two loops, computed as the coefficient convolution
/// (X*Y)_m = sum_{p+q=m} [x_p, y_q]. Exact mode throws DomainError when the
/// operand bands sum beyond 2*policy.n_max; projection mode truncates at
/// policy.n_max. Antisymmetry is exact in both modes; reality is preserved.
FourierLoop loop_bracket(const LieAlgebra& alg, const FourierLoop& X,
                         const FourierLoop& Y, const TruncationPolicy& policy);

/// Level-k central term Gamma_k(X, Y) = (k/2*pi) * Int (X, Y')_d ds, evaluated
/// exactly from coefficients: k * sum_m (x_m, i*(-m)*y_{-m})_d. Antisymmetric;
/// vanishes on constants; satisfies the 2-cocycle identity exactly on
/// band-limited loops when brackets are formed in exact mode.
double gamma_cocycle(const LieAlgebra& alg, double k, const FourierLoop& X,
                     const FourierLoop& Y);

// ── sampled group paths ──────────────────────────────────────────────────────

/// A path in a matrix group held as P samples l_j = l(s_j) on the uniform grid,
/// extended beyond one period by the monodromy: l(s + 2*pi) = l(s) * M.
struct LoopGroupPath {
  const DoubleLieGroup* dg = nullptr;
  std::vector<CMat> samples;
  CMat monodromy;

  int P() const { return static_cast<int>(samples.size()); }
  /// True when the monodromy is the identity within tol.
  bool closed(double tol = 1e-8) const;
};

/// Constant path at the identity with identity monodromy.
LoopGroupPath identity_path(const DoubleLieGroup& dg, int P);

/// Smoothness constant c with ||l_{j+1} - l_j|| <= c * (2*pi/P), the wrap step
/// passing through the monodromy. Reported, not enforced.
double path_smoothness(const LoopGroupPath& path);

/// True when every sample satisfies the group membership test within tol.
bool path_on_group(const LoopGroupPath& path, double tol = 1e-8);

/// Dense spectral differentiation matrix for P uniform points on [0, 2*pi)
/// (even P): D_jk = 0.5 * (-1)^{j-k} * cot((j-k)*pi/P), D_jj = 0.
Mat spectral_derivative_matrix(int P);

/// Per-sample s-derivative l'(s_j). Non-trivial monodromy is stripped first
/// (q(s) = l(s) exp(-s*B), B = log(M)/2*pi, is periodic; differentiate q
/// spectrally and restore), so the result is spectrally accurate for smooth
/// paths with any monodromy the group logarithm can reach.
std::vector<CMat> path_s_derivative(const LoopGroupPath& path);

/// Space-frame logarithmic derivative coordinates vee(l'(s_j) l(s_j)^-1).
std::vector<Vec> path_log_derivative(const LoopGroupPath& path);

// ── monodromy solves and monodromic embeddings ───────────────────────────────

/// Solve h'(s) = hat(alpha(s)) h(s), h(0) = e, by RK4 in s with n_sub substeps
/// per collocation interval; alpha is a loop of dual-factor coordinates. The
/// returned path holds the P collocation samples and the period map M = h(2*pi)
/// as its monodromy. Preconditions: P >= 4*band(alpha); postconditions: every
/// sample passes group membership within 1e-8 (IntegrationError otherwise).
LoopGroupPath monodromy_path(const DoubleLieGroup& dg, const FourierLoop& alpha,
                             int P, int n_sub = 4);

/// Monodromic embedding of a closed path: samples l_j * h_j with h from
/// monodromy_path, monodromy M_alpha = h(2*pi). Throws DomainError when l is
/// not closed, and IntegrationError when the consistency check
/// sigma(x) = (l h)(x)^-1 (l h)(x + 2*pi) (probed at 8 basepoints against a
/// two-period continuation of the solve) deviates from M_alpha by more than 1e-6.
LoopGroupPath embed_e_alpha(const LoopGroupPath& l, const FourierLoop& alpha,
                            int n_sub = 4);

/// Per-sample momentum coordinates X_j = vee(l' l^-1)_j + Ad(l_j) alpha# of a
/// closed path decorated by a constant dual-coordinate vector alpha3.
std::vector<Vec> chiral_momentum_samples(const LoopGroupPath& l, const Vec& alpha3);

/// Period map of the s-dependent coefficient loop X (coordinates of algebra
/// elements): solve u' = hat(X(s)) u over one period from the band-limited
/// interpolant of the samples. Used to track monodromy eigenvalues of momenta.
CMat coefficient_monodromy(const DoubleLieGroup& dg, const std::vector<Vec>& X,
                           int band, int n_sub = 4);

/// Eigenvalues of M sorted by (real, imag); for display and storage.
CVec sorted_eigenvalues(const CMat& M);

/// Distance between two spectra as the best matching: min over pairings of the
/// largest |a_i - b_{pi(i)}|. Robust against the order flips a plain lexicographic
/// sort suffers when eigenvalues agree in one component up to roundoff (e.g. a
/// conjugate pair with equal real parts).
double spectrum_drift(const CVec& a, const CVec& b);

// ── chiral field flow at collocation points ──────────────────────────────────

/// Whether per-sample kernels run through OpenMP or serially. The two modes are
/// arithmetic-identical (each sample's work is self-contained), so results must
/// match bit for bit; the serial path is kept as the reference implementation.
enum class ExecMode { Serial, Parallel };

/// One right-hand-side evaluation of the chiral flow: given path samples ls
/// (possibly off-group mid-stage), returns dl_j = hat(E X_j) l_j with
/// X_j = vee((D ls)_j ls_j^-1) + Ad(ls_j) alpha#. Exposed for the benchmark.
std::vector<CMat> chiral_rhs(const DoubleLieGroup& dg, const Mat& E,
                             const std::vector<CMat>& ls, const Vec& alpha3,
                             const Mat& D, ExecMode mode);

/// Trajectory of a collocation-sampled path under the chiral flow.
struct LoopTrajectory {
  std::vector<double> times;
  std::vector<LoopGroupPath> paths;
  int aliasing_events = 0;      ///< steps whose momentum tail energy exceeded 1e-8
  double max_tail_energy = 0.0; ///< largest momentum tail fraction beyond n_max
};

/// Evolve a closed path by d/dt l l^-1 = E (l' l^-1 + Ad_l alpha#) with the
/// s-derivative taken spectrally at the collocation points and classic RK4 in
/// time (det-renormalized each step). alpha3 is a constant dual-coordinate
/// vector; its compatibility is the caller's concern (see
/// loop_alpha_condition_residual). Throws PreconditionError when l0 is not
/// closed or alpha fails the adjoint-stability check, IntegrationError on
/// blow-up or membership loss. Tail energy of the momentum loop beyond n_max is
/// monitored; exceedances are counted as aliasing events, not errors.
LoopTrajectory wznw_flow(const DoubleLieGroup& dg, const Mat& E,
                         const LoopGroupPath& l0, const Vec& alpha3, double T,
                         double dt, int n_max = 8,
                         ExecMode mode = ExecMode::Parallel);

/// Largest dual-block leak of [alpha(s)#, e_i] over the factor basis and the P
/// collocation points: zero exactly when the decoration keeps the factor
/// subalgebra adjoint-stable at every point of the loop (constant loops reduce
/// to the finite-dimensional check).
double loop_alpha_condition_residual(const DoubleLieAlgebra& dbl,
                                     const FourierLoop& alpha, int P);

// ── monodromic Lagrangian ────────────────────────────────────────────────────

/// Which assembly route evaluates the Lagrangian density.
enum class LagrangianRoute {
  BodyBlocks,    ///< pointwise transported sigma blocks in the body frame
  SpaceBivector  ///< constant identity blocks corrected by the dressing bivector
};

/// Antisymmetric dressing-bivector matrix at a dual-group element: with
/// A = Ad(h^-1) written in (factor; dual) blocks, Pi(h) = A_ff^T A_df. Appears
/// in the space-frame operator (T_e^-1 + Pi(h))^-1.
Mat dressing_bivector(const DoubleLieGroup& dg, const CMat& h);

/// Action density of a dual-group-valued path: (1/P) sum_j of the master
/// density 1/2 <qdot - q', T (qdot + q')> with q' = alpha3 + k * body
/// s-derivative. body_velocity holds per-sample dual coordinates of h^-1 hdot.
/// The two routes assemble T independently (transported blocks vs constant
/// blocks plus bivector); their agreement is the validation contract for the
/// bivector construction. Throws DomainError when a sample leaves the dual
/// factor or the path's log-derivative leaks out of it, FactorizationError when
/// an operator inversion fails.
double monodromic_lagrangian(const DoubleLieGroup& dg, const Mat& E, double k,
                             const LoopGroupPath& gt,
                             const std::vector<Vec>& body_velocity,
                             const Vec& alpha3,
                             LagrangianRoute route = LagrangianRoute::BodyBlocks);

// ── enlarged flow with multiplier pair ───────────────────────────────────────

/// State of the enlarged system: a closed dual-group path, a factor-valued
/// coefficient loop Z, and the constant multiplier pair (alpha in the dual
/// torus directions, lambda conjugate to it). The composite momentum is
/// mu_j = (g' g^-1)_j + Ad(g_j)(Z_j + alpha#).
struct EnlargedState {
  LoopGroupPath gtilde;
  std::vector<Vec> Z;  ///< per-sample factor coordinates (half_dim each)
  Vec alpha3;
  Vec lambda3;
};

struct EnlargedTrajectory {
  std::vector<double> times;
  std::vector<EnlargedState> states;
  std::vector<CVec> momentum_eigenvalues;  ///< sorted spectrum of the momentum period map per record
  double max_dual_leak = 0.0;  ///< worst dual-block leak of the reconstructed Z
};

/// Evolve the enlarged system under the quadratic energy 1/2 (mu, E mu): the
/// momentum follows d/dt mu = (E mu)' + [E mu, mu] spectrally, the path
/// transports by the dual part of E mu, Z is reconstructed pointwise from the
/// momentum relation, and lambda integrates -dH/dalpha along the torus
/// directions. alpha3 is never written: the stored vector is bit-for-bit the
/// input. E = 0 freezes everything. Throws PreconditionError for a non-closed
/// path, IntegrationError on blow-up.
EnlargedTrajectory enlarged_flow(const DoubleLieGroup& dg, const Mat& E, double k,
                                 const EnlargedState& s0,
                                 const std::vector<Vec>& torus_dirs, double T,
                                 double dt, int n_max = 8,
                                 ExecMode mode = ExecMode::Parallel);

/// Instantaneous multiplier velocity -dH/dalpha along dir for the enlarged
/// energy: -(1/P) sum_j (E mu_j, Ad(g_j) dir#)_P. The central finite difference
/// of monodromic_lagrangian over alpha reproduces it when the sigma blocks are
/// invertible; tests hold the two together.
double multiplier_velocity(const DoubleLieGroup& dg, const Mat& E,
                           const EnlargedState& state, const Vec& dir);

// ── external interfaces ──────────────────────────────────────────────────────

/// Snapshot of a sampled path: {"P", "matrix_size", "monodromy", "samples"}
/// with matrices as {"re": [[..]], "im": [[..]]} row-major arrays.
nlohmann::json path_to_json(const LoopGroupPath& path);
/// Rebuild a path from its snapshot (group pointer supplied by the caller).
LoopGroupPath path_from_json(const DoubleLieGroup& dg, const nlohmann::json& j);

/// Spectral table "m,component,re,im", one row per coefficient component.
void loop_to_csv(const FourierLoop& loop, std::ostream& out);

}  // namespace orbidual
