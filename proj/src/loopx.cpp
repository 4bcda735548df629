/// @file loopx.cpp
/// @brief Truncated Fourier loops, monodromy solves, the collocation-point
///        chiral flow, and the monodromic Lagrangian routes.

#include "orbidual/loopx.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

#include "orbidual/dynamics.hpp"

namespace orbidual {
namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kBlowupNorm = 1e12;

std::string fmt_num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

/// Exception-safe parallel loop: per-index work is self-contained, so the
/// serial and parallel schedules produce bit-identical results.
template <class F>
void par_for(int n, bool parallel, F&& body) {
  std::atomic<bool> failed{false};
  std::exception_ptr eptr;
#pragma omp parallel for if (parallel) schedule(static)
  for (int j = 0; j < n; ++j) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      body(j);
    } catch (...) {
#pragma omp critical(orbidual_loopx_par_for)
      {
        if (!failed.exchange(true)) eptr = std::current_exception();
      }
    }
  }
  if (eptr) std::rethrow_exception(eptr);
}

std::vector<CMat> axpy(const std::vector<CMat>& base, double scale,
                       const std::vector<CMat>& dir) {
  std::vector<CMat> out(base.size());
  for (std::size_t j = 0; j < base.size(); ++j) out[j] = base[j] + scale * dir[j];
  return out;
}

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

/// Complex-bilinear extension of the real structure bracket.
CVec cbracket(const LieAlgebra& alg, const CVec& x, const CVec& y) {
  const Vec xr = x.real(), xi = x.imag(), yr = y.real(), yi = y.imag();
  const Vec re = alg.bracket(xr, yr) - alg.bracket(xi, yi);
  const Vec im = alg.bracket(xr, yi) + alg.bracket(xi, yr);
  return re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>();
}

/// RK4 samples of u' = hat(alpha(s)) u over `periods` periods, recorded at the
/// P-per-period collocation grid; entry [P*periods] holds the final point.
std::vector<CMat> dual_ode_samples(const DoubleLieGroup& dg,
                                   const FourierLoop& alpha, int P, int n_sub,
                                   int periods) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  const auto coeff_at = [&](double s) -> CMat {
    return dg.hat(dbl.embed_dual(alpha.value(s)));
  };
  const double h = kTwoPi / (static_cast<double>(P) * n_sub);
  CMat u = dg.identity();
  std::vector<CMat> rec;
  rec.reserve(static_cast<std::size_t>(P) * periods + 1);
  rec.push_back(u);
  for (int j = 0; j < P * periods; ++j) {
    for (int q = 0; q < n_sub; ++q) {
      const double s = (static_cast<double>(j) * n_sub + q) * h;
      const CMat a1 = coeff_at(s);
      const CMat a2 = coeff_at(s + 0.5 * h);
      const CMat a4 = coeff_at(s + h);
      const CMat k1 = a1 * u;
      const CMat k2 = a2 * (u + 0.5 * h * k1);
      const CMat k3 = a2 * (u + 0.5 * h * k2);
      const CMat k4 = a4 * (u + h * k3);
      u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    rec.push_back(u);
  }
  return rec;
}

nlohmann::json cmat_to_json(const CMat& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json rr = nlohmann::json::array(), ri = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ri.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return {{"re", std::move(re)}, {"im", std::move(im)}};
}

CMat cmat_from_json(const nlohmann::json& j) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  const int rows = static_cast<int>(re.size());
  const int cols = rows > 0 ? static_cast<int>(re.at(0).size()) : 0;
  CMat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = cplx(re.at(r).at(c).get<double>(), im.at(r).at(c).get<double>());
  return m;
}

}  // namespace

// ── FourierLoop ──────────────────────────────────────────────────────────────

FourierLoop::FourierLoop(int dim, int band, bool real)
    : dim_(dim), band_(band), real_(real) {
  if (dim < 1 || band < 0)
    throw PreconditionError("loop needs a positive dimension and a nonnegative band");
  c_.assign(2 * band + 1, CVec::Zero(dim));
}

FourierLoop FourierLoop::constant(const Vec& a) {
  FourierLoop out(static_cast<int>(a.size()), 0, true);
  out.c_[0] = a.cast<cplx>();
  return out;
}

FourierLoop FourierLoop::from_samples(const std::vector<Vec>& samples, int band) {
  const int P = static_cast<int>(samples.size());
  if (P < 1) throw PreconditionError("cannot fit a loop to an empty sample list");
  if (P <= 2 * band)
    throw PreconditionError("need more than 2*band samples to resolve the band, got " +
                            std::to_string(P) + " for band " + std::to_string(band));
  const int dim = static_cast<int>(samples[0].size());
  FourierLoop out(dim, band, true);
  for (int m = -band; m <= band; ++m) {
    CVec a = CVec::Zero(dim);
    for (int j = 0; j < P; ++j) {
      const double ph = -kTwoPi * m * j / P;
      a += samples[j].cast<cplx>() * cplx(std::cos(ph), std::sin(ph));
    }
    out.c_[m + band] = a / static_cast<double>(P);
  }
  return out;
}

CVec FourierLoop::coeff(int m) const {
  if (std::abs(m) > band_) return CVec::Zero(dim_);
  return c_[m + band_];
}

void FourierLoop::set_coeff(int m, const CVec& a) {
  if (std::abs(m) > band_)
    throw PreconditionError("coefficient index " + std::to_string(m) +
                            " is outside band " + std::to_string(band_));
  if (a.size() != dim_) throw PreconditionError("coefficient dimension mismatch");
  c_[m + band_] = a;
}

void FourierLoop::set_real_pair(int m, const CVec& a) {
  set_coeff(m, a);
  if (m != 0) set_coeff(-m, a.conjugate());
}

bool FourierLoop::is_real(double tol) const {
  for (int m = 0; m <= band_; ++m) {
    const CVec diff = c_[band_ + m] - c_[band_ - m].conjugate();
    if (diff.cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

CVec FourierLoop::cvalue(double s) const {
  CVec v = CVec::Zero(dim_);
  for (int m = -band_; m <= band_; ++m)
    v += c_[m + band_] * cplx(std::cos(m * s), std::sin(m * s));
  return v;
}

Vec FourierLoop::value(double s) const {
  const CVec v = cvalue(s);
  if (real_ && v.imag().cwiseAbs().maxCoeff() > 1e-12)
    throw StructureError("loop marked real has imaginary value " +
                         fmt_num(v.imag().cwiseAbs().maxCoeff()) + " at s = " + fmt_num(s));
  return v.real();
}

FourierLoop FourierLoop::derivative() const {
  FourierLoop out(dim_, band_, real_);
  for (int m = -band_; m <= band_; ++m)
    out.c_[m + band_] = cplx(0.0, static_cast<double>(m)) * c_[m + band_];
  return out;
}

std::vector<Vec> FourierLoop::samples(int P) const {
  std::vector<Vec> out;
  out.reserve(P);
  for (int j = 0; j < P; ++j) out.push_back(value(kTwoPi * j / P));
  return out;
}

double FourierLoop::energy() const {
  double e = 0.0;
  for (const CVec& a : c_) e += a.squaredNorm();
  return e;
}

double FourierLoop::tail_energy(int n_max) const {
  const double total = energy();
  if (total == 0.0) return 0.0;
  double tail = 0.0;
  for (int m = -band_; m <= band_; ++m)
    if (std::abs(m) > n_max) tail += c_[m + band_].squaredNorm();
  return tail / total;
}

// ── bracket and central term ─────────────────────────────────────────────────

FourierLoop loop_bracket(const LieAlgebra& alg, const FourierLoop& X,
                         const FourierLoop& Y, const TruncationPolicy& policy) {
  if (X.dim() != alg.dim() || Y.dim() != alg.dim())
    throw PreconditionError("loop values and algebra have different dimensions");
  const int full_band = X.band() + Y.band();
  int out_band = full_band;
  if (policy.mode == TruncationPolicy::Mode::ExactDoubleBand) {
    if (full_band > 2 * policy.n_max)
      throw DomainError("exact bracket would need band " + std::to_string(full_band) +
                        " but the policy budget is " + std::to_string(2 * policy.n_max));
  } else {
    out_band = std::min(full_band, policy.n_max);
  }
  FourierLoop out(alg.dim(), out_band, X.real_flag() && Y.real_flag());
  for (int m = -out_band; m <= out_band; ++m) {
    CVec a = CVec::Zero(alg.dim());
    const int plo = std::max(-X.band(), m - Y.band());
    const int phi = std::min(X.band(), m + Y.band());
    for (int p = plo; p <= phi; ++p) a += cbracket(alg, X.coeff(p), Y.coeff(m - p));
    out.set_coeff(m, a);
  }
  return out;
}

double gamma_cocycle(const LieAlgebra& alg, double k, const FourierLoop& X,
                     const FourierLoop& Y) {
  if (X.dim() != alg.dim() || Y.dim() != alg.dim())
    throw PreconditionError("loop values and algebra have different dimensions");
  const CMat Pc = alg.pairing().cast<cplx>();
  const int reach = std::min(X.band(), Y.band());
  cplx sum(0.0, 0.0);
  for (int m = -reach; m <= reach; ++m) {
    if (m == 0) continue;  // the derivative kills the zero mode
    sum += cplx(0.0, -static_cast<double>(m)) *
           (X.coeff(m).transpose() * Pc * Y.coeff(-m)).value();
  }
  return k * sum.real();
}

// ── sampled group paths ──────────────────────────────────────────────────────

bool LoopGroupPath::closed(double tol) const {
  if (samples.empty()) return true;
  const int n = static_cast<int>(monodromy.rows());
  return max_abs(monodromy - CMat::Identity(n, n)) < tol;
}

LoopGroupPath identity_path(const DoubleLieGroup& dg, int P) {
  LoopGroupPath out;
  out.dg = &dg;
  out.samples.assign(P, dg.identity());
  out.monodromy = dg.identity();
  return out;
}

double path_smoothness(const LoopGroupPath& path) {
  const int P = path.P();
  if (P < 2) return 0.0;
  double worst = 0.0;
  for (int j = 0; j < P; ++j) {
    const CMat& a = path.samples[j];
    const CMat b = (j + 1 < P) ? path.samples[j + 1]
                               : CMat(path.samples[0] * path.monodromy);
    worst = std::max(worst, (b - a).norm());
  }
  return worst * P / kTwoPi;
}

bool path_on_group(const LoopGroupPath& path, double tol) {
  for (const CMat& m : path.samples)
    if (!path.dg->contains(m, tol)) return false;
  return true;
}

Mat spectral_derivative_matrix(int P) {
  if (P < 2 || P % 2 != 0)
    throw PreconditionError("the collocation derivative needs an even sample count >= 2");
  Mat D = Mat::Zero(P, P);
  for (int j = 0; j < P; ++j)
    for (int kk = 0; kk < P; ++kk) {
      if (j == kk) continue;
      const int d = j - kk;
      const double sign = (((d % 2) + 2) % 2 == 0) ? 1.0 : -1.0;
      D(j, kk) = 0.5 * sign / std::tan(d * M_PI / P);
    }
  return D;
}

std::vector<CMat> path_s_derivative(const LoopGroupPath& path) {
  const DoubleLieGroup& dg = *path.dg;
  const int P = path.P();
  const int n = dg.matrix_size();
  const Mat D = spectral_derivative_matrix(P);
  const bool monodromic = max_abs(path.monodromy - CMat::Identity(n, n)) > 1e-12;

  std::vector<CMat> q = path.samples;
  std::vector<CMat> restore(P, CMat::Identity(n, n));
  CMat Bhat = CMat::Zero(n, n);
  if (monodromic) {
    const Vec Bc = dg.log_coords(path.monodromy) / kTwoPi;
    Bhat = dg.hat(Bc);
    for (int j = 0; j < P; ++j) {
      const double s = kTwoPi * j / P;
      const CMat u = (s * Bhat).exp();
      restore[j] = u;
      q[j] = path.samples[j] * (-s * Bhat).exp();
    }
  }
  std::vector<CMat> out(P);
  for (int j = 0; j < P; ++j) {
    CMat dq = CMat::Zero(n, n);
    for (int kk = 0; kk < P; ++kk) dq += D(j, kk) * q[kk];
    out[j] = monodromic ? CMat((dq + q[j] * Bhat) * restore[j]) : dq;
  }
  return out;
}

std::vector<Vec> path_log_derivative(const LoopGroupPath& path) {
  const DoubleLieGroup& dg = *path.dg;
  const std::vector<CMat> dl = path_s_derivative(path);
  std::vector<Vec> out(path.P());
  for (int j = 0; j < path.P(); ++j)
    out[j] = dg.vee(dl[j] * path.samples[j].inverse(), 1e-6);
  return out;
}

// ── monodromy solves and embeddings ──────────────────────────────────────────

LoopGroupPath monodromy_path(const DoubleLieGroup& dg, const FourierLoop& alpha,
                             int P, int n_sub) {
  if (alpha.dim() != dg.double_algebra().half_dim())
    throw PreconditionError("the decoration loop must carry dual-factor coordinates");
  if (P < 4 * alpha.band() || P < 1)
    throw PreconditionError("resolution too low: need P >= 4*band, got P = " +
                            std::to_string(P) + " for band " +
                            std::to_string(alpha.band()));
  if (n_sub < 1) throw PreconditionError("n_sub must be positive");
  const std::vector<CMat> rec = dual_ode_samples(dg, alpha, P, n_sub, 1);
  LoopGroupPath out;
  out.dg = &dg;
  out.samples.assign(rec.begin(), rec.begin() + P);
  out.monodromy = rec[P];
  for (int j = 0; j < P; ++j)
    if (!dg.contains(out.samples[j], 1e-8))
      throw IntegrationError("monodromy solve left the group at s = " +
                             fmt_num(kTwoPi * j / P));
  return out;
}

LoopGroupPath embed_e_alpha(const LoopGroupPath& l, const FourierLoop& alpha,
                            int n_sub) {
  const DoubleLieGroup& dg = *l.dg;
  if (!l.closed(1e-8))
    throw DomainError("the base path is not closed: monodromy deviates by " +
                      fmt_num(max_abs(l.monodromy -
                                      CMat::Identity(l.monodromy.rows(),
                                                     l.monodromy.cols()))));
  const int P = l.P();
  const std::vector<CMat> rec = dual_ode_samples(dg, alpha, P, n_sub, 2);
  const CMat Mtil = rec[P];
  // Consistency of the period map: the continued solve must satisfy
  // h(x + 2*pi) = h(x) M at every probed basepoint.
  for (int b = 0; b < 8; ++b) {
    const int idx = (b * P) / 8;
    const CMat sigma = rec[idx].inverse() * rec[idx + P];
    if (max_abs(sigma - Mtil) > 1e-6)
      throw IntegrationError("monodromy inconsistency " + fmt_num(max_abs(sigma - Mtil)) +
                             " at basepoint s = " + fmt_num(kTwoPi * idx / P));
  }
  LoopGroupPath out;
  out.dg = &dg;
  out.samples.resize(P);
  for (int j = 0; j < P; ++j) out.samples[j] = l.samples[j] * rec[j];
  out.monodromy = Mtil;
  return out;
}

std::vector<Vec> chiral_momentum_samples(const LoopGroupPath& l, const Vec& alpha3) {
  const DoubleLieGroup& dg = *l.dg;
  const Vec asharp = dg.double_algebra().embed_dual(alpha3);
  std::vector<Vec> X = path_log_derivative(l);
  for (int j = 0; j < l.P(); ++j) X[j] += dg.Ad(l.samples[j]) * asharp;
  return X;
}

CMat coefficient_monodromy(const DoubleLieGroup& dg, const std::vector<Vec>& X,
                           int band, int n_sub) {
  const FourierLoop loop = FourierLoop::from_samples(X, band);
  const int P = static_cast<int>(X.size());
  const double h = kTwoPi / (static_cast<double>(P) * n_sub);
  CMat u = dg.identity();
  const auto coeff_at = [&](double s) -> CMat { return dg.hat(loop.value(s)); };
  for (int j = 0; j < P * n_sub; ++j) {
    const double s = j * h;
    const CMat a1 = coeff_at(s);
    const CMat a2 = coeff_at(s + 0.5 * h);
    const CMat a4 = coeff_at(s + h);
    const CMat k1 = a1 * u;
    const CMat k2 = a2 * (u + 0.5 * h * k1);
    const CMat k3 = a2 * (u + 0.5 * h * k2);
    const CMat k4 = a4 * (u + h * k3);
    u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

CVec sorted_eigenvalues(const CMat& M) {
  Eigen::ComplexEigenSolver<CMat> ces(M);
  CVec ev = ces.eigenvalues();
  std::vector<cplx> v(ev.data(), ev.data() + ev.size());
  std::sort(v.begin(), v.end(), [](const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  CVec out(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) out(i) = v[i];
  return out;
}

double spectrum_drift(const CVec& a, const CVec& b) {
  const int n = static_cast<int>(a.size());
  if (b.size() != n)
    throw PreconditionError("spectra of different sizes cannot be matched");
  if (n > 9) {  // factorial matching is only meant for small period maps
    CVec d = a - b;
    return d.cwiseAbs().maxCoeff();
  }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(a(i) - b(idx[i])));
    best = std::min(best, worst);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

// ── chiral field flow ────────────────────────────────────────────────────────

std::vector<CMat> chiral_rhs(const DoubleLieGroup& dg, const Mat& E,
                             const std::vector<CMat>& ls, const Vec& alpha3,
                             const Mat& D, ExecMode mode) {
  const int P = static_cast<int>(ls.size());
  const Vec asharp = dg.double_algebra().embed_dual(alpha3);
  std::vector<CMat> out(P);
  par_for(P, mode == ExecMode::Parallel, [&](int j) {
    CMat dl = CMat::Zero(ls[j].rows(), ls[j].cols());
    for (int kk = 0; kk < P; ++kk) dl += D(j, kk) * ls[kk];
    // Mid-stage states sit off the group by the integrator's local error, so
    // the frame projection runs with a loose residual gate.
    Vec X;
    try {
      X = dg.vee(dl * ls[j].inverse(), 1e-3);
    } catch (const RepresentationError& e) {
      throw IntegrationError(std::string("collocation derivative left the algebra "
                                         "span — the path is underresolved for this "
                                         "operator; raise the sample count (") +
                             e.what() + ")");
    }
    X += dg.Ad(ls[j]) * asharp;
    const Vec V = E * X;
    out[j] = dg.hat(V) * ls[j];
  });
  return out;
}

LoopTrajectory wznw_flow(const DoubleLieGroup& dg, const Mat& E,
                         const LoopGroupPath& l0, const Vec& alpha3, double T,
                         double dt, int n_max, ExecMode mode) {
  if (T <= 0.0 || dt <= 0.0) throw PreconditionError("need positive horizon and step");
  if (!l0.closed(1e-8))
    throw PreconditionError("the chiral flow starts from a closed path");
  const int P = l0.P();
  if (P < 2 || P % 2 != 0)
    throw PreconditionError("need an even number of collocation samples");
  {
    const FourierLoop ca = FourierLoop::constant(alpha3);
    const double res = loop_alpha_condition_residual(dg.double_algebra(), ca, 8);
    if (res > 1e-10)
      throw PreconditionError("decoration is not adjoint-stable on the factor: residual " +
                              fmt_num(res));
  }
  const Mat D = spectral_derivative_matrix(P);
  const int n = dg.matrix_size();
  const long steps = std::max<long>(1, std::lround(T / dt));
  const double h = T / static_cast<double>(steps);

  LoopTrajectory traj;
  std::vector<CMat> cur = l0.samples;
  const auto record = [&](double t) {
    LoopGroupPath p;
    p.dg = &dg;
    p.samples = cur;
    p.monodromy = CMat::Identity(n, n);
    traj.times.push_back(t);
    traj.paths.push_back(std::move(p));
  };
  record(0.0);

  for (long step = 0; step < steps; ++step) {
    const double t = step * h;
    const std::vector<CMat> k1 = chiral_rhs(dg, E, cur, alpha3, D, mode);
    const std::vector<CMat> k2 = chiral_rhs(dg, E, axpy(cur, 0.5 * h, k1), alpha3, D, mode);
    const std::vector<CMat> k3 = chiral_rhs(dg, E, axpy(cur, 0.5 * h, k2), alpha3, D, mode);
    const std::vector<CMat> k4 = chiral_rhs(dg, E, axpy(cur, h, k3), alpha3, D, mode);
    for (int j = 0; j < P; ++j) {
      cur[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      if (!cur[j].allFinite() || max_abs(cur[j]) > kBlowupNorm)
        throw IntegrationError("chiral flow blew up at t = " + fmt_num(t + h));
      const cplx det = cur[j].determinant();
      if (std::abs(det) < 1e-6)
        throw IntegrationError("chiral flow degenerated at t = " + fmt_num(t + h));
      cur[j] *= std::pow(det, -1.0 / n);
    }
    for (int j = 0; j < P; ++j)
      if (!dg.contains(cur[j], 1e-6))
        throw IntegrationError("chiral flow left the group at t = " + fmt_num(t + h));
    // Aliasing monitor on the momentum loop.
    {
      LoopGroupPath p;
      p.dg = &dg;
      p.samples = cur;
      p.monodromy = CMat::Identity(n, n);
      const std::vector<Vec> X = chiral_momentum_samples(p, alpha3);
      const double tail = FourierLoop::from_samples(X, P / 2 - 1).tail_energy(n_max);
      if (tail > 1e-8) ++traj.aliasing_events;
      traj.max_tail_energy = std::max(traj.max_tail_energy, tail);
    }
    record((step + 1) * h);
  }
  return traj;
}

double loop_alpha_condition_residual(const DoubleLieAlgebra& dbl,
                                     const FourierLoop& alpha, int P) {
  double worst = 0.0;
  for (int j = 0; j < P; ++j) {
    const Vec asharp = dbl.embed_dual(alpha.value(kTwoPi * j / P));
    for (int i = 0; i < dbl.half_dim(); ++i) {
      const Vec ei = dbl.embed_factor(Vec::Unit(dbl.half_dim(), i));
      const Vec br = dbl.algebra().bracket(asharp, ei);
      worst = std::max(worst, dbl.part_dual(br).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

// ── monodromic Lagrangian ────────────────────────────────────────────────────

Mat dressing_bivector(const DoubleLieGroup& dg, const CMat& h) {
  const int nh = dg.double_algebra().half_dim();
  const Mat A = dg.Ad(CMat(h.inverse()));
  if (A.topRightCorner(nh, nh).cwiseAbs().maxCoeff() > 1e-8)
    throw DomainError("element does not lie in the dual factor: its adjoint action "
                      "does not preserve the dual subalgebra");
  const Mat Pi = A.topLeftCorner(nh, nh).transpose() * A.bottomLeftCorner(nh, nh);
  return 0.5 * (Pi - Pi.transpose());
}

double monodromic_lagrangian(const DoubleLieGroup& dg, const Mat& E, double k,
                             const LoopGroupPath& gt,
                             const std::vector<Vec>& body_velocity,
                             const Vec& alpha3, LagrangianRoute route) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  const int P = gt.P();
  if (static_cast<int>(body_velocity.size()) != P)
    throw PreconditionError("one velocity sample per collocation point required");
  for (const CMat& m : gt.samples)
    if (!dg.in_dual(m, 1e-6))
      throw DomainError("path sample leaves the dual factor");

  // Body s-derivative coordinates, with the monodromy stripped spectrally.
  const std::vector<CMat> dl = path_s_derivative(gt);
  std::vector<Vec> body_prime(P);
  for (int j = 0; j < P; ++j) {
    const Vec w = dg.vee(gt.samples[j].inverse() * dl[j], 1e-6);
    if (dbl.part_factor(w).cwiseAbs().maxCoeff() > 1e-6)
      throw DomainError("path log-derivative leaks out of the dual factor by " +
                        fmt_num(dbl.part_factor(w).cwiseAbs().maxCoeff()));
    body_prime[j] = dbl.part_dual(w);
  }

  double acc = 0.0;
  if (route == LagrangianRoute::BodyBlocks) {
    for (int j = 0; j < P; ++j) {
      const SigmaBlocks blocks = sigma_blocks_dual(dg, E, gt.samples[j]);
      const Mat T = blocks.G + blocks.B;
      const Vec qp = alpha3 + k * body_prime[j];
      const Vec& qd = body_velocity[j];
      acc += 0.5 * (qd - qp).dot(T * (qd + qp));
    }
  } else {
    const SigmaBlocks at_e = sigma_blocks_dual(dg, E, dg.identity());
    const Mat Te = at_e.G + at_e.B;
    Eigen::FullPivLU<Mat> lu_e(Te);
    if (!lu_e.isInvertible())
      throw FactorizationError("identity blocks of the operator are singular");
    const Mat Te_inv = lu_e.inverse();
    for (int j = 0; j < P; ++j) {
      const Mat Pi = dressing_bivector(dg, gt.samples[j]);
      Eigen::FullPivLU<Mat> lu_op(Mat(Te_inv + Pi));
      if (!lu_op.isInvertible())
        throw FactorizationError("space-frame operator inversion failed at sample " +
                                 std::to_string(j));
      const Mat Ts = lu_op.inverse();
      const Mat Adg = dg.Ad(gt.samples[j]);
      const Vec qp = alpha3 + k * body_prime[j];
      const Vec sd = dbl.part_dual(Adg * dbl.embed_dual(body_velocity[j]));
      const Vec sp = dbl.part_dual(Adg * dbl.embed_dual(qp));
      acc += 0.5 * (sd - sp).dot(Ts * (sd + sp));
    }
  }
  return acc / P;
}

// ── enlarged flow ────────────────────────────────────────────────────────────

namespace {

struct EnlargedCore {
  std::vector<Vec> mu;    ///< full-dimension momentum coordinates per sample
  std::vector<CMat> g;    ///< dual-group samples
  Vec lambda;
};

EnlargedCore core_axpy(const EnlargedCore& base, double scale, const EnlargedCore& dir) {
  EnlargedCore out;
  out.mu.resize(base.mu.size());
  out.g.resize(base.g.size());
  for (std::size_t j = 0; j < base.mu.size(); ++j) {
    out.mu[j] = base.mu[j] + scale * dir.mu[j];
    out.g[j] = base.g[j] + scale * dir.g[j];
  }
  out.lambda = base.lambda + scale * dir.lambda;
  return out;
}

}  // namespace

double multiplier_velocity(const DoubleLieGroup& dg, const Mat& E,
                           const EnlargedState& state, const Vec& dir) {
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  const int P = state.gtilde.P();
  const Mat Palg = dbl.algebra().pairing();
  const std::vector<Vec> logd = path_log_derivative(state.gtilde);
  double acc = 0.0;
  for (int j = 0; j < P; ++j) {
    const Mat Adg = dg.Ad(state.gtilde.samples[j]);
    const Vec mu = logd[j] + Adg * (dbl.embed_factor(state.Z[j]) +
                                    dbl.embed_dual(state.alpha3));
    const Vec V = E * mu;
    acc += V.dot(Palg * (Adg * dbl.embed_dual(dir)));
  }
  return -acc / P;
}

EnlargedTrajectory enlarged_flow(const DoubleLieGroup& dg, const Mat& E, double k,
                                 const EnlargedState& s0,
                                 const std::vector<Vec>& torus_dirs, double T,
                                 double dt, int n_max, ExecMode mode) {
  (void)k;  // the level enters through the Lagrangian side, not this flow
  (void)n_max;
  const DoubleLieAlgebra& dbl = dg.double_algebra();
  if (T <= 0.0 || dt <= 0.0) throw PreconditionError("need positive horizon and step");
  if (!s0.gtilde.closed(1e-8))
    throw PreconditionError("the enlarged flow starts from a closed path");
  const int P = s0.gtilde.P();
  if (P < 2 || P % 2 != 0)
    throw PreconditionError("need an even number of collocation samples");
  if (static_cast<int>(s0.Z.size()) != P)
    throw PreconditionError("one factor sample per collocation point required");
  const Mat D = spectral_derivative_matrix(P);
  const int n = dg.matrix_size();
  const long steps = std::max<long>(1, std::lround(T / dt));
  const double h = T / static_cast<double>(steps);

  // Assemble the initial momentum from the state's own pieces.
  EnlargedCore cur;
  cur.g = s0.gtilde.samples;
  cur.lambda = s0.lambda3;
  {
    const std::vector<Vec> logd = path_log_derivative(s0.gtilde);
    cur.mu.resize(P);
    for (int j = 0; j < P; ++j)
      cur.mu[j] = logd[j] + dg.Ad(cur.g[j]) * (dbl.embed_factor(s0.Z[j]) +
                                               dbl.embed_dual(s0.alpha3));
  }

  const LieAlgebra& alg = dbl.algebra();
  const auto rhs = [&](const EnlargedCore& c) -> EnlargedCore {
    EnlargedCore out;
    out.mu.resize(P);
    out.g.resize(P);
    std::vector<Vec> V(P);
    par_for(P, mode == ExecMode::Parallel, [&](int j) { V[j] = E * c.mu[j]; });
    par_for(P, mode == ExecMode::Parallel, [&](int j) {
      Vec dV = Vec::Zero(dbl.dim());
      for (int kk = 0; kk < P; ++kk) dV += D(j, kk) * V[kk];
      out.mu[j] = dV + alg.bracket(V[j], c.mu[j]);
      out.g[j] = dg.hat(dbl.embed_dual(dbl.part_dual(V[j]))) * c.g[j];
    });
    out.lambda = Vec::Zero(cur.lambda.size());
    const Mat Palg = alg.pairing();
    for (const Vec& dir : torus_dirs) {
      double acc = 0.0;
      for (int j = 0; j < P; ++j)
        acc += V[j].dot(Palg * (dg.Ad(c.g[j]) * dbl.embed_dual(dir)));
      out.lambda += (-acc / P) * dir;
    }
    return out;
  };

  EnlargedTrajectory traj;
  const auto reconstruct = [&](double t) {
    EnlargedState st;
    st.gtilde.dg = &dg;
    st.gtilde.samples = cur.g;
    st.gtilde.monodromy = CMat::Identity(n, n);
    st.alpha3 = s0.alpha3;  // carried, never recomputed
    st.lambda3 = cur.lambda;
    const std::vector<Vec> logd = path_log_derivative(st.gtilde);
    st.Z.resize(P);
    for (int j = 0; j < P; ++j) {
      const Vec zfull = dg.Ad(CMat(cur.g[j].inverse())) * (cur.mu[j] - logd[j]) -
                        dbl.embed_dual(s0.alpha3);
      traj.max_dual_leak = std::max(traj.max_dual_leak,
                                    static_cast<double>(
                                        dbl.part_dual(zfull).cwiseAbs().maxCoeff()));
      st.Z[j] = dbl.part_factor(zfull);
    }
    traj.times.push_back(t);
    traj.momentum_eigenvalues.push_back(
        sorted_eigenvalues(coefficient_monodromy(dg, cur.mu, P / 2 - 1, 2)));
    traj.states.push_back(std::move(st));
  };
  reconstruct(0.0);

  for (long step = 0; step < steps; ++step) {
    const double t = step * h;
    const EnlargedCore k1 = rhs(cur);
    const EnlargedCore k2 = rhs(core_axpy(cur, 0.5 * h, k1));
    const EnlargedCore k3 = rhs(core_axpy(cur, 0.5 * h, k2));
    const EnlargedCore k4 = rhs(core_axpy(cur, h, k3));
    for (int j = 0; j < P; ++j) {
      cur.mu[j] += (h / 6.0) * (k1.mu[j] + 2.0 * k2.mu[j] + 2.0 * k3.mu[j] + k4.mu[j]);
      cur.g[j] += (h / 6.0) * (k1.g[j] + 2.0 * k2.g[j] + 2.0 * k3.g[j] + k4.g[j]);
      if (!cur.g[j].allFinite() || cur.mu[j].cwiseAbs().maxCoeff() > kBlowupNorm)
        throw IntegrationError("enlarged flow blew up at t = " + fmt_num(t + h));
      const cplx det = cur.g[j].determinant();
      if (std::abs(det) < 1e-6)
        throw IntegrationError("enlarged flow degenerated at t = " + fmt_num(t + h));
      cur.g[j] *= std::pow(det, -1.0 / n);
      if (!dg.in_dual(cur.g[j], 1e-6))
        throw IntegrationError("enlarged flow left the dual factor at t = " +
                               fmt_num(t + h));
    }
    cur.lambda += (h / 6.0) * (k1.lambda + 2.0 * k2.lambda + 2.0 * k3.lambda + k4.lambda);
    reconstruct((step + 1) * h);
  }
  return traj;
}

// ── external interfaces ──────────────────────────────────────────────────────

nlohmann::json path_to_json(const LoopGroupPath& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CMat& m : path.samples) arr.push_back(cmat_to_json(m));
  return {{"P", path.P()},
          {"matrix_size", path.samples.empty() ? 0 : static_cast<int>(path.samples[0].rows())},
          {"monodromy", cmat_to_json(path.monodromy)},
          {"samples", std::move(arr)}};
}

LoopGroupPath path_from_json(const DoubleLieGroup& dg, const nlohmann::json& j) {
  LoopGroupPath out;
  out.dg = &dg;
  for (const auto& m : j.at("samples")) out.samples.push_back(cmat_from_json(m));
  out.monodromy = cmat_from_json(j.at("monodromy"));
  if (static_cast<int>(out.samples.size()) != j.at("P").get<int>())
    throw RepresentationError("sample count disagrees with the recorded P");
  return out;
}

void loop_to_csv(const FourierLoop& loop, std::ostream& out) {
  out << "m,component,re,im\n";
  out.precision(17);
  for (int m = -loop.band(); m <= loop.band(); ++m) {
    const CVec a = loop.coeff(m);
    for (int c = 0; c < loop.dim(); ++c)
      out << m << "," << c << "," << a(c).real() << "," << a(c).imag() << "\n";
  }
}

}  // namespace orbidual
