/**
 * @file groups.cpp
 * @brief Group realizations, ordered factorizations and dressing maps.
 */
#include "orbidual/groups.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace orbidual {

// ── LieGroup ────────────────────────────────────────────────────────────────

LieGroup::LieGroup(LieAlgebra algebra, std::vector<CMat> basis)
    : algebra_(std::move(algebra)), basis_(std::move(basis)) {
  const int d = algebra_.dim();
  if (static_cast<int>(basis_.size()) != d) {
    throw RepresentationError("basis size does not match algebra dimension");
  }
  const int s = matrix_size();
  frame_.resize(2 * s * s, d);
  for (int a = 0; a < d; ++a) {
    int r = 0;
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        frame_(r, a) = basis_[a](i, j).real();
        frame_(r + s * s, a) = basis_[a](i, j).imag();
        ++r;
      }
    }
  }
  frame_qr_.compute(frame_);
  if (frame_qr_.rank() < d) {
    throw RepresentationError("basis matrices are linearly dependent");
  }
}

void LieGroup::check_representation(double tol) const {
  const int d = algebra_.dim();
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      CMat comm = basis_[i] * basis_[j] - basis_[j] * basis_[i];
      Vec expected = algebra_.bracket(Vec::Unit(d, i), Vec::Unit(d, j));
      Vec got = vee(comm, tol);
      if ((expected - got).lpNorm<Eigen::Infinity>() > tol) {
        std::ostringstream os;
        os << "matrix commutator of basis pair (" << i << ", " << j
           << ") disagrees with the structure constants";
        throw RepresentationError(os.str());
      }
    }
  }
}

CMat LieGroup::hat(const Vec& x) const {
  const int s = matrix_size();
  CMat m = CMat::Zero(s, s);
  for (int a = 0; a < algebra_.dim(); ++a) m += x[a] * basis_[a];
  return m;
}

Vec LieGroup::vee(const CMat& m, double tol) const {
  const int s = matrix_size();
  Vec rhs(2 * s * s);
  int r = 0;
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) {
      rhs[r] = m(i, j).real();
      rhs[r + s * s] = m(i, j).imag();
      ++r;
    }
  }
  Vec x = frame_qr_.solve(rhs);
  double residual = (frame_ * x - rhs).lpNorm<Eigen::Infinity>();
  if (residual > tol) {
    std::ostringstream os;
    os << "matrix lies outside the algebra span: residual " << residual;
    throw RepresentationError(os.str());
  }
  return x;
}

CMat LieGroup::exp(const Vec& x) const { return hat(x).exp(); }

Vec LieGroup::log_coords(const CMat& g) const {
  CMat l = g.log();
  return vee(l, 1e-8);
}

Mat LieGroup::Ad(const CMat& g) const {
  const int d = algebra_.dim();
  CMat gi = g.inverse();
  Mat out(d, d);
  for (int a = 0; a < d; ++a) out.col(a) = vee(g * basis_[a] * gi, 1e-8);
  return out;
}

CMat LieGroup::identity() const {
  return CMat::Identity(matrix_size(), matrix_size());
}

// ── DoubleLieGroup ──────────────────────────────────────────────────────────

DoubleLieGroup::DoubleLieGroup(DoubleLieAlgebra dbl, std::vector<CMat> basis)
    : LieGroup(dbl.algebra(), std::move(basis)), double_(std::move(dbl)) {}

CMat DoubleLieGroup::dress(const CMat& htilde, const CMat& g) const {
  return factorize(htilde * g, Order::FactorFirst).factor;
}

CMat DoubleLieGroup::dressed_dual(const CMat& htilde, const CMat& g) const {
  return factorize(htilde * g, Order::FactorFirst).dual;
}

Vec DoubleLieGroup::dressing_generator(const Vec& xi, const CMat& g) const {
  Vec v = Ad(g.inverse()) * double_.embed_dual(xi);
  return -double_.part_factor(v);
}

Mat DoubleLieGroup::coad(const CMat& g) const {
  return Ad(g.inverse()).transpose();
}

CMat DoubleLieGroup::exp_factor(const Vec& x) const {
  return exp(double_.embed_factor(x));
}

CMat DoubleLieGroup::exp_dual(const Vec& eta) const {
  return exp(double_.embed_dual(eta));
}

// ── concrete groups ─────────────────────────────────────────────────────────

namespace {

/// Rigid motions of the plane as 3x3 affine matrices.
class Se2Group final : public LieGroup {
public:
  Se2Group() : LieGroup(make_algebra("se2"), se2_basis()) {
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

private:
  static std::vector<CMat> se2_basis() {
    std::vector<CMat> B(3, CMat::Zero(3, 3));
    B[0](0, 2) = 1.0;  // P1
    B[1](1, 2) = 1.0;  // P2
    B[2](0, 1) = -1.0; // J
    B[2](1, 0) = 1.0;
    return B;
  }
};

/// Double with a compact dual factor (special unitary) and a triangular
/// factor (upper triangular, positive real diagonal, unit determinant).
class LuWeinsteinGroup final : public DoubleLieGroup {
public:
  LuWeinsteinGroup()
      : DoubleLieGroup(make_double("lu_weinstein_su2"), lw_basis()) {
    check_representation(1e-12);
  }

  bool contains(const CMat& g, double tol = 1e-9) const override {
    return g.rows() == 2 && g.cols() == 2 &&
           std::abs(g.determinant() - 1.0) < tol;
  }

  bool in_factor(const CMat& g, double tol = 1e-9) const override {
    return contains(g, tol) && std::abs(g(1, 0)) < tol &&
           std::abs(g(0, 0).imag()) < tol && g(0, 0).real() > tol &&
           std::abs(g(1, 1).imag()) < tol && g(1, 1).real() > tol;
  }

  bool in_dual(const CMat& g, double tol = 1e-9) const override {
    return contains(g, tol) &&
           (g.adjoint() * g - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() <
               tol;
  }

  Factorization factorize(const CMat& m, Order order) const override {
    if (!contains(m, 1e-8)) {
      std::ostringstream os;
      os << "matrix is not in the group: determinant " << m.determinant();
      throw RepresentationError(os.str());
    }
    if (order == Order::DualFirst) {
      auto [q, r] = gram_schmidt(m);
      return {r, q};
    }
    auto [q, r] = gram_schmidt(m.inverse());
    return {r.inverse(), q.adjoint()};
  }

private:
  /// Modified Gram-Schmidt on the two columns: m = Q R with Q unitary and R
  /// upper triangular with positive real diagonal.
  static std::pair<CMat, CMat> gram_schmidt(const CMat& m) {
    constexpr double kDiagTol = 1e-12;
    CVec c0 = m.col(0), c1 = m.col(1);
    double r00 = c0.norm();
    if (r00 < kDiagTol) {
      throw FactorizationError(
          "factorization breaks down: leading column norm " +
          std::to_string(r00));
    }
    CVec q0 = c0 / r00;
    Complex r01 = q0.dot(c1);  // conjugating dot: q0^dagger c1
    CVec w = c1 - q0 * r01;
    double r11 = w.norm();
    if (r11 < kDiagTol) {
      throw FactorizationError(
          "factorization breaks down: second pivot norm " +
          std::to_string(r11));
    }
    CVec q1 = w / r11;
    CMat Q(2, 2), R(2, 2);
    Q.col(0) = q0;
    Q.col(1) = q1;
    R << Complex(r00, 0.0), r01, Complex(0.0, 0.0), Complex(r11, 0.0);
    return {Q, R};
  }

  static std::vector<CMat> lw_basis() {
    using namespace std::complex_literals;
    std::vector<CMat> B(6, CMat::Zero(2, 2));
    B[0] << 0.0, -2.0, 0.0, 0.0;     // N1
    B[1] << 0.0, 2.0i, 0.0, 0.0;     // N2
    B[2] << -1.0, 0.0, 0.0, 1.0;     // N3
    B[3] << 0.0, -0.5i, -0.5i, 0.0;  // T1
    B[4] << 0.0, -0.5, 0.5, 0.0;     // T2
    B[5] << -0.5i, 0.0, 0.0, 0.5i;   // T3
    return B;
  }
};

/// Abelian double realized by unipotent matrices I + E(v) with v in the last
/// column; products add the vectors, so exp and both factorizations are exact.
class AbelianDoubleGroup final : public DoubleLieGroup {
public:
  AbelianDoubleGroup()
      : DoubleLieGroup(make_double("abelian_double"), ab_basis()) {
    check_representation(1e-12);
  }

  CMat exp(const Vec& x) const override { return identity() + hat(x); }

  Vec log_coords(const CMat& g) const override {
    return vee(g - identity(), 1e-9);
  }

  bool contains(const CMat& g, double tol = 1e-9) const override {
    if (g.rows() != 7 || g.cols() != 7) return false;
    CMat d = g - CMat::Identity(7, 7);
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 7; ++j) {
        bool pattern = (j == 6 && i < 6);
        if (!pattern && std::abs(d(i, j)) > tol) return false;
        if (pattern && std::abs(d(i, j).imag()) > tol) return false;
      }
    }
    return true;
  }

  bool in_factor(const CMat& g, double tol = 1e-9) const override {
    if (!contains(g, tol)) return false;
    for (int i = 3; i < 6; ++i) {
      if (std::abs(g(i, 6)) > tol) return false;
    }
    return true;
  }

  bool in_dual(const CMat& g, double tol = 1e-9) const override {
    if (!contains(g, tol)) return false;
    for (int i = 0; i < 3; ++i) {
      if (std::abs(g(i, 6)) > tol) return false;
    }
    return true;
  }

  Factorization factorize(const CMat& m, Order /*order*/) const override {
    if (!contains(m, 1e-8)) {
      throw RepresentationError("matrix is not in the abelian double group");
    }
    Vec v(6);
    for (int i = 0; i < 6; ++i) v[i] = m(i, 6).real();
    Vec head = Vec::Zero(6), tail = Vec::Zero(6);
    head.head(3) = v.head(3);
    tail.tail(3) = v.tail(3);
    return {identity() + hat(head), identity() + hat(tail)};
  }

private:
  static std::vector<CMat> ab_basis() {
    std::vector<CMat> B(6, CMat::Zero(7, 7));
    for (int i = 0; i < 6; ++i) B[i](i, 6) = 1.0;
    return B;
  }
};

}  // namespace

// ── registry ────────────────────────────────────────────────────────────────

std::unique_ptr<LieGroup> make_group(const std::string& name) {
  if (name == "se2") return std::make_unique<Se2Group>();
  if (name == "lu_weinstein_su2") return std::make_unique<LuWeinsteinGroup>();
  if (name == "abelian_double") return std::make_unique<AbelianDoubleGroup>();
  throw DomainError("unknown group \"" + name +
                    "\"; available: se2, lu_weinstein_su2, abelian_double");
}

std::unique_ptr<DoubleLieGroup> make_double_group(const std::string& name) {
  if (name == "se2") {
    throw DomainError(
        "se2 is not a double group; available doubles: lu_weinstein_su2, "
        "abelian_double");
  }
  if (name == "lu_weinstein_su2") return std::make_unique<LuWeinsteinGroup>();
  if (name == "abelian_double") return std::make_unique<AbelianDoubleGroup>();
  throw DomainError("unknown group \"" + name +
                    "\"; available doubles: lu_weinstein_su2, abelian_double");
}

std::vector<std::string> group_names() {
  return {"se2", "lu_weinstein_su2", "abelian_double"};
}

}  // namespace orbidual
