/**
 * @file groups.hpp
 * @brief Matrix realizations of the built-in groups: the plane-motion group,
 *        a double with compact/triangular factors, and an abelian double.
 *
 * Group elements are square complex matrices; algebra elements travel as real
 * coordinate vectors and are materialized through hat/vee. Double groups add
 * the two ordered factorizations and the dressing maps derived from them.
 */
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "orbidual/liecore.hpp"
#include "orbidual/types.hpp"

namespace orbidual {

/// Matrix Lie group integrating a structure-constant algebra.
class LieGroup {
public:
  virtual ~LieGroup() = default;

  const LieAlgebra& algebra() const { return algebra_; }
  int matrix_size() const { return static_cast<int>(basis_[0].rows()); }
  int dim() const { return algebra_.dim(); }

  /// Coordinates -> matrix (linear in x).
  CMat hat(const Vec& x) const;
  /// Matrix -> coordinates; throws RepresentationError when m is outside the
  /// algebra span beyond tol.
  Vec vee(const CMat& m, double tol = 1e-9) const;

  /// Matrix exponential of hat(x).
  virtual CMat exp(const Vec& x) const;
  /// Principal-branch logarithm expressed in coordinates.
  virtual Vec log_coords(const CMat& g) const;

  /// Adjoint operator on algebra coordinates: Ad(g) x = vee(g hat(x) g^-1).
  Mat Ad(const CMat& g) const;

  /// Membership test for the realized group.
  virtual bool contains(const CMat& g, double tol = 1e-9) const = 0;

  CMat identity() const;

protected:
  LieGroup(LieAlgebra algebra, std::vector<CMat> basis);
  /// Verifies that matrix commutators of the basis reproduce the structure
  /// constants (called by constructors).
  void check_representation(double tol) const;

  LieAlgebra algebra_;
  std::vector<CMat> basis_;  // hat(e_i)
  Mat frame_;                // stacked real/imag basis columns for vee
  Eigen::ColPivHouseholderQR<Mat> frame_qr_;
};

/// Group of a double algebra: carries the two factor subgroups and the
/// ordered factorizations m = factor * dual or m = dual * factor.
class DoubleLieGroup : public LieGroup {
public:
  enum class Order { FactorFirst, DualFirst };

  /// Parts of an ordered splitting; `factor` always names the piece in the
  /// factor subgroup N and `dual` the piece in the dual subgroup.
  struct Factorization {
    CMat factor;
    CMat dual;
  };

  const DoubleLieAlgebra& double_algebra() const { return double_; }

  /// Split m in the requested order. Throws FactorizationError when m leaves
  /// the factorizable region, RepresentationError when m is not in the group.
  virtual Factorization factorize(const CMat& m, Order order) const = 0;

  virtual bool in_factor(const CMat& g, double tol = 1e-9) const = 0;
  virtual bool in_dual(const CMat& g, double tol = 1e-9) const = 0;

  /// Dressing of the factor group by the dual group: the N-part of htilde * g
  /// in factor-first order.
  CMat dress(const CMat& htilde, const CMat& g) const;
  /// The accompanying dressed dual element (the N*-part of htilde * g).
  CMat dressed_dual(const CMat& htilde, const CMat& g) const;

  /// Infinitesimal dressing in the body frame along a dual direction xi
  /// (coordinates in the dual factor): returns -Pi_n Ad(g^-1) xi as factor
  /// coordinates. Its negative is the velocity of t -> dress(exp(t xi), g).
  Vec dressing_generator(const Vec& xi, const CMat& g) const;

  /// Coadjoint operator on dual coordinates: Ad(g^-1)^T.
  Mat coad(const CMat& g) const;

  /// Matrix exponentials of pure factor / pure dual directions.
  CMat exp_factor(const Vec& x) const;
  CMat exp_dual(const Vec& eta) const;

protected:
  DoubleLieGroup(DoubleLieAlgebra dbl, std::vector<CMat> basis);
  DoubleLieAlgebra double_;
};

// ── registry ────────────────────────────────────────────────────────────────

/// Built-in realizations: "se2", "lu_weinstein_su2", "abelian_double".
std::unique_ptr<LieGroup> make_group(const std::string& name);
/// Same registry restricted to doubles; rejects "se2" with an explanation.
std::unique_ptr<DoubleLieGroup> make_double_group(const std::string& name);
std::vector<std::string> group_names();

}  // namespace orbidual
