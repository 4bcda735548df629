/**
 * @file liecore.hpp
 * @brief Finite-dimensional Lie algebras from structure constants, and doubles
 *        built from a dual pair of algebras with an invariant split pairing.
 *
 * Conventions used throughout the library:
 *  - [e_i, e_j] = sum_k c^k_{ij} e_k, with ad(x) y = [x, y];
 *  - the coadjoint convention is <ad_star(x) xi, y> = <xi, [x, y]>, so in
 *    dual-basis coordinates ad_star(x) = ad(x)^T;
 *  - functionals are stored as coordinate vectors with respect to the dual
 *    basis, so all maps act by plain matrix multiplication.
 */
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "orbidual/types.hpp"

namespace orbidual {

/// One structure-constant entry: [e_i, e_j] has coefficient value on e_k.
struct StructureEntry {
  int i = 0, j = 0, k = 0;
  double value = 0.0;
};

/// Real Lie algebra of finite dimension given by structure constants.
class LieAlgebra {
public:
  /// Build from explicit entries. Entries may list either orientation of a
  /// pair (i,j); missing mirrors are filled antisymmetrically, and conflicting
  /// duplicates raise StructureError. An empty pairing means the identity.
  LieAlgebra(int dim, std::vector<std::string> labels,
             const std::vector<StructureEntry>& entries, Mat pairing = Mat());

  int dim() const { return dim_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// c^k_{ij}
  double structure_constant(int i, int j, int k) const;

  Vec bracket(const Vec& x, const Vec& y) const;
  /// Matrix of ad(x): ad(x) * y = [x, y].
  Mat ad(const Vec& x) const;
  /// Matrix of the coadjoint operator in dual coordinates: ad(x)^T.
  Mat ad_star(const Vec& x) const;
  /// ad(e_i) for a basis direction.
  const Mat& ad_basis(int i) const { return ad_basis_.at(i); }

  /// Bilinear form on the algebra (identity unless supplied).
  const Mat& pairing() const { return pairing_; }
  double pair(const Vec& x, const Vec& y) const { return x.dot(pairing_ * y); }

  /// Check antisymmetry and the Jacobi identity to tol; the thrown message
  /// names the first violating index triple and the residual.
  void validate(double tol = 1e-12) const;

  nlohmann::json to_json() const;
  static LieAlgebra from_json(const nlohmann::json& j);

private:
  int dim_ = 0;
  std::vector<std::string> labels_;
  std::vector<Mat> ad_basis_;  // ad(e_i)
  Mat pairing_;
};

/// Double of a dual pair (factor, dual factor): the direct-sum space carries
/// the combined bracket
///   [(X,eta),(Z,xi)] = ([X,Z] - ad*_eta Z + ad*_xi X,
///                       [eta,xi] - ad*_X xi + ad*_Z eta)
/// and the split pairing <(X,eta),(Z,xi)> = <eta,Z> + <xi,X>, which makes both
/// factors isotropic and the pairing invariant.
class DoubleLieAlgebra {
public:
  /// Mixed-bracket construction. `duality` is the matrix of the pairing
  /// between the dual factor and the factor (<eta, X> = eta^T D X); identity
  /// when omitted. Throws StructureError ("not a Lie bialgebra", with the
  /// violating triple) if the combined bracket fails the Jacobi identity.
  static DoubleLieAlgebra build(const LieAlgebra& factor,
                                const LieAlgebra& dual_factor,
                                Mat duality = Mat());

  const LieAlgebra& algebra() const { return combined_; }
  const LieAlgebra& factor() const { return factor_; }
  const LieAlgebra& dual_factor() const { return dual_; }
  int half_dim() const { return factor_.dim(); }
  int dim() const { return combined_.dim(); }

  /// Block projections on the double (result is full-size with the other
  /// block zeroed) and the corresponding component extractors / embeddings.
  Vec project_factor(const Vec& w) const;
  Vec project_dual(const Vec& w) const;
  Vec part_factor(const Vec& w) const { return w.head(half_dim()); }
  Vec part_dual(const Vec& w) const { return w.tail(half_dim()); }
  Vec embed_factor(const Vec& x) const;
  Vec embed_dual(const Vec& eta) const;

  /// Identification of the double with its dual induced by the pairing:
  /// psi(w) = P w in coordinates, psi_inv its inverse.
  Vec psi(const Vec& w) const { return combined_.pairing() * w; }
  Vec psi_inv(const Vec& mu) const { return pairing_inverse_ * mu; }
  const Mat& pairing_inverse() const { return pairing_inverse_; }

  /// Isotropy of both factors and invariance <[w,u],v> + <u,[w,v]> = 0 of the
  /// pairing under the combined bracket, to tol.
  void validate(double tol = 1e-12) const;

private:
  DoubleLieAlgebra(LieAlgebra combined, LieAlgebra factor, LieAlgebra dual);
  LieAlgebra combined_;
  LieAlgebra factor_;
  LieAlgebra dual_;
  Mat pairing_inverse_;
};

// ── registry ────────────────────────────────────────────────────────────────

/// Built-in algebras: "se2", "su2", "an2".
LieAlgebra make_algebra(const std::string& name);
std::vector<std::string> algebra_names();

/// Built-in doubles: "lu_weinstein_su2" (su2 paired with an2) and
/// "abelian_double" (two commuting R^3 factors). Requests for general
/// Chevalley/Serre-presented doubles are rejected with a clear message.
DoubleLieAlgebra make_double(const std::string& name);
std::vector<std::string> double_names();

}  // namespace orbidual
