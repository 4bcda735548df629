/**
 * @file liecore.cpp
 * @brief Structure-constant Lie algebras, doubles, and the built-in registry.
 */
#include "orbidual/liecore.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace orbidual {

namespace {

std::string triple_text(int i, int j, int k,
                        const std::vector<std::string>& labels) {
  std::ostringstream os;
  os << "(" << i << ", " << j << ", " << k << ")";
  if (static_cast<int>(labels.size()) > std::max({i, j, k})) {
    os << " [" << labels[i] << ", " << labels[j] << ", " << labels[k] << "]";
  }
  return os.str();
}

}  // namespace

// ── LieAlgebra ──────────────────────────────────────────────────────────────

LieAlgebra::LieAlgebra(int dim, std::vector<std::string> labels,
                       const std::vector<StructureEntry>& entries, Mat pairing)
    : dim_(dim), labels_(std::move(labels)) {
  if (dim_ <= 0) throw DomainError("algebra dimension must be positive");
  if (labels_.empty()) {
    for (int i = 0; i < dim_; ++i) labels_.push_back("e" + std::to_string(i));
  }
  if (static_cast<int>(labels_.size()) != dim_) {
    throw DomainError("label count does not match algebra dimension");
  }

  std::map<std::tuple<int, int, int>, double> table;
  for (const auto& e : entries) {
    if (e.i < 0 || e.i >= dim_ || e.j < 0 || e.j >= dim_ || e.k < 0 ||
        e.k >= dim_) {
      throw DomainError("structure entry index out of range at " +
                        triple_text(e.i, e.j, e.k, labels_));
    }
    if (e.i == e.j && e.value != 0.0) {
      throw StructureError("antisymmetry requires a zero diagonal entry at " +
                           triple_text(e.i, e.j, e.k, labels_));
    }
    auto key = std::make_tuple(e.i, e.j, e.k);
    if (auto it = table.find(key); it != table.end() && it->second != e.value) {
      throw StructureError("conflicting duplicate structure entry at " +
                           triple_text(e.i, e.j, e.k, labels_));
    }
    table[key] = e.value;
  }
  // Fill antisymmetric mirrors; explicit conflicting mirrors are an error.
  for (const auto& [key, v] : std::map(table)) {
    auto [i, j, k] = key;
    auto mirror = std::make_tuple(j, i, k);
    if (auto it = table.find(mirror); it != table.end()) {
      if (it->second != -v && !(v == 0.0 && it->second == 0.0)) {
        throw StructureError("antisymmetry violated between mirrored entries " +
                             triple_text(i, j, k, labels_));
      }
    } else {
      table[mirror] = -v;
    }
  }

  ad_basis_.assign(dim_, Mat::Zero(dim_, dim_));
  for (const auto& [key, v] : table) {
    auto [i, j, k] = key;
    ad_basis_[i](k, j) = v;
  }

  pairing_ = pairing.size() == 0 ? Mat::Identity(dim_, dim_) : std::move(pairing);
  if (pairing_.rows() != dim_ || pairing_.cols() != dim_) {
    throw DomainError("pairing matrix has the wrong shape");
  }
}

double LieAlgebra::structure_constant(int i, int j, int k) const {
  return ad_basis_.at(i)(k, j);
}

Vec LieAlgebra::bracket(const Vec& x, const Vec& y) const { return ad(x) * y; }

Mat LieAlgebra::ad(const Vec& x) const {
  Mat m = Mat::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i) m += x[i] * ad_basis_[i];
  return m;
}

Mat LieAlgebra::ad_star(const Vec& x) const { return ad(x).transpose(); }

void LieAlgebra::validate(double tol) const {
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      for (int k = 0; k < dim_; ++k) {
        double r = structure_constant(i, j, k) + structure_constant(j, i, k);
        if (std::abs(r) > tol) {
          std::ostringstream os;
          os << "antisymmetry violated at " << triple_text(i, j, k, labels_)
             << ": residual " << r;
          throw StructureError(os.str());
        }
      }
    }
  }
  for (int i = 0; i < dim_; ++i) {
    for (int j = i + 1; j < dim_; ++j) {
      for (int k = j + 1; k < dim_; ++k) {
        Vec ei = Vec::Unit(dim_, i), ej = Vec::Unit(dim_, j),
            ek = Vec::Unit(dim_, k);
        Vec r = bracket(ei, bracket(ej, ek)) + bracket(ej, bracket(ek, ei)) +
                bracket(ek, bracket(ei, ej));
        double m = r.lpNorm<Eigen::Infinity>();
        if (m > tol) {
          std::ostringstream os;
          os << "Jacobi identity violated at basis triple "
             << triple_text(i, j, k, labels_) << ": residual " << m;
          throw StructureError(os.str());
        }
      }
    }
  }
}

nlohmann::json LieAlgebra::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  j["labels"] = labels_;
  auto structure = nlohmann::json::array();
  for (int i = 0; i < dim_; ++i) {
    for (int jj = i + 1; jj < dim_; ++jj) {
      for (int k = 0; k < dim_; ++k) {
        double v = structure_constant(i, jj, k);
        if (v != 0.0) structure.push_back({i, jj, k, v});
      }
    }
  }
  j["structure"] = structure;
  auto pairing = nlohmann::json::array();
  for (int i = 0; i < dim_; ++i) {
    for (int jj = 0; jj < dim_; ++jj) {
      if (pairing_(i, jj) != 0.0) pairing.push_back({i, jj, pairing_(i, jj)});
    }
  }
  j["pairing"] = pairing;
  return j;
}

LieAlgebra LieAlgebra::from_json(const nlohmann::json& j) {
  int dim = j.at("dim").get<int>();
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j["labels"].get<std::vector<std::string>>();
  std::vector<StructureEntry> entries;
  for (const auto& row : j.at("structure")) {
    if (!row.is_array() || row.size() != 4) {
      throw DomainError("structure entries must be [i, j, k, value] rows");
    }
    entries.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<int>(),
                       row[3].get<double>()});
  }
  Mat pairing;
  if (j.contains("pairing")) {
    pairing = Mat::Identity(dim, dim);
    pairing.setZero();
    for (const auto& row : j["pairing"]) {
      if (!row.is_array() || row.size() != 3) {
        throw DomainError("pairing entries must be [i, j, value] rows");
      }
      int a = row[0].get<int>(), b = row[1].get<int>();
      if (a < 0 || a >= dim || b < 0 || b >= dim) {
        throw DomainError("pairing entry index out of range");
      }
      pairing(a, b) = row[2].get<double>();
    }
  }
  return LieAlgebra(dim, std::move(labels), entries, std::move(pairing));
}

// ── DoubleLieAlgebra ────────────────────────────────────────────────────────

DoubleLieAlgebra::DoubleLieAlgebra(LieAlgebra combined, LieAlgebra factor,
                                   LieAlgebra dual)
    : combined_(std::move(combined)),
      factor_(std::move(factor)),
      dual_(std::move(dual)) {
  pairing_inverse_ = combined_.pairing().inverse();
}

DoubleLieAlgebra DoubleLieAlgebra::build(const LieAlgebra& factor,
                                         const LieAlgebra& dual_factor,
                                         Mat duality) {
  const int n = factor.dim();
  if (dual_factor.dim() != n) {
    throw DomainError("factor and dual factor must have equal dimension");
  }
  if (duality.size() == 0) duality = Mat::Identity(n, n);
  if (duality.rows() != n || duality.cols() != n) {
    throw DomainError("duality pairing matrix has the wrong shape");
  }
  Eigen::FullPivLU<Mat> lu(duality);
  if (!lu.isInvertible()) {
    throw StructureError("duality pairing is degenerate");
  }
  const Mat D = duality, Di = lu.inverse(), DiT = Di.transpose(),
            DT = D.transpose();

  // Coadjoint blocks in coordinates:
  //   ad*_X xi  = D^-T ad(X)^T D^T xi   (factor acting on dual coordinates)
  //   ad*_xi X  = D^-1 ad*(xi)^T D X    (dual factor acting on factor coords)
  auto bracket = [&](const Vec& u, const Vec& v) {
    Vec X = u.head(n), eta = u.tail(n), Z = v.head(n), xi = v.tail(n);
    Vec fac = factor.bracket(X, Z) - Di * dual_factor.ad(eta).transpose() * D * Z +
              Di * dual_factor.ad(xi).transpose() * D * X;
    Vec dua = dual_factor.bracket(eta, xi) -
              DiT * factor.ad(X).transpose() * DT * xi +
              DiT * factor.ad(Z).transpose() * DT * eta;
    Vec w(2 * n);
    w << fac, dua;
    return w;
  };

  std::vector<StructureEntry> entries;
  for (int a = 0; a < 2 * n; ++a) {
    for (int b = a + 1; b < 2 * n; ++b) {
      Vec w = bracket(Vec::Unit(2 * n, a), Vec::Unit(2 * n, b));
      for (int k = 0; k < 2 * n; ++k) {
        if (w[k] != 0.0) entries.push_back({a, b, k, w[k]});
      }
    }
  }

  std::vector<std::string> labels = factor.labels();
  std::set<std::string> seen(labels.begin(), labels.end());
  for (const auto& l : dual_factor.labels()) {
    labels.push_back(seen.count(l) ? l + "*" : l);
  }

  Mat P = Mat::Zero(2 * n, 2 * n);
  P.topRightCorner(n, n) = DT;
  P.bottomLeftCorner(n, n) = D;

  LieAlgebra combined(2 * n, std::move(labels), entries, std::move(P));
  try {
    combined.validate(1e-12);
  } catch (const StructureError& e) {
    throw StructureError(std::string("not a Lie bialgebra: the combined "
                                     "bracket fails closure — ") +
                         e.what());
  }
  return DoubleLieAlgebra(std::move(combined), factor, dual_factor);
}

Vec DoubleLieAlgebra::project_factor(const Vec& w) const {
  Vec out = Vec::Zero(dim());
  out.head(half_dim()) = w.head(half_dim());
  return out;
}

Vec DoubleLieAlgebra::project_dual(const Vec& w) const {
  Vec out = Vec::Zero(dim());
  out.tail(half_dim()) = w.tail(half_dim());
  return out;
}

Vec DoubleLieAlgebra::embed_factor(const Vec& x) const {
  Vec out = Vec::Zero(dim());
  out.head(half_dim()) = x;
  return out;
}

Vec DoubleLieAlgebra::embed_dual(const Vec& eta) const {
  Vec out = Vec::Zero(dim());
  out.tail(half_dim()) = eta;
  return out;
}

void DoubleLieAlgebra::validate(double tol) const {
  combined_.validate(tol);
  const int n = half_dim();
  const Mat& P = combined_.pairing();
  // Isotropy of both factors.
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (std::abs(P(a, b)) > tol || std::abs(P(n + a, n + b)) > tol) {
        throw StructureError("factor isotropy fails in the pairing at (" +
                             std::to_string(a) + ", " + std::to_string(b) +
                             ")");
      }
    }
  }
  // Invariance <[w,u],v> + <u,[w,v]> = 0 on basis triples.
  for (int a = 0; a < 2 * n; ++a) {
    Mat adw = combined_.ad(Vec::Unit(2 * n, a));
    Mat inv = adw.transpose() * P + P * adw;
    double m = inv.cwiseAbs().maxCoeff();
    if (m > tol) {
      throw StructureError("pairing invariance fails along basis direction " +
                           std::to_string(a) + ": residual " +
                           std::to_string(m));
    }
  }
}

// ── registry ────────────────────────────────────────────────────────────────

LieAlgebra make_algebra(const std::string& name) {
  if (name == "se2") {
    // Plane Euclidean motions: [J, P1] = P2, [J, P2] = -P1.
    return LieAlgebra(3, {"P1", "P2", "J"},
                      {{2, 0, 1, 1.0}, {2, 1, 0, -1.0}});
  }
  if (name == "su2") {
    // [T1, T2] = T3 and cyclic.
    return LieAlgebra(3, {"T1", "T2", "T3"},
                      {{0, 1, 2, 1.0}, {1, 2, 0, 1.0}, {2, 0, 1, 1.0}});
  }
  if (name == "an2") {
    // Upper-triangular traceless factor: [N3, N1] = -2 N1, [N3, N2] = -2 N2.
    return LieAlgebra(3, {"N1", "N2", "N3"},
                      {{2, 0, 0, -2.0}, {2, 1, 1, -2.0}});
  }
  throw DomainError("unknown algebra \"" + name +
                    "\"; available: se2, su2, an2");
}

std::vector<std::string> algebra_names() { return {"se2", "su2", "an2"}; }

DoubleLieAlgebra make_double(const std::string& name) {
  if (name == "lu_weinstein_su2") {
    return DoubleLieAlgebra::build(make_algebra("an2"), make_algebra("su2"));
  }
  if (name == "abelian_double") {
    LieAlgebra a(3, {"A1", "A2", "A3"}, {});
    LieAlgebra b(3, {"B1", "B2", "B3"}, {});
    return DoubleLieAlgebra::build(a, b);
  }
  if (name.rfind("chevalley", 0) == 0) {
    throw StructureError(
        "doubles from general Chevalley/Serre presentations are not "
        "implemented; supported built-ins: lu_weinstein_su2, abelian_double");
  }
  throw DomainError("unknown double \"" + name +
                    "\"; available: lu_weinstein_su2, abelian_double");
}

std::vector<std::string> double_names() {
  return {"lu_weinstein_su2", "abelian_double"};
}

}  // namespace orbidual
