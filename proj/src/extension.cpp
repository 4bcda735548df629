/**
 * @file extension.cpp
 * @brief Cocycle evaluation, extended coadjoint actions and bracket data.
 */
#include "orbidual/extension.hpp"

#include <sstream>

#include "json.hpp"

namespace orbidual {

GroupCocycle::GroupCocycle(const DoubleLieGroup& g, Vec mu)
    : group_(&g), mu_(std::move(mu)) {
  const int d = g.dim();
  if (mu_.size() != d) {
    throw DomainError("cocycle parameter has the wrong dimension");
  }
  chat_.resize(d, d);
  for (int i = 0; i < d; ++i) {
    chat_.col(i) = g.algebra().ad_star(Vec::Unit(d, i)) * mu_;
  }
}

GroupCocycle GroupCocycle::zero(const DoubleLieGroup& g) {
  return GroupCocycle(g, Vec::Zero(g.dim()));
}

GroupCocycle GroupCocycle::coboundary(const DoubleLieGroup& g, Vec theta) {
  return GroupCocycle(g, std::move(theta));
}

GroupCocycle GroupCocycle::shifted(const Vec& theta) const {
  return GroupCocycle(*group_, mu_ - theta);
}

Vec GroupCocycle::value(const CMat& l) const {
  return group_->coad(l) * mu_ - mu_;
}

double GroupCocycle::two_cocycle(const Vec& X, const Vec& Y) const {
  return (chat_ * X).dot(Y);
}

ExtendedPoint GroupCocycle::extended_coad(const CMat& l,
                                          const ExtendedPoint& p) const {
  return {group_->coad(l) * p.xi + p.b * value(l), p.b};
}

// ── Lie-Poisson data ────────────────────────────────────────────────────────

double lie_poisson_bracket(const LieAlgebra& h, const Mat& chat,
                           const ExtendedPoint& p, const Vec& dF,
                           const Vec& dG) {
  return p.xi.dot(h.bracket(dF, dG)) + p.b * (chat * dF).dot(dG);
}

Vec lie_poisson_rhs(const LieAlgebra& h, const Mat& chat,
                    const ExtendedPoint& p, const Vec& dH) {
  return -h.ad_star(dH) * p.xi - p.b * (chat * dH);
}

double affine_bracket(const DoubleLieAlgebra& dbl, const Mat& chat,
                      const Vec& Z, const Vec& X, const Vec& Y) {
  const auto& h = dbl.algebra();
  return h.pair(h.bracket(X, Y), Z) + (chat * X).dot(Y);
}

ExtendedPoint shift_point(const ExtendedPoint& p, const Vec& alpha) {
  return {p.xi + p.b * alpha, p.b};
}

// ── registry ────────────────────────────────────────────────────────────────

CocycleSpec parse_cocycle(const std::string& text) {
  CocycleSpec spec;
  if (text == "zero") {
    spec.kind = CocycleSpec::Kind::Zero;
    return spec;
  }
  const std::string cb = "coboundary:";
  if (text.rfind(cb, 0) == 0) {
    spec.kind = CocycleSpec::Kind::Coboundary;
    nlohmann::json arr;
    try {
      arr = nlohmann::json::parse(text.substr(cb.size()));
    } catch (const nlohmann::json::exception&) {
      throw DomainError("coboundary cocycle needs a JSON coordinate array, "
                        "e.g. coboundary:[0,0,0,0,0,1]");
    }
    if (!arr.is_array()) {
      throw DomainError("coboundary cocycle parameter must be an array");
    }
    spec.theta.resize(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
      spec.theta[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return spec;
  }
  const std::string lk = "loop_k:";
  if (text.rfind(lk, 0) == 0) {
    spec.kind = CocycleSpec::Kind::LoopLevel;
    try {
      spec.level = std::stod(text.substr(lk.size()));
    } catch (const std::exception&) {
      throw DomainError("loop cocycle needs a numeric level, e.g. loop_k:1");
    }
    return spec;
  }
  throw DomainError("unknown cocycle \"" + text +
                    "\"; available: zero, coboundary:[...], loop_k:<level>");
}

GroupCocycle make_cocycle(const DoubleLieGroup& g, const CocycleSpec& spec) {
  switch (spec.kind) {
    case CocycleSpec::Kind::Zero:
      return GroupCocycle::zero(g);
    case CocycleSpec::Kind::Coboundary: {
      if (spec.theta.size() != g.dim()) {
        std::ostringstream os;
        os << "coboundary parameter has dimension " << spec.theta.size()
           << ", the group needs " << g.dim();
        throw DomainError(os.str());
      }
      return GroupCocycle::coboundary(g, spec.theta);
    }
    case CocycleSpec::Kind::LoopLevel:
      throw DomainError(
          "loop-level cocycles are defined on loop groups; "
          "finite-dimensional doubles support zero and coboundary:[...]");
  }
  throw DomainError("unhandled cocycle kind");
}

}  // namespace orbidual
