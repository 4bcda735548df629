/**
 * @file types.hpp
 * @brief Shared aliases, error types and RNG helper for the orbidual library.
 */
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>

namespace orbidual {

using Vec  = Eigen::VectorXd;
using Mat  = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// ── error taxonomy ──────────────────────────────────────────────────────────

/// Structure-constant data fails a required algebraic identity.
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A matrix realization disagrees with the abstract data it should represent.
struct RepresentationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A group-level factorization did not converge or left its domain.
struct FactorizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A trajectory left the numerically trustworthy region.
struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of the operation.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A required compatibility condition between inputs does not hold.
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ── deterministic RNG helper ────────────────────────────────────────────────

/// Seedable generator used by tests and scenario sampling.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(eng_);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  /// Standard-normal vector of length n.
  Vec gaussian_vec(Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  /// Standard-normal matrix of size r x c.
  Mat gaussian_mat(Eigen::Index r, Eigen::Index c) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal();
    return m;
  }
  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
};

}  // namespace orbidual
