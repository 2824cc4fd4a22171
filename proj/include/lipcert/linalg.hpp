#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lipcert/errors.hpp"
#include "lipcert/rng.hpp"
#include "lipcert/tolerances.hpp"

namespace lipcert {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline Vector sub(const Vector& a, const Vector& b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vector add(const Vector& a, const Vector& b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vector scaled(const Vector& a, double c) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

inline Vector negated(const Vector& a) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = -a[i];
  return r;
}

inline bool all_finite(const Vector& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

// Dense real square matrix, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t dim) : dim_(dim), e_(dim * dim, 0.0) {}
  SquareMatrix(std::size_t dim, std::vector<double> entries)
      : dim_(dim), e_(std::move(entries)) {
    if (e_.size() != dim_ * dim_)
      throw DimensionMismatchError("entry count does not match dimension");
  }
  SquareMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    dim_ = rows.size();
    e_.reserve(dim_ * dim_);
    for (const auto& row : rows) {
      if (row.size() != dim_)
        throw DimensionMismatchError("ragged initializer for square matrix");
      e_.insert(e_.end(), row.begin(), row.end());
    }
  }

  static SquareMatrix identity(std::size_t dim) {
    SquareMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return e_[i * dim_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return e_[i * dim_ + j]; }
  const std::vector<double>& entries() const { return e_; }

  Vector apply(const Vector& x) const {
    Vector y(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      double s = 0.0;
      const double* row = e_.data() + i * dim_;
      for (std::size_t j = 0; j < dim_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
    return y;
  }

  Vector apply_transpose(const Vector& x) const {
    Vector y(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      const double xi = x[i];
      const double* row = e_.data() + i * dim_;
      for (std::size_t j = 0; j < dim_; ++j) y[j] += row[j] * xi;
    }
    return y;
  }

  SquareMatrix transposed() const {
    SquareMatrix t(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  // (A + A^T) / 2
  SquareMatrix symmetrized() const {
    SquareMatrix s(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : e_) m = std::max(m, std::abs(x));
    return m;
  }

  // max |A_ij - A_ji|
  double max_asymmetry() const {
    double m = 0.0;
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i + 1; j < dim_; ++j)
        m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
  }

  bool finite() const { return all_finite(e_); }

  SquareMatrix scaled_by(double c) const {
    SquareMatrix r = *this;
    for (auto& x : r.e_) x *= c;
    return r;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> e_;
};

inline SquareMatrix multiply(const SquareMatrix& a, const SquareMatrix& b) {
  const std::size_t d = a.dim();
  if (b.dim() != d) throw DimensionMismatchError("matrix product dimensions");
  SquareMatrix c(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

// Triangular factor F of a PSD matrix with F^T F = M (up to
// reconstruction_error). Rows past the numerical rank are zero.
struct PsdFactor {
  SquareMatrix factor;
  std::size_t rank = 0;
  double reconstruction_error = 0.0;  // max |F^T F - sym(M)| entry
};

namespace detail {

struct CholeskyAttempt {
  PsdFactor result;
  bool psd = true;
  std::size_t fail_row = 0;
  double fail_pivot = 0.0;
};

// Cholesky-style factorization of sym(M) into upper-triangular F with
// F^T F = sym(M). Pivots in [-tol*scale, tol*scale] are treated as zero
// and the whole factor row is skipped (rank-deficient input); a pivot
// below -tol*scale means the matrix is not PSD. A skipped row whose
// off-diagonal residual exceeds what PSD-ness allows (Cauchy-Schwarz on
// the Schur complement) also fails, which catches indefinite matrices
// with a zero leading pivot, e.g. [[0,1],[1,0]].
inline CholeskyAttempt cholesky_attempt(const SquareMatrix& m, double tol) {
  const std::size_t d = m.dim();
  const SquareMatrix a = m.symmetrized();

  double max_diag = 0.0;
  for (std::size_t i = 0; i < d; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double scale = 1.0 + max_diag;
  const double pivot_floor = tol * scale;
  const double skip_residual_bound = scale * std::sqrt(tol);

  CholeskyAttempt out;
  out.result.factor = SquareMatrix(d);
  SquareMatrix& f = out.result.factor;

  for (std::size_t i = 0; i < d; ++i) {
    double s = a(i, i);
    for (std::size_t k = 0; k < i; ++k) s -= f(k, i) * f(k, i);

    if (s < -pivot_floor) {
      out.psd = false;
      out.fail_row = i;
      out.fail_pivot = s;
      return out;
    }
    if (s <= pivot_floor) {
      // Zero pivot: row skipped. Verify the residual row is compatible
      // with a PSD Schur complement.
      for (std::size_t j = i + 1; j < d; ++j) {
        double t = a(i, j);
        for (std::size_t k = 0; k < i; ++k) t -= f(k, i) * f(k, j);
        if (std::abs(t) > skip_residual_bound) {
          out.psd = false;
          out.fail_row = i;
          out.fail_pivot = s;
          return out;
        }
      }
      continue;
    }

    f(i, i) = std::sqrt(s);
    ++out.result.rank;
    for (std::size_t j = i + 1; j < d; ++j) {
      double t = a(i, j);
      for (std::size_t k = 0; k < i; ++k) t -= f(k, i) * f(k, j);
      f(i, j) = t / f(i, i);
    }
  }

  // max |F^T F - sym(M)|
  double err = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k <= std::min(i, j); ++k) s += f(k, i) * f(k, j);
      err = std::max(err, std::abs(s - a(i, j)));
    }
  out.result.reconstruction_error = err;
  return out;
}

}  // namespace detail

// True iff sym(M) factors with all pivots >= -tol*scale,
// scale = 1 + max |diagonal entry|.
inline bool is_psd(const SquareMatrix& m, double tol = Tolerances{}.psd) {
  if (!m.finite()) throw NonFiniteError("matrix has non-finite entries");
  if (tol < 0.0) throw Error("tolerance must be nonnegative");
  return detail::cholesky_attempt(m, tol).psd;
}

inline PsdFactor psd_factor(const SquareMatrix& m, double tol = Tolerances{}.psd) {
  if (!m.finite()) throw NonFiniteError("matrix has non-finite entries");
  if (tol < 0.0) throw Error("tolerance must be nonnegative");
  detail::CholeskyAttempt attempt = detail::cholesky_attempt(m, tol);
  if (!attempt.psd)
    throw NotPsdError("matrix is not positive semi-definite (pivot " +
                      std::to_string(attempt.fail_pivot) + " at row " +
                      std::to_string(attempt.fail_row) + ")");
  return std::move(attempt.result);
}

// Top singular value and the corresponding right direction.
struct TopSingular {
  double sigma = 0.0;
  Vector right;       // unit vector maximizing |A v|
  int iterations = 0;
};

// Largest singular value of A via power iteration on A^T A. Convergence is
// tested on the Rayleigh quotient, which stabilizes even when the top
// singular value is tied and the iterate itself wanders. The start vector
// is a seeded pseudo-random unit vector; on stagnation the iteration is
// restarted once from a reseeded vector before giving up.
inline TopSingular top_singular(const SquareMatrix& a,
                                double tol = Tolerances{}.spectral,
                                int max_iter = Tolerances{}.max_iter,
                                std::uint64_t seed = Tolerances{}.spectral_seed) {
  if (!a.finite()) throw NonFiniteError("matrix has non-finite entries");
  if (!(tol > 0.0)) throw Error("spectral tolerance must be positive");
  if (max_iter < 1) throw Error("max_iter must be positive");

  const std::size_t d = a.dim();
  TopSingular out;
  if (d == 0) return out;

  out.right = Vector(d, 0.0);
  out.right[0] = 1.0;
  const double abs_scale = a.max_abs();
  if (abs_scale == 0.0) return out;

  // Iterate on A / max|A| so forming (A^T A) v can neither overflow nor
  // flush to zero however the input is scaled; sigma is rescaled on exit.
  SquareMatrix an(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) an(i, j) = a(i, j) / abs_scale;

  double last_lambda = 0.0;
  double last_residual = std::numeric_limits<double>::infinity();

  std::uint64_t attempt_seed = seed;
  for (int attempt = 0; attempt < 2; ++attempt, attempt_seed = reseed(attempt_seed)) {
    Rng rng(attempt_seed);
    Vector v = rng.unit_vector(d);
    double lambda_prev = -1.0;

    for (int it = 1; it <= max_iter; ++it) {
      Vector w = an.apply_transpose(an.apply(v));  // (A^T A) v, normalized
      const double lambda = dot(v, w);             // = |A v|^2, >= 0
      const double wn = norm2(w);
      if (wn == 0.0) {
        // v landed in the null space of A^T A; restart from a new vector.
        last_lambda = lambda;
        break;
      }
      if (lambda_prev >= 0.0) {
        const double residual = std::abs(lambda - lambda_prev) /
                                std::max(lambda, std::numeric_limits<double>::min());
        if (residual <= tol) {
          Vector vn = scaled(w, 1.0 / wn);
          out.sigma = norm2(an.apply(vn)) * abs_scale;
          out.right = std::move(vn);
          out.iterations = it;
          return out;
        }
        last_residual = residual;
      }
      lambda_prev = lambda;
      const double inv = 1.0 / wn;
      for (std::size_t i = 0; i < d; ++i) v[i] = w[i] * inv;
      last_lambda = lambda;
    }
  }

  const double last_sigma = std::sqrt(std::max(last_lambda, 0.0)) * abs_scale;
  throw NoConvergenceError(
      "power iteration did not converge within " + std::to_string(max_iter) +
          " iterations (twice); last sigma estimate " + std::to_string(last_sigma),
      last_sigma, last_residual);
}

// Operator 2-norm (largest singular value).
inline double spectral_norm(const SquareMatrix& a,
                            double tol = Tolerances{}.spectral,
                            int max_iter = Tolerances{}.max_iter,
                            std::uint64_t seed = Tolerances{}.spectral_seed) {
  return top_singular(a, tol, max_iter, seed).sigma;
}

}  // namespace lipcert
