#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "lipcert/errors.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/metrics.hpp"
#include "lipcert/rng.hpp"
#include "lipcert/tolerances.hpp"

namespace lipcert {

inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;

enum class MetricKind { mahalanobis, bilinear };

inline const char* to_string(MetricKind k) {
  return k == MetricKind::mahalanobis ? "mahalanobis" : "bilinear";
}

// Certified constant k together with the quantities it was derived from.
struct LipschitzCertificate {
  MetricKind metric_kind = MetricKind::mahalanobis;
  double k_theoretical = 0.0;
  double factor_norm = 0.0;   // |L|_2 (mahalanobis)
  double matrix_norm = 0.0;   // |M|_2 (bilinear)
  double radius = 0.0;        // bilinear domain bound R
  std::size_t dim = 0;
  double max_asymmetry = 0.0;  // max |M_ij - M_ji| seen at ingestion (mahalanobis)
  Tolerances tolerances;
};

struct AuditReport {
  long samples = 0;  // quadruples evaluated (independent + correlated)
  std::uint64_t seed = 0;
  double empirical_slope_sup = 0.0;  // max observed slope ratio
  double empirical_grad_sup = 0.0;   // max observed product-space gradient norm
  double witness_slope = 0.0;        // slope achieved by the closed-form witness
  long violation_count = 0;          // slopes exceeding k * (1 + tol.violation)
  double gradcheck_max_err = 0.0;    // finite-difference vs analytic, scaled
  long skipped_gradients = 0;        // samples on the non-differentiable locus
};

// Explicit near-extremal quadruple and the slope it achieves.
struct Witness {
  PairPoint from;
  PairPoint to;
  double achieved_slope = 0.0;
};

namespace detail {

inline bool relatively_close(double a, double b, double rel, double abs_floor = 0.0) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= rel * scale + abs_floor;
}

}  // namespace detail

// k = sqrt(2) * |L|_2 with M = L^T L. The route through the factor is
// cross-checked against sqrt(|M|_2), which must agree to 1e-8 relative.
inline LipschitzCertificate certify_mahalanobis(const SquareMatrix& m,
                                                const Tolerances& tol = {}) {
  if (!m.finite()) throw NonFiniteError("matrix has non-finite entries");
  LipschitzCertificate cert;
  cert.metric_kind = MetricKind::mahalanobis;
  cert.dim = m.dim();
  cert.max_asymmetry = m.max_asymmetry();
  cert.tolerances = tol;

  const SquareMatrix sym = m.symmetrized();
  const PsdFactor f = psd_factor(sym, tol.psd);
  cert.factor_norm =
      spectral_norm(f.factor, tol.spectral, tol.max_iter, tol.spectral_seed);

  // The absolute floor covers mass the factorization legitimately drops:
  // pivots within tol.psd * scale of zero are skipped, so |L|^2 may sit
  // below |M| by up to about d times that much.
  const double matrix_norm =
      spectral_norm(sym, tol.spectral, tol.max_iter, tol.spectral_seed);
  const double dropped =
      static_cast<double>(sym.dim()) * tol.psd * (1.0 + sym.max_abs());
  if (!detail::relatively_close(cert.factor_norm * cert.factor_norm,
                                matrix_norm, 1e-8, dropped))
    throw Error("factor-norm cross-check failed: |L|^2 = " +
                std::to_string(cert.factor_norm * cert.factor_norm) +
                " vs |M| = " + std::to_string(matrix_norm));

  cert.k_theoretical = kSqrt2 * cert.factor_norm;
  return cert;
}

// k = sqrt(2) * |M|_2 * R on the ball of radius R.
inline LipschitzCertificate certify_bilinear(const SquareMatrix& m,
                                             const BallDomain& domain,
                                             const Tolerances& tol = {}) {
  if (!m.finite()) throw NonFiniteError("matrix has non-finite entries");
  if (m.dim() != domain.dim)
    throw DimensionMismatchError("matrix/domain dimensions disagree");
  if (!(domain.radius >= 0.0)) throw Error("radius must be nonnegative");

  LipschitzCertificate cert;
  cert.metric_kind = MetricKind::bilinear;
  cert.dim = m.dim();
  cert.radius = domain.radius;
  cert.tolerances = tol;
  cert.matrix_norm =
      spectral_norm(m, tol.spectral, tol.max_iter, tol.spectral_seed);
  cert.k_theoretical = kSqrt2 * cert.matrix_norm * domain.radius;
  return cert;
}

// Slope ratio of a quadruple: |f(a) - f(b)| over the Euclidean norm of the
// concatenated difference. The supremum of this ratio over all quadruples
// is the Lipschitz constant.
template <typename F>
double slope(F&& f, const PairPoint& a, const PairPoint& b) {
  const Vector d1 = sub(a.x1, b.x1);
  const Vector d2 = sub(a.x2, b.x2);
  const double denom = std::sqrt(dot(d1, d1) + dot(d2, d2));
  if (!(denom > 1e-300))
    throw DegenerateQuadrupleError("quadruple halves coincide");
  return std::abs(f(a) - f(b)) / denom;
}

// Central differences per coordinate in the 2d product space.
template <typename F>
PairGradient finite_diff_gradient(F&& f, const PairPoint& p, double h) {
  PairPoint q = p;
  PairGradient g{Vector(p.x1.size(), 0.0), Vector(p.x2.size(), 0.0)};
  const double inv2h = 1.0 / (2.0 * h);
  for (std::size_t i = 0; i < p.x1.size(); ++i) {
    q.x1[i] = p.x1[i] + h;
    const double fp = f(q);
    q.x1[i] = p.x1[i] - h;
    const double fm = f(q);
    q.x1[i] = p.x1[i];
    g.g1[i] = (fp - fm) * inv2h;
  }
  for (std::size_t i = 0; i < p.x2.size(); ++i) {
    q.x2[i] = p.x2[i] + h;
    const double fp = f(q);
    q.x2[i] = p.x2[i] - h;
    const double fm = f(q);
    q.x2[i] = p.x2[i];
    g.g2[i] = (fp - fm) * inv2h;
  }
  return g;
}

// Tightness witness for the Mahalanobis constant. At the base pair
// (v, 0), v the top right singular direction of L, the gradient has
// product-space norm exactly sqrt(2)|L|_2 = k: g1 = Mv/|Lv| = sigma*v, so
// |g1| = |g2| = |L|_2. Stepping h along the normalized gradient turns that
// into a secant slope >= (1 - O(h)) * k.
inline Witness witness_mahalanobis(const SquareMatrix& m, double h = 1e-4,
                                   const Tolerances& tol = {}) {
  if (!m.finite()) throw NonFiniteError("matrix has non-finite entries");
  const SquareMatrix sym = m.symmetrized();
  if (sym.max_abs() == 0.0)
    throw ZeroMatrixError("witness undefined for the zero matrix");
  if (!(h > 0.0)) throw Error("step h must be positive");

  const PsdFactor f = psd_factor(sym, tol.psd);
  const TopSingular top =
      top_singular(f.factor, tol.spectral, tol.max_iter, tol.spectral_seed);

  const std::size_t d = sym.dim();
  Witness w;
  w.from = PairPoint{top.right, Vector(d, 0.0)};
  const PairGradient g = mahalanobis_grad(sym, f, w.from, tol.zero_distance);
  const double gn = g.product_norm();
  w.to = PairPoint{add(w.from.x1, scaled(g.g1, h / gn)),
                   add(w.from.x2, scaled(g.g2, h / gn))};
  w.achieved_slope =
      slope([&](const PairPoint& p) { return mahalanobis(f, p); }, w.from, w.to);
  return w;
}

// Tightness witness for the bilinear constant. With (u, v) the top
// singular pair of M (Mv = sigma*u, M^T u = sigma*v) and
// x1 = shrink*R*u, x2 = shrink*R*v, the gradient norm is
// shrink*sqrt(2)*sigma*R; a small step along it stays inside the ball and
// achieves a slope close to shrink*k.
inline Witness witness_bilinear(const SquareMatrix& m, const BallDomain& domain,
                                double shrink = 0.999,
                                const Tolerances& tol = {}) {
  if (!m.finite()) throw NonFiniteError("matrix has non-finite entries");
  if (m.dim() != domain.dim)
    throw DimensionMismatchError("matrix/domain dimensions disagree");
  if (m.max_abs() == 0.0)
    throw ZeroMatrixError("witness undefined for the zero matrix");
  if (!(domain.radius > 0.0))
    throw ZeroRadiusError("witness undefined on a singleton domain");
  if (!(shrink > 0.0 && shrink < 1.0)) throw Error("shrink must be in (0,1)");

  const TopSingular top =
      top_singular(m, tol.spectral, tol.max_iter, tol.spectral_seed);
  const Vector mv = m.apply(top.right);
  const double mv_norm = norm2(mv);
  if (mv_norm == 0.0)
    throw ZeroMatrixError("matrix is numerically zero along its top direction");
  const Vector u = scaled(mv, 1.0 / mv_norm);

  const double r = shrink * domain.radius;
  Witness w;
  w.from = PairPoint{scaled(u, r), scaled(top.right, r)};
  const PairGradient g = bilinear_grad(m, w.from);
  const double gn = g.product_norm();
  const double h = 1e-6 * domain.radius;
  w.to = PairPoint{add(w.from.x1, scaled(g.g1, h / gn)),
                   add(w.from.x2, scaled(g.g2, h / gn))};
  w.achieved_slope =
      slope([&](const PairPoint& p) { return bilinear(m, p); }, w.from, w.to);
  return w;
}

struct AuditConfig {
  long samples = 10000;
  std::uint64_t seed = 42;
};

// Sampling ball the audit draws from when none is given explicitly: the
// certified ball for bilinear, the unit ball for mahalanobis (whose bound
// is domain-free; ray invariance of the gradient makes the radius
// immaterial).
inline BallDomain default_sample_domain(const LipschitzCertificate& cert) {
  if (cert.metric_kind == MetricKind::bilinear)
    return BallDomain{cert.radius, cert.dim};
  return BallDomain{1.0, cert.dim};
}

// Empirical check of a certificate: samples quadruples from the domain,
// records the max slope ratio and max gradient norm, counts violations of
// k * (1 + tol.violation), spot-checks analytic gradients against central
// differences, and evaluates the closed-form witness.
//
// The stream is n independent quadruples (two uniform pair-points each)
// followed by n/10 correlated ones (x' = x + small Gaussian step, clamped
// back into the ball for bilinear) probing the small-denominator regime.
// Every 10th quadruple gets a finite-difference gradient check; pairs at
// mahalanobis distance <= 0.1 are not eligible (the difference quotient
// degrades near the singular locus).
inline AuditReport audit(const LipschitzCertificate& cert, const SquareMatrix& m,
                         const BallDomain& sample_domain,
                         const AuditConfig& cfg = {},
                         const Tolerances& tol = {}) {
  if (cfg.samples < 1) throw Error("samples must be >= 1");
  if (!m.finite()) throw NonFiniteError("matrix has non-finite entries");
  if (m.dim() != sample_domain.dim || m.dim() != cert.dim)
    throw DimensionMismatchError("matrix/domain/certificate dimensions disagree");

  const bool maha = cert.metric_kind == MetricKind::mahalanobis;
  const SquareMatrix sym = maha ? m.symmetrized() : SquareMatrix();
  const PsdFactor f = maha ? psd_factor(sym, tol.psd) : PsdFactor{};

  const auto value = [&](const PairPoint& p) {
    return maha ? mahalanobis(f, p) : bilinear(m, p);
  };
  const auto gradient = [&](const PairPoint& p) {
    return maha ? mahalanobis_grad(sym, f, p, tol.zero_distance)
                : bilinear_grad(m, p);
  };

  AuditReport report;
  report.seed = cfg.seed;
  const double limit = cert.k_theoretical * (1.0 + tol.violation);
  const double r_sample = sample_domain.radius;
  const std::size_t d = m.dim();

  Rng rng(cfg.seed);

  const auto clamp_to_ball = [&](Vector& x) {
    const double n = norm2(x);
    if (n > r_sample && n > 0.0)
      for (auto& e : x) e *= r_sample / n;
  };

  const auto process = [&](const PairPoint& a, const PairPoint& b, long index) {
    // A degenerate quadruple (possible only on a singleton domain, R = 0)
    // carries no slope information; skip it rather than fail the audit.
    try {
      const double s = slope(value, a, b);
      report.empirical_slope_sup = std::max(report.empirical_slope_sup, s);
      if (s > limit) ++report.violation_count;
    } catch (const DegenerateQuadrupleError&) {
    }

    for (const PairPoint* p : {&a, &b}) {
      try {
        const PairGradient g = gradient(*p);
        report.empirical_grad_sup =
            std::max(report.empirical_grad_sup, g.product_norm());
      } catch (const UndefinedGradientError&) {
        ++report.skipped_gradients;
      }
    }

    if (index % 10 == 0) {
      const bool eligible = !maha || mahalanobis(f, a) > 0.1;
      if (eligible) {
        try {
          const PairGradient g = gradient(a);
          const PairGradient fd = finite_diff_gradient(value, a, 1e-6);
          for (std::size_t i = 0; i < d; ++i) {
            const double e1 = std::abs(g.g1[i] - fd.g1[i]) / (1.0 + std::abs(g.g1[i]));
            const double e2 = std::abs(g.g2[i] - fd.g2[i]) / (1.0 + std::abs(g.g2[i]));
            report.gradcheck_max_err =
                std::max({report.gradcheck_max_err, e1, e2});
          }
        } catch (const UndefinedGradientError&) {
          // counted above when the same pair was processed for the sup
        }
      }
    }
  };

  const long n_independent = cfg.samples;
  const long n_correlated = cfg.samples / 10;
  report.samples = n_independent + n_correlated;

  for (long i = 0; i < n_independent; ++i) {
    const PairPoint a{rng.ball_point(d, r_sample), rng.ball_point(d, r_sample)};
    const PairPoint b{rng.ball_point(d, r_sample), rng.ball_point(d, r_sample)};
    process(a, b, i);
  }

  const double step = 1e-6 * r_sample;
  for (long i = 0; i < n_correlated; ++i) {
    const PairPoint a{rng.ball_point(d, r_sample), rng.ball_point(d, r_sample)};
    PairPoint b{add(a.x1, scaled(rng.normal_vector(d), step)),
                add(a.x2, scaled(rng.normal_vector(d), step))};
    if (!maha) {
      clamp_to_ball(b.x1);
      clamp_to_ball(b.x2);
    }
    process(a, b, n_independent + i);
  }

  try {
    const Witness w =
        maha ? witness_mahalanobis(m, 1e-4, tol)
             : witness_bilinear(m, BallDomain{cert.radius, cert.dim}, 0.999, tol);
    report.witness_slope = w.achieved_slope;
  } catch (const ZeroMatrixError&) {
    report.witness_slope = 0.0;
  } catch (const ZeroRadiusError&) {
    report.witness_slope = 0.0;
  } catch (const UndefinedGradientError&) {
    report.witness_slope = 0.0;
  }

  return report;
}

struct GradcheckReport {
  long samples = 0;  // pairs drawn
  std::uint64_t seed = 0;
  double max_err = 0.0;  // max |analytic - central difference|, scaled
  long skipped = 0;      // ineligible pairs (near-zero distance)
};

// Standalone finite-difference audit of the analytic gradients on sampled
// pairs (h = 1e-6). Mahalanobis pairs at distance <= 0.1 are skipped.
inline GradcheckReport gradcheck(const LipschitzCertificate& cert,
                                 const SquareMatrix& m,
                                 const BallDomain& sample_domain, long samples,
                                 std::uint64_t seed, const Tolerances& tol = {}) {
  if (samples < 1) throw Error("samples must be >= 1");
  if (!m.finite()) throw NonFiniteError("matrix has non-finite entries");
  if (m.dim() != sample_domain.dim || m.dim() != cert.dim)
    throw DimensionMismatchError("matrix/domain/certificate dimensions disagree");

  const bool maha = cert.metric_kind == MetricKind::mahalanobis;
  const SquareMatrix sym = maha ? m.symmetrized() : SquareMatrix();
  const PsdFactor f = maha ? psd_factor(sym, tol.psd) : PsdFactor{};

  const auto value = [&](const PairPoint& p) {
    return maha ? mahalanobis(f, p) : bilinear(m, p);
  };

  GradcheckReport report;
  report.samples = samples;
  report.seed = seed;
  const std::size_t d = m.dim();
  Rng rng(seed);

  for (long i = 0; i < samples; ++i) {
    const PairPoint p{rng.ball_point(d, sample_domain.radius),
                      rng.ball_point(d, sample_domain.radius)};
    if (maha && !(mahalanobis(f, p) > 0.1)) {
      ++report.skipped;
      continue;
    }
    const PairGradient g = maha ? mahalanobis_grad(sym, f, p, tol.zero_distance)
                                : bilinear_grad(m, p);
    const PairGradient fd = finite_diff_gradient(value, p, 1e-6);
    for (std::size_t j = 0; j < d; ++j) {
      const double e1 = std::abs(g.g1[j] - fd.g1[j]) / (1.0 + std::abs(g.g1[j]));
      const double e2 = std::abs(g.g2[j] - fd.g2[j]) / (1.0 + std::abs(g.g2[j]));
      report.max_err = std::max({report.max_err, e1, e2});
    }
  }
  return report;
}

}  // namespace lipcert
