// Acceptance suite: one pass/fail line per criterion. Exits nonzero if any
// criterion fails. The CLI path is taken from LIPCERT_BIN (set by ctest).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipcert/certify.hpp"
#include "lipcert/errors.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/metrics.hpp"

#include "subprocess.hpp"
#include "test_util.hpp"

using namespace lipcert;
using nlohmann::json;
using test_util::random_matrix;
using test_util::random_psd;
using test_util::rel_close;

namespace {

int g_failures = 0;

void report_line(int idx, bool pass, const std::string& what,
                 const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << idx << ": "
            << what;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!pass) ++g_failures;
}

struct MahaCase {
  SquareMatrix m;
  LipschitzCertificate cert;
  AuditReport audit_report;
};

constexpr int kMatrixCount = 100;
constexpr long kSamplesPerMatrix = 10000;

// Criteria 1, 2 and 7 share these matrices: d cycles 1..8, G entries
// uniform in [-1, 1], M = G^T G, audit seeds fixed per index.
std::vector<MahaCase> run_mahalanobis_suite(double& elapsed_s) {
  std::vector<MahaCase> cases;
  cases.reserve(kMatrixCount);
  Rng gen(20240801);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < kMatrixCount; ++i) {
    const std::size_t d = 1 + i % 8;
    MahaCase c{random_psd(gen, d), {}, {}};
    c.cert = certify_mahalanobis(c.m);
    c.audit_report =
        audit(c.cert, c.m, default_sample_domain(c.cert),
              AuditConfig{kSamplesPerMatrix, 1000 + static_cast<std::uint64_t>(i)});
    cases.push_back(std::move(c));
  }
  elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count();
  return cases;
}

void criterion1_mahalanobis_soundness(const std::vector<MahaCase>& cases,
                                 double elapsed_s) {
  long violations = 0;
  long quadruples = 0;
  int sup_breaches = 0;
  for (const auto& c : cases) {
    violations += c.audit_report.violation_count;
    quadruples += c.audit_report.samples;
    const double limit = c.cert.k_theoretical * (1.0 + 1e-9);
    if (c.audit_report.empirical_slope_sup > limit) ++sup_breaches;
    if (c.audit_report.empirical_grad_sup > limit) ++sup_breaches;
  }
  std::ostringstream detail;
  detail << kMatrixCount << " matrices, " << quadruples << " quadruples, "
         << violations << " violations, " << elapsed_s << " s";
  report_line(1, violations == 0 && sup_breaches == 0 && elapsed_s < 30.0,
              "mahalanobis soundness, zero slope violations of sqrt(2)|L|",
              detail.str());
}

void criterion2_mahalanobis_tightness(const std::vector<MahaCase>& cases) {
  int eligible = 0;
  int misses = 0;
  double worst_ratio = 1.0;
  for (const auto& c : cases) {
    const double k = c.cert.k_theoretical;
    if (!(k > 1e-8)) continue;
    ++eligible;
    const Witness w = witness_mahalanobis(c.m, 1e-4);
    worst_ratio = std::min(worst_ratio, w.achieved_slope / k);
    if (!(w.achieved_slope >= 0.999 * k)) ++misses;
  }
  std::ostringstream detail;
  detail << eligible << " matrices, worst slope/k = " << worst_ratio;
  report_line(2, eligible > 0 && misses == 0,
              "mahalanobis tightness, witness slope >= 0.999 k", detail.str());
}

void criterion3_bilinear() {
  Rng gen(513);
  const double radii[] = {0.5, 1.0, 10.0};
  long violations = 0;
  int witness_misses = 0;
  int sup_breaches = 0;
  double worst_ratio = 1.0;
  for (int i = 0; i < kMatrixCount; ++i) {
    const std::size_t d = 1 + i % 8;
    const SquareMatrix m = random_matrix(gen, d);
    const BallDomain dom{radii[i % 3], d};
    const LipschitzCertificate cert = certify_bilinear(m, dom);
    const AuditReport r =
        audit(cert, m, default_sample_domain(cert),
              AuditConfig{kSamplesPerMatrix, 3000 + static_cast<std::uint64_t>(i)});
    violations += r.violation_count;
    const double limit = cert.k_theoretical * (1.0 + 1e-9);
    if (r.empirical_slope_sup > limit) ++sup_breaches;
    if (r.empirical_grad_sup > limit) ++sup_breaches;
    const Witness w = witness_bilinear(m, dom);
    worst_ratio = std::min(worst_ratio, w.achieved_slope / cert.k_theoretical);
    if (!(w.achieved_slope >= 0.99 * cert.k_theoretical)) ++witness_misses;
  }
  std::ostringstream detail;
  detail << kMatrixCount << " matrices, R in {0.5,1,10}, " << violations
         << " violations, worst witness slope/k = " << worst_ratio;
  report_line(3, violations == 0 && witness_misses == 0 && sup_breaches == 0,
              "bilinear soundness and tightness for sqrt(2)|M|R", detail.str());
}

void criterion4_gradient_correctness() {
  Rng gen(907);
  double maha_max = 0.0;
  int checked = 0;
  while (checked < 1000) {
    const std::size_t d = 1 + checked % 8;
    const SquareMatrix m = random_psd(gen, d);
    const PsdFactor f = psd_factor(m);
    const PairPoint p{gen.ball_point(d, 1.0), gen.ball_point(d, 1.0)};
    if (!(mahalanobis(f, p) > 0.1)) continue;
    ++checked;
    const PairGradient g = mahalanobis_grad(m, f, p);
    const PairGradient fd = finite_diff_gradient(
        [&](const PairPoint& q) { return mahalanobis(f, q); }, p, 1e-6);
    for (std::size_t i = 0; i < d; ++i) {
      maha_max = std::max(
          maha_max, std::abs(g.g1[i] - fd.g1[i]) / (1.0 + std::abs(g.g1[i])));
      maha_max = std::max(
          maha_max, std::abs(g.g2[i] - fd.g2[i]) / (1.0 + std::abs(g.g2[i])));
    }
  }

  double bil_max = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = 1 + t % 8;
    const SquareMatrix m = random_matrix(gen, d);
    const PairPoint p{gen.ball_point(d, 1.0), gen.ball_point(d, 1.0)};
    const PairGradient g = bilinear_grad(m, p);
    const PairGradient fd = finite_diff_gradient(
        [&](const PairPoint& q) { return bilinear(m, q); }, p, 1e-6);
    for (std::size_t i = 0; i < d; ++i) {
      bil_max = std::max(bil_max, std::abs(g.g1[i] - fd.g1[i]));
      bil_max = std::max(bil_max, std::abs(g.g2[i] - fd.g2[i]));
    }
  }

  std::ostringstream detail;
  detail << "mahalanobis max err " << maha_max << " (tol 1e-5), bilinear max err "
         << bil_max << " (tol 1e-9)";
  report_line(4, maha_max <= 1e-5 && bil_max <= 1e-9,
              "analytic gradients match central differences", detail.str());
}

void criterion5_closed_form() {
  const double k_id = certify_mahalanobis(SquareMatrix::identity(2)).k_theoretical;
  const double k_id5 = certify_mahalanobis(SquareMatrix::identity(5)).k_theoretical;
  const double k_diag =
      certify_mahalanobis(SquareMatrix{{4, 0}, {0, 1}}).k_theoretical;
  const double k_nil =
      certify_bilinear(SquareMatrix{{0, 2}, {0, 0}}, BallDomain{3.0, 2}).k_theoretical;

  const bool ok = std::abs(k_id - kSqrt2) <= 1e-12 &&
                  std::abs(k_id5 - kSqrt2) <= 1e-12 &&
                  std::abs(k_diag - 2.0 * kSqrt2) <= 1e-10 &&
                  std::abs(k_nil - 6.0 * kSqrt2) <= 1e-10;
  std::ostringstream detail;
  detail << "k(I) = " << k_id << ", k(diag(4,1)) = " << k_diag
         << ", k(nilpotent, R=3) = " << k_nil;
  report_line(5, ok, "closed-form constants", detail.str());
}

void criterion6_scaling_laws() {
  Rng gen(41);
  bool ok = true;
  double worst = 0.0;
  const auto track = [&](double a, double b) {
    const double rel = std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
    worst = std::max(worst, rel);
    if (!rel_close(a, b, 1e-8)) ok = false;
  };
  for (int t = 0; t < 5; ++t) {
    const std::size_t d = 2 + t;
    const SquareMatrix m = random_psd(gen, d);
    const double k = certify_mahalanobis(m).k_theoretical;
    const SquareMatrix b = random_matrix(gen, d);
    const BallDomain dom{1.5, d};
    const double kb = certify_bilinear(b, dom).k_theoretical;
    for (double c : {0.25, 4.0}) {
      track(certify_mahalanobis(m.scaled_by(c)).k_theoretical, std::sqrt(c) * k);
      track(certify_bilinear(b.scaled_by(c), dom).k_theoretical, std::abs(c) * kb);
      track(certify_bilinear(b, BallDomain{c * dom.radius, d}).k_theoretical,
            c * kb);
    }
  }
  std::ostringstream detail;
  detail << "c in {0.25, 4}, worst relative deviation " << worst;
  report_line(6, ok, "scaling laws for both certificates", detail.str());
}

void criterion7_cross_check(const std::vector<MahaCase>& cases) {
  int breaches = 0;
  double worst = 0.0;
  for (const auto& c : cases) {
    const double fn2 = c.cert.factor_norm * c.cert.factor_norm;
    const double mn = spectral_norm(c.m.symmetrized());
    const double rel =
        std::abs(fn2 - mn) / std::max({std::abs(fn2), std::abs(mn), 1e-300});
    worst = std::max(worst, rel);
    if (!rel_close(fn2, mn, 1e-8)) ++breaches;
  }
  std::ostringstream detail;
  detail << "worst relative deviation " << worst;
  report_line(7, breaches == 0, "|L|^2 equals |M| on all soundness-suite matrices",
              detail.str());
}

void criterion8_cli_contract() {
  using test_util::cli_path;
  using test_util::run_command;
  using test_util::write_temp_file;

  const std::string id2 = write_temp_file("lipcert_acc_id2.csv", "1,0\n0,1\n");
  const std::string nil = write_temp_file("lipcert_acc_nil.csv", "0,2\n0,0\n");
  const std::string indef = write_temp_file("lipcert_acc_indef.csv", "1,2\n2,1\n");

  bool ok = true;
  std::string failure;

  const auto expect = [&](bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      failure = what;
    }
  };

  try {
    const auto r1 =
        run_command(cli_path() + " certify --metric mahalanobis --matrix " + id2);
    expect(r1.exit_code == 0, "identity certify exit code");
    if (r1.exit_code == 0) {
      const json j = json::parse(r1.out);
      expect(j["schema_version"] == 1, "identity schema_version");
      expect(j["metric"] == "mahalanobis", "identity metric field");
      expect(j["dim"] == 2, "identity dim field");
      expect(std::abs(j["k_theoretical"].get<double>() - kSqrt2) <= 1e-12,
             "identity k_theoretical");
      expect(std::abs(j["factor_norm"].get<double>() - 1.0) <= 1e-12,
             "identity factor_norm");
    }

    const auto r2 = run_command(cli_path() + " certify --metric bilinear --matrix " +
                                nil + " --radius 3");
    expect(r2.exit_code == 0, "nilpotent certify exit code");
    if (r2.exit_code == 0) {
      const json j = json::parse(r2.out);
      expect(j["metric"] == "bilinear", "nilpotent metric field");
      expect(std::abs(j["k_theoretical"].get<double>() - 6.0 * kSqrt2) <= 1e-10,
             "nilpotent k_theoretical");
      expect(j["radius"] == 3.0, "nilpotent radius field");
    }

    const auto r3 =
        run_command(cli_path() + " certify --metric mahalanobis --matrix " + indef);
    expect(r3.exit_code == 2, "indefinite exit code");
    expect(r3.err.find("not positive semi-definite") != std::string::npos,
           "indefinite stderr message");
  } catch (const std::exception& e) {
    ok = false;
    failure = e.what();
  }

  report_line(8, ok, "CLI golden invocations and exit codes",
              ok ? "certify id, bilinear nilpotent, indefinite rejection" : failure);
}

}  // namespace

int main() {
  try {
    double elapsed_s = 0.0;
    const std::vector<MahaCase> cases = run_mahalanobis_suite(elapsed_s);
    criterion1_mahalanobis_soundness(cases, elapsed_s);
    criterion2_mahalanobis_tightness(cases);
    criterion3_bilinear();
    criterion4_gradient_correctness();
    criterion5_closed_form();
    criterion6_scaling_laws();
    criterion7_cross_check(cases);
    criterion8_cli_contract();
  } catch (const std::exception& e) {
    std::cerr << "[FAIL] acceptance suite aborted: " << e.what() << std::endl;
    return 1;
  }

  if (g_failures) {
    std::cerr << g_failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
