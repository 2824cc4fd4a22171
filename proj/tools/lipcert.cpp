// lipcert: certified Lipschitz constants for Mahalanobis distances and
// bounded-space bilinear forms, with empirical audits of the certificates.
//
// Exit codes:
//   0  success (audits found zero violations)
//   1  usage, I/O, or parse error
//   2  matrix not positive semi-definite
//   3  audit contradicted the certificate (or gradient check failed)
//   4  spectral-norm iteration did not converge

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lipcert/certify.hpp"
#include "lipcert/errors.hpp"
#include "lipcert/linalg.hpp"
#include "lipcert/matrix_io.hpp"
#include "lipcert/metrics.hpp"
#include "lipcert/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotPsd = 2;
constexpr int kExitViolation = 3;
constexpr int kExitNoConvergence = 4;

struct Options {
  std::string metric = "mahalanobis";
  std::string matrix_path;
  double radius = 0.0;
  long samples = 10000;
  std::uint64_t seed = 42;
  double sample_radius = 0.0;  // 0 = metric default
  std::string output_path;
  double gradcheck_tol = 0.0;  // 0 = metric default
  lipcert::Tolerances tol;
};

void add_matrix_options(CLI::App* cmd, Options& o, bool with_metric) {
  if (with_metric)
    cmd->add_option("--metric", o.metric, "Metric family")
        ->check(CLI::IsMember({"mahalanobis", "bilinear"}))
        ->required();
  cmd->add_option("--matrix", o.matrix_path, "CSV matrix file")->required();
}

void add_certify_options(CLI::App* cmd, Options& o) {
  add_matrix_options(cmd, o, true);
  cmd->add_option("--radius", o.radius,
                  "Domain bound R (required for --metric bilinear)");
  cmd->add_option("--tol-psd", o.tol.psd, "PSD pivot tolerance");
  cmd->add_option("--tol-factor", o.tol.factor, "Factor reconstruction tolerance");
  cmd->add_option("--tol-spectral", o.tol.spectral, "Spectral-norm tolerance");
  cmd->add_option("--max-iter", o.tol.max_iter, "Power-iteration cap");
  cmd->add_option("--output", o.output_path, "Write the JSON report here instead of stdout");
}

void add_sampling_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--samples", o.samples, "Sampled quadruples/pairs")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Sampling seed")->envname("LIPCERT_SEED");
  cmd->add_option("--sample-radius", o.sample_radius,
                  "Sampling ball radius (default: 1 for mahalanobis, the "
                  "certified R for bilinear; sampling outside the certified "
                  "ball stresses the bilinear bound's domain premise)");
}

// radius required iff metric = bilinear
void validate_radius(const CLI::App* cmd, const Options& o) {
  const bool has_radius = cmd->count("--radius") > 0;
  if (o.metric == "bilinear" && !has_radius)
    throw lipcert::Error("--radius is required for --metric bilinear");
  if (o.metric == "mahalanobis" && has_radius)
    throw lipcert::Error("--radius only applies to --metric bilinear");
  if (has_radius && !(o.radius >= 0.0))
    throw lipcert::Error("--radius must be nonnegative");
}

lipcert::LipschitzCertificate make_certificate(const Options& o,
                                               const lipcert::SquareMatrix& m) {
  if (o.metric == "mahalanobis") return lipcert::certify_mahalanobis(m, o.tol);
  return lipcert::certify_bilinear(
      m, lipcert::BallDomain{o.radius, m.dim()}, o.tol);
}

lipcert::BallDomain sampling_domain(const Options& o,
                                    const lipcert::LipschitzCertificate& cert) {
  lipcert::BallDomain d = lipcert::default_sample_domain(cert);
  if (o.sample_radius > 0.0) d.radius = o.sample_radius;
  return d;
}

void emit(const nlohmann::json& j, const Options& o) {
  if (o.output_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(o.output_path, std::ios::binary);
  if (!out) throw lipcert::IoError("cannot open '" + o.output_path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw lipcert::IoError("write failure on '" + o.output_path + "'");
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   t0)
      .count();
}

int run(const CLI::App& app, CLI::App* certify_cmd, CLI::App* audit_cmd,
        CLI::App* gradcheck_cmd, CLI::App* dump_cmd, Options& o,
        std::string& dump_output) {
  using namespace lipcert;

  if (app.got_subcommand(dump_cmd)) {
    const SquareMatrix m = load_matrix(o.matrix_path);
    if (dump_output.empty())
      std::cout << matrix_to_csv(m);
    else
      dump_matrix(m, dump_output);
    return kExitOk;
  }

  const auto t0 = std::chrono::steady_clock::now();

  if (app.got_subcommand(certify_cmd)) {
    validate_radius(certify_cmd, o);
    const SquareMatrix m = load_matrix(o.matrix_path);
    const LipschitzCertificate cert = make_certificate(o, m);
    emit(report_json(cert, nullptr, nullptr, elapsed_ms(t0)), o);
    return kExitOk;
  }

  if (app.got_subcommand(audit_cmd)) {
    validate_radius(audit_cmd, o);
    const SquareMatrix m = load_matrix(o.matrix_path);
    const LipschitzCertificate cert = make_certificate(o, m);
    const AuditReport report =
        audit(cert, m, sampling_domain(o, cert),
              AuditConfig{o.samples, o.seed}, o.tol);
    emit(report_json(cert, &report, nullptr, elapsed_ms(t0)), o);
    const double limit = cert.k_theoretical * (1.0 + o.tol.violation);
    if (report.violation_count > 0 || report.witness_slope > limit) {
      std::cerr << "lipcert: audit found " << report.violation_count
                << " slope violation(s) of k = " << cert.k_theoretical << "\n";
      return kExitViolation;
    }
    return kExitOk;
  }

  if (app.got_subcommand(gradcheck_cmd)) {
    validate_radius(gradcheck_cmd, o);
    const SquareMatrix m = load_matrix(o.matrix_path);
    const LipschitzCertificate cert = make_certificate(o, m);
    const GradcheckReport report = gradcheck(
        cert, m, sampling_domain(o, cert), o.samples, o.seed, o.tol);
    emit(report_json(cert, nullptr, &report, elapsed_ms(t0)), o);
    const double tol =
        o.gradcheck_tol > 0.0 ? o.gradcheck_tol
                              : (o.metric == "mahalanobis" ? 1e-5 : 1e-9);
    if (report.max_err > tol) {
      std::cerr << "lipcert: gradient check failed: max error " << report.max_err
                << " > " << tol << "\n";
      return kExitViolation;
    }
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Certified Lipschitz constants for Mahalanobis distances and "
      "bounded-space bilinear forms"};
  app.require_subcommand(1);

  Options o;
  std::string dump_output;

  CLI::App* certify_cmd =
      app.add_subcommand("certify", "Compute the certified constant k");
  add_certify_options(certify_cmd, o);

  CLI::App* audit_cmd = app.add_subcommand(
      "audit", "Certify, then audit the certificate on sampled quadruples");
  add_certify_options(audit_cmd, o);
  add_sampling_options(audit_cmd, o);

  CLI::App* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "Check analytic gradients against central differences");
  add_certify_options(gradcheck_cmd, o);
  add_sampling_options(gradcheck_cmd, o);
  gradcheck_cmd->add_option("--gradcheck-tol", o.gradcheck_tol,
                            "Failure threshold (default 1e-5 mahalanobis, "
                            "1e-9 bilinear)");

  CLI::App* dump_cmd = app.add_subcommand(
      "dump", "Parse a matrix file and re-emit it at full precision");
  add_matrix_options(dump_cmd, o, false);
  dump_cmd->add_option("--output", dump_output, "Output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return run(app, certify_cmd, audit_cmd, gradcheck_cmd, dump_cmd, o,
               dump_output);
  } catch (const lipcert::NotPsdError& e) {
    std::cerr << "lipcert: error: not positive semi-definite: " << e.what() << "\n";
    return kExitNotPsd;
  } catch (const lipcert::NoConvergenceError& e) {
    std::cerr << "lipcert: error: " << e.what() << "\n";
    return kExitNoConvergence;
  } catch (const lipcert::Error& e) {
    std::cerr << "lipcert: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "lipcert: error: " << e.what() << "\n";
    return kExitUsage;
  }
}
