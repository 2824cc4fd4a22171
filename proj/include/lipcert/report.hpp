#pragma once

#include <json.hpp>

#include "lipcert/certify.hpp"

namespace lipcert {

inline constexpr int kReportSchemaVersion = 1;

inline nlohmann::json tolerances_json(const Tolerances& t) {
  return {
      {"psd", t.psd},
      {"factor", t.factor},
      {"spectral", t.spectral},
      {"max_iter", t.max_iter},
      {"zero_distance", t.zero_distance},
      {"violation", t.violation},
  };
}

inline nlohmann::json audit_json(const AuditReport& r) {
  return {
      {"samples", r.samples},
      {"seed", r.seed},
      {"empirical_slope_sup", r.empirical_slope_sup},
      {"empirical_grad_sup", r.empirical_grad_sup},
      {"witness_slope", r.witness_slope},
      {"violation_count", r.violation_count},
      {"gradcheck_max_err", r.gradcheck_max_err},
  };
}

inline nlohmann::json gradcheck_json(const GradcheckReport& r) {
  return {
      {"samples", r.samples},
      {"seed", r.seed},
      {"max_err", r.max_err},
      {"skipped", r.skipped},
  };
}

// The report is a single JSON object: certificate fields at the top level,
// an optional audit/gradcheck subobject, timings last. Doubles serialize
// with shortest round-trip precision.
inline nlohmann::json report_json(const LipschitzCertificate& cert,
                                  const AuditReport* audit_report,
                                  const GradcheckReport* gradcheck_report,
                                  double timings_ms) {
  nlohmann::json j{
      {"schema_version", kReportSchemaVersion},
      {"metric", to_string(cert.metric_kind)},
      {"dim", cert.dim},
      {"k_theoretical", cert.k_theoretical},
      {"tolerances", tolerances_json(cert.tolerances)},
  };
  if (cert.metric_kind == MetricKind::mahalanobis) {
    j["factor_norm"] = cert.factor_norm;
    j["max_asymmetry"] = cert.max_asymmetry;
  } else {
    j["matrix_norm"] = cert.matrix_norm;
    j["radius"] = cert.radius;
  }
  if (audit_report) j["audit"] = audit_json(*audit_report);
  if (gradcheck_report) j["gradcheck"] = gradcheck_json(*gradcheck_report);
  j["timings_ms"] = timings_ms;
  return j;
}

}  // namespace lipcert
