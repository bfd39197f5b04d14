#include "shiftgen/report.hpp"

#include <cmath>
#include <limits>

#include "shiftgen/json_io.hpp"

namespace shiftgen {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

nlohmann::json IdentityReport::to_json() const {
  auto est = [](const MCEstimate& e) { return nlohmann::json{{"mean", e.mean()}, {"se", e.standard_error()}}; };
  nlohmann::json j = {{"identity", identity},
                      {"functional", functional},
                      {"h", h},
                      {"x", x ? nlohmann::json(*x) : nlohmann::json(nullptr)},
                      {"n", n},
                      {"left", est(left)},
                      {"right", est(right)},
                      {"z", std::isfinite(z) ? nlohmann::json(z) : nlohmann::json(z > 0 ? "inf" : "-inf")},
                      {"p_value", p_value},
                      {"verdict", std::string(to_string(verdict))},
                      {"seed", seed},
                      {"confidence", confidence},
                      {"workers", workers},
                      {"left_source", left_source},
                      {"right_source", right_source},
                      {"diagnostics", diagnostics}};
  return j;
}

void welch_verdict(IdentityReport& r) {
  const double ml = r.left.mean(), mr = r.right.mean();
  const double sl = r.left.standard_error(), sr = r.right.standard_error();
  const double den = std::sqrt(sl * sl + sr * sr);
  if (den > 0.0) {
    r.z = (ml - mr) / den;
  } else {
    r.z = ml == mr ? 0.0 : (ml > mr ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity());
  }
  r.p_value = std::isfinite(r.z) ? two_sided_p_value(r.z) : 0.0;
  const double scale = std::max(std::abs(ml), std::abs(mr));
  if (std::max(sl, sr) > 0.2 * scale) {
    r.verdict = Verdict::inconclusive;
    return;
  }
  r.verdict = std::abs(r.z) < normal_critical_value(r.confidence) ? Verdict::pass : Verdict::fail;
}

}  // namespace shiftgen
