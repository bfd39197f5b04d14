#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "shiftgen/estimate.hpp"

namespace shiftgen {

enum class Verdict { pass, fail, inconclusive };

std::string_view to_string(Verdict v);

/// Outcome of comparing two independent Monte Carlo estimates of the same quantity.
struct IdentityReport {
  std::string identity;
  nlohmann::json functional;
  std::vector<double> h;
  std::optional<double> x;
  std::size_t n = 0;
  MCEstimate left;
  MCEstimate right;
  double z = 0.0;
  double p_value = 1.0;
  Verdict verdict = Verdict::inconclusive;
  double confidence = 0.99;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  nlohmann::json left_source;
  nlohmann::json right_source;
  nlohmann::json diagnostics = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Welch statistic and verdict: inconclusive when either SE exceeds 20% of the larger |mean|,
/// otherwise pass iff |z| is below the two-sided critical value. When both SEs are zero the
/// means must agree exactly (z = 0) or the verdict is fail.
void welch_verdict(IdentityReport& report);

}  // namespace shiftgen
