#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace franson::anchors {

/// A published reference value with its quoted uncertainty.
struct Anchor {
  std::string id;
  double value;
  double sigma;
  /// Compared for context only; no pass/fail.
  bool report_only;
  /// Which measurement the number comes from.
  std::string reference;
};

enum class Status { kMatch, kMismatch, kReportOnly };

std::string_view status_name(Status s);

/// The fixed reference table.
const std::vector<Anchor>& reference_values();

/// Throws std::out_of_range for an unknown id.
const Anchor& anchor(std::string_view id);

struct Comparison {
  Anchor anchor;
  double value;
  double sigma;
  Status status;
  std::string note;

  nlohmann::json to_json() const;
};

/// Match when |value - anchor| <= 3 sqrt(sigma^2 + sigma_anchor^2); report-only
/// anchors never pass or fail. `force_report_only` downgrades one comparison,
/// e.g. for an idealized model value that bounds the measurement.
Comparison compare_to_anchor(double value, double sigma, std::string_view id, std::string note = {},
                             bool force_report_only = false);

/// Markdown table of comparisons.
std::string markdown_table(const std::vector<Comparison>& rows);

}  // namespace franson::anchors
