#pragma once

#include <string>
#include <vector>

#include "stylesplit/harness.hpp"

namespace stylesplit {

struct RenderedReport {
  std::string csv;
  std::string json;
  std::string markdown;
};

/// Deterministic serialisation of grid rows. Scores are rounded to two
/// decimals only in the markdown table.
RenderedReport render_report(const std::vector<GridRowReport>& rows);

std::string render_correlation_csv(const CorrelationReport& report);
std::string render_correlation_markdown(const CorrelationReport& report);

/// One JSON document per line.
std::string render_jsonl(const std::vector<nlohmann::json>& lines);

}  // namespace stylesplit
