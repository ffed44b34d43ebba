#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cogspan/agreement.hpp"
#include "cogspan/scorer.hpp"

namespace cogspan {

enum class RenderTarget : std::uint8_t { json, markdown, csv };

std::string_view to_string(RenderTarget target);
RenderTarget parse_render_target(std::string_view name);

/// Canonical report JSON; `report_from_json(report_to_json(r)) == r`.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view bytes);

/// Byte-deterministic rendering. Markdown and CSV list the categories in
/// canonical order followed by micro and macro rows, one P/R/F1 column
/// group per criterion, values fixed at three decimals.
std::string render_report(const EvalReport& report, RenderTarget target);

/// Degenerate categories are written as the string "degenerate".
std::string agreement_to_json(const AgreementReport& report);
std::string render_agreement_table(const AgreementReport& report);

}  // namespace cogspan
