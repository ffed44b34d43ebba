#include "cogspan/report.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cogspan/errors.hpp"

namespace cogspan {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(RenderTarget target) {
  switch (target) {
    case RenderTarget::json: return "json";
    case RenderTarget::markdown: return "markdown";
    case RenderTarget::csv: return "csv";
  }
  return "json";
}

RenderTarget parse_render_target(std::string_view name) {
  if (name == "json") return RenderTarget::json;
  if (name == "markdown" || name == "md") return RenderTarget::markdown;
  if (name == "csv") return RenderTarget::csv;
  throw InputError(fmt::format("unknown render format '{}'", name));
}

namespace {

ordered_json scores_json(const Scores& s) {
  ordered_json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  return j;
}

void put_counts(ordered_json& j, const CategoryCounts& c) {
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
}

Scores scores_from(const json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(),
          j.at("f1").get<double>()};
}

CategoryCounts counts_from(const json& j) {
  return {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(),
          j.at("fn").get<std::size_t>()};
}

std::string fixed3(double v) { return fmt::format("{:.3f}", v); }

}  // namespace

std::string report_to_json(const EvalReport& report) {
  ordered_json root;
  root["documents"] = report.documents;
  root["criteria"] = ordered_json::object();
  for (const auto& [criterion, result] : report.criteria) {
    ordered_json c;
    c["per_category"] = ordered_json::object();
    for (Category cat : kAllCategories) {
      const CategoryResult& r = result.per_category[index_of(cat)];
      ordered_json j;
      put_counts(j, r.counts);
      j["precision"] = r.scores.precision;
      j["recall"] = r.scores.recall;
      j["f1"] = r.scores.f1;
      j["in_macro"] = r.in_macro;
      c["per_category"][std::string(to_string(cat))] = std::move(j);
    }
    ordered_json micro = scores_json(result.micro);
    put_counts(micro, result.micro_counts);
    c["micro"] = std::move(micro);
    ordered_json macro = scores_json(result.macro);
    macro["categories"] = result.macro_categories;
    c["macro"] = std::move(macro);
    root["criteria"][std::string(to_string(criterion))] = std::move(c);
  }
  ordered_json errors;
  errors["exact"] = report.errors.exact;
  errors["boundary_error"] = report.errors.boundary_error;
  errors["category_confusion"] = report.errors.category_confusion;
  errors["spurious"] = report.errors.spurious;
  errors["miss"] = report.errors.miss;
  root["error_taxonomy"] = std::move(errors);
  return root.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed report: {}", e.what()));
  }
  try {
    EvalReport report;
    report.documents = root.at("documents").get<std::size_t>();
    for (const auto& [name, c] : root.at("criteria").items()) {
      CriterionResult result;
      for (Category cat : kAllCategories) {
        const json& j = c.at("per_category").at(std::string(to_string(cat)));
        CategoryResult& r = result.per_category[index_of(cat)];
        r.counts = counts_from(j);
        r.scores = scores_from(j);
        r.in_macro = j.at("in_macro").get<bool>();
      }
      result.micro = scores_from(c.at("micro"));
      result.micro_counts = counts_from(c.at("micro"));
      result.macro = scores_from(c.at("macro"));
      result.macro_categories = c.at("macro").at("categories").get<std::size_t>();
      report.criteria.emplace(parse_criterion(name), result);
    }
    const json& e = root.at("error_taxonomy");
    report.errors = {e.at("exact").get<std::size_t>(),
                     e.at("boundary_error").get<std::size_t>(),
                     e.at("category_confusion").get<std::size_t>(),
                     e.at("spurious").get<std::size_t>(),
                     e.at("miss").get<std::size_t>()};
    return report;
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("report does not match schema: {}", e.what()));
  }
}

namespace {

struct Row {
  std::string label;
  std::string support;
  std::vector<Scores> cells;  // one per criterion
};

std::vector<Row> table_rows(const EvalReport& report) {
  std::vector<Row> rows;
  std::size_t total_support = 0;
  for (Category cat : kAllCategories) {
    Row row{std::string(to_string(cat)), "", {}};
    std::size_t support = 0;
    for (const auto& [criterion, result] : report.criteria) {
      const CategoryResult& r = result.per_category[index_of(cat)];
      row.cells.push_back(r.scores);
      support = r.counts.support();
    }
    total_support += support;
    row.support = std::to_string(support);
    rows.push_back(std::move(row));
  }
  Row micro{"micro", std::to_string(total_support), {}};
  Row macro{"macro", std::to_string(total_support), {}};
  for (const auto& [criterion, result] : report.criteria) {
    micro.cells.push_back(result.micro);
    macro.cells.push_back(result.macro);
  }
  rows.push_back(std::move(micro));
  rows.push_back(std::move(macro));
  return rows;
}

std::string capitalized(std::string_view s) {
  std::string out(s);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') {
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  }
  return out;
}

std::string render_markdown(const EvalReport& report) {
  std::string out = "| Category | Support |";
  std::string rule = "|---|---:|";
  for (const auto& [criterion, result] : report.criteria) {
    const std::string name = capitalized(to_string(criterion));
    out += fmt::format(" {0} P | {0} R | {0} F1 |", name);
    rule += "---:|---:|---:|";
  }
  out += "\n" + rule + "\n";
  for (const Row& row : table_rows(report)) {
    out += fmt::format("| {} | {} |", row.label, row.support);
    for (const Scores& s : row.cells) {
      out += fmt::format(" {} | {} | {} |", fixed3(s.precision), fixed3(s.recall),
                         fixed3(s.f1));
    }
    out += '\n';
  }
  const ErrorTaxonomy& e = report.errors;
  out += "\n| Error class | Count |\n|---|---:|\n";
  out += fmt::format("| exact | {} |\n", e.exact);
  out += fmt::format("| boundary_error | {} |\n", e.boundary_error);
  out += fmt::format("| category_confusion | {} |\n", e.category_confusion);
  out += fmt::format("| spurious | {} |\n", e.spurious);
  out += fmt::format("| miss | {} |\n", e.miss);
  return out;
}

std::string render_csv(const EvalReport& report) {
  std::string out = "row,support";
  for (const auto& [criterion, result] : report.criteria) {
    out += fmt::format(",{0}_precision,{0}_recall,{0}_f1", to_string(criterion));
  }
  out += '\n';
  for (const Row& row : table_rows(report)) {
    out += row.label + "," + row.support;
    for (const Scores& s : row.cells) {
      out += fmt::format(",{},{},{}", fixed3(s.precision), fixed3(s.recall),
                         fixed3(s.f1));
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string render_report(const EvalReport& report, RenderTarget target) {
  switch (target) {
    case RenderTarget::json: return report_to_json(report);
    case RenderTarget::markdown: return render_markdown(report);
    case RenderTarget::csv: return render_csv(report);
  }
  return report_to_json(report);
}

std::string agreement_to_json(const AgreementReport& report) {
  ordered_json root;
  root["entity_f1"] = report.entity_f1;
  root["kappa_per_category"] = ordered_json::object();
  for (Category cat : kAllCategories) {
    const auto& k = report.kappa_per_category[index_of(cat)];
    root["kappa_per_category"][std::string(to_string(cat))] =
        k ? ordered_json(*k) : ordered_json("degenerate");
  }
  root["kappa_macro"] =
      report.kappa_macro ? ordered_json(*report.kappa_macro) : ordered_json(nullptr);
  return root.dump(2) + "\n";
}

std::string render_agreement_table(const AgreementReport& report) {
  std::string out = "| Measure | Value |\n|---|---:|\n";
  out += fmt::format("| entity F1 | {} |\n", fixed3(report.entity_f1));
  for (Category cat : kAllCategories) {
    const auto& k = report.kappa_per_category[index_of(cat)];
    out += fmt::format("| kappa {} | {} |\n", to_string(cat),
                       k ? fixed3(*k) : "degenerate");
  }
  out += fmt::format("| kappa macro | {} |\n",
                     report.kappa_macro ? fixed3(*report.kappa_macro) : "n/a");
  return out;
}

}  // namespace cogspan
