#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cogspan/corpus.hpp"

namespace cogspan {

/// One (category, text) pair as produced by a model, before grounding.
struct ExtractionItem {
  Category category = Category::location;
  std::string text;
  std::optional<std::size_t> occurrence;  // 1-based among equal surfaces

  bool operator==(const ExtractionItem&) const = default;
};

/// Compact JSON array of {"category", "text"} objects.
std::string serialize_items(const std::vector<ExtractionItem>& items);

struct CategoryDefinition {
  Category category = Category::location;
  std::string description;
  std::vector<std::string> examples;
};

using CategorySchema = std::vector<CategoryDefinition>;

/// Built-in definitions with their illustrative examples.
const CategorySchema& default_schema();

/// Prompt template with three sections: the instruction (uses
/// {{definitions}} and {{examples}}), one exemplar block (uses {{index}},
/// {{input}}, {{output}}) and the user message (uses {{input}}).
struct PromptTemplate {
  std::string version;
  std::string instruction;
  std::string example;
  std::string input;

  /// Sections start with a line "@@instruction", "@@example" or "@@input";
  /// a leading "# <version>" line names the template. Throws SchemaError.
  static PromptTemplate parse(std::string_view text);

  static const PromptTemplate& builtin();
};

struct PromptRecord {
  std::string instruction;
  std::string input;
  std::optional<std::string> response;

  bool operator==(const PromptRecord&) const = default;
};

struct Exemplar {
  std::string input;
  std::vector<ExtractionItem> response;

  bool operator==(const Exemplar&) const = default;
};

inline constexpr std::size_t kExemplarCount = 5;

struct ExemplarSet {
  std::vector<Exemplar> exemplars;

  /// Throws SchemaError unless there are exactly five exemplars whose
  /// responses together use all seven categories.
  void validate() const;
};

/// `[{"input": str, "output": [{"category", "text"}, ...]}, ...]`.
ExemplarSet parse_exemplars(std::string_view bytes);
const ExemplarSet& builtin_exemplars();

/// Renders the definition list, one "- name: description" line per category
/// in canonical order. Throws SchemaError if a category is missing.
std::string render_definitions(const CategorySchema& schema);

PromptRecord build_zero_shot(const Document& doc,
                             const CategorySchema& schema = default_schema(),
                             const PromptTemplate& tmpl = PromptTemplate::builtin());

PromptRecord build_few_shot(const Document& doc, const ExemplarSet& exemplars,
                            const CategorySchema& schema = default_schema(),
                            const PromptTemplate& tmpl = PromptTemplate::builtin());

/// Sentence ranges [start, end) in scalar offsets. A boundary falls after a
/// run of '.', '!' or '?' that is followed by whitespace, unless one of
/// `keep_together` crosses it. Surrounding whitespace is excluded.
std::vector<std::pair<std::size_t, std::size_t>> split_sentences(
    std::string_view text, std::span<const Span> keep_together = {});

struct SftOptions {
  bool sentences = false;
  std::string annotator = std::string(kGoldAnnotator);
};

/// One record per partition document (or per sentence with
/// `options.sentences`), in corpus order. The response lists gold spans in
/// (start, end, category) order. Throws DataError naming documents that
/// lack gold annotations.
std::vector<PromptRecord> export_sft(
    const Corpus& corpus, const SplitAssignment& split, Partition partition,
    const SftOptions& options = {},
    const CategorySchema& schema = default_schema(),
    const PromptTemplate& tmpl = PromptTemplate::builtin());

/// JSON Lines with {"instruction", "input", "output"} per record.
std::string write_sft(const std::vector<PromptRecord>& records);
std::vector<PromptRecord> read_sft(std::string_view bytes);

}  // namespace cogspan
