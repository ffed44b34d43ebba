#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace cogspan {

/// The seven narrative categories, in canonical (reporting) order.
enum class Category : std::uint8_t {
  location,
  time,
  sensory,
  action,
  thought,
  emotion,
  social_interaction,
};

inline constexpr std::size_t kCategoryCount = 7;

inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::location, Category::time,    Category::sensory,
    Category::action,   Category::thought, Category::emotion,
    Category::social_interaction,
};

std::string_view to_string(Category category);

/// Exact match against the symbolic names; throws ValidationError otherwise.
Category parse_category(std::string_view name);

/// Lenient lookup used for model output: case-insensitive, spaces and
/// underscores ignored ("Social Interaction" -> social_interaction).
std::optional<Category> match_category_name(std::string_view name);

constexpr std::size_t index_of(Category category) {
  return static_cast<std::size_t>(category);
}

/// Fixed-size per-category table indexed by Category.
template <typename T>
using PerCategory = std::array<T, kCategoryCount>;

enum class SessionKind : std::uint8_t { zoom_training, self_practice };

std::string_view to_string(SessionKind kind);

struct DocumentMeta {
  std::string participant;
  SessionKind session_kind = SessionKind::zoom_training;
  std::int64_t session_index = 0;

  bool operator==(const DocumentMeta&) const = default;
};

struct Document {
  std::string id;
  std::string text;  // UTF-8
  DocumentMeta meta;

  bool operator==(const Document&) const = default;
};

/// Character interval [start, end) in Unicode scalar values.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  Category category = Category::location;
  std::string surface;

  std::size_t length() const { return end - start; }

  bool operator==(const Span&) const = default;
};

/// Canonical span order: (start, end, category).
bool span_less(const Span& a, const Span& b);

struct AnnotationSet {
  std::string doc_id;
  std::string annotator_id;
  std::vector<Span> spans;

  bool operator==(const AnnotationSet&) const = default;
};

inline constexpr std::string_view kGoldAnnotator = "gold";

struct Corpus {
  std::vector<Document> documents;
  std::vector<AnnotationSet> annotations;

  const Document* find_document(std::string_view id) const;

  /// Every AnnotationSet of one annotator, in file order.
  std::vector<AnnotationSet> annotations_by(std::string_view annotator_id) const;

  bool has_annotator(std::string_view annotator_id) const;

  bool operator==(const Corpus&) const = default;
};

struct Violation {
  std::string doc_id;
  std::string rule;
  std::string value;

  bool operator==(const Violation&) const = default;
};

/// Parses corpus JSON. Missing `surface` fields are reconstructed from the
/// offsets. Throws ParseError (malformed JSON, with line:column),
/// ValidationError (schema) or IntegrityError (offsets, references,
/// surface mismatch, duplicates).
Corpus parse_corpus(std::string_view bytes);

/// Schema-checked parse that keeps integrity problems in the result so
/// validate_corpus can list all of them.
Corpus parse_corpus_unchecked(std::string_view bytes);

/// Canonical JSON (2-space indent, fixed key order). Byte-deterministic.
std::string serialize_corpus(const Corpus& corpus);

nlohmann::ordered_json span_to_json(const Span& span);

/// Checks every type invariant; never throws on bad data.
std::vector<Violation> validate_corpus(const Corpus& corpus);

/// Span counts per category across one annotator's sets. Throws LookupError
/// if no AnnotationSet carries `annotator_id`.
PerCategory<std::size_t> category_histogram(const Corpus& corpus,
                                            std::string_view annotator_id);

/// Whitespace/punctuation tokenization where a bracketed upper-case
/// placeholder such as "[PERSON]" is a single token.
std::vector<std::string_view> tokenize(std::string_view text);

bool is_placeholder(std::string_view token);

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t characters = 0;
  std::size_t tokens = 0;
  std::size_t placeholders = 0;
  std::map<std::string, std::size_t> placeholder_counts;
};

CorpusStats corpus_stats(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Splits

enum class Partition : std::uint8_t { train, dev, test };

std::string_view to_string(Partition partition);
Partition parse_partition(std::string_view name);

struct SplitRatios {
  double train = 0.7;
  double dev = 0.1;
  double test = 0.2;

  double operator[](Partition p) const;
};

struct SplitAssignment {
  std::uint64_t seed = 0;
  SplitRatios ratios;
  std::map<std::string, Partition> assignment;

  /// Document ids of one partition, in corpus order.
  std::vector<std::string> members(const Corpus& corpus, Partition p) const;

  bool operator==(const SplitAssignment& other) const {
    return seed == other.seed && ratios.train == other.ratios.train &&
           ratios.dev == other.ratios.dev && ratios.test == other.ratios.test &&
           assignment == other.assignment;
  }
};

/// Document-level stratified split on the spans of `annotator_id`.
/// Throws InfeasibleError when there are fewer documents than non-zero
/// splits, ValidationError for bad ratios.
SplitAssignment stratified_split(const Corpus& corpus, SplitRatios ratios,
                                 std::uint64_t seed,
                                 std::string_view annotator_id = kGoldAnnotator);

/// Split sizes the splitter targets for `n` documents.
std::array<std::size_t, 3> split_targets(std::size_t n, SplitRatios ratios);

/// Largest |proportion_in_split - global_proportion| over categories and
/// non-empty splits.
double split_max_deviation(const Corpus& corpus, const SplitAssignment& split,
                           std::string_view annotator_id = kGoldAnnotator);

std::string serialize_split(const SplitAssignment& split);
SplitAssignment parse_split(std::string_view bytes);

}  // namespace cogspan
