#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "cogspan/corpus.hpp"

namespace cogspan {

enum class MatchCriterion : std::uint8_t { strict, lenient };

std::string_view to_string(MatchCriterion criterion);
MatchCriterion parse_criterion(std::string_view name);

/// Number of shared characters between two intervals.
std::size_t overlap_length(const Span& a, const Span& b);

/// Whether `pred` may be matched to `gold` under `criterion`.
bool compatible(const Span& gold, const Span& pred, MatchCriterion criterion);

struct SpanPair {
  std::size_t gold = 0;  // index into the gold input
  std::size_t pred = 0;  // index into the pred input

  bool operator==(const SpanPair&) const = default;
};

struct MatchResult {
  std::vector<SpanPair> pairs;             // ordered by gold index
  std::vector<std::size_t> unmatched_gold;  // ascending
  std::vector<std::size_t> unmatched_pred;  // ascending
};

/// One-to-one maximum-cardinality matching of spans from a single document.
///
/// Candidate pairs are sorted by (overlap length desc, gold start asc, pred
/// start asc) and taken greedily; augmenting paths then lift the greedy
/// matching to maximum cardinality when it falls short. The result does not
/// depend on input order beyond which of two identical spans is reported.
MatchResult match_spans(std::span<const Span> gold, std::span<const Span> pred,
                        MatchCriterion criterion);

/// As above; throws InputError when the two sets belong to different
/// documents.
MatchResult match_spans(const AnnotationSet& gold, const AnnotationSet& pred,
                        MatchCriterion criterion);

struct CategoryCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t support() const { return tp + fn; }
  std::size_t predicted() const { return tp + fp; }

  CategoryCounts& operator+=(const CategoryCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const CategoryCounts&) const = default;
};

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const Scores&) const = default;
};

/// Zero-denominator precision/recall are 0; F1 is 0 when p + r = 0.
Scores scores_from_counts(const CategoryCounts& counts);

struct CategoryResult {
  CategoryCounts counts;
  Scores scores;
  bool in_macro = false;  // has gold or predicted spans

  bool operator==(const CategoryResult&) const = default;
};

struct CriterionResult {
  PerCategory<CategoryResult> per_category{};
  CategoryCounts micro_counts;
  Scores micro;
  Scores macro;
  std::size_t macro_categories = 0;

  bool operator==(const CriterionResult&) const = default;
};

struct ErrorTaxonomy {
  std::size_t exact = 0;
  std::size_t boundary_error = 0;
  std::size_t category_confusion = 0;
  std::size_t spurious = 0;
  std::size_t miss = 0;

  ErrorTaxonomy& operator+=(const ErrorTaxonomy& o);
  bool operator==(const ErrorTaxonomy&) const = default;
};

struct EvalReport {
  std::map<MatchCriterion, CriterionResult> criteria;
  ErrorTaxonomy errors;
  std::size_t documents = 0;

  bool operator==(const EvalReport&) const = default;
};

/// Corpus-level evaluation. Gold documents without predictions count as
/// empty predictions; predictions for a document absent from gold, or two
/// sets for one document on either side, throw InputError.
EvalReport score(std::span<const AnnotationSet> gold,
                 std::span<const AnnotationSet> pred,
                 const std::set<MatchCriterion>& criteria = {
                     MatchCriterion::strict, MatchCriterion::lenient});

/// Per-document error classes. Predictions are exact, boundary_error,
/// category_confusion (overlaps a still-unmatched gold span of another
/// category) or spurious (anything else); gold not consumed by an exact or
/// boundary match is a miss.
ErrorTaxonomy error_taxonomy(std::span<const Span> gold,
                             std::span<const Span> pred);

ErrorTaxonomy error_taxonomy(std::span<const AnnotationSet> gold,
                             std::span<const AnnotationSet> pred);

}  // namespace cogspan
