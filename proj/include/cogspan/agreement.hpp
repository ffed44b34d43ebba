#pragma once

#include <optional>
#include <span>

#include "cogspan/corpus.hpp"

namespace cogspan {

struct AgreementReport {
  double entity_f1 = 0.0;
  /// nullopt marks a degenerate category (no label variation, p_e = 1).
  PerCategory<std::optional<double>> kappa_per_category{};
  /// Mean over non-degenerate categories; absent when all are degenerate.
  std::optional<double> kappa_macro;

  bool operator==(const AgreementReport&) const = default;
};

/// Corpus-level strict entity F1 between two annotators: 2·TP / (|a| + |b|)
/// with exact (start, end, category) one-to-one matches. Symmetric. Two
/// empty annotations agree perfectly (1.0). Throws InputError when the two
/// sides do not cover the same documents, one set each.
double pairwise_entity_f1(std::span<const AnnotationSet> a,
                          std::span<const AnnotationSet> b);

/// Per-category Cohen's kappa over pooled character positions: each
/// position is labelled "inside some span of category c" by each annotator.
/// Also fills kappa_macro. entity_f1 is left at 0.
AgreementReport token_kappa(std::span<const AnnotationSet> a,
                            std::span<const AnnotationSet> b,
                            const Corpus& corpus);

/// Both measures.
AgreementReport agreement(std::span<const AnnotationSet> a,
                          std::span<const AnnotationSet> b,
                          const Corpus& corpus);

}  // namespace cogspan
