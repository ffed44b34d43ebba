#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "cogspan/baseline.hpp"
#include "cogspan/corpus.hpp"

namespace cogspan {

struct SynthSpec {
  PerCategory<std::size_t> counts{};
  double nesting_rate = 0.0;
  /// Defaults to max(5, ceil(phrase units / 5)).
  std::optional<std::size_t> documents;
  std::size_t participants = 5;
};

/// `{"counts": {"action": 100, ...}, "nesting_rate": 0.2, "documents": 50,
/// "participants": 5}`; all fields but counts are optional.
SynthSpec parse_synth_spec(std::string_view bytes);

/// Builds a gold-annotated corpus by concatenating lexicon phrases and
/// filler words, recording every span while writing the text. Phrases that
/// contain phrases of other categories supply the nested spans; the
/// nesting rate is the chance of drawing such a phrase whenever one still
/// fits the remaining counts. Per-category gold counts equal
/// `spec.counts` exactly. Throws SpecError for an infeasible spec.
Corpus generate_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed,
                                 const Lexicon& lexicon = starter_lexicon());

}  // namespace cogspan
