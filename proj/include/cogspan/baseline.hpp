#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cogspan/corpus.hpp"

namespace cogspan {

/// Literal phrase patterns per category, matched case-insensitively (ASCII)
/// on whole-word boundaries.
struct Lexicon {
  PerCategory<std::vector<std::string>> phrases{};

  /// Throws LexiconError on an empty pattern or a pattern listed twice
  /// (case-insensitively) within one category.
  void validate() const;

  bool empty() const;
};

/// `{ "<category>": ["phrase", ...], ... }`; missing categories are empty.
Lexicon parse_lexicon(std::string_view bytes);
std::string serialize_lexicon(const Lexicon& lexicon);

/// Seed phrases shipped with the toolkit.
const Lexicon& starter_lexicon();

/// Within each category, patterns are tried longest first and an occurrence
/// is kept only if it does not overlap one already kept for that category.
/// Different categories may overlap. Output is in (start, end, category)
/// order and does not depend on pattern declaration order.
std::vector<Span> lexicon_tag(const Document& doc, const Lexicon& lexicon);

}  // namespace cogspan
