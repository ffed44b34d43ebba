#pragma once
// Independent reference implementations used only by tests. None of these
// call into the library code they check.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cogspan/corpus.hpp"
#include "cogspan/random.hpp"
#include "cogspan/scorer.hpp"

namespace cogspan::testing {

// Brute-force maximum one-to-one matching via DP over used-pred bitmasks.
// Feasible for up to ~16 preds; the acceptance instances use <= 6.
inline std::size_t oracle_max_matching(const std::vector<Span>& gold,
                                       const std::vector<Span>& pred,
                                       MatchCriterion criterion) {
  auto ok = [&](const Span& g, const Span& p) {
    if (g.category != p.category) return false;
    if (criterion == MatchCriterion::strict) return g.start == p.start && g.end == p.end;
    return std::max(g.start, p.start) < std::min(g.end, p.end);
  };
  const std::size_t n = gold.size();
  const std::size_t m = pred.size();
  std::vector<int> best(std::size_t{1} << m, -1);
  best[0] = 0;
  // Process gold one at a time; layer over masks.
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> next = best;  // gold i left unmatched
    for (std::size_t mask = 0; mask < best.size(); ++mask) {
      if (best[mask] < 0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if ((mask >> j) & 1U) continue;
        if (!ok(gold[i], pred[j])) continue;
        const std::size_t nm = mask | (std::size_t{1} << j);
        next[nm] = std::max(next[nm], best[mask] + 1);
      }
    }
    best = std::move(next);
  }
  return static_cast<std::size_t>(*std::max_element(best.begin(), best.end()));
}

// Per-category tp/fp/fn from the oracle; categories never match across, so
// the optimum decomposes per category.
inline PerCategory<CategoryCounts> oracle_counts(const std::vector<Span>& gold,
                                                 const std::vector<Span>& pred,
                                                 MatchCriterion criterion) {
  PerCategory<CategoryCounts> out{};
  for (Category c : kAllCategories) {
    std::vector<Span> g, p;
    for (const auto& s : gold) if (s.category == c) g.push_back(s);
    for (const auto& s : pred) if (s.category == c) p.push_back(s);
    const std::size_t tp = oracle_max_matching(g, p, criterion);
    out[index_of(c)] = {tp, p.size() - tp, g.size() - tp};
  }
  return out;
}

// Textbook Cohen's kappa over binary per-character labels for one category,
// computed in floating point from the 2x2 table.
struct HandKappa {
  bool degenerate = false;
  double kappa = 0.0;
};

inline HandKappa hand_kappa(const std::vector<std::vector<bool>>& a,
                            const std::vector<std::vector<bool>>& b) {
  double n = 0, both1 = 0, both0 = 0, a1 = 0, b1 = 0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    for (std::size_t i = 0; i < a[d].size(); ++i) {
      n += 1;
      if (a[d][i]) a1 += 1;
      if (b[d][i]) b1 += 1;
      if (a[d][i] && b[d][i]) both1 += 1;
      if (!a[d][i] && !b[d][i]) both0 += 1;
    }
  }
  const double po = (both1 + both0) / n;
  const double pe = (a1 / n) * (b1 / n) + (1 - a1 / n) * (1 - b1 / n);
  if (pe == 1.0) return {true, 0.0};
  return {false, (po - pe) / (1 - pe)};
}

// Character labels "inside a span of category c" for one document.
inline std::vector<bool> inside_labels(const std::vector<Span>& spans,
                                       std::size_t length, Category c) {
  std::vector<bool> out(length, false);
  for (const auto& s : spans) {
    if (s.category != c) continue;
    for (std::size_t i = s.start; i < s.end && i < length; ++i) out[i] = true;
  }
  return out;
}

inline Category random_category(Rng& rng) {
  return kAllCategories[rng.below(kCategoryCount)];
}

// Random spans on a document of `length` characters (no surfaces).
inline std::vector<Span> random_spans(Rng& rng, std::size_t count, std::size_t length) {
  std::vector<Span> out;
  for (std::size_t k = 0; k < count; ++k) {
    const auto a = static_cast<std::size_t>(rng.below(length));
    const auto b = static_cast<std::size_t>(rng.below(length));
    Span s;
    s.start = std::min(a, b);
    s.end = std::max(a, b) + 1;
    s.category = random_category(rng);
    out.push_back(s);
  }
  return out;
}

// A document whose annotated surfaces each occur once in the text. Words
// are pseudo-words tagged with a running index so every surface is unique.
struct GeneratedDoc {
  Document doc;
  std::vector<Span> spans;  // intended gold, canonical order
};

inline std::string pseudo_word(Rng& rng, std::size_t serial) {
  static const char* const kSyllables[] = {"ka", "lo", "mi", "ren", "tu", "sa",
                                           "vo", "ne", "pi", "dra"};
  std::string w;
  const auto parts = rng.between(1, 3);
  for (std::int64_t i = 0; i < parts; ++i) w += kSyllables[rng.below(10)];
  return w + std::to_string(serial);
}

inline GeneratedDoc unique_surface_doc(Rng& rng, std::size_t id) {
  GeneratedDoc g;
  g.doc.id = "u-" + std::to_string(id);
  g.doc.meta.participant = "P01";
  std::size_t serial = 0;
  std::size_t offset = 0;  // ASCII only: byte == scalar
  const auto phrases = rng.between(1, 8);
  for (std::int64_t p = 0; p < phrases; ++p) {
    const auto fill = rng.between(0, 3);
    for (std::int64_t f = 0; f < fill; ++f) {
      const std::string w = pseudo_word(rng, serial++);
      g.doc.text += w + " ";
      offset += w.size() + 1;
    }
    const auto words = rng.between(1, 4);
    std::string phrase;
    for (std::int64_t w = 0; w < words; ++w) {
      if (w > 0) phrase += " ";
      phrase += pseudo_word(rng, serial++);
    }
    Span s{offset, offset + phrase.size(), random_category(rng), phrase};
    g.spans.push_back(s);
    // Occasionally nest a different-category span inside on its first word.
    if (words > 1 && rng.chance(0.3)) {
      const std::string first = phrase.substr(0, phrase.find(' '));
      Category inner = random_category(rng);
      if (inner == s.category) inner = kAllCategories[(index_of(inner) + 1) % kCategoryCount];
      g.spans.push_back({offset, offset + first.size(), inner, first});
    }
    g.doc.text += phrase + ". ";
    offset += phrase.size() + 2;
  }
  std::sort(g.spans.begin(), g.spans.end(), span_less);
  return g;
}

// A document where one surface repeats `copies` times and a random subset of
// the copies is annotated with one category. Under the leftmost-unused rule
// the k-th emitted item lands on the k-th copy; `expected` records that.
struct AmbiguousDoc {
  Document doc;
  std::vector<Span> annotated;  // what the items will claim (category, text)
  std::vector<Span> expected;   // offsets the rule must produce
};

inline AmbiguousDoc ambiguous_doc(Rng& rng, std::size_t id) {
  AmbiguousDoc a;
  a.doc.id = "amb-" + std::to_string(id);
  a.doc.meta.participant = "P02";
  const std::string surface = "hot oven";
  const Category c = random_category(rng);
  const auto copies = static_cast<std::size_t>(rng.between(2, 5));
  std::vector<std::size_t> starts;
  for (std::size_t k = 0; k < copies; ++k) {
    a.doc.text += pseudo_word(rng, k) + " ";
    starts.push_back(a.doc.text.size());
    a.doc.text += surface + ". ";
  }
  const auto chosen = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(copies)));
  for (std::size_t k = 0; k < copies; ++k) {
    // annotated: any `chosen` copies; expected: the first `chosen` copies
    if (k < chosen) {
      a.expected.push_back({starts[k], starts[k] + surface.size(), c, surface});
    }
  }
  std::vector<std::size_t> idx(copies);
  for (std::size_t k = 0; k < copies; ++k) idx[k] = k;
  rng.shuffle(idx);
  idx.resize(chosen);
  std::sort(idx.begin(), idx.end());
  for (std::size_t k : idx) {
    a.annotated.push_back({starts[k], starts[k] + surface.size(), c, surface});
  }
  return a;
}

// Per-category target counts with action and location dominant and emotion
// rare, scaled to roughly six spans per document.
inline PerCategory<std::size_t> skewed_counts(std::size_t documents) {
  // location, time, sensory, action, thought, emotion, social_interaction
  constexpr PerCategory<double> kWeights = {0.24, 0.13, 0.11, 0.28, 0.10, 0.03, 0.11};
  PerCategory<std::size_t> out{};
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    out[c] = static_cast<std::size_t>(kWeights[c] * 6.0 * static_cast<double>(documents));
  }
  return out;
}

}  // namespace cogspan::testing
