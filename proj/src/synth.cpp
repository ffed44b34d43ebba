#include "cogspan/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cogspan/errors.hpp"
#include "cogspan/random.hpp"
#include "cogspan/utf8.hpp"

namespace cogspan {

using json = nlohmann::json;

SynthSpec parse_synth_spec(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed synth spec: {}", e.what()));
  }
  if (!root.is_object()) throw SpecError("synth spec: expected an object");
  SynthSpec spec;
  if (root.contains("counts")) {
    if (!root["counts"].is_object()) throw SpecError("synth spec: counts must be an object");
    for (const auto& [name, value] : root["counts"].items()) {
      Category c;
      try {
        c = parse_category(name);
      } catch (const ValidationError& e) {
        throw SpecError(fmt::format("synth spec: {}", e.what()));
      }
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
        throw SpecError(fmt::format("synth spec: count for {} must be a "
                                    "non-negative integer",
                                    name));
      }
      spec.counts[index_of(c)] = value.get<std::size_t>();
    }
  }
  if (root.contains("nesting_rate")) {
    if (!root["nesting_rate"].is_number()) throw SpecError("synth spec: nesting_rate must be a number");
    spec.nesting_rate = root["nesting_rate"].get<double>();
  }
  if (root.contains("documents")) {
    if (!root["documents"].is_number_integer() || root["documents"].get<std::int64_t>() < 1) {
      throw SpecError("synth spec: documents must be a positive integer");
    }
    spec.documents = root["documents"].get<std::size_t>();
  }
  if (root.contains("participants")) {
    if (!root["participants"].is_number_integer() ||
        root["participants"].get<std::int64_t>() < 1) {
      throw SpecError("synth spec: participants must be a positive integer");
    }
    spec.participants = root["participants"].get<std::size_t>();
  }
  return spec;
}

namespace {

// A lexicon phrase together with every span it carries on its own.
struct Unit {
  std::string text;
  std::vector<Span> spans;  // offsets relative to the phrase
  PerCategory<std::size_t> counts{};
};

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '_';
}

std::vector<std::string> word_tokens(std::string_view folded) {
  std::vector<std::string> out;
  std::string current;
  for (char c : folded) {
    if (is_word_byte(c)) {
      current.push_back(c);
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

// Whole-word, case-insensitive occurrences of `needle` in `hay` (bytes).
std::vector<std::size_t> word_occurrences(const std::string& hay,
                                          const std::string& needle) {
  std::vector<std::size_t> out;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + 1)) {
    const std::size_t end = pos + needle.size();
    if (pos > 0 && is_word_byte(hay[pos - 1])) continue;
    if (end < hay.size() && is_word_byte(hay[end])) continue;
    out.push_back(pos);
  }
  return out;
}

// The phrase's own span plus the phrases of other categories it contains.
// Returns nullopt when two contained phrases of one category overlap, since
// the span set would then depend on which of them wins.
std::optional<Unit> make_unit(const std::string& phrase, Category category,
                              const Lexicon& lexicon) {
  Unit unit;
  unit.text = phrase;
  const utf8::Index index(phrase);
  const std::string folded = utf8::ascii_lower(phrase);
  unit.spans.push_back({0, index.size(), category, phrase});
  for (Category other : kAllCategories) {
    if (other == category) continue;
    std::vector<std::pair<std::size_t, std::size_t>> found;
    for (const auto& p : lexicon.phrases[index_of(other)]) {
      const std::string needle = utf8::ascii_lower(p);
      for (std::size_t pos : word_occurrences(folded, needle)) {
        found.emplace_back(pos, pos + needle.size());
      }
    }
    std::sort(found.begin(), found.end());
    for (std::size_t i = 1; i < found.size(); ++i) {
      if (found[i].first < found[i - 1].second) return std::nullopt;
    }
    for (const auto& [b, e] : found) {
      Span s;
      s.start = index.scalar_offset(b);
      s.end = index.scalar_offset(e);
      s.category = other;
      s.surface = std::string(index.slice(phrase, s.start, s.end));
      unit.spans.push_back(std::move(s));
    }
  }
  std::sort(unit.spans.begin(), unit.spans.end(), span_less);
  for (const Span& s : unit.spans) ++unit.counts[index_of(s.category)];
  return unit;
}

constexpr std::array<std::string_view, 24> kFillerPool = {
    "so",     "then",     "after",  "that",    "also",   "later",
    "quite",  "really",   "again",  "there",   "still",  "just",
    "slowly", "carefully", "anyway", "maybe",  "first",  "next",
    "well",   "soon",     "okay",   "briefly", "mostly", "finally",
};

bool fits(const PerCategory<std::size_t>& need,
          const PerCategory<std::size_t>& remaining) {
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    if (need[c] > remaining[c]) return false;
  }
  return true;
}

}  // namespace

Corpus generate_synthetic_corpus(const SynthSpec& spec, std::uint64_t seed,
                                 const Lexicon& lexicon) {
  if (!std::isfinite(spec.nesting_rate) || spec.nesting_rate < 0.0 ||
      spec.nesting_rate > 1.0) {
    throw SpecError("nesting_rate must lie in [0, 1]");
  }
  std::size_t total = 0;
  for (std::size_t c : spec.counts) total += c;
  if (total == 0 && spec.nesting_rate > 0.0) {
    throw SpecError("nesting requested but no spans requested");
  }
  if (spec.participants == 0) throw SpecError("participants must be >= 1");
  lexicon.validate();

  std::set<std::string> lexicon_words;
  PerCategory<std::vector<Unit>> simple{};
  std::vector<Unit> nested;
  for (Category c : kAllCategories) {
    for (const auto& phrase : lexicon.phrases[index_of(c)]) {
      for (auto& w : word_tokens(utf8::ascii_lower(phrase))) lexicon_words.insert(w);
      std::optional<Unit> unit = make_unit(phrase, c, lexicon);
      if (!unit) continue;
      if (unit->spans.size() == 1) {
        simple[index_of(c)].push_back(std::move(*unit));
      } else {
        nested.push_back(std::move(*unit));
      }
    }
  }
  std::vector<std::string> filler;
  for (std::string_view w : kFillerPool) {
    if (!lexicon_words.contains(std::string(w))) filler.emplace_back(w);
  }
  if (filler.empty()) throw SpecError("every filler word occurs in the lexicon");
  for (Category c : kAllCategories) {
    if (spec.counts[index_of(c)] > 0 && simple[index_of(c)].empty()) {
      throw SpecError(fmt::format(
          "lexicon has no stand-alone phrase for category '{}'", to_string(c)));
    }
  }
  if (spec.nesting_rate > 0.0) {
    const bool any_fit = std::any_of(nested.begin(), nested.end(), [&](const Unit& u) {
      return fits(u.counts, spec.counts);
    });
    if (!any_fit) {
      throw SpecError("nesting requested but no nested phrase fits the counts");
    }
  }

  Rng rng(seed);
  PerCategory<std::size_t> remaining = spec.counts;
  std::size_t left = total;
  std::vector<const Unit*> units;
  while (left > 0) {
    std::vector<const Unit*> candidates;
    for (const Unit& u : nested) {
      if (fits(u.counts, remaining)) candidates.push_back(&u);
    }
    const Unit* chosen = nullptr;
    if (!candidates.empty() && rng.chance(spec.nesting_rate)) {
      chosen = rng.pick(candidates);
    } else {
      // Category weighted by what is still owed.
      std::uint64_t r = rng.below(left);
      std::size_t c = 0;
      while (r >= remaining[c]) r -= remaining[c++];
      chosen = &rng.pick(simple[c]);
    }
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      remaining[c] -= chosen->counts[c];
      left -= chosen->counts[c];
    }
    units.push_back(chosen);
  }
  rng.shuffle(units);

  const std::size_t n_docs = spec.documents.value_or(
      std::max<std::size_t>(5, (units.size() + 4) / 5));
  std::vector<std::vector<const Unit*>> per_doc(n_docs);
  for (std::size_t i = 0; i < units.size(); ++i) {
    per_doc[i % n_docs].push_back(units[i]);
  }

  Corpus corpus;
  for (std::size_t d = 0; d < n_docs; ++d) {
    Document doc;
    doc.id = fmt::format("doc-{:04d}", d + 1);
    doc.meta.participant = fmt::format("P{:02d}", d % spec.participants + 1);
    doc.meta.session_kind =
        (d / spec.participants) % 2 == 0 ? SessionKind::zoom_training
                                         : SessionKind::self_practice;
    doc.meta.session_index = static_cast<std::int64_t>(d / spec.participants);

    AnnotationSet gold{doc.id, std::string(kGoldAnnotator), {}};
    std::size_t offset = 0;  // scalar values written so far
    auto write = [&](std::string_view s) {
      doc.text += s;
      offset += utf8::length(s);
    };
    auto write_filler = [&] {
      const auto words = rng.between(1, 3);
      for (std::int64_t w = 0; w < words; ++w) {
        std::string word = rng.pick(filler);
        if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        write(word);
        write(" ");
      }
    };

    if (per_doc[d].empty()) {
      const auto sentences = rng.between(1, 3);
      for (std::int64_t s = 0; s < sentences; ++s) {
        if (s > 0) write(" ");
        write_filler();
        write(rng.pick(filler));
        write(".");
      }
    }
    for (std::size_t k = 0; k < per_doc[d].size(); ++k) {
      const Unit& unit = *per_doc[d][k];
      if (k > 0) write(" ");
      write_filler();
      for (const Span& s : unit.spans) {
        gold.spans.push_back({s.start + offset, s.end + offset, s.category, s.surface});
      }
      write(unit.text);
      write(".");
    }
    std::sort(gold.spans.begin(), gold.spans.end(), span_less);
    corpus.documents.push_back(std::move(doc));
    corpus.annotations.push_back(std::move(gold));
  }
  return corpus;
}

}  // namespace cogspan
