#include "cogspan/baseline.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "assets.hpp"
#include "cogspan/errors.hpp"
#include "cogspan/utf8.hpp"

namespace cogspan {

using json = nlohmann::json;

void Lexicon::validate() const {
  for (Category c : kAllCategories) {
    std::set<std::string> seen;
    for (const auto& phrase : phrases[index_of(c)]) {
      if (phrase.empty()) {
        throw LexiconError(
            fmt::format("empty pattern in category '{}'", to_string(c)));
      }
      if (!utf8::is_valid(phrase)) {
        throw LexiconError(
            fmt::format("pattern in category '{}' is not UTF-8", to_string(c)));
      }
      if (!seen.insert(utf8::ascii_lower(phrase)).second) {
        throw LexiconError(fmt::format("pattern '{}' listed twice in '{}'",
                                       phrase, to_string(c)));
      }
    }
  }
}

bool Lexicon::empty() const {
  return std::all_of(phrases.begin(), phrases.end(),
                     [](const auto& list) { return list.empty(); });
}

Lexicon parse_lexicon(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed lexicon file: {}", e.what()));
  }
  if (!root.is_object()) throw LexiconError("lexicon file: expected an object");
  Lexicon lexicon;
  for (const auto& [name, list] : root.items()) {
    Category category;
    try {
      category = parse_category(name);
    } catch (const ValidationError& e) {
      throw LexiconError(fmt::format("lexicon: {}", e.what()));
    }
    if (!list.is_array()) {
      throw LexiconError(fmt::format("lexicon.{}: expected an array", name));
    }
    for (const json& phrase : list) {
      if (!phrase.is_string()) {
        throw LexiconError(fmt::format("lexicon.{}: expected strings", name));
      }
      lexicon.phrases[index_of(category)].push_back(phrase.get<std::string>());
    }
  }
  lexicon.validate();
  return lexicon;
}

std::string serialize_lexicon(const Lexicon& lexicon) {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (Category c : kAllCategories) {
    root[std::string(to_string(c))] = lexicon.phrases[index_of(c)];
  }
  return root.dump(2) + "\n";
}

const Lexicon& starter_lexicon() {
  static const Lexicon lexicon = parse_lexicon(assets::starter_lexicon());
  return lexicon;
}

namespace {

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '_';
}

}  // namespace

std::vector<Span> lexicon_tag(const Document& doc, const Lexicon& lexicon) {
  lexicon.validate();
  const utf8::Index index(doc.text);
  const std::string folded = utf8::ascii_lower(doc.text);
  std::vector<Span> out;

  for (Category c : kAllCategories) {
    std::vector<std::string> patterns;
    for (const auto& p : lexicon.phrases[index_of(c)]) {
      patterns.push_back(utf8::ascii_lower(p));
    }
    std::sort(patterns.begin(), patterns.end(),
              [](const std::string& a, const std::string& b) {
                const std::size_t la = utf8::length(a);
                const std::size_t lb = utf8::length(b);
                return la != lb ? la > lb : a < b;
              });

    std::vector<std::pair<std::size_t, std::size_t>> kept;  // byte ranges
    for (const std::string& pattern : patterns) {
      for (std::size_t pos = folded.find(pattern); pos != std::string::npos;
           pos = folded.find(pattern, pos + 1)) {
        const std::size_t end = pos + pattern.size();
        if (pos > 0 && is_word_byte(folded[pos - 1])) continue;
        if (end < folded.size() && is_word_byte(folded[end])) continue;
        const bool overlaps = std::any_of(
            kept.begin(), kept.end(),
            [&](const auto& r) { return pos < r.second && end > r.first; });
        if (!overlaps) kept.emplace_back(pos, end);
      }
    }
    for (const auto& [b, e] : kept) {
      Span span;
      span.start = index.scalar_offset(b);
      span.end = index.scalar_offset(e);
      span.category = c;
      span.surface = std::string(index.slice(doc.text, span.start, span.end));
      out.push_back(std::move(span));
    }
  }
  std::sort(out.begin(), out.end(), span_less);
  return out;
}

}  // namespace cogspan
