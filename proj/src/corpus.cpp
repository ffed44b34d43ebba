#include "cogspan/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "cogspan/errors.hpp"
#include "cogspan/random.hpp"
#include "cogspan/utf8.hpp"

namespace cogspan {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "location", "time", "sensory", "action",
    "thought", "emotion", "social_interaction",
};

std::string squash_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == ' ' || c == '_' || c == '\t') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::string_view to_string(Category category) {
  return kCategoryNames[index_of(category)];
}

Category parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  throw ValidationError(fmt::format("unknown category '{}'", name));
}

std::optional<Category> match_category_name(std::string_view name) {
  const std::string key = squash_name(name);
  if (key.empty()) return std::nullopt;
  for (Category c : kAllCategories) {
    if (squash_name(to_string(c)) == key) return c;
  }
  return std::nullopt;
}

std::string_view to_string(SessionKind kind) {
  return kind == SessionKind::zoom_training ? "zoom_training" : "self_practice";
}

bool span_less(const Span& a, const Span& b) {
  return std::tie(a.start, a.end, a.category) <
         std::tie(b.start, b.end, b.category);
}

const Document* Corpus::find_document(std::string_view id) const {
  for (const auto& doc : documents) {
    if (doc.id == id) return &doc;
  }
  return nullptr;
}

std::vector<AnnotationSet> Corpus::annotations_by(
    std::string_view annotator_id) const {
  std::vector<AnnotationSet> out;
  for (const auto& set : annotations) {
    if (set.annotator_id == annotator_id) out.push_back(set);
  }
  return out;
}

bool Corpus::has_annotator(std::string_view annotator_id) const {
  return std::any_of(annotations.begin(), annotations.end(),
                     [&](const AnnotationSet& s) {
                       return s.annotator_id == annotator_id;
                     });
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view bytes,
                                                std::size_t position) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < position && i < bytes.size(); ++i) {
    if (bytes[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

const json& require(const json& object, const char* key,
                    const std::string& where) {
  if (!object.is_object()) {
    throw ValidationError(fmt::format("{}: expected an object", where));
  }
  const auto it = object.find(key);
  if (it == object.end()) {
    throw ValidationError(fmt::format("{}: missing field '{}'", where, key));
  }
  return *it;
}

std::string require_string(const json& object, const char* key,
                           const std::string& where) {
  const json& v = require(object, key, where);
  if (!v.is_string()) {
    throw ValidationError(fmt::format("{}.{}: expected a string", where, key));
  }
  return v.get<std::string>();
}

std::int64_t require_integer(const json& object, const char* key,
                             const std::string& where) {
  const json& v = require(object, key, where);
  if (!v.is_number_integer()) {
    throw ValidationError(fmt::format("{}.{}: expected an integer", where, key));
  }
  return v.get<std::int64_t>();
}

const json& require_array(const json& object, const char* key,
                          const std::string& where) {
  const json& v = require(object, key, where);
  if (!v.is_array()) {
    throw ValidationError(fmt::format("{}.{}: expected an array", where, key));
  }
  return v;
}

SessionKind parse_session_kind(const std::string& name,
                               const std::string& where) {
  if (name == "zoom_training") return SessionKind::zoom_training;
  if (name == "self_practice") return SessionKind::self_practice;
  throw ValidationError(
      fmt::format("{}.session_kind: unknown value '{}'", where, name));
}

std::string describe(const Span& s) {
  return fmt::format("({},{},{})", s.start, s.end, to_string(s.category));
}

Corpus parse_impl(std::string_view bytes, bool check_integrity) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    const std::size_t pos = e.byte == 0 ? 0 : e.byte - 1;
    const auto [line, column] = line_column(bytes, pos);
    throw ParseError(
        fmt::format("malformed JSON at line {}, column {}: {}", line, column,
                    e.what()));
  }

  Corpus corpus;
  const json& docs = require_array(root, "documents", "corpus");
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const std::string where = fmt::format("documents[{}]", i);
    Document doc;
    doc.id = require_string(docs[i], "id", where);
    doc.text = require_string(docs[i], "text", where);
    const json& meta = require(docs[i], "meta", where);
    const std::string mwhere = where + ".meta";
    doc.meta.participant = require_string(meta, "participant", mwhere);
    doc.meta.session_kind =
        parse_session_kind(require_string(meta, "session_kind", mwhere), mwhere);
    doc.meta.session_index = require_integer(meta, "session_index", mwhere);
    if (doc.meta.session_index < 0) {
      throw ValidationError(
          fmt::format("{}.session_index: must be non-negative", mwhere));
    }
    corpus.documents.push_back(std::move(doc));
  }

  std::unordered_map<std::string, std::size_t> doc_index;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    const Document& doc = corpus.documents[i];
    if (!doc_index.emplace(doc.id, i).second && check_integrity) {
      throw IntegrityError(fmt::format("duplicate document id '{}'", doc.id));
    }
    if (doc.text.empty() && check_integrity) {
      throw IntegrityError(fmt::format("document '{}' has empty text", doc.id));
    }
  }
  std::vector<utf8::Index> indices;
  indices.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) indices.emplace_back(doc.text);

  const auto annotations_it = root.find("annotations");
  if (annotations_it != root.end()) {
    if (!annotations_it->is_array()) {
      throw ValidationError("corpus.annotations: expected an array");
    }
    const json& sets = *annotations_it;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const std::string where = fmt::format("annotations[{}]", i);
      AnnotationSet set;
      set.doc_id = require_string(sets[i], "doc_id", where);
      set.annotator_id = require_string(sets[i], "annotator_id", where);
      const auto found = doc_index.find(set.doc_id);
      if (found == doc_index.end() && check_integrity) {
        throw IntegrityError(fmt::format("{}: unknown document '{}'", where,
                                         set.doc_id));
      }
      static const Document kNoDocument;
      static const utf8::Index kNoIndex{std::string_view()};
      const bool known = found != doc_index.end();
      const Document& doc = known ? corpus.documents[found->second] : kNoDocument;
      const utf8::Index& index = known ? indices[found->second] : kNoIndex;

      const json& spans = require_array(sets[i], "spans", where);
      std::set<std::tuple<std::size_t, std::size_t, Category>> seen;
      for (std::size_t k = 0; k < spans.size(); ++k) {
        const std::string swhere = fmt::format("{}.spans[{}]", where, k);
        const std::int64_t start = require_integer(spans[k], "start", swhere);
        const std::int64_t end = require_integer(spans[k], "end", swhere);
        const std::string category_name =
            require_string(spans[k], "category", swhere);
        Category category;
        try {
          category = parse_category(category_name);
        } catch (const ValidationError& e) {
          throw ValidationError(fmt::format("{}: {}", swhere, e.what()));
        }
        if (start < 0 || end < 0) {
          throw ValidationError(
              fmt::format("{}: offsets must be non-negative", swhere));
        }
        const bool in_range =
            end > start && static_cast<std::size_t>(end) <= index.size();
        if (!in_range && check_integrity) {
          throw IntegrityError(fmt::format(
              "document '{}': span {} ({},{},{}) out of range for text of "
              "length {}",
              doc.id, swhere, start, end, category_name, index.size()));
        }
        Span span{static_cast<std::size_t>(start), static_cast<std::size_t>(end),
                  category, {}};
        const std::string slice =
            in_range ? std::string(index.slice(doc.text, span.start, span.end))
                     : std::string();
        const auto surface_it = spans[k].find("surface");
        if (surface_it != spans[k].end() && !surface_it->is_null()) {
          if (!surface_it->is_string()) {
            throw ValidationError(
                fmt::format("{}.surface: expected a string", swhere));
          }
          span.surface = surface_it->get<std::string>();
          if (span.surface != slice && check_integrity) {
            throw IntegrityError(fmt::format(
                "document '{}': span {} {} surface '{}' does not match text "
                "'{}'",
                doc.id, swhere, describe(span), span.surface, slice));
          }
        } else {
          span.surface = slice;
        }
        if (!seen.emplace(span.start, span.end, span.category).second &&
            check_integrity) {
          throw IntegrityError(fmt::format("document '{}': duplicate span {} {}",
                                           doc.id, swhere, describe(span)));
        }
        set.spans.push_back(std::move(span));
      }
      corpus.annotations.push_back(std::move(set));
    }
  }
  return corpus;
}

}  // namespace

Corpus parse_corpus(std::string_view bytes) { return parse_impl(bytes, true); }

Corpus parse_corpus_unchecked(std::string_view bytes) {
  return parse_impl(bytes, false);
}

ordered_json span_to_json(const Span& span) {
  ordered_json j;
  j["start"] = span.start;
  j["end"] = span.end;
  j["category"] = std::string(to_string(span.category));
  j["surface"] = span.surface;
  return j;
}

std::string serialize_corpus(const Corpus& corpus) {
  ordered_json root;
  root["documents"] = ordered_json::array();
  for (const auto& doc : corpus.documents) {
    ordered_json d;
    d["id"] = doc.id;
    d["text"] = doc.text;
    d["meta"]["participant"] = doc.meta.participant;
    d["meta"]["session_kind"] = std::string(to_string(doc.meta.session_kind));
    d["meta"]["session_index"] = doc.meta.session_index;
    root["documents"].push_back(std::move(d));
  }
  root["annotations"] = ordered_json::array();
  for (const auto& set : corpus.annotations) {
    ordered_json a;
    a["doc_id"] = set.doc_id;
    a["annotator_id"] = set.annotator_id;
    a["spans"] = ordered_json::array();
    for (const auto& span : set.spans) a["spans"].push_back(span_to_json(span));
    root["annotations"].push_back(std::move(a));
  }
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate_corpus(const Corpus& corpus) {
  std::vector<Violation> out;
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& doc : corpus.documents) {
    if (!by_id.emplace(doc.id, &doc).second) {
      out.push_back({doc.id, "duplicate document id", doc.id});
    }
    if (doc.text.empty()) {
      out.push_back({doc.id, "empty text", ""});
    } else if (!utf8::is_valid(doc.text)) {
      out.push_back({doc.id, "invalid utf-8", "text"});
    }
  }

  for (const auto& set : corpus.annotations) {
    const auto found = by_id.find(set.doc_id);
    if (found == by_id.end()) {
      out.push_back({set.doc_id, "unknown document",
                     fmt::format("annotator '{}'", set.annotator_id)});
      continue;
    }
    const Document& doc = *found->second;
    const bool text_ok = utf8::is_valid(doc.text);
    const utf8::Index index(text_ok ? std::string_view(doc.text)
                                    : std::string_view());
    std::set<std::tuple<std::size_t, std::size_t, Category>> seen;
    for (const auto& span : set.spans) {
      if (!seen.emplace(span.start, span.end, span.category).second) {
        out.push_back({doc.id, "duplicate span", describe(span)});
      }
      if (span.start >= span.end || span.end > index.size()) {
        out.push_back({doc.id, "offset out of range", describe(span)});
        continue;
      }
      const std::string_view slice = index.slice(doc.text, span.start, span.end);
      if (slice != span.surface) {
        out.push_back({doc.id, "surface mismatch",
                       fmt::format("{} '{}' vs text '{}'", describe(span),
                                   span.surface, slice)});
      }
    }
  }
  return out;
}

PerCategory<std::size_t> category_histogram(const Corpus& corpus,
                                            std::string_view annotator_id) {
  if (!corpus.has_annotator(annotator_id)) {
    throw LookupError(fmt::format("unknown annotator '{}'", annotator_id));
  }
  PerCategory<std::size_t> counts{};
  for (const auto& set : corpus.annotations) {
    if (set.annotator_id != annotator_id) continue;
    for (const auto& span : set.spans) ++counts[index_of(span.category)];
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Statistics

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_ascii_punct(char c) {
  return static_cast<unsigned char>(c) < 0x80 &&
         std::ispunct(static_cast<unsigned char>(c));
}

// Length of a placeholder starting at text[i], or 0.
std::size_t placeholder_length(std::string_view text, std::size_t i) {
  if (text[i] != '[') return 0;
  std::size_t j = i + 1;
  while (j < text.size() && text[j] >= 'A' && text[j] <= 'Z') ++j;
  if (j == i + 1 || j >= text.size() || text[j] != ']') return 0;
  return j - i + 1;
}

}  // namespace

bool is_placeholder(std::string_view token) {
  return !token.empty() && placeholder_length(token, 0) == token.size();
}

std::vector<std::string_view> tokenize(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_ascii_space(text[i])) {
      ++i;
      continue;
    }
    if (const std::size_t n = placeholder_length(text, i); n > 0) {
      tokens.push_back(text.substr(i, n));
      i += n;
      continue;
    }
    if (is_ascii_punct(text[i])) {
      tokens.push_back(text.substr(i, 1));
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !is_ascii_space(text[j]) &&
           !is_ascii_punct(text[j])) {
      ++j;
    }
    tokens.push_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.documents = corpus.documents.size();
  for (const auto& doc : corpus.documents) {
    stats.characters += utf8::length(doc.text);
    for (std::string_view token : tokenize(doc.text)) {
      ++stats.tokens;
      if (is_placeholder(token)) {
        ++stats.placeholders;
        ++stats.placeholder_counts[std::string(token)];
      }
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Splits

std::string_view to_string(Partition partition) {
  switch (partition) {
    case Partition::train: return "train";
    case Partition::dev: return "dev";
    case Partition::test: return "test";
  }
  return "train";
}

Partition parse_partition(std::string_view name) {
  if (name == "train") return Partition::train;
  if (name == "dev") return Partition::dev;
  if (name == "test") return Partition::test;
  throw ValidationError(fmt::format("unknown partition '{}'", name));
}

double SplitRatios::operator[](Partition p) const {
  switch (p) {
    case Partition::train: return train;
    case Partition::dev: return dev;
    case Partition::test: return test;
  }
  return 0.0;
}

std::vector<std::string> SplitAssignment::members(const Corpus& corpus,
                                                  Partition p) const {
  std::vector<std::string> ids;
  for (const auto& doc : corpus.documents) {
    const auto it = assignment.find(doc.id);
    if (it != assignment.end() && it->second == p) ids.push_back(doc.id);
  }
  return ids;
}

namespace {

constexpr std::array<Partition, 3> kPartitions = {
    Partition::train, Partition::dev, Partition::test};
constexpr int kSplitRestarts = 8;

void check_ratios(const SplitRatios& ratios) {
  double sum = 0.0;
  for (Partition p : kPartitions) {
    const double r = ratios[p];
    if (!std::isfinite(r) || r < 0.0) {
      throw ValidationError(fmt::format("split ratio for {} must be a "
                                        "non-negative number",
                                        to_string(p)));
    }
    sum += r;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    throw ValidationError(fmt::format("split ratios sum to {}, not 1", sum));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

using Counts = PerCategory<double>;

// Sum over categories of |p_c - g_c|; an empty split reads as all-zero.
double l1_deviation(const Counts& counts, double total, const Counts& global) {
  double d = 0.0;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    const double p = total > 0.0 ? counts[c] / total : 0.0;
    d += std::fabs(p - global[c]);
  }
  return d;
}

struct SplitProblem {
  std::vector<Counts> doc_counts;  // per document, corpus order
  std::vector<double> doc_totals;
  Counts global{};
  std::array<std::size_t, 3> targets{};
};

std::vector<std::size_t> greedy_assign(const SplitProblem& problem,
                                       std::uint64_t candidate_seed) {
  const std::size_t n = problem.doc_counts.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(candidate_seed);
  rng.shuffle(order);

  std::array<Counts, 3> counts{};
  std::array<double, 3> totals{};
  std::array<std::size_t, 3> sizes{};
  std::vector<std::size_t> result(n, 0);

  for (std::size_t d : order) {
    const Counts& x = problem.doc_counts[d];
    const double xt = problem.doc_totals[d];
    int best = -1;
    double best_delta = 0.0;
    double best_room = 0.0;
    for (std::size_t s = 0; s < 3; ++s) {
      if (sizes[s] >= problem.targets[s]) continue;
      Counts after = counts[s];
      for (std::size_t c = 0; c < kCategoryCount; ++c) after[c] += x[c];
      const double delta =
          l1_deviation(after, totals[s] + xt, problem.global) -
          l1_deviation(counts[s], totals[s], problem.global);
      const double room =
          static_cast<double>(problem.targets[s] - sizes[s]) /
          static_cast<double>(problem.targets[s]);
      constexpr double kEps = 1e-12;
      if (best < 0 || delta < best_delta - kEps ||
          (std::fabs(delta - best_delta) <= kEps && room > best_room + kEps)) {
        best = static_cast<int>(s);
        best_delta = delta;
        best_room = room;
      }
    }
    const auto s = static_cast<std::size_t>(best);
    for (std::size_t c = 0; c < kCategoryCount; ++c) counts[s][c] += x[c];
    totals[s] += xt;
    ++sizes[s];
    result[d] = s;
  }
  return result;
}

double max_deviation(const SplitProblem& problem,
                     const std::vector<std::size_t>& assignment) {
  std::array<Counts, 3> counts{};
  std::array<double, 3> totals{};
  for (std::size_t d = 0; d < assignment.size(); ++d) {
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      counts[assignment[d]][c] += problem.doc_counts[d][c];
    }
    totals[assignment[d]] += problem.doc_totals[d];
  }
  double worst = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    if (totals[s] <= 0.0) continue;
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      worst = std::max(worst,
                       std::fabs(counts[s][c] / totals[s] - problem.global[c]));
    }
  }
  return worst;
}

SplitProblem make_problem(const Corpus& corpus, std::string_view annotator_id) {
  SplitProblem problem;
  std::unordered_map<std::string, std::size_t> doc_index;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    doc_index.emplace(corpus.documents[i].id, i);
  }
  problem.doc_counts.assign(corpus.documents.size(), Counts{});
  problem.doc_totals.assign(corpus.documents.size(), 0.0);
  double total = 0.0;
  for (const auto& set : corpus.annotations) {
    if (set.annotator_id != annotator_id) continue;
    const auto it = doc_index.find(set.doc_id);
    if (it == doc_index.end()) {
      throw IntegrityError(
          fmt::format("annotation references unknown document '{}'", set.doc_id));
    }
    for (const auto& span : set.spans) {
      problem.doc_counts[it->second][index_of(span.category)] += 1.0;
      problem.doc_totals[it->second] += 1.0;
      problem.global[index_of(span.category)] += 1.0;
      total += 1.0;
    }
  }
  if (total > 0.0) {
    for (double& g : problem.global) g /= total;
  }
  return problem;
}

}  // namespace

std::array<std::size_t, 3> split_targets(std::size_t n, SplitRatios ratios) {
  std::array<std::size_t, 3> targets{};
  std::array<double, 3> exact{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    exact[s] = ratios[kPartitions[s]] * static_cast<double>(n);
    targets[s] = static_cast<std::size_t>(std::floor(exact[s] + 1e-9));
    assigned += targets[s];
  }
  // Largest remainder; ties go to the earlier split.
  while (assigned < n) {
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t s = 0; s < 3; ++s) {
      const double rem = exact[s] - static_cast<double>(targets[s]);
      if (rem > best + 1e-12) {
        best = rem;
        pick = s;
      }
    }
    ++targets[pick];
    ++assigned;
  }
  while (assigned > n) {
    std::size_t pick = 0;
    double best = -1e300;
    for (std::size_t s = 0; s < 3; ++s) {
      const double over = static_cast<double>(targets[s]) - exact[s];
      if (targets[s] > 0 && over > best) {
        best = over;
        pick = s;
      }
    }
    --targets[pick];
    --assigned;
  }
  // Every non-empty ratio gets at least one document when possible.
  for (std::size_t s = 0; s < 3; ++s) {
    if (ratios[kPartitions[s]] <= 0.0 || targets[s] > 0) continue;
    std::size_t donor = 3;
    double best = -1e300;
    for (std::size_t t = 0; t < 3; ++t) {
      const double over = static_cast<double>(targets[t]) - exact[t];
      if (targets[t] > 1 && over > best) {
        best = over;
        donor = t;
      }
    }
    if (donor == 3) break;
    --targets[donor];
    ++targets[s];
  }
  return targets;
}

SplitAssignment stratified_split(const Corpus& corpus, SplitRatios ratios,
                                 std::uint64_t seed,
                                 std::string_view annotator_id) {
  check_ratios(ratios);
  const std::size_t n = corpus.documents.size();
  std::size_t nonzero = 0;
  for (Partition p : kPartitions) nonzero += ratios[p] > 0.0 ? 1 : 0;
  if (n < nonzero) {
    throw InfeasibleError(fmt::format(
        "{} documents cannot fill {} non-empty splits", n, nonzero));
  }

  SplitProblem problem = make_problem(corpus, annotator_id);
  problem.targets = split_targets(n, ratios);

  std::vector<std::size_t> best;
  double best_score = 0.0;
  for (int k = 0; k < kSplitRestarts; ++k) {
    const std::uint64_t candidate_seed =
        splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(k)));
    std::vector<std::size_t> candidate = greedy_assign(problem, candidate_seed);
    const double score = max_deviation(problem, candidate);
    if (best.empty() || score < best_score) {
      best = std::move(candidate);
      best_score = score;
    }
  }

  SplitAssignment split;
  split.seed = seed;
  split.ratios = ratios;
  for (std::size_t d = 0; d < n; ++d) {
    split.assignment.emplace(corpus.documents[d].id, kPartitions[best[d]]);
  }
  return split;
}

double split_max_deviation(const Corpus& corpus, const SplitAssignment& split,
                           std::string_view annotator_id) {
  const SplitProblem problem = make_problem(corpus, annotator_id);
  std::vector<std::size_t> assignment(corpus.documents.size(), 0);
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto it = split.assignment.find(corpus.documents[d].id);
    if (it == split.assignment.end()) {
      throw LookupError(fmt::format("document '{}' missing from split",
                                    corpus.documents[d].id));
    }
    assignment[d] = static_cast<std::size_t>(it->second);
  }
  return max_deviation(problem, assignment);
}

std::string serialize_split(const SplitAssignment& split) {
  ordered_json root;
  root["seed"] = split.seed;
  root["ratios"] = {split.ratios.train, split.ratios.dev, split.ratios.test};
  root["assignment"] = ordered_json::object();
  for (const auto& [id, p] : split.assignment) {
    root["assignment"][id] = std::string(to_string(p));
  }
  return root.dump(2) + "\n";
}

SplitAssignment parse_split(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed split file: {}", e.what()));
  }
  SplitAssignment split;
  const json& seed = require(root, "seed", "split");
  if (!seed.is_number_integer()) {
    throw ValidationError("split.seed: expected an integer");
  }
  split.seed = seed.get<std::uint64_t>();
  const json& ratios = require_array(root, "ratios", "split");
  if (ratios.size() != 3 ||
      !std::all_of(ratios.begin(), ratios.end(),
                   [](const json& r) { return r.is_number(); })) {
    throw ValidationError("split.ratios: expected three numbers");
  }
  split.ratios = {ratios[0].get<double>(), ratios[1].get<double>(),
                  ratios[2].get<double>()};
  check_ratios(split.ratios);
  const json& assignment = require(root, "assignment", "split");
  if (!assignment.is_object()) {
    throw ValidationError("split.assignment: expected an object");
  }
  for (const auto& [id, value] : assignment.items()) {
    if (!value.is_string()) {
      throw ValidationError(
          fmt::format("split.assignment.{}: expected a string", id));
    }
    split.assignment.emplace(id, parse_partition(value.get<std::string>()));
  }
  return split;
}

}  // namespace cogspan
