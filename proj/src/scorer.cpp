#include "cogspan/scorer.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "cogspan/errors.hpp"

namespace cogspan {

std::string_view to_string(MatchCriterion criterion) {
  return criterion == MatchCriterion::strict ? "strict" : "lenient";
}

MatchCriterion parse_criterion(std::string_view name) {
  if (name == "strict") return MatchCriterion::strict;
  if (name == "lenient") return MatchCriterion::lenient;
  throw InputError(fmt::format("unknown criterion '{}'", name));
}

std::size_t overlap_length(const Span& a, const Span& b) {
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

bool compatible(const Span& gold, const Span& pred, MatchCriterion criterion) {
  if (gold.category != pred.category) return false;
  if (criterion == MatchCriterion::strict) {
    return gold.start == pred.start && gold.end == pred.end;
  }
  return overlap_length(gold, pred) >= 1;
}

namespace {

std::vector<std::size_t> canonical_order(std::span<const Span> spans) {
  std::vector<std::size_t> order(spans.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Span& x = spans[a];
    const Span& y = spans[b];
    return std::tie(x.start, x.end, x.category, x.surface) <
           std::tie(y.start, y.end, y.category, y.surface);
  });
  return order;
}

constexpr std::size_t kFree = static_cast<std::size_t>(-1);

}  // namespace

MatchResult match_spans(std::span<const Span> gold, std::span<const Span> pred,
                        MatchCriterion criterion) {
  // Work in canonical order so the outcome is independent of input order.
  const std::vector<std::size_t> gord = canonical_order(gold);
  const std::vector<std::size_t> pord = canonical_order(pred);
  const std::size_t ng = gold.size();
  const std::size_t np = pred.size();

  struct Candidate {
    std::size_t overlap;
    std::size_t g;  // canonical rank
    std::size_t p;
  };
  std::vector<Candidate> candidates;
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t p = 0; p < np; ++p) {
      const Span& gs = gold[gord[g]];
      const Span& ps = pred[pord[p]];
      if (compatible(gs, ps, criterion)) {
        candidates.push_back({overlap_length(gs, ps), g, p});
      }
    }
  }
  // Canonical rank already orders by start, then end.
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.overlap != b.overlap) return a.overlap > b.overlap;
              if (a.g != b.g) return a.g < b.g;
              return a.p < b.p;
            });

  std::vector<std::size_t> gold_to_pred(ng, kFree);
  std::vector<std::size_t> pred_to_gold(np, kFree);
  for (const Candidate& c : candidates) {
    if (gold_to_pred[c.g] == kFree && pred_to_gold[c.p] == kFree) {
      gold_to_pred[c.g] = c.p;
      pred_to_gold[c.p] = c.g;
    }
  }

  // Augmenting paths (Kuhn) from each free gold span. Adjacency follows the
  // same preference order as the greedy pass.
  std::vector<std::vector<std::size_t>> adjacency(ng);
  for (const Candidate& c : candidates) adjacency[c.g].push_back(c.p);

  std::vector<char> visited(np, 0);
  std::function<bool(std::size_t)> augment = [&](std::size_t g) -> bool {
    for (std::size_t p : adjacency[g]) {
      if (visited[p]) continue;
      visited[p] = 1;
      if (pred_to_gold[p] == kFree || augment(pred_to_gold[p])) {
        gold_to_pred[g] = p;
        pred_to_gold[p] = g;
        return true;
      }
    }
    return false;
  };
  for (std::size_t g = 0; g < ng; ++g) {
    if (gold_to_pred[g] != kFree || adjacency[g].empty()) continue;
    std::fill(visited.begin(), visited.end(), 0);
    augment(g);
  }

  MatchResult result;
  for (std::size_t g = 0; g < ng; ++g) {
    if (gold_to_pred[g] == kFree) {
      result.unmatched_gold.push_back(gord[g]);
    } else {
      result.pairs.push_back({gord[g], pord[gold_to_pred[g]]});
    }
  }
  for (std::size_t p = 0; p < np; ++p) {
    if (pred_to_gold[p] == kFree) result.unmatched_pred.push_back(pord[p]);
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const SpanPair& a, const SpanPair& b) { return a.gold < b.gold; });
  std::sort(result.unmatched_gold.begin(), result.unmatched_gold.end());
  std::sort(result.unmatched_pred.begin(), result.unmatched_pred.end());
  return result;
}

MatchResult match_spans(const AnnotationSet& gold, const AnnotationSet& pred,
                        MatchCriterion criterion) {
  if (gold.doc_id != pred.doc_id) {
    throw InputError(fmt::format(
        "cannot match spans across documents '{}' and '{}'", gold.doc_id,
        pred.doc_id));
  }
  return match_spans(gold.spans, pred.spans, criterion);
}

Scores scores_from_counts(const CategoryCounts& counts) {
  Scores s;
  const std::size_t predicted = counts.tp + counts.fp;
  const std::size_t support = counts.tp + counts.fn;
  s.precision = predicted == 0 ? 0.0
                               : static_cast<double>(counts.tp) /
                                     static_cast<double>(predicted);
  s.recall = support == 0 ? 0.0
                          : static_cast<double>(counts.tp) /
                                static_cast<double>(support);
  const double denom = s.precision + s.recall;
  s.f1 = denom == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / denom;
  return s;
}

ErrorTaxonomy& ErrorTaxonomy::operator+=(const ErrorTaxonomy& o) {
  exact += o.exact;
  boundary_error += o.boundary_error;
  category_confusion += o.category_confusion;
  spurious += o.spurious;
  miss += o.miss;
  return *this;
}

namespace {

struct DocumentPair {
  const AnnotationSet* gold;
  const AnnotationSet* pred;  // may be null
};

std::vector<DocumentPair> pair_documents(std::span<const AnnotationSet> gold,
                                         std::span<const AnnotationSet> pred) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<DocumentPair> pairs;
  for (const auto& set : gold) {
    if (!index.emplace(set.doc_id, pairs.size()).second) {
      throw InputError(
          fmt::format("gold has more than one set for document '{}'", set.doc_id));
    }
    pairs.push_back({&set, nullptr});
  }
  for (const auto& set : pred) {
    const auto it = index.find(set.doc_id);
    if (it == index.end()) {
      throw InputError(fmt::format(
          "prediction references unknown document '{}'", set.doc_id));
    }
    if (pairs[it->second].pred != nullptr) {
      throw InputError(fmt::format(
          "predictions have more than one set for document '{}'", set.doc_id));
    }
    pairs[it->second].pred = &set;
  }
  return pairs;
}

std::span<const Span> spans_of(const AnnotationSet* set) {
  if (set == nullptr) return {};
  return set->spans;
}

}  // namespace

EvalReport score(std::span<const AnnotationSet> gold,
                 std::span<const AnnotationSet> pred,
                 const std::set<MatchCriterion>& criteria) {
  const std::vector<DocumentPair> docs = pair_documents(gold, pred);

  EvalReport report;
  report.documents = docs.size();
  for (MatchCriterion criterion : criteria) {
    PerCategory<CategoryCounts> counts{};
    for (const DocumentPair& doc : docs) {
      const auto gspans = spans_of(doc.gold);
      const auto pspans = spans_of(doc.pred);
      const MatchResult m = match_spans(gspans, pspans, criterion);
      PerCategory<std::size_t> tp{};
      for (const SpanPair& pair : m.pairs) {
        ++tp[index_of(gspans[pair.gold].category)];
      }
      PerCategory<std::size_t> ng{};
      PerCategory<std::size_t> np{};
      for (const Span& s : gspans) ++ng[index_of(s.category)];
      for (const Span& s : pspans) ++np[index_of(s.category)];
      for (std::size_t c = 0; c < kCategoryCount; ++c) {
        counts[c] += CategoryCounts{tp[c], np[c] - tp[c], ng[c] - tp[c]};
      }
    }

    CriterionResult result;
    Scores sum;
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      CategoryResult& cat = result.per_category[c];
      cat.counts = counts[c];
      cat.scores = scores_from_counts(counts[c]);
      cat.in_macro = counts[c].support() > 0 || counts[c].predicted() > 0;
      result.micro_counts += counts[c];
      if (cat.in_macro) {
        sum.precision += cat.scores.precision;
        sum.recall += cat.scores.recall;
        sum.f1 += cat.scores.f1;
        ++result.macro_categories;
      }
    }
    result.micro = scores_from_counts(result.micro_counts);
    if (result.macro_categories > 0) {
      const auto n = static_cast<double>(result.macro_categories);
      result.macro = {sum.precision / n, sum.recall / n, sum.f1 / n};
    }
    report.criteria.emplace(criterion, result);
  }
  report.errors = error_taxonomy(gold, pred);
  return report;
}

ErrorTaxonomy error_taxonomy(std::span<const Span> gold,
                             std::span<const Span> pred) {
  ErrorTaxonomy t;
  std::vector<char> gold_used(gold.size(), 0);
  std::vector<char> pred_used(pred.size(), 0);

  const MatchResult strict = match_spans(gold, pred, MatchCriterion::strict);
  for (const SpanPair& p : strict.pairs) {
    gold_used[p.gold] = pred_used[p.pred] = 1;
    ++t.exact;
  }

  // Lenient matching among the leftovers.
  std::vector<Span> rest_gold;
  std::vector<Span> rest_pred;
  for (std::size_t i : strict.unmatched_gold) rest_gold.push_back(gold[i]);
  for (std::size_t i : strict.unmatched_pred) rest_pred.push_back(pred[i]);
  const MatchResult lenient =
      match_spans(rest_gold, rest_pred, MatchCriterion::lenient);
  for (const SpanPair& p : lenient.pairs) {
    gold_used[strict.unmatched_gold[p.gold]] = 1;
    pred_used[strict.unmatched_pred[p.pred]] = 1;
    ++t.boundary_error;
  }

  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred_used[i]) continue;
    bool confusion = false;
    for (std::size_t g = 0; g < gold.size() && !confusion; ++g) {
      confusion = !gold_used[g] && gold[g].category != pred[i].category &&
                  overlap_length(gold[g], pred[i]) >= 1;
    }
    if (confusion) {
      ++t.category_confusion;
    } else {
      ++t.spurious;
    }
  }
  for (char used : gold_used) t.miss += used ? 0 : 1;
  return t;
}

ErrorTaxonomy error_taxonomy(std::span<const AnnotationSet> gold,
                             std::span<const AnnotationSet> pred) {
  ErrorTaxonomy total;
  for (const DocumentPair& doc : pair_documents(gold, pred)) {
    total += error_taxonomy(spans_of(doc.gold), spans_of(doc.pred));
  }
  return total;
}

}  // namespace cogspan
