#include "cogspan/agreement.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "cogspan/errors.hpp"
#include "cogspan/utf8.hpp"

namespace cogspan {
namespace {

using SetIndex = std::map<std::string, const AnnotationSet*>;

SetIndex index_sets(std::span<const AnnotationSet> sets, const char* side) {
  SetIndex index;
  for (const auto& set : sets) {
    if (!index.emplace(set.doc_id, &set).second) {
      throw InputError(fmt::format("annotator {} has more than one set for "
                                   "document '{}'",
                                   side, set.doc_id));
    }
  }
  return index;
}

void check_coverage(const SetIndex& a, const SetIndex& b) {
  for (const auto& [id, set] : a) {
    if (!b.contains(id)) {
      throw InputError(fmt::format(
          "document '{}' annotated by a but not by b", id));
    }
  }
  for (const auto& [id, set] : b) {
    if (!a.contains(id)) {
      throw InputError(fmt::format(
          "document '{}' annotated by b but not by a", id));
    }
  }
}

using Key = std::tuple<std::size_t, std::size_t, Category>;

std::map<Key, std::size_t> multiset_of(const AnnotationSet& set) {
  std::map<Key, std::size_t> m;
  for (const auto& s : set.spans) ++m[{s.start, s.end, s.category}];
  return m;
}

}  // namespace

double pairwise_entity_f1(std::span<const AnnotationSet> a,
                          std::span<const AnnotationSet> b) {
  const SetIndex ia = index_sets(a, "a");
  const SetIndex ib = index_sets(b, "b");
  check_coverage(ia, ib);

  std::size_t tp = 0;
  std::size_t na = 0;
  std::size_t nb = 0;
  for (const auto& [id, set_a] : ia) {
    const AnnotationSet& set_b = *ib.at(id);
    na += set_a->spans.size();
    nb += set_b.spans.size();
    const auto ma = multiset_of(*set_a);
    const auto mb = multiset_of(set_b);
    for (const auto& [key, count] : ma) {
      const auto it = mb.find(key);
      if (it != mb.end()) tp += std::min(count, it->second);
    }
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(na + nb);
}

AgreementReport token_kappa(std::span<const AnnotationSet> a,
                            std::span<const AnnotationSet> b,
                            const Corpus& corpus) {
  const SetIndex ia = index_sets(a, "a");
  const SetIndex ib = index_sets(b, "b");
  check_coverage(ia, ib);

  // Integer tallies: n positions, a1/b1 positives per side, agree matches.
  struct Tally {
    std::uint64_t n = 0, a1 = 0, b1 = 0, agree = 0;
  };
  PerCategory<Tally> tallies{};

  for (const auto& [id, set_a] : ia) {
    const Document* doc = corpus.find_document(id);
    if (doc == nullptr) {
      throw InputError(fmt::format("document '{}' not in corpus", id));
    }
    const std::size_t len = utf8::length(doc->text);
    const AnnotationSet& set_b = *ib.at(id);
    for (Category c : kAllCategories) {
      std::vector<char> la(len, 0);
      std::vector<char> lb(len, 0);
      auto mark = [&](const AnnotationSet& set, std::vector<char>& labels) {
        for (const auto& s : set.spans) {
          if (s.category != c) continue;
          if (s.end > len || s.start >= s.end) {
            throw InputError(fmt::format(
                "span ({},{}) out of range in document '{}'", s.start, s.end,
                id));
          }
          std::fill(labels.begin() + static_cast<std::ptrdiff_t>(s.start),
                    labels.begin() + static_cast<std::ptrdiff_t>(s.end), 1);
        }
      };
      mark(*set_a, la);
      mark(set_b, lb);
      Tally& t = tallies[index_of(c)];
      t.n += len;
      for (std::size_t i = 0; i < len; ++i) {
        t.a1 += la[i];
        t.b1 += lb[i];
        t.agree += la[i] == lb[i] ? 1 : 0;
      }
    }
  }

  AgreementReport report;
  double sum = 0.0;
  std::size_t defined = 0;
  for (Category c : kAllCategories) {
    const Tally& t = tallies[index_of(c)];
    // kappa = (n·agree - E) / (n² - E) with E = a1·b1 + a0·b0, exactly
    // (p_o - p_e) / (1 - p_e) scaled by n².
    const unsigned __int128 n = t.n;
    const unsigned __int128 expected =
        static_cast<unsigned __int128>(t.a1) * t.b1 +
        static_cast<unsigned __int128>(t.n - t.a1) * (t.n - t.b1);
    const unsigned __int128 total = n * n;
    if (expected == total) continue;  // degenerate
    const auto num = static_cast<long double>(n * t.agree) -
                     static_cast<long double>(expected);
    const auto den = static_cast<long double>(total - expected);
    const double kappa = static_cast<double>(num / den);
    report.kappa_per_category[index_of(c)] = kappa;
    sum += kappa;
    ++defined;
  }
  if (defined > 0) report.kappa_macro = sum / static_cast<double>(defined);
  return report;
}

AgreementReport agreement(std::span<const AnnotationSet> a,
                          std::span<const AnnotationSet> b,
                          const Corpus& corpus) {
  AgreementReport report = token_kappa(a, b, corpus);
  report.entity_f1 = pairwise_entity_f1(a, b);
  return report;
}

}  // namespace cogspan
