#include <doctest.h>

#include "cogspan/agreement.hpp"
#include "cogspan/errors.hpp"
#include "cogspan/scorer.hpp"
#include "support/oracles.hpp"

using namespace cogspan;
using cogspan::testing::oracle_counts;

namespace {

Span sp(std::size_t s, std::size_t e, Category c) { return {s, e, c, ""}; }

AnnotationSet set_of(std::string doc, std::vector<Span> spans, std::string who = "x") {
  return {std::move(doc), std::move(who), std::move(spans)};
}

}  // namespace

TEST_SUITE("scorer") {
  TEST_CASE("identity match") {
    const std::vector<Span> g{sp(0, 4, Category::action)};
    const auto r = match_spans(g, g, MatchCriterion::strict);
    CHECK(r.pairs.size() == 1);
    CHECK(r.unmatched_gold.empty());
    CHECK(r.unmatched_pred.empty());
  }

  TEST_CASE("boundary shift: strict vs lenient") {
    const std::vector<Span> g{sp(6, 9, Category::time)}, p{sp(5, 9, Category::time)};
    CHECK(match_spans(g, p, MatchCriterion::strict).pairs.empty());
    CHECK(match_spans(g, p, MatchCriterion::lenient).pairs.size() == 1);
  }

  TEST_CASE("lenient matching is one-to-one") {
    const std::vector<Span> g{sp(0, 10, Category::action)};
    const std::vector<Span> p{sp(0, 4, Category::action), sp(5, 10, Category::action)};
    const auto r = match_spans(g, p, MatchCriterion::lenient);
    CHECK(r.pairs.size() == 1);
    CHECK(r.unmatched_pred.size() == 1);
  }

  TEST_CASE("greedy order would be submaximal; result is still maximum") {
    // Largest overlap pairs g0-p0, leaving g1 without a partner unless
    // the matcher augments.
    const std::vector<Span> g{sp(0, 10, Category::action), sp(8, 12, Category::action)};
    const std::vector<Span> p{sp(2, 10, Category::action), sp(0, 2, Category::action)};
    const auto r = match_spans(g, p, MatchCriterion::lenient);
    CHECK(r.pairs.size() == 2);
  }

  TEST_CASE("mixed documents are rejected") {
    CHECK_THROWS_AS((void)match_spans(set_of("a", {}), set_of("b", {}), MatchCriterion::strict),
                    InputError);
  }

  TEST_CASE("worked example micro scores") {
    const std::vector<AnnotationSet> gold{
        set_of("d", {sp(0, 4, Category::action), sp(6, 9, Category::time)})};
    const std::vector<AnnotationSet> pred{set_of(
        "d", {sp(0, 4, Category::action), sp(5, 9, Category::time),
              sp(11, 13, Category::emotion)})};
    const EvalReport r = score(gold, pred);
    const Scores strict = r.criteria.at(MatchCriterion::strict).micro;
    const Scores lenient = r.criteria.at(MatchCriterion::lenient).micro;
    CHECK(strict.precision == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(strict.recall == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(strict.f1 == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(lenient.precision == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(lenient.recall == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lenient.f1 == doctest::Approx(0.8).epsilon(1e-12));
  }

  TEST_CASE("identity and empty predictions") {
    const std::vector<AnnotationSet> gold{
        set_of("a", {sp(0, 4, Category::action), sp(2, 6, Category::sensory)}),
        set_of("b", {sp(1, 3, Category::emotion)})};
    const EvalReport same = score(gold, gold);
    for (const auto& [crit, res] : same.criteria) {
      CHECK(res.micro == Scores{1.0, 1.0, 1.0});
      CHECK(res.macro == Scores{1.0, 1.0, 1.0});
      CHECK(res.macro_categories == 3);
    }
    const EvalReport none = score(gold, std::vector<AnnotationSet>{});
    for (const auto& [crit, res] : none.criteria) {
      CHECK(res.micro == Scores{0.0, 0.0, 0.0});
      CHECK(res.macro == Scores{0.0, 0.0, 0.0});
    }
    CHECK(none.errors.miss == 3);
  }

  TEST_CASE("single category: micro equals macro") {
    const std::vector<AnnotationSet> gold{set_of("a", {sp(0, 4, Category::time), sp(5, 8, Category::time)})};
    const std::vector<AnnotationSet> pred{set_of("a", {sp(0, 4, Category::time), sp(9, 12, Category::time)})};
    for (const auto& [crit, res] : score(gold, pred).criteria) CHECK(res.micro == res.macro);
  }

  TEST_CASE("unknown pred document") {
    const std::vector<AnnotationSet> gold{set_of("a", {})};
    const std::vector<AnnotationSet> pred{set_of("zz", {})};
    CHECK_THROWS_AS((void)score(gold, pred), InputError);
  }

  TEST_CASE("error taxonomy examples") {
    auto tax = error_taxonomy(std::vector<Span>{sp(6, 9, Category::time)},
                              std::vector<Span>{sp(5, 9, Category::time)});
    CHECK(tax.boundary_error == 1);
    CHECK(tax.miss == 0);
    tax = error_taxonomy(std::vector<Span>{sp(0, 4, Category::thought)},
                         std::vector<Span>{sp(0, 4, Category::sensory)});
    CHECK(tax.category_confusion == 1);
    CHECK(tax.miss == 1);
    tax = error_taxonomy(std::vector<Span>{sp(0, 4, Category::thought)},
                         std::vector<Span>{sp(10, 14, Category::thought)});
    CHECK(tax.spurious == 1);
    CHECK(tax.miss == 1);
    const std::vector<Span> g{sp(0, 4, Category::action), sp(3, 8, Category::time)};
    tax = error_taxonomy(g, g);
    CHECK(tax.exact == 2);
    CHECK(tax.miss == 0);
  }

  TEST_CASE("properties over random instances") {
    Rng rng(2024);
    for (int it = 0; it < 300; ++it) {
      auto g = cogspan::testing::random_spans(rng, rng.below(7), 30);
      auto p = cogspan::testing::random_spans(rng, rng.below(7), 30);
      for (auto crit : {MatchCriterion::strict, MatchCriterion::lenient}) {
        const auto expected = oracle_counts(g, p, crit);
        const EvalReport r = score(std::vector{set_of("d", g)}, std::vector{set_of("d", p)}, {crit});
        for (Category c : kAllCategories) {
          const auto& cc = r.criteria.at(crit).per_category[index_of(c)].counts;
          CHECK(cc == expected[index_of(c)]);
        }
        // permutation invariance
        auto g2 = g, p2 = p;
        rng.shuffle(g2);
        rng.shuffle(p2);
        CHECK(score(std::vector{set_of("d", g2)}, std::vector{set_of("d", p2)}, {crit}) == r);
      }
      const auto tax = error_taxonomy(g, p);
      CHECK(tax.exact + tax.boundary_error + tax.category_confusion + tax.spurious == p.size());
      CHECK(tax.exact + tax.boundary_error <= p.size());
    }
  }

  TEST_CASE("zero denominators") {
    CHECK(scores_from_counts({0, 0, 0}) == Scores{0, 0, 0});
    CHECK(scores_from_counts({0, 3, 0}) == Scores{0, 0, 0});
  }
}

TEST_SUITE("agreement") {
  Corpus docs_of(std::vector<std::pair<std::string, std::string>> docs) {
    Corpus c;
    for (auto& [id, text] : docs) c.documents.push_back({id, text, {"P01"}});
    return c;
  }

  TEST_CASE("entity F1 examples") {
    const std::vector<AnnotationSet> a{set_of("d", {sp(0, 5, Category::action), sp(10, 14, Category::time)})};
    const std::vector<AnnotationSet> b{set_of("d", {sp(0, 5, Category::action)})};
    CHECK(pairwise_entity_f1(a, b) == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(pairwise_entity_f1(a, b) == pairwise_entity_f1(b, a));
    CHECK(pairwise_entity_f1(a, a) == 1.0);
    CHECK(pairwise_entity_f1(a, std::vector{set_of("d", {})}) == 0.0);
  }

  TEST_CASE("coverage mismatch") {
    const std::vector<AnnotationSet> a{set_of("d", {})};
    const std::vector<AnnotationSet> b{set_of("e", {})};
    CHECK_THROWS_AS((void)pairwise_entity_f1(a, b), InputError);
  }

  TEST_CASE("hand kappa 0.8") {
    const Corpus c = docs_of({{"d", "0123456789"}});
    const std::vector<AnnotationSet> a{set_of("d", {sp(0, 5, Category::action)})};
    const std::vector<AnnotationSet> b{set_of("d", {sp(0, 4, Category::action)})};
    const AgreementReport r = agreement(a, b, c);
    REQUIRE(r.kappa_per_category[index_of(Category::action)].has_value());
    CHECK(std::abs(*r.kappa_per_category[index_of(Category::action)] - 0.8) < 1e-12);
    CHECK_FALSE(r.kappa_per_category[index_of(Category::emotion)].has_value());
    REQUIRE(r.kappa_macro.has_value());
    CHECK(std::abs(*r.kappa_macro - 0.8) < 1e-12);
  }

  TEST_CASE("all degenerate leaves macro absent") {
    const Corpus c = docs_of({{"d", "abc"}});
    const std::vector<AnnotationSet> a{set_of("d", {})};
    const AgreementReport r = agreement(a, a, c);
    CHECK_FALSE(r.kappa_macro.has_value());
    CHECK(r.entity_f1 == 1.0);
  }

  TEST_CASE("kappa matches textbook oracle and is symmetric") {
    Rng rng(99);
    for (int it = 0; it < 50; ++it) {
      Corpus c;
      std::vector<AnnotationSet> a, b;
      for (int d = 0; d < 4; ++d) {
        const std::size_t len = 5 + rng.below(40);
        c.documents.push_back({"d" + std::to_string(d), std::string(len, 'x'), {"P"}});
        a.push_back(set_of(c.documents.back().id, cogspan::testing::random_spans(rng, rng.below(5), len)));
        b.push_back(set_of(c.documents.back().id, cogspan::testing::random_spans(rng, rng.below(5), len)));
      }
      const AgreementReport ab = agreement(a, b, c);
      CHECK(ab == agreement(b, a, c));
      for (Category cat : kAllCategories) {
        std::vector<std::vector<bool>> la, lb;
        for (std::size_t d = 0; d < c.documents.size(); ++d) {
          la.push_back(cogspan::testing::inside_labels(a[d].spans, c.documents[d].text.size(), cat));
          lb.push_back(cogspan::testing::inside_labels(b[d].spans, c.documents[d].text.size(), cat));
        }
        const auto hk = cogspan::testing::hand_kappa(la, lb);
        const auto& k = ab.kappa_per_category[index_of(cat)];
        CHECK(k.has_value() == !hk.degenerate);
        if (k) {
          CHECK(std::abs(*k - hk.kappa) < 1e-9);
          CHECK(*k >= -1.0);
          CHECK(*k <= 1.0);
        }
      }
    }
  }
}
