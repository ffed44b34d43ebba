#include <doctest.h>

#include "cogspan/baseline.hpp"
#include "cogspan/errors.hpp"
#include "cogspan/report.hpp"
#include "cogspan/scorer.hpp"
#include "cogspan/synth.hpp"

using namespace cogspan;

namespace {

Document doc_with(std::string text) { return {"d", std::move(text), {"P01"}}; }

EvalReport worked_example() {
  const std::vector<AnnotationSet> gold{
      {"d", "gold", {{0, 4, Category::action, ""}, {6, 9, Category::time, ""}}}};
  const std::vector<AnnotationSet> pred{{"d",
                                         "p",
                                         {{0, 4, Category::action, ""},
                                          {5, 9, Category::time, ""},
                                          {11, 13, Category::emotion, ""}}}};
  return score(gold, pred);
}

}  // namespace

TEST_SUITE("baseline") {
  TEST_CASE("starter lexicon on a table example") {
    const auto spans = lexicon_tag(doc_with("We laughed together in Paris"), starter_lexicon());
    REQUIRE(spans.size() == 2);
    CHECK(spans[0] == Span{0, 19, Category::social_interaction, "We laughed together"});
    CHECK(spans[1] == Span{23, 28, Category::location, "Paris"});
  }

  TEST_CASE("empty lexicon") {
    CHECK(lexicon_tag(doc_with("We laughed together in Paris"), Lexicon{}).empty());
  }

  TEST_CASE("whole word, case-insensitive, longest first, cross-category overlap") {
    Lexicon lex;
    lex.phrases[index_of(Category::action)] = {"walked", "walked to the bathroom"};
    lex.phrases[index_of(Category::location)] = {"bathroom"};
    const auto spans = lexicon_tag(doc_with("He WALKED to the bathroom; unwalked bathrooms"), lex);
    REQUIRE(spans.size() == 2);
    CHECK(spans[0] == Span{3, 25, Category::action, "WALKED to the bathroom"});
    CHECK(spans[1] == Span{17, 25, Category::location, "bathroom"});
  }

  TEST_CASE("declaration order does not matter") {
    Lexicon a;
    a.phrases[index_of(Category::action)] = {"hot", "hot oven", "oven door"};
    Lexicon b;
    b.phrases[index_of(Category::action)] = {"oven door", "hot oven", "hot"};
    const Document d = doc_with("the hot oven door was hot");
    CHECK(lexicon_tag(d, a) == lexicon_tag(d, b));
  }

  TEST_CASE("lexicon validation and file round trip") {
    Lexicon bad;
    bad.phrases[0] = {"Paris", "paris"};
    CHECK_THROWS_AS(bad.validate(), LexiconError);
    bad.phrases[0] = {""};
    CHECK_THROWS_AS(bad.validate(), LexiconError);
    CHECK(parse_lexicon(serialize_lexicon(starter_lexicon())).phrases == starter_lexicon().phrases);
    CHECK_THROWS_AS((void)parse_lexicon(R"({"smell": ["x"]})"), LexiconError);
  }

  TEST_CASE("tagger recovers synthesized gold exactly") {
    SynthSpec spec;
    spec.counts = {20, 20, 20, 20, 20, 20, 20};
    spec.nesting_rate = 0.5;
    const Corpus c = generate_synthetic_corpus(spec, 17);
    for (std::size_t i = 0; i < c.documents.size(); ++i) {
      CHECK(lexicon_tag(c.documents[i], starter_lexicon()) == c.annotations[i].spans);
    }
  }
}

TEST_SUITE("report") {
  TEST_CASE("worked example markdown row") {
    const std::string md = render_report(worked_example(), RenderTarget::markdown);
    CHECK(md.find("| micro | 2 | 0.333 | 0.500 | 0.400 | 0.667 | 1.000 | 0.800 |") != std::string::npos);
    CHECK(md.rfind("| Category | Support | Strict P | Strict R | Strict F1 | Lenient P", 0) == 0);
    // canonical row order
    CHECK(md.find("| location") < md.find("| time"));
    CHECK(md.find("| emotion") < md.find("| social_interaction"));
    CHECK(md.find("| social_interaction") < md.find("| micro"));
    CHECK(md.find("| micro") < md.find("| macro"));
  }

  TEST_CASE("perfect report renders 1.000 everywhere") {
    const std::vector<AnnotationSet> gold{{"d", "g", {{0, 4, Category::action, ""}}}};
    const std::string md = render_report(score(gold, gold), RenderTarget::markdown);
    CHECK(md.find("| action | 1 | 1.000 | 1.000 | 1.000 | 1.000 | 1.000 | 1.000 |") != std::string::npos);
    CHECK(md.find("| macro | 1 | 1.000 | 1.000 | 1.000 | 1.000 | 1.000 | 1.000 |") != std::string::npos);
  }

  TEST_CASE("json round trip is byte stable") {
    const EvalReport r = worked_example();
    const std::string j = render_report(r, RenderTarget::json);
    CHECK(report_from_json(j) == r);
    CHECK(render_report(report_from_json(j), RenderTarget::json) == j);
  }

  TEST_CASE("csv layout") {
    const std::string csv = render_report(worked_example(), RenderTarget::csv);
    CHECK(csv.rfind("row,support,strict_precision,strict_recall,strict_f1,lenient_precision", 0) == 0);
    CHECK(csv.find("micro,2,0.333,0.500,0.400,0.667,1.000,0.800\n") != std::string::npos);
  }

  TEST_CASE("agreement output marks degenerate categories") {
    AgreementReport a;
    a.entity_f1 = 0.5;
    a.kappa_per_category[index_of(Category::action)] = 0.8;
    a.kappa_macro = 0.8;
    const std::string j = agreement_to_json(a);
    CHECK(j.find("\"emotion\": \"degenerate\"") != std::string::npos);
    const std::string t = render_agreement_table(a);
    CHECK(t.find("| kappa action | 0.800 |") != std::string::npos);
  }

  TEST_CASE("render targets") {
    CHECK(parse_render_target("csv") == RenderTarget::csv);
    CHECK_THROWS_AS((void)parse_render_target("xml"), InputError);
  }
}

TEST_SUITE("synth") {
  TEST_CASE("zero spec yields filler-only documents") {
    const Corpus c = generate_synthetic_corpus({}, 1);
    CHECK_FALSE(c.documents.empty());
    for (const auto& set : c.annotations) CHECK(set.spans.empty());
    CHECK(validate_corpus(c).empty());
  }

  TEST_CASE("exact requested counts") {
    SynthSpec spec;
    spec.counts.fill(10);
    spec.counts[index_of(Category::action)] = 100;
    spec.counts[index_of(Category::emotion)] = 56;
    spec.nesting_rate = 0.3;
    const Corpus c = generate_synthetic_corpus(spec, 8);
    CHECK(category_histogram(c, "gold") == spec.counts);
    CHECK(validate_corpus(c).empty());
  }

  TEST_CASE("same seed, same bytes") {
    SynthSpec spec;
    spec.counts.fill(7);
    spec.nesting_rate = 0.2;
    CHECK(serialize_corpus(generate_synthetic_corpus(spec, 4)) ==
          serialize_corpus(generate_synthetic_corpus(spec, 4)));
    CHECK(serialize_corpus(generate_synthetic_corpus(spec, 4)) !=
          serialize_corpus(generate_synthetic_corpus(spec, 5)));
  }

  TEST_CASE("infeasible specs") {
    SynthSpec spec;
    spec.nesting_rate = 0.5;
    CHECK_THROWS_AS((void)generate_synthetic_corpus(spec, 1), SpecError);
    spec.nesting_rate = 1.5;
    spec.counts.fill(1);
    CHECK_THROWS_AS((void)generate_synthetic_corpus(spec, 1), SpecError);
    CHECK_THROWS_AS((void)parse_synth_spec(R"({"counts":{"action":-1}})"), SpecError);
    CHECK_THROWS_AS((void)parse_synth_spec(R"({"counts":{"smell":1}})"), SpecError);
  }

  TEST_CASE("spec file") {
    const SynthSpec s = parse_synth_spec(R"({"counts":{"action":3,"time":2},"nesting_rate":0.25,"documents":4})");
    CHECK(s.counts[index_of(Category::action)] == 3);
    CHECK(s.nesting_rate == 0.25);
    CHECK(s.documents == 4u);
  }
}
