#include <doctest.h>

#include "cogspan/errors.hpp"
#include "cogspan/extraction.hpp"
#include "cogspan/prompting.hpp"
#include "cogspan/synth.hpp"

using namespace cogspan;

namespace {

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

Document doc_with(std::string text) { return {"d1", std::move(text), {"P01"}}; }

}  // namespace

TEST_SUITE("prompting") {
  TEST_CASE("zero-shot prompt lists every category once") {
    const PromptRecord r = build_zero_shot(doc_with("I spoke with the doctor"));
    CHECK(r.input == "I spoke with the doctor");
    CHECK_FALSE(r.response.has_value());
    for (Category c : kAllCategories) {
      CHECK(count_of(r.instruction, "- " + std::string(to_string(c)) + ":") == 1);
    }
    CHECK(r.instruction.find("{{") == std::string::npos);
    CHECK(build_zero_shot(doc_with("I spoke with the doctor")) == r);
  }

  TEST_CASE("schema missing a category") {
    CategorySchema partial = default_schema();
    partial.pop_back();
    CHECK_THROWS_AS((void)build_zero_shot(doc_with("x"), partial), SchemaError);
  }

  TEST_CASE("few-shot prompt extends the zero-shot instruction") {
    const Document d = doc_with("We walked to the park.");
    const PromptRecord zero = build_zero_shot(d);
    const PromptRecord few = build_few_shot(d, builtin_exemplars());
    CHECK(few.instruction.rfind(zero.instruction, 0) == 0);
    CHECK(few.input == zero.input);
    for (int k = 1; k <= 5; ++k) {
      CHECK(count_of(few.instruction, "Example " + std::to_string(k) + "\n") == 1);
    }
    CHECK(count_of(few.instruction, "\nOutput: ") == 5);
  }

  TEST_CASE("exemplar responses parse back to their items") {
    const ExemplarSet& set = builtin_exemplars();
    const PromptRecord few = build_few_shot(doc_with("x"), set);
    for (const Exemplar& ex : set.exemplars) {
      const std::string rendered = serialize_items(ex.response);
      CHECK(few.instruction.find("Output: " + rendered) != std::string::npos);
      const ParsedOutput back = parse_model_output(rendered);
      CHECK_FALSE(back.null_response);
      CHECK(back.items == ex.response);
    }
  }

  TEST_CASE("coverage violations") {
    ExemplarSet six = builtin_exemplars();
    for (auto& ex : six.exemplars) {
      std::erase_if(ex.response, [](const ExtractionItem& i) { return i.category == Category::emotion; });
    }
    CHECK_THROWS_AS(six.validate(), SchemaError);
    CHECK_THROWS_AS((void)build_few_shot(doc_with("x"), six), SchemaError);
    ExemplarSet four = builtin_exemplars();
    four.exemplars.pop_back();
    CHECK_THROWS_AS(four.validate(), SchemaError);
  }

  TEST_CASE("template parsing") {
    const PromptTemplate t = PromptTemplate::parse(
        "# v9\n@@instruction\nDo it.\n{{definitions}}{{examples}}\n@@example\nE{{index}} {{input}} {{output}}\n@@input\n>> {{input}}\n");
    CHECK(t.version == "v9");
    const PromptRecord r = build_zero_shot(doc_with("hello"), default_schema(), t);
    CHECK(r.input == ">> hello");
    CHECK_THROWS_AS((void)PromptTemplate::parse("@@instruction\nno placeholders\n"), SchemaError);
  }

  TEST_CASE("sft export of the nested example") {
    Corpus c;
    c.documents.push_back(doc_with("She felt pain while opening the hot oven"));
    c.annotations.push_back({"d1", "gold",
                             {{32, 40, Category::sensory, "hot oven"},
                              {4, 13, Category::sensory, "felt pain"},
                              {20, 40, Category::action, "opening the hot oven"}}});
    SplitAssignment split;
    split.assignment["d1"] = Partition::train;
    const auto records = export_sft(c, split, Partition::train);
    REQUIRE(records.size() == 1);
    CHECK(*records[0].response ==
          R"([{"category":"sensory","text":"felt pain"},{"category":"action","text":"opening the hot oven"},{"category":"sensory","text":"hot oven"}])");
    CHECK(export_sft(c, split, Partition::test).empty());
    CHECK(read_sft(write_sft(records)) == records);

    Corpus no_gold = c;
    no_gold.annotations.clear();
    try {
      (void)export_sft(no_gold, split, Partition::train);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("d1") != std::string::npos);
    }
  }

  TEST_CASE("sft record count equals partition size") {
    SynthSpec spec;
    spec.counts = {10, 10, 10, 10, 10, 10, 10};
    const Corpus c = generate_synthetic_corpus(spec, 3);
    const SplitAssignment split = stratified_split(c, {}, 1);
    for (Partition p : {Partition::train, Partition::dev, Partition::test}) {
      const auto records = export_sft(c, split, p);
      CHECK(records.size() == split.members(c, p).size());
      const std::string file = write_sft(records);
      CHECK(static_cast<std::size_t>(std::count(file.begin(), file.end(), '\n')) == records.size());
      // every response grounds back losslessly on its own document
      const auto members = split.members(c, p);
      for (std::size_t i = 0; i < records.size(); ++i) {
        const ParsedOutput parsed = parse_model_output(*records[i].response);
        CHECK_FALSE(parsed.null_response);
        const GroundedResult g = ground(parsed.items, *c.find_document(members[i]));
        CHECK(g.ungrounded.empty());
      }
    }
  }

  TEST_CASE("sentence splitting") {
    const std::string text = "I walked. Then I sat down!  Done";
    const auto s = split_sentences(text);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == std::pair<std::size_t, std::size_t>{0, 9});
    CHECK(s[1] == std::pair<std::size_t, std::size_t>{10, 26});
    CHECK(s[2] == std::pair<std::size_t, std::size_t>{28, 32});
    // a span across the boundary keeps the sentences together
    const std::vector<Span> keep{{5, 14, Category::action, ""}};
    CHECK(split_sentences(text, keep).size() == 2);
  }

  TEST_CASE("sentence-level export offsets items by sentence") {
    Corpus c;
    c.documents.push_back(doc_with("I walked. We laughed together."));
    c.annotations.push_back({"d1", "gold",
                             {{2, 8, Category::action, "walked"},
                              {10, 29, Category::social_interaction, "We laughed together"}}});
    SplitAssignment split;
    split.assignment["d1"] = Partition::train;
    SftOptions opts;
    opts.sentences = true;
    const auto records = export_sft(c, split, Partition::train, opts);
    REQUIRE(records.size() == 2);
    CHECK(records[0].input == "I walked.");
    CHECK(*records[1].response == R"([{"category":"social_interaction","text":"We laughed together"}])");
  }
}
