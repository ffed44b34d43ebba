#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cogspan/agreement.hpp"
#include "cogspan/baseline.hpp"
#include "cogspan/corpus.hpp"
#include "cogspan/errors.hpp"
#include "cogspan/extraction.hpp"
#include "cogspan/prompting.hpp"
#include "cogspan/report.hpp"
#include "cogspan/scorer.hpp"
#include "cogspan/synth.hpp"
#include "cogspan/utf8.hpp"

namespace cogspan::cli {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content,
                  std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw InputError(fmt::format("cannot write '{}'", path));
  file << content;
  if (!file) throw InputError(fmt::format("failed writing '{}'", path));
}

std::string error_json(std::string_view kind, std::string_view message) {
  ordered_json j;
  j["error"]["kind"] = std::string(kind);
  j["error"]["message"] = std::string(message);
  return j.dump() + "\n";
}

// Picks one annotator's sets from a corpus; an unnamed annotator is allowed
// when the file holds exactly one.
std::vector<AnnotationSet> pick_annotator(const Corpus& corpus,
                                          const std::string& requested,
                                          const std::string& file) {
  if (!requested.empty()) {
    if (!corpus.has_annotator(requested)) {
      throw LookupError(
          fmt::format("'{}' has no annotations by '{}'", file, requested));
    }
    return corpus.annotations_by(requested);
  }
  std::set<std::string> ids;
  for (const auto& set : corpus.annotations) ids.insert(set.annotator_id);
  if (ids.size() != 1) {
    throw InputError(fmt::format(
        "'{}' holds {} annotators; choose one with --annotator-a/--annotator-b",
        file, ids.size()));
  }
  return corpus.annotations_by(*ids.begin());
}

std::vector<Document> select_documents(const Corpus& corpus,
                                       const std::string& split_path,
                                       const std::string& partition) {
  if (split_path.empty()) return corpus.documents;
  const SplitAssignment split = parse_split(read_file(split_path));
  std::vector<Document> docs;
  for (const auto& id : split.members(corpus, parse_partition(partition))) {
    docs.push_back(*corpus.find_document(id));
  }
  return docs;
}

void check_predictions_fit(const Corpus& corpus,
                           std::span<const AnnotationSet> pred) {
  for (const auto& set : pred) {
    const Document* doc = corpus.find_document(set.doc_id);
    if (doc == nullptr) continue;  // scorer reports unknown documents
    const std::size_t len = utf8::length(doc->text);
    for (const Span& s : set.spans) {
      if (s.end > len) {
        throw IntegrityError(fmt::format(
            "prediction span ({},{}) exceeds document '{}' of length {}",
            s.start, s.end, set.doc_id, len));
      }
    }
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nested-span narrative corpus toolkit: validation, splits, "
               "agreement, prompting, extraction and evaluation.",
               "cogspan"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  // validate
  std::string corpus_path;
  auto* validate = app.add_subcommand("validate", "Check a corpus file");
  validate->add_option("--corpus,corpus", corpus_path, "Corpus JSON")->required();

  // stats
  std::string stats_annotator;
  std::string stats_format = "json";
  auto* stats = app.add_subcommand("stats", "Corpus and category statistics");
  stats->add_option("--corpus,corpus", corpus_path, "Corpus JSON")->required();
  stats->add_option("--annotator", stats_annotator,
                    "Only this annotator (default: all)");
  stats->add_option("--format", stats_format, "json|markdown")
      ->check(CLI::IsMember({"json", "markdown"}));

  // split
  std::vector<double> ratios = {0.7, 0.1, 0.2};
  std::uint64_t seed = 0;
  std::string out_path;
  std::string annotator = std::string(kGoldAnnotator);
  auto* split = app.add_subcommand("split", "Stratified train/dev/test split");
  split->add_option("--corpus,corpus", corpus_path, "Corpus JSON")->required();
  split->add_option("--ratios", ratios, "train,dev,test")
      ->delimiter(',')
      ->expected(3);
  split->add_option("--seed", seed, "Random seed");
  split->add_option("--annotator", annotator, "Annotator to stratify on");
  split->add_option("--out", out_path, "Split JSON (default: stdout)");

  // iaa
  std::string a_path, b_path, a_annotator, b_annotator;
  std::string iaa_format = "markdown";
  auto* iaa = app.add_subcommand("iaa", "Inter-annotator agreement");
  iaa->add_option("--a", a_path, "Corpus file with annotator A")->required();
  iaa->add_option("--b", b_path, "Corpus file with annotator B")->required();
  iaa->add_option("--annotator-a", a_annotator, "Annotator id in A");
  iaa->add_option("--annotator-b", b_annotator, "Annotator id in B");
  iaa->add_option("--format", iaa_format, "Table on stdout: markdown|json")
      ->check(CLI::IsMember({"json", "markdown"}));
  iaa->add_option("--out", out_path, "Write the JSON report here");

  // export-sft
  std::string split_path;
  std::string partition = "train";
  std::string template_path;
  bool sentences = false;
  auto* sft = app.add_subcommand("export-sft", "Instruction-tuning JSONL export");
  sft->add_option("--corpus,corpus", corpus_path, "Corpus JSON")->required();
  sft->add_option("--split", split_path, "Split JSON")->required();
  sft->add_option("--partition", partition, "train|dev|test")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  sft->add_option("--annotator", annotator, "Gold annotator id");
  sft->add_option("--template", template_path, "Prompt template file");
  sft->add_flag("--sentences", sentences, "One record per sentence");
  sft->add_option("--out", out_path, "JSONL output (default: stdout)");

  // extract
  std::string mode = "zero";
  std::string exemplars_path;
  std::string endpoint;
  std::string model;
  int concurrency = 4;
  int retries = 3;
  double timeout = 60.0;
  bool verbose = false;
  auto* extract = app.add_subcommand("extract", "LLM extraction over a chat endpoint");
  extract->add_option("--corpus,corpus", corpus_path, "Corpus JSON")->required();
  extract->add_option("--mode", mode, "zero|few")->check(CLI::IsMember({"zero", "few"}));
  extract->add_option("--exemplars", exemplars_path,
                      "Few-shot exemplar JSON (default: built-in set)");
  extract->add_option("--endpoint", endpoint, "Base URL")->required();
  extract->add_option("--model", model, "Model name")->required();
  extract->add_option("--concurrency", concurrency, "Requests in flight");
  extract->add_option("--retries", retries, "Retries per request");
  extract->add_option("--timeout", timeout, "Request timeout in seconds");
  extract->add_option("--split", split_path, "Restrict to a partition of this split");
  extract->add_option("--partition", partition, "train|dev|test")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  extract->add_option("--template", template_path, "Prompt template file");
  extract->add_flag("--verbose,-v", verbose, "Log client events to stderr");
  extract->add_option("--out", out_path, "Predictions JSON (default: stdout)");

  // baseline
  std::string lexicon_path;
  auto* baseline = app.add_subcommand("baseline", "Lexicon tagger predictions");
  baseline->add_option("--corpus,corpus", corpus_path, "Corpus JSON")->required();
  baseline->add_option("--lexicon", lexicon_path,
                       "Lexicon JSON (default: starter lexicon)");
  baseline->add_option("--split", split_path, "Restrict to a partition of this split");
  baseline->add_option("--partition", partition, "train|dev|test")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  baseline->add_option("--out", out_path, "Predictions JSON (default: stdout)");

  // eval
  std::string gold_path, pred_path;
  std::string criterion = "both";
  auto* eval = app.add_subcommand("eval", "Score predictions against gold");
  eval->add_option("--gold", gold_path, "Gold corpus JSON")->required();
  eval->add_option("--pred", pred_path, "Predictions JSON")->required();
  eval->add_option("--criterion", criterion, "strict|lenient|both")
      ->check(CLI::IsMember({"strict", "lenient", "both"}));
  eval->add_option("--gold-annotator", annotator, "Gold annotator id");
  eval->add_option("--split", split_path, "Only score a partition of this split");
  eval->add_option("--partition", partition, "train|dev|test")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  eval->add_option("--out", out_path, "Report JSON (default: stdout)");

  // report
  std::string in_path;
  std::string format = "markdown";
  auto* report = app.add_subcommand("report", "Render an evaluation report");
  report->add_option("--in", in_path, "Report JSON")->required();
  report->add_option("--format", format, "markdown|csv|json")
      ->check(CLI::IsMember({"markdown", "csv", "json"}));
  report->add_option("--out", out_path, "Output (default: stdout)");

  // synth
  std::string spec_path;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic gold corpus");
  synth->add_option("--spec", spec_path, "Synthesis spec JSON")->required();
  synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--lexicon", lexicon_path, "Lexicon JSON (default: starter)");
  synth->add_option("--out", out_path, "Corpus JSON (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("usage_error", e.what());
    return 2;
  }

  try {
    if (*validate) {
      const Corpus corpus = parse_corpus_unchecked(read_file(corpus_path));
      const auto violations = validate_corpus(corpus);
      ordered_json j;
      j["violations"] = ordered_json::array();
      for (const auto& v : violations) {
        j["violations"].push_back(
            {{"doc_id", v.doc_id}, {"rule", v.rule}, {"value", v.value}});
      }
      out << j.dump(2) << "\n";
      if (!violations.empty()) {
        err << error_json("integrity_error",
                          fmt::format("{} violations", violations.size()));
        return 1;
      }
      return 0;
    }

    if (*stats) {
      const Corpus corpus = parse_corpus(read_file(corpus_path));
      const CorpusStats s = corpus_stats(corpus);
      std::vector<std::string> annotators;
      if (!stats_annotator.empty()) {
        annotators.push_back(stats_annotator);
      } else {
        for (const auto& set : corpus.annotations) {
          if (std::find(annotators.begin(), annotators.end(), set.annotator_id) ==
              annotators.end()) {
            annotators.push_back(set.annotator_id);
          }
        }
      }
      ordered_json j;
      j["documents"] = s.documents;
      j["characters"] = s.characters;
      j["tokens"] = s.tokens;
      j["placeholders"] = s.placeholders;
      j["placeholder_counts"] = s.placeholder_counts;
      j["histograms"] = ordered_json::object();
      std::string table = "| Category |";
      std::string rule = "|---|";
      for (const auto& id : annotators) {
        table += fmt::format(" {} |", id);
        rule += "---:|";
      }
      table += "\n" + rule + "\n";
      std::vector<PerCategory<std::size_t>> hists;
      for (const auto& id : annotators) {
        hists.push_back(category_histogram(corpus, id));
        ordered_json h;
        for (Category c : kAllCategories) {
          h[std::string(to_string(c))] = hists.back()[index_of(c)];
        }
        j["histograms"][id] = std::move(h);
      }
      for (Category c : kAllCategories) {
        table += fmt::format("| {} |", to_string(c));
        for (const auto& h : hists) table += fmt::format(" {} |", h[index_of(c)]);
        table += "\n";
      }
      out << (stats_format == "json" ? j.dump(2) + "\n" : table);
      return 0;
    }

    if (*split) {
      const Corpus corpus = parse_corpus(read_file(corpus_path));
      const SplitAssignment assignment =
          stratified_split(corpus, {ratios[0], ratios[1], ratios[2]}, seed, annotator);
      write_output(out_path, serialize_split(assignment), out);
      return 0;
    }

    if (*iaa) {
      const Corpus ca = parse_corpus(read_file(a_path));
      const Corpus cb = a_path == b_path ? ca : parse_corpus(read_file(b_path));
      for (const auto& doc : cb.documents) {
        const Document* mine = ca.find_document(doc.id);
        if (mine != nullptr && mine->text != doc.text) {
          throw InputError(fmt::format(
              "document '{}' has different text in '{}' and '{}'", doc.id,
              a_path, b_path));
        }
      }
      const auto sets_a = pick_annotator(ca, a_annotator, a_path);
      const auto sets_b = pick_annotator(cb, b_annotator, b_path);
      const AgreementReport r = agreement(sets_a, sets_b, ca);
      if (!out_path.empty()) write_output(out_path, agreement_to_json(r), out);
      out << (iaa_format == "json" ? agreement_to_json(r) : render_agreement_table(r));
      return 0;
    }

    if (*sft) {
      const Corpus corpus = parse_corpus(read_file(corpus_path));
      const SplitAssignment assignment = parse_split(read_file(split_path));
      const PromptTemplate tmpl = template_path.empty()
                                      ? PromptTemplate::builtin()
                                      : PromptTemplate::parse(read_file(template_path));
      const auto records =
          export_sft(corpus, assignment, parse_partition(partition),
                     SftOptions{sentences, annotator}, default_schema(), tmpl);
      write_output(out_path, write_sft(records), out);
      return 0;
    }

    if (*extract) {
      const Corpus corpus = parse_corpus(read_file(corpus_path));
      const auto docs = select_documents(corpus, split_path, partition);
      EndpointConfig config = EndpointConfig::from_environment(endpoint, model);
      config.max_concurrency = concurrency;
      config.max_retries = retries;
      config.timeout_seconds = timeout;
      const PromptMode prompt_mode = parse_prompt_mode(mode);
      ExemplarSet exemplars;
      if (prompt_mode == PromptMode::few) {
        exemplars = exemplars_path.empty() ? builtin_exemplars()
                                           : parse_exemplars(read_file(exemplars_path));
      }
      const PromptTemplate tmpl = template_path.empty()
                                      ? PromptTemplate::builtin()
                                      : PromptTemplate::parse(read_file(template_path));
      const ChatClient client(config);
      const auto results =
          extract_batch(docs, prompt_mode,
                        prompt_mode == PromptMode::few ? &exemplars : nullptr,
                        client, default_schema(), tmpl);
      if (verbose) {
        for (const auto& e : client.events().snapshot()) {
          err << fmt::format("[{}] {}\n", e.kind, e.detail);
        }
      }
      write_output(out_path, serialize_predictions(results), out);
      return 0;
    }

    if (*baseline) {
      const Corpus corpus = parse_corpus(read_file(corpus_path));
      const auto docs = select_documents(corpus, split_path, partition);
      const Lexicon lexicon =
          lexicon_path.empty() ? starter_lexicon() : parse_lexicon(read_file(lexicon_path));
      std::vector<GroundedResult> results;
      for (const Document& doc : docs) {
        GroundedResult r;
        r.doc_id = doc.id;
        r.spans = lexicon_tag(doc, lexicon);
        r.provenance = {"lexicon-baseline", PromptMode::lexicon, ""};
        results.push_back(std::move(r));
      }
      write_output(out_path, serialize_predictions(results), out);
      return 0;
    }

    if (*eval) {
      const Corpus corpus = parse_corpus(read_file(gold_path));
      std::vector<AnnotationSet> gold = corpus.annotations_by(annotator);
      if (gold.empty()) {
        throw LookupError(fmt::format("'{}' has no '{}' annotations", gold_path,
                                      annotator));
      }
      auto pred = to_annotation_sets(parse_predictions(read_file(pred_path)));
      if (!split_path.empty()) {
        const SplitAssignment assignment = parse_split(read_file(split_path));
        const auto members = assignment.members(corpus, parse_partition(partition));
        const std::set<std::string> keep(members.begin(), members.end());
        auto outside = [&](const AnnotationSet& s) { return !keep.contains(s.doc_id); };
        std::erase_if(gold, outside);
        // Predictions for other partitions are ignored; unknown ids still fail.
        std::erase_if(pred, [&](const AnnotationSet& s) {
          return outside(s) && corpus.find_document(s.doc_id) != nullptr;
        });
      }
      check_predictions_fit(corpus, pred);
      std::set<MatchCriterion> criteria;
      if (criterion == "both") {
        criteria = {MatchCriterion::strict, MatchCriterion::lenient};
      } else {
        criteria = {parse_criterion(criterion)};
      }
      write_output(out_path, report_to_json(score(gold, pred, criteria)), out);
      return 0;
    }

    if (*report) {
      const EvalReport r = report_from_json(read_file(in_path));
      write_output(out_path, render_report(r, parse_render_target(format)), out);
      return 0;
    }

    if (*synth) {
      const SynthSpec spec = parse_synth_spec(read_file(spec_path));
      const Lexicon lexicon =
          lexicon_path.empty() ? starter_lexicon() : parse_lexicon(read_file(lexicon_path));
      write_output(out_path,
                   serialize_corpus(generate_synthetic_corpus(spec, seed, lexicon)),
                   out);
      return 0;
    }
  } catch (const Error& e) {
    err << error_json(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    err << error_json("internal_error", e.what());
    return 1;
  }
  return 0;
}

}  // namespace cogspan::cli
