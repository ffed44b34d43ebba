#include "cogspan/prompting.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "assets.hpp"
#include "cogspan/errors.hpp"
#include "cogspan/utf8.hpp"

namespace cogspan {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string serialize_items(const std::vector<ExtractionItem>& items) {
  ordered_json array = ordered_json::array();
  for (const auto& item : items) {
    ordered_json o;
    o["category"] = std::string(to_string(item.category));
    o["text"] = item.text;
    array.push_back(std::move(o));
  }
  return array.dump();
}

const CategorySchema& default_schema() {
  static const CategorySchema schema = {
      {Category::location,
       "Places or settings where actions or events happen, from a specific "
       "room, street or city to a general description of spatial position.",
       {"Forest", "Backyard", "I-95 highway", "Paris"}},
      {Category::time,
       "Temporal expressions and references to time: times of day, days of "
       "the week, months, seasons, holidays and special days.",
       {"Monday", "April 2024", "Middle of the week"}},
      {Category::sensory,
       "Sight, hearing, smell, taste and touch (including temperature, "
       "pressure and pain), awareness of body position, and internal bodily "
       "states such as hunger, thirst or heartbeat.",
       {"The sky was bright and clear", "I felt a sharp pain in my leg",
        "Birds chirping", "Sweet tea", "Nice fragrance"}},
      {Category::action,
       "Purposeful physical or mental actions carried out by the participant "
       "or by other people.",
       {"The patient walked to the bathroom", "I filled out a form"}},
      {Category::thought,
       "Internal mental processes and reflections, such as interpreting, "
       "recalling or mentally working through experiences and observations, "
       "that need not lead to a concrete action or plan.",
       {"I decided to leave early", "I realized I had made a mistake"}},
      {Category::emotion,
       "Emotional experiences or feelings of the participant, positive or "
       "negative.",
       {"It was a happy time", "The movie made me nostalgic"}},
      {Category::social_interaction,
       "Interactions or exchanges between people, both verbal communication "
       "and non-verbal exchanges such as gestures or expressions.",
       {"I spoke with the doctor", "We laughed together"}},
  };
  return schema;
}

// ---------------------------------------------------------------------------
// Template

namespace {

std::string trim_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\n' ||
                        s.back() == '\t' || s.back() == '\r')) {
    s.pop_back();
  }
  return s;
}

std::string substitute(std::string text, std::string_view placeholder,
                       std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
  return text;
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view text) {
  PromptTemplate tmpl;
  std::string* current = nullptr;
  std::set<std::string> seen;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.starts_with("@@")) {
      const std::string name(line.substr(2));
      if (name == "instruction") {
        current = &tmpl.instruction;
      } else if (name == "example") {
        current = &tmpl.example;
      } else if (name == "input") {
        current = &tmpl.input;
      } else {
        throw SchemaError(fmt::format("unknown template section '@@{}'", name));
      }
      if (!seen.insert(name).second) {
        throw SchemaError(fmt::format("duplicate template section '@@{}'", name));
      }
    } else if (current != nullptr) {
      current->append(line);
      current->push_back('\n');
    } else if (line.starts_with("#")) {
      std::string_view v = line.substr(1);
      while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
      tmpl.version = std::string(v);
    } else if (!line.empty()) {
      throw SchemaError("template text before the first section");
    }
    if (eol == text.size()) break;
    pos = eol + 1;
  }
  if (seen.size() != 3) {
    throw SchemaError(
        "template needs @@instruction, @@example and @@input sections");
  }
  tmpl.instruction = trim_trailing_newlines(std::move(tmpl.instruction));
  tmpl.example = trim_trailing_newlines(std::move(tmpl.example));
  tmpl.input = trim_trailing_newlines(std::move(tmpl.input));
  if (tmpl.instruction.find("{{definitions}}") == std::string::npos) {
    throw SchemaError("instruction section lacks {{definitions}}");
  }
  if (tmpl.input.find("{{input}}") == std::string::npos) {
    throw SchemaError("input section lacks {{input}}");
  }
  return tmpl;
}

const PromptTemplate& PromptTemplate::builtin() {
  static const PromptTemplate tmpl = parse(assets::prompt_template());
  return tmpl;
}

// ---------------------------------------------------------------------------
// Exemplars

namespace {

std::vector<ExtractionItem> items_from_json(const json& array,
                                            const std::string& where) {
  if (!array.is_array()) {
    throw SchemaError(fmt::format("{}: expected an array", where));
  }
  std::vector<ExtractionItem> items;
  for (std::size_t i = 0; i < array.size(); ++i) {
    const json& o = array[i];
    if (!o.is_object() || !o.contains("category") || !o.contains("text") ||
        !o["category"].is_string() || !o["text"].is_string()) {
      throw SchemaError(fmt::format(
          "{}[{}]: expected {{\"category\": str, \"text\": str}}", where, i));
    }
    ExtractionItem item;
    try {
      item.category = parse_category(o["category"].get<std::string>());
    } catch (const ValidationError& e) {
      throw SchemaError(fmt::format("{}[{}]: {}", where, i, e.what()));
    }
    item.text = o["text"].get<std::string>();
    if (item.text.empty()) {
      throw SchemaError(fmt::format("{}[{}]: empty text", where, i));
    }
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace

void ExemplarSet::validate() const {
  if (exemplars.size() != kExemplarCount) {
    throw SchemaError(fmt::format("exemplar set has {} examples, expected {}",
                                  exemplars.size(), kExemplarCount));
  }
  std::set<Category> covered;
  for (const auto& ex : exemplars) {
    for (const auto& item : ex.response) covered.insert(item.category);
  }
  if (covered.size() != kCategoryCount) {
    std::string missing;
    for (Category c : kAllCategories) {
      if (covered.contains(c)) continue;
      if (!missing.empty()) missing += ", ";
      missing += to_string(c);
    }
    throw SchemaError(
        fmt::format("exemplar set does not cover categories: {}", missing));
  }
}

ExemplarSet parse_exemplars(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed exemplar file: {}", e.what()));
  }
  if (root.is_object() && root.contains("exemplars")) root = root["exemplars"];
  if (!root.is_array()) throw SchemaError("exemplar file: expected an array");
  ExemplarSet set;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const std::string where = fmt::format("exemplars[{}]", i);
    const json& e = root[i];
    if (!e.is_object() || !e.contains("input") || !e["input"].is_string() ||
        !e.contains("output")) {
      throw SchemaError(
          fmt::format("{}: expected {{\"input\": str, \"output\": [...]}}", where));
    }
    set.exemplars.push_back(
        {e["input"].get<std::string>(), items_from_json(e["output"], where + ".output")});
  }
  return set;
}

const ExemplarSet& builtin_exemplars() {
  static const ExemplarSet set = [] {
    ExemplarSet s = parse_exemplars(assets::exemplars());
    s.validate();
    return s;
  }();
  return set;
}

// ---------------------------------------------------------------------------
// Builders

std::string render_definitions(const CategorySchema& schema) {
  std::string out;
  for (Category c : kAllCategories) {
    const auto it = std::find_if(
        schema.begin(), schema.end(),
        [&](const CategoryDefinition& d) { return d.category == c; });
    if (it == schema.end()) {
      throw SchemaError(
          fmt::format("schema has no definition for '{}'", to_string(c)));
    }
    if (!out.empty()) out += '\n';
    out += fmt::format("- {}: {}", to_string(c), it->description);
    if (!it->examples.empty()) {
      out += " Examples: ";
      for (std::size_t i = 0; i < it->examples.size(); ++i) {
        if (i > 0) out += ", ";
        out += '"' + it->examples[i] + '"';
      }
      out += '.';
    }
  }
  return out;
}

namespace {

PromptRecord build(const Document& doc, const std::string& examples,
                   const CategorySchema& schema, const PromptTemplate& tmpl) {
  PromptRecord record;
  std::string instruction =
      substitute(tmpl.instruction, "{{definitions}}", render_definitions(schema));
  instruction = substitute(std::move(instruction), "{{examples}}", examples);
  record.instruction = rtrim(std::move(instruction));
  record.input = substitute(tmpl.input, "{{input}}", doc.text);
  return record;
}

}  // namespace

PromptRecord build_zero_shot(const Document& doc, const CategorySchema& schema,
                             const PromptTemplate& tmpl) {
  return build(doc, "", schema, tmpl);
}

PromptRecord build_few_shot(const Document& doc, const ExemplarSet& exemplars,
                            const CategorySchema& schema,
                            const PromptTemplate& tmpl) {
  exemplars.validate();
  std::string blocks = "\n\nExamples:";
  for (std::size_t i = 0; i < exemplars.exemplars.size(); ++i) {
    const Exemplar& ex = exemplars.exemplars[i];
    std::string block = substitute(tmpl.example, "{{index}}", std::to_string(i + 1));
    // {{output}} first: exemplar input text must not be rescanned.
    block = substitute(std::move(block), "{{output}}", serialize_items(ex.response));
    block = substitute(std::move(block), "{{input}}", ex.input);
    blocks += "\n\n" + block;
  }
  return build(doc, blocks, schema, tmpl);
}

// ---------------------------------------------------------------------------
// SFT export

std::vector<std::pair<std::size_t, std::size_t>> split_sentences(
    std::string_view text, std::span<const Span> keep_together) {
  const utf8::Index index(text);
  const std::size_t n = index.size();
  auto at = [&](std::size_t i) { return text[index.byte_offset(i)]; };
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  };
  auto is_terminal = [](char c) { return c == '.' || c == '!' || c == '?'; };
  auto crosses = [&](std::size_t end, std::size_t next) {
    return std::any_of(keep_together.begin(), keep_together.end(),
                       [&](const Span& s) { return s.start < end && s.end > next; });
  };

  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  while (start < n && is_space(at(start))) ++start;
  std::size_t i = start;
  while (i < n) {
    if (!is_terminal(at(i))) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < n && is_terminal(at(end))) ++end;
    std::size_t next = end;
    while (next < n && is_space(at(next))) ++next;
    if (next > end && next < n && !crosses(end, next)) {
      out.emplace_back(start, end);
      start = next;
    }
    i = next > end ? next : end;
  }
  std::size_t stop = n;
  while (stop > start && is_space(at(stop - 1))) --stop;
  if (stop > start) out.emplace_back(start, stop);
  return out;
}

std::vector<PromptRecord> export_sft(const Corpus& corpus,
                                     const SplitAssignment& split,
                                     Partition partition,
                                     const SftOptions& options,
                                     const CategorySchema& schema,
                                     const PromptTemplate& tmpl) {
  const std::vector<std::string> members = split.members(corpus, partition);
  std::unordered_map<std::string, std::vector<Span>> gold;
  std::set<std::string> has_gold;
  for (const auto& set : corpus.annotations) {
    if (set.annotator_id != options.annotator) continue;
    has_gold.insert(set.doc_id);
    auto& spans = gold[set.doc_id];
    spans.insert(spans.end(), set.spans.begin(), set.spans.end());
  }
  std::vector<std::string> missing;
  for (const auto& id : members) {
    if (!has_gold.contains(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    throw DataError(fmt::format("no '{}' annotations for documents: {}",
                                options.annotator, fmt::join(missing, ", ")));
  }

  std::vector<PromptRecord> records;
  for (const auto& id : members) {
    const Document& doc = *corpus.find_document(id);
    std::vector<Span> spans = gold[id];
    std::sort(spans.begin(), spans.end(), span_less);

    auto emit = [&](const Document& unit, std::size_t lo, std::size_t hi) {
      std::vector<ExtractionItem> items;
      for (const Span& s : spans) {
        if (s.start >= lo && s.end <= hi) {
          items.push_back({s.category, s.surface, std::nullopt});
        }
      }
      PromptRecord record = build_zero_shot(unit, schema, tmpl);
      record.response = serialize_items(items);
      records.push_back(std::move(record));
    };

    if (!options.sentences) {
      emit(doc, 0, static_cast<std::size_t>(-1));
      continue;
    }
    const utf8::Index index(doc.text);
    for (const auto& [lo, hi] : split_sentences(doc.text, spans)) {
      Document sentence = doc;
      sentence.text = std::string(index.slice(doc.text, lo, hi));
      emit(sentence, lo, hi);
    }
  }
  return records;
}

std::string write_sft(const std::vector<PromptRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json line;
    line["instruction"] = r.instruction;
    line["input"] = r.input;
    line["output"] = r.response.value_or("");
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<PromptRecord> read_sft(std::string_view bytes) {
  std::vector<PromptRecord> records;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < bytes.size()) {
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) eol = bytes.size();
    const std::string_view line = bytes.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
      throw ParseError(fmt::format("SFT line {}: {}", line_no, e.what()));
    }
    for (const char* key : {"instruction", "input", "output"}) {
      if (!j.is_object() || !j.contains(key) || !j[key].is_string()) {
        throw DataError(
            fmt::format("SFT line {}: missing string field '{}'", line_no, key));
      }
    }
    records.push_back({j["instruction"].get<std::string>(),
                       j["input"].get<std::string>(),
                       j["output"].get<std::string>()});
  }
  return records;
}

}  // namespace cogspan
