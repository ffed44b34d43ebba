#include "cogspan/extraction.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "cogspan/errors.hpp"
#include "cogspan/utf8.hpp"

namespace cogspan {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void EndpointConfig::validate() const {
  if (base_url.empty()) throw ConfigError("endpoint base_url is empty");
  if (!base_url.starts_with("http://") && !base_url.starts_with("https://")) {
    throw ConfigError(fmt::format(
        "endpoint base_url '{}' must start with http:// or https://", base_url));
  }
  if (model_name.empty()) throw ConfigError("model name is empty");
  if (!std::isfinite(temperature) || temperature < 0.0 || temperature > 2.0) {
    throw ConfigError(fmt::format("temperature {} outside [0, 2]", temperature));
  }
  if (max_retries < 0 || max_retries > 10) {
    throw ConfigError(fmt::format("max_retries {} outside [0, 10]", max_retries));
  }
  if (!std::isfinite(timeout_seconds) || timeout_seconds <= 0.0) {
    throw ConfigError("timeout must be positive");
  }
  if (max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
  if (backoff_initial.count() < 0 || backoff_max < backoff_initial) {
    throw ConfigError("backoff must satisfy 0 <= initial <= max");
  }
}

EndpointConfig EndpointConfig::from_environment(std::string base_url,
                                                std::string model_name) {
  EndpointConfig config;
  config.base_url = std::move(base_url);
  config.model_name = std::move(model_name);
  if (const char* key = std::getenv(std::string(kApiKeyVariable).c_str())) {
    config.api_key = key;
  }
  return config;
}

void EventLog::append(std::string kind, std::string detail) {
  std::lock_guard lock(mutex_);
  events_.push_back({std::move(kind), std::move(detail)});
}

std::vector<EventLog::Event> EventLog::snapshot() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::size_t EventLog::count(std::string_view kind) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(std::count_if(
      events_.begin(), events_.end(),
      [&](const Event& e) { return e.kind == kind; }));
}

// ---------------------------------------------------------------------------
// Client

ChatClient::ChatClient(EndpointConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t scheme_end = config_.base_url.find("://") + 3;
  const std::size_t slash = config_.base_url.find('/', scheme_end);
  if (slash == std::string::npos) {
    scheme_host_port_ = config_.base_url;
  } else {
    scheme_host_port_ = config_.base_url.substr(0, slash);
    path_ = config_.base_url.substr(slash);
  }
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/v1/chat/completions";
}

std::string chat_request_body(const PromptRecord& prompt,
                              const EndpointConfig& config) {
  ordered_json body;
  body["model"] = config.model_name;
  body["messages"] = ordered_json::array(
      {{{"role", "system"}, {"content", prompt.instruction}},
       {{"role", "user"}, {"content", prompt.input}}});
  body["temperature"] = config.temperature;
  return body.dump();
}

namespace {

std::string content_from_body(const std::string& body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) {
    throw ProtocolError("endpoint returned a body that is not JSON");
  }
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty()) {
    throw ProtocolError("completion has no choices");
  }
  const json& choice = j["choices"][0];
  if (!choice.is_object() || !choice.contains("message") ||
      !choice["message"].is_object()) {
    throw ProtocolError("completion choice has no message");
  }
  const json& message = choice["message"];
  if (!message.contains("content") || message["content"].is_null()) return "";
  if (!message["content"].is_string()) {
    throw ProtocolError("completion message content is not a string");
  }
  return message["content"].get<std::string>();
}

std::chrono::milliseconds retry_after(const httplib::Result& res) {
  if (!res || !res->has_header("Retry-After")) return std::chrono::milliseconds{0};
  const std::string value = res->get_header_value("Retry-After");
  char* end = nullptr;
  const double seconds = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || !std::isfinite(seconds) || seconds < 0) {
    return std::chrono::milliseconds{0};
  }
  return std::chrono::milliseconds{static_cast<long long>(seconds * 1000.0)};
}

}  // namespace

std::string ChatClient::complete(const PromptRecord& prompt) const {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));
  const auto sec = static_cast<time_t>(timeout.count() / 1'000'000);
  const auto usec = static_cast<time_t>(timeout.count() % 1'000'000);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const std::string body = chat_request_body(prompt, config_);

  std::string last_failure;
  auto delay = config_.backoff_initial;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_failure = fmt::format("transport: {}", httplib::to_string(res.error()));
    } else if (res->status == 401 || res->status == 403) {
      events_.append("failure", fmt::format("HTTP {}", res->status));
      throw CredentialError(fmt::format(
          "endpoint rejected credentials (HTTP {}); check {}", res->status,
          kApiKeyVariable));
    } else if (res->status == 429 || res->status >= 500) {
      last_failure = fmt::format("HTTP {}", res->status);
    } else if (res->status >= 400) {
      events_.append("failure", fmt::format("HTTP {}", res->status));
      throw ProtocolError(fmt::format("endpoint returned HTTP {}: {}",
                                      res->status, res->body.substr(0, 200)));
    } else {
      return content_from_body(res->body);
    }

    if (attempt == config_.max_retries) break;
    auto wait = std::max(delay, std::min(retry_after(res), config_.backoff_max));
    events_.append("retry", fmt::format("attempt {} after {}; waiting {} ms",
                                        attempt + 1, last_failure, wait.count()));
    std::this_thread::sleep_for(wait);
    delay = std::min(delay * 2, config_.backoff_max);
  }
  events_.append("failure", last_failure);
  throw TransportError(fmt::format("request failed after {} attempts: {}",
                                   config_.max_retries + 1, last_failure));
}

std::string call_endpoint(const PromptRecord& prompt, const EndpointConfig& config) {
  return ChatClient(config).complete(prompt);
}

// ---------------------------------------------------------------------------
// Output parsing

namespace {

// Index one past the ']' that closes the '[' at `open`, or npos.
std::size_t balanced_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

void collect_items(const json& array, ParsedOutput& out) {
  for (const json& e : array) {
    if (!e.is_object()) {
      ++out.dropped;
      continue;
    }
    const auto cat = e.find("category");
    const auto text = e.find("text");
    if (cat == e.end() || text == e.end() || !cat->is_string() ||
        !text->is_string()) {
      ++out.dropped;
      continue;
    }
    const auto category = match_category_name(cat->get_ref<const std::string&>());
    const std::string& t = text->get_ref<const std::string&>();
    if (!category || t.empty()) {
      ++out.dropped;
      continue;
    }
    ExtractionItem item{*category, t, std::nullopt};
    const auto occ = e.find("occurrence");
    if (occ != e.end() && occ->is_number_integer() && occ->get<std::int64_t>() >= 1) {
      item.occurrence = occ->get<std::size_t>();
    }
    out.items.push_back(std::move(item));
  }
}

bool is_object_array(const json& j) {
  return j.is_array() && std::all_of(j.begin(), j.end(),
                                     [](const json& e) { return e.is_object(); });
}

}  // namespace

ParsedOutput parse_model_output(std::string_view raw) noexcept {
  ParsedOutput out;
  try {
    const auto first = raw.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
      out.null_response = true;
      return out;
    }
    const json whole = json::parse(raw.begin(), raw.end(), nullptr, false);
    if (!whole.is_discarded() && whole.is_array()) {
      collect_items(whole, out);
      return out;
    }
    for (std::size_t open = raw.find('['); open != std::string_view::npos;
         open = raw.find('[', open + 1)) {
      const std::size_t close = balanced_end(raw, open);
      if (close == std::string_view::npos) continue;
      const std::string_view block = raw.substr(open, close - open);
      const json candidate = json::parse(block.begin(), block.end(), nullptr, false);
      if (!candidate.is_discarded() && is_object_array(candidate)) {
        out.salvaged = true;
        collect_items(candidate, out);
        return out;
      }
    }
    out.null_response = true;
    return out;
  } catch (...) {
    ParsedOutput failed;
    failed.null_response = true;
    return failed;
  }
}

// ---------------------------------------------------------------------------
// Grounding

std::string_view to_string(PromptMode mode) {
  switch (mode) {
    case PromptMode::zero: return "zero";
    case PromptMode::few: return "few";
    case PromptMode::lexicon: return "lexicon";
  }
  return "zero";
}

PromptMode parse_prompt_mode(std::string_view name) {
  if (name == "zero") return PromptMode::zero;
  if (name == "few") return PromptMode::few;
  if (name == "lexicon") return PromptMode::lexicon;
  throw ConfigError(fmt::format("unknown prompt mode '{}'", name));
}

namespace {

std::vector<std::size_t> find_all(std::string_view haystack,
                                  std::string_view needle) {
  std::vector<std::size_t> positions;
  if (needle.empty()) return positions;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    positions.push_back(pos);
  }
  return positions;
}

}  // namespace

GroundedResult ground(std::span<const ExtractionItem> items, const Document& doc) {
  GroundedResult result;
  result.doc_id = doc.id;
  const utf8::Index index(doc.text);
  const std::string folded_doc = utf8::ascii_lower(doc.text);
  std::set<std::tuple<std::size_t, std::size_t, Category>> taken;

  for (const ExtractionItem& item : items) {
    const auto exact = find_all(doc.text, item.text);
    const auto folded = find_all(folded_doc, utf8::ascii_lower(item.text));

    std::optional<Span> placed;
    auto try_place = [&](std::size_t byte) -> bool {
      try {
        Span span;
        span.start = index.scalar_offset(byte);
        span.end = index.scalar_offset(byte + item.text.size());
        span.category = item.category;
        if (taken.contains({span.start, span.end, span.category})) return false;
        span.surface = std::string(index.slice(doc.text, span.start, span.end));
        placed = std::move(span);
        return true;
      } catch (const std::out_of_range&) {
        return false;
      }
    };

    if (item.occurrence) {
      const std::size_t k = *item.occurrence - 1;
      if (k < exact.size()) {
        try_place(exact[k]);
      } else if (k < folded.size()) {
        try_place(folded[k]);
      }
    } else {
      bool done = false;
      for (std::size_t pos : exact) {
        if ((done = try_place(pos))) break;
      }
      for (std::size_t pos : folded) {
        if (done) break;
        done = try_place(pos);
      }
    }

    if (placed) {
      taken.insert({placed->start, placed->end, placed->category});
      result.spans.push_back(std::move(*placed));
    } else {
      result.ungrounded.push_back(item);
    }
  }
  return result;
}

std::string prompt_hash(const PromptRecord& prompt) {
  const std::string data = prompt.instruction + "\n" + prompt.input;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

// ---------------------------------------------------------------------------
// Batch

std::vector<GroundedResult> extract_batch(std::span<const Document> docs,
                                          PromptMode mode,
                                          const ExemplarSet* exemplars,
                                          const ChatClient& client,
                                          const CategorySchema& schema,
                                          const PromptTemplate& tmpl) {
  const EndpointConfig& config = client.config();
  config.validate();
  if (mode == PromptMode::lexicon) {
    throw ConfigError("lexicon mode does not use an endpoint");
  }
  if (mode == PromptMode::few && exemplars == nullptr) {
    throw ConfigError("few-shot extraction requires an exemplar set");
  }

  std::vector<PromptRecord> prompts;
  prompts.reserve(docs.size());
  for (const Document& doc : docs) {
    prompts.push_back(mode == PromptMode::few
                          ? build_few_shot(doc, *exemplars, schema, tmpl)
                          : build_zero_shot(doc, schema, tmpl));
  }

  std::vector<GroundedResult> results(docs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < docs.size(); i = next++) {
      const Document& doc = docs[i];
      GroundedResult r;
      const Provenance provenance{config.model_name, mode, prompt_hash(prompts[i])};
      try {
        const ParsedOutput parsed = parse_model_output(client.complete(prompts[i]));
        if (parsed.null_response) {
          r.doc_id = doc.id;
          r.null_response = true;
        } else {
          r = ground(parsed.items, doc);
        }
        r.dropped_items = parsed.dropped;
        r.salvaged = parsed.salvaged;
        if (parsed.salvaged) client.events().append("salvage", doc.id);
        if (parsed.dropped > 0) {
          client.events().append("dropped",
                                 fmt::format("{}: {} items", doc.id, parsed.dropped));
        }
      } catch (const Error& e) {
        r = GroundedResult{};
        r.doc_id = doc.id;
        r.null_response = true;
        r.error = fmt::format("{}: {}", e.kind(), e.what());
      } catch (const std::exception& e) {
        r = GroundedResult{};
        r.doc_id = doc.id;
        r.null_response = true;
        r.error = e.what();
      }
      r.provenance = provenance;
      results[i] = std::move(r);
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.max_concurrency),
                            docs.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return results;
}

std::vector<GroundedResult> extract_batch(std::span<const Document> docs,
                                          PromptMode mode,
                                          const ExemplarSet* exemplars,
                                          const EndpointConfig& config) {
  config.validate();
  const ChatClient client(config);
  return extract_batch(docs, mode, exemplars, client);
}

// ---------------------------------------------------------------------------
// Predictions file

namespace {

ordered_json item_to_json(const ExtractionItem& item) {
  ordered_json j;
  j["category"] = std::string(to_string(item.category));
  j["text"] = item.text;
  if (item.occurrence) j["occurrence"] = *item.occurrence;
  return j;
}

template <typename T>
T field(const json& object, const char* key, const std::string& where) {
  if (!object.is_object() || !object.contains(key)) {
    throw ValidationError(fmt::format("{}: missing field '{}'", where, key));
  }
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(fmt::format("{}.{}: wrong type", where, key));
  }
}

}  // namespace

std::string serialize_predictions(std::span<const GroundedResult> results) {
  ordered_json root;
  root["predictions"] = ordered_json::array();
  for (const GroundedResult& r : results) {
    ordered_json j;
    j["doc_id"] = r.doc_id;
    j["null_response"] = r.null_response;
    j["spans"] = ordered_json::array();
    for (const Span& s : r.spans) j["spans"].push_back(span_to_json(s));
    j["ungrounded"] = ordered_json::array();
    for (const auto& item : r.ungrounded) j["ungrounded"].push_back(item_to_json(item));
    j["provenance"]["model_name"] = r.provenance.model_name;
    j["provenance"]["mode"] = std::string(to_string(r.provenance.mode));
    j["provenance"]["prompt_hash"] = r.provenance.prompt_hash;
    j["dropped_items"] = r.dropped_items;
    j["salvaged"] = r.salvaged;
    if (r.error) j["error"] = *r.error;
    root["predictions"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

std::vector<GroundedResult> parse_predictions(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed predictions file: {}", e.what()));
  }
  if (!root.is_object() || !root.contains("predictions") ||
      !root["predictions"].is_array()) {
    throw ValidationError("predictions file: expected {\"predictions\": [...]}");
  }
  std::vector<GroundedResult> results;
  const json& preds = root["predictions"];
  try {
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const std::string where = fmt::format("predictions[{}]", i);
      const json& p = preds[i];
      GroundedResult r;
      r.doc_id = field<std::string>(p, "doc_id", where);
      r.null_response = p.value("null_response", false);
      for (const json& s : p.value("spans", json::array())) {
        Span span;
        span.start = field<std::size_t>(s, "start", where + ".spans");
        span.end = field<std::size_t>(s, "end", where + ".spans");
        span.category =
            parse_category(field<std::string>(s, "category", where + ".spans"));
        span.surface = s.value("surface", std::string());
        if (span.end <= span.start) {
          throw IntegrityError(fmt::format("{}: span ({},{}) is empty or inverted",
                                           where, span.start, span.end));
        }
        r.spans.push_back(std::move(span));
      }
      for (const json& u : p.value("ungrounded", json::array())) {
        ExtractionItem item;
        item.category =
            parse_category(field<std::string>(u, "category", where + ".ungrounded"));
        item.text = field<std::string>(u, "text", where + ".ungrounded");
        if (u.contains("occurrence")) {
          item.occurrence = field<std::size_t>(u, "occurrence", where + ".ungrounded");
        }
        r.ungrounded.push_back(std::move(item));
      }
      if (p.contains("provenance")) {
        const json& prov = p["provenance"];
        r.provenance.model_name = prov.value("model_name", std::string());
        r.provenance.mode = parse_prompt_mode(prov.value("mode", std::string("zero")));
        r.provenance.prompt_hash = prov.value("prompt_hash", std::string());
      }
      r.dropped_items = p.value("dropped_items", std::size_t{0});
      r.salvaged = p.value("salvaged", false);
      if (p.contains("error") && p["error"].is_string()) {
        r.error = p["error"].get<std::string>();
      }
      results.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("predictions file: {}", e.what()));
  }
  return results;
}

std::vector<AnnotationSet> to_annotation_sets(
    std::span<const GroundedResult> results) {
  std::vector<AnnotationSet> sets;
  sets.reserve(results.size());
  for (const GroundedResult& r : results) {
    sets.push_back({r.doc_id,
                    r.provenance.model_name.empty() ? "model" : r.provenance.model_name,
                    r.spans});
  }
  return sets;
}

}  // namespace cogspan
