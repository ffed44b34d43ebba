#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cogspan/corpus.hpp"
#include "cogspan/prompting.hpp"

namespace cogspan {

inline constexpr std::string_view kApiKeyVariable = "COGSPAN_API_KEY";

struct EndpointConfig {
  std::string base_url;  // e.g. "http://localhost:8000"; path prefix allowed
  std::string model_name;
  double temperature = 0.0;
  int max_retries = 3;
  double timeout_seconds = 60.0;
  int max_concurrency = 4;
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{8000};
  std::string api_key;  // sent as "Authorization: Bearer"; may be empty

  /// Throws ConfigError when any field is out of range.
  void validate() const;

  /// Defaults plus the API key from COGSPAN_API_KEY.
  static EndpointConfig from_environment(std::string base_url,
                                         std::string model_name);
};

/// Append-only, thread-safe record of client events (retries, failures).
class EventLog {
 public:
  struct Event {
    std::string kind;    // "retry", "failure", "salvage", "dropped"
    std::string detail;
  };

  void append(std::string kind, std::string detail);
  std::vector<Event> snapshot() const;
  std::size_t count(std::string_view kind) const;

 private:
  mutable std::mutex mutex_;
  std::vector<Event> events_;
};

/// Synchronous chat-completions client; safe to share across threads.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig config);

  /// POSTs {base_url}/v1/chat/completions with the instruction as the system
  /// message and the input as the user message; returns
  /// choices[0].message.content (empty string for a null content).
  ///
  /// Transport errors, 5xx and 429 are retried up to max_retries times with
  /// exponential backoff (Retry-After is honoured up to backoff_max).
  /// Throws TransportError once retries are exhausted, CredentialError on
  /// 401/403 without retrying, ProtocolError on other 4xx or a body that is
  /// not a chat completion.
  std::string complete(const PromptRecord& prompt) const;

  const EndpointConfig& config() const { return config_; }
  EventLog& events() const { return events_; }

 private:
  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  mutable EventLog events_;
};

/// One-shot convenience wrapper around ChatClient::complete.
std::string call_endpoint(const PromptRecord& prompt, const EndpointConfig& config);

/// Request body sent for `prompt`.
std::string chat_request_body(const PromptRecord& prompt,
                              const EndpointConfig& config);

struct ParsedOutput {
  bool null_response = false;
  std::vector<ExtractionItem> items;
  std::size_t dropped = 0;  // array elements that were not usable items
  bool salvaged = false;    // array recovered from surrounding text
};

/// Never throws. Accepts a pure JSON array, otherwise the first balanced
/// [...] block that parses as an array of objects. Empty output or no usable
/// array gives a null response.
ParsedOutput parse_model_output(std::string_view raw) noexcept;

enum class PromptMode : std::uint8_t { zero, few, lexicon };

std::string_view to_string(PromptMode mode);
PromptMode parse_prompt_mode(std::string_view name);

struct Provenance {
  std::string model_name;
  PromptMode mode = PromptMode::zero;
  std::string prompt_hash;

  bool operator==(const Provenance&) const = default;
};

struct GroundedResult {
  std::string doc_id;
  std::vector<Span> spans;
  std::vector<ExtractionItem> ungrounded;
  bool null_response = false;
  Provenance provenance;
  std::size_t dropped_items = 0;
  bool salvaged = false;
  std::optional<std::string> error;

  bool operator==(const GroundedResult&) const = default;
};

/// Maps items to offsets: each item takes the leftmost occurrence of its
/// text not already taken by an earlier item of the same category
/// (case-sensitive first, then one ASCII case-insensitive pass). An explicit
/// occurrence index selects that occurrence instead. Unplaceable items are
/// returned as ungrounded; spans keep item order.
GroundedResult ground(std::span<const ExtractionItem> items, const Document& doc);

/// Hex SHA-256 of instruction + "\n" + input.
std::string prompt_hash(const PromptRecord& prompt);

/// Prompts every document (at most max_concurrency in flight) and grounds
/// the answers. Results follow input order. A document whose request fails
/// yields a null response with `error` set; the batch carries on. Throws
/// ConfigError before any request when the configuration is invalid or
/// few-shot mode has no exemplars.
std::vector<GroundedResult> extract_batch(
    std::span<const Document> docs, PromptMode mode,
    const ExemplarSet* exemplars, const ChatClient& client,
    const CategorySchema& schema = default_schema(),
    const PromptTemplate& tmpl = PromptTemplate::builtin());

std::vector<GroundedResult> extract_batch(std::span<const Document> docs,
                                          PromptMode mode,
                                          const ExemplarSet* exemplars,
                                          const EndpointConfig& config);

/// {"predictions": [GroundedResult, ...]}.
std::string serialize_predictions(std::span<const GroundedResult> results);
std::vector<GroundedResult> parse_predictions(std::string_view bytes);

/// Predictions as annotation sets (annotator = provenance model name).
std::vector<AnnotationSet> to_annotation_sets(
    std::span<const GroundedResult> results);

}  // namespace cogspan
