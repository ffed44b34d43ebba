#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cogspan {

/// Base for every error raised by the toolkit. `kind()` is the stable,
/// machine-readable tag the CLI puts in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define COGSPAN_DEFINE_ERROR(Name, tag)                                   \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& message) : Error(tag, message) {}    \
  };

// corpus
COGSPAN_DEFINE_ERROR(ParseError, "parse_error")
COGSPAN_DEFINE_ERROR(ValidationError, "validation_error")
COGSPAN_DEFINE_ERROR(IntegrityError, "integrity_error")
COGSPAN_DEFINE_ERROR(LookupError, "lookup_error")
COGSPAN_DEFINE_ERROR(InfeasibleError, "infeasible_error")
// agreement / scorer
COGSPAN_DEFINE_ERROR(InputError, "input_error")
// prompting
COGSPAN_DEFINE_ERROR(SchemaError, "schema_error")
COGSPAN_DEFINE_ERROR(DataError, "data_error")
// extraction
COGSPAN_DEFINE_ERROR(ConfigError, "config_error")
COGSPAN_DEFINE_ERROR(TransportError, "transport_error")
COGSPAN_DEFINE_ERROR(ProtocolError, "protocol_error")
COGSPAN_DEFINE_ERROR(CredentialError, "credential_error")
// baseline / synth
COGSPAN_DEFINE_ERROR(LexiconError, "lexicon_error")
COGSPAN_DEFINE_ERROR(SpecError, "spec_error")

#undef COGSPAN_DEFINE_ERROR

}  // namespace cogspan
