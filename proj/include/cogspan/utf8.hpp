#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cogspan::utf8 {

/// True when `bytes` is well-formed UTF-8 (no overlongs, no surrogates).
bool is_valid(std::string_view bytes);

/// Number of Unicode scalar values. Assumes valid input.
std::size_t length(std::string_view text);

/// Byte offsets of every scalar value in a UTF-8 string, plus a final entry
/// equal to the byte length. Converts between the scalar-value offsets used
/// in span files and byte offsets into the stored text.
class Index {
 public:
  explicit Index(std::string_view text);

  std::size_t size() const noexcept { return starts_.size() - 1; }

  std::size_t byte_offset(std::size_t scalar_offset) const {
    return starts_.at(scalar_offset);
  }

  /// Scalar offset of a byte position that falls on a scalar boundary.
  std::size_t scalar_offset(std::size_t byte_offset) const;

  /// Substring covering scalar values [start, end).
  std::string_view slice(std::string_view text, std::size_t start,
                         std::size_t end) const;

 private:
  std::vector<std::size_t> starts_;
};

/// ASCII-only lowercase; preserves byte length so offsets carry over.
std::string ascii_lower(std::string_view text);

}  // namespace cogspan::utf8
