#include "cogspan/utf8.hpp"

#include <algorithm>
#include <stdexcept>

namespace cogspan::utf8 {
namespace {

std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 0;
}

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

}  // namespace

bool is_valid(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto lead = static_cast<unsigned char>(bytes[i]);
    const std::size_t n = sequence_length(lead);
    if (n == 0 || i + n > bytes.size()) return false;
    char32_t cp = n == 1 ? lead : lead & (0xFF >> (n + 1));
    for (std::size_t k = 1; k < n; ++k) {
      const auto c = static_cast<unsigned char>(bytes[i + k]);
      if (!is_continuation(c)) return false;
      cp = (cp << 6) | (c & 0x3F);
    }
    static constexpr char32_t kMinForLength[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[n] || cp > 0x10FFFF) return false;
    if (cp >= 0xD800 && cp <= 0xDFFF) return false;
    i += n;
  }
  return true;
}

std::size_t length(std::string_view text) {
  return static_cast<std::size_t>(
      std::count_if(text.begin(), text.end(), [](char c) {
        return !is_continuation(static_cast<unsigned char>(c));
      }));
}

Index::Index(std::string_view text) {
  starts_.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_continuation(static_cast<unsigned char>(text[i]))) {
      starts_.push_back(i);
    }
  }
  starts_.push_back(text.size());
}

std::size_t Index::scalar_offset(std::size_t byte_offset) const {
  const auto it = std::lower_bound(starts_.begin(), starts_.end(), byte_offset);
  if (it == starts_.end() || *it != byte_offset) {
    throw std::out_of_range("byte offset is not on a scalar boundary");
  }
  return static_cast<std::size_t>(it - starts_.begin());
}

std::string_view Index::slice(std::string_view text, std::size_t start,
                              std::size_t end) const {
  const std::size_t b = byte_offset(start);
  return text.substr(b, byte_offset(end) - b);
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace cogspan::utf8
