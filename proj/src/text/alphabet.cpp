// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "amd/text/alphabet.hpp"

#include "amd/errors.hpp"

namespace amd::text {

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      extra = 1;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      extra = 2;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      extra = 3;
    } else {
      throw IoError("invalid UTF-8 lead byte");
    }
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= s.size()) throw IoError("truncated UTF-8 sequence");
      const auto cont = static_cast<unsigned char>(s[i + k]);
      if ((cont & 0xC0) != 0x80) throw IoError("invalid UTF-8 continuation byte");
      cp = (cp << 6) | (cont & 0x3F);
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

std::string utf8_encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

Alphabet::Alphabet(std::u32string chars) : chars_(std::move(chars)) {
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    auto [it, inserted] = index_.emplace(chars_[i], static_cast<int>(i) + 1);
    if (!inserted) {
      throw ConfigError("duplicate character in alphabet: " + utf8_encode(std::u32string(1, chars_[i])));
    }
  }
}

Alphabet Alphabet::from_utf8(std::string_view chars) { return Alphabet(utf8_decode(chars)); }

std::optional<int> Alphabet::find(char32_t c) const {
  auto it = index_.find(c);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Alphabet::class_of(char32_t c) const {
  auto idx = find(c);
  if (!idx) throw ConfigError("character outside alphabet: " + utf8_encode(std::u32string(1, c)));
  return *idx;
}

char32_t Alphabet::char_of(int class_index) const {
  if (class_index <= 0 || static_cast<std::size_t>(class_index) > chars_.size()) {
    throw ConfigError("class index has no character: " + std::to_string(class_index));
  }
  return chars_[static_cast<std::size_t>(class_index) - 1];
}

std::vector<int> Alphabet::encode(std::u32string_view text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char32_t c : text) out.push_back(class_of(c));
  return out;
}

std::u32string Alphabet::decode(const std::vector<int>& classes) const {
  std::u32string out;
  out.reserve(classes.size());
  for (int c : classes) {
    if (c != kBlank) out.push_back(char_of(c));
  }
  return out;
}

}  // namespace amd::text
