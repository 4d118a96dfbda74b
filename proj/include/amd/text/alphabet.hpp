// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace amd::text {

std::u32string utf8_decode(std::string_view utf8);
std::string utf8_encode(std::u32string_view text);

/// Ordered set of distinct characters. Class index 0 is reserved for the CTC
/// blank, so character i of the alphabet maps to class i + 1.
class Alphabet {
 public:
  static constexpr int kBlank = 0;

  Alphabet() = default;
  explicit Alphabet(std::u32string chars);
  static Alphabet from_utf8(std::string_view chars);

  std::size_t size() const { return chars_.size(); }
  /// |Σ'|: characters plus blank.
  std::size_t num_classes() const { return chars_.size() + 1; }
  bool contains(char32_t c) const { return index_.contains(c); }

  /// Class index of a character; throws ConfigError when absent.
  int class_of(char32_t c) const;
  std::optional<int> find(char32_t c) const;
  char32_t char_of(int class_index) const;

  std::vector<int> encode(std::u32string_view text) const;
  std::u32string decode(const std::vector<int>& classes) const;

  const std::u32string& chars() const { return chars_; }
  std::string to_utf8() const { return utf8_encode(chars_); }

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.chars_ == b.chars_; }

 private:
  std::u32string chars_;
  std::unordered_map<char32_t, int> index_;
};

}  // namespace amd::text
