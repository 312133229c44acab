// Copyright 2026 The pereval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small UTF-8 helpers. Malformed bytes are treated as single code points.

#ifndef PEREVAL_TEXT_HPP_
#define PEREVAL_TEXT_HPP_

#include <cstddef>
#include <string>
#include <string_view>

namespace pereval {

/// Number of code points.
std::size_t utf8_length(std::string_view s);

/// Keeps the first `max_chars` code points.
std::string utf8_truncate(std::string_view s, std::size_t max_chars);

/// Decodes the code point starting at `pos` and returns its byte length via
/// `len`. Invalid sequences decode as U+FFFD with length 1.
char32_t utf8_decode(std::string_view s, std::size_t pos, std::size_t& len);

bool is_unicode_space(char32_t c);
bool is_unicode_punct(char32_t c);

/// Trims and collapses whitespace runs to one ASCII space.
std::string normalize_whitespace(std::string_view s);

}  // namespace pereval

#endif  // PEREVAL_TEXT_HPP_
