#pragma once

// Helpers shared by the distribution, rule and settings grammars.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ltime::detail {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char sep);

/// Full-string real parse; Errc::ParseError naming `field` otherwise.
double parse_real(std::string_view text, std::string_view field);

/// `k=v,k=v` into ordered pairs.
std::vector<std::pair<std::string_view, std::string_view>> parse_pairs(std::string_view text,
                                                                       std::string_view context);

/// Looks up `key` among pairs produced by parse_pairs and parses it as a real.
double require_real(const std::vector<std::pair<std::string_view, std::string_view>>& pairs, std::string_view key,
                    std::string_view context);

}  // namespace ltime::detail
