#include "grammar.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "ltime/error.hpp"

namespace ltime::detail {

std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_real(std::string_view text, std::string_view field) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw Error(Errc::ParseError, "field '" + std::string(field) + "': not a finite real: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::pair<std::string_view, std::string_view>> parse_pairs(std::string_view text,
                                                                       std::string_view context) {
  std::vector<std::pair<std::string_view, std::string_view>> out;
  if (trim(text).empty()) return out;
  for (auto item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::ParseError, std::string(context) + ": expected key=value, got '" + std::string(item) + "'");
    }
    out.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
  return out;
}

double require_real(const std::vector<std::pair<std::string_view, std::string_view>>& pairs, std::string_view key,
                    std::string_view context) {
  for (const auto& [k, v] : pairs) {
    if (k == key) return parse_real(v, key);
  }
  throw Error(Errc::ParseError, std::string(context) + ": missing '" + std::string(key) + "'");
}

}  // namespace ltime::detail
