#include "contagion/common.hpp"

#include <fmt/format.h>

namespace contagion {

RangeDistribution parse_range_distribution(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    if (const auto c = parse_number<double>(text)) return RangeDistribution::constant(*c);
  } else {
    const auto lo = parse_number<double>(std::string_view(text).substr(0, colon));
    const auto hi = parse_number<double>(std::string_view(text).substr(colon + 1));
    if (lo && hi) return RangeDistribution::uniform(*lo, *hi);
  }
  throw InvalidParameter("expected a value `c` or a range `lo:hi`, got '" + text + "'");
}

std::string to_string(const RangeDistribution& dist) {
  if (dist.is_constant()) return fmt::format("{}", dist.lo);
  return fmt::format("{}:{}", dist.lo, dist.hi);
}

}  // namespace contagion
