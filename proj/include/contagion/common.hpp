#pragma once

#include <cstddef>
#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace contagion {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using Seed = std::uint64_t;

/// Raised for any argument outside an operation's documented domain.
class InvalidParameter : public std::invalid_argument {
 public:
  explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Locale-independent parse of a whole string; nullopt on any leftover text.
template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

/// Either a point mass at `lo` (lo == hi) or Uniform[lo, hi].
///
/// Used for both loan sizes and the per-bank interbank share theta_l.
struct RangeDistribution {
  double lo = 1.0;
  double hi = 1.0;

  static RangeDistribution constant(double c) { return {c, c}; }
  static RangeDistribution uniform(double lo, double hi) { return {lo, hi}; }

  [[nodiscard]] bool is_constant() const { return lo == hi; }
  [[nodiscard]] double mean() const { return 0.5 * (lo + hi); }

  friend bool operator==(const RangeDistribution&, const RangeDistribution&) = default;
};

using LoanSizeDistribution = RangeDistribution;
using ThetaDistribution = RangeDistribution;

/// Parses "c" as constant(c) and "lo:hi" as uniform(lo, hi).
RangeDistribution parse_range_distribution(const std::string& text);
std::string to_string(const RangeDistribution& dist);

}  // namespace contagion
