#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace ectd {

// The thirteen imaginary quadratic orders of class number one together with
// the rational j-invariant of curves having CM by them, in matching order.
struct CmEntry {
  std::int64_t j;
  int order_discriminant;
};

inline constexpr std::array<CmEntry, 13> kCmTable{{
    {0, -3},
    {1728, -4},               // 2^6 3^3
    {-3375, -7},              // -3^3 5^3
    {8000, -8},               // 2^6 5^3
    {-32768, -11},            // -2^15
    {54000, -12},             // 2^4 3^3 5^3
    {287496, -16},            // 2^3 3^3 11^3
    {-884736, -19},           // -2^15 3^3
    {-12288000, -27},         // -2^15 3 5^3
    {16581375, -28},          // 3^3 5^3 17^3
    {-884736000, -43},        // -2^18 3^3 5^3
    {-147197952000, -67},     // -2^15 3^3 5^3 11^3
    {-262537412640768000, -163},  // -2^18 3^3 5^3 23^3 29^3
}};

inline bool is_cm_discriminant(int d) {
  for (const auto& e : kCmTable) {
    if (e.order_discriminant == d) return true;
  }
  return false;
}

inline std::optional<int> cm_discriminant_for_j(std::int64_t j) {
  for (const auto& e : kCmTable) {
    if (e.j == j) return e.order_discriminant;
  }
  return std::nullopt;
}

}  // namespace ectd
