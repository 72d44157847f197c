#pragma once

#include <compare>
#include <cstdint>

namespace hummingbird {

inline constexpr std::uint32_t kMaxResId = (1u << 22) - 1;
inline constexpr std::uint16_t kMaxBwCode = (1u << 10) - 1;

/// \brief Encoded 10-bit bandwidth value (5-bit exponent, 5-bit significand).
struct BwCode
{
    std::uint16_t value = 0;

    constexpr std::uint16_t exponent() const { return value >> 5; }
    constexpr std::uint16_t significand() const { return value & 0x1f; }

    auto operator<=>(const BwCode&) const = default;
};

/// \brief Identifies one flyover at one AS: (In, Eg, ResID, BW, StrT, Dur).
struct ReservationInfo
{
    std::uint16_t ingress = 0;
    std::uint16_t egress = 0;
    std::uint32_t res_id = 0;   // 22 bit
    BwCode bw;
    std::uint32_t res_start = 0; // unix seconds
    std::uint16_t duration = 0;  // seconds

    std::uint32_t res_end() const { return res_start + duration; }

    bool operator==(const ReservationInfo&) const = default;
};

} // namespace hummingbird
