#pragma once

#include "hummingbird/reservation.hpp"
#include "hummingbird/time.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <vector>

/// Deterministic per-reservation policing: one 8-byte timestamp per ResID.
namespace hummingbird::policing {

using namespace std::chrono_literals;

inline constexpr Nanos kDefaultBurstTime = 50ms;

enum class Verdict
{
    priority,
    best_effort
};

/// ceil(pkt_len / bw) in nanoseconds, with \p bytes_per_second > 0.
std::int64_t service_time(std::uint32_t pkt_len, std::uint64_t bytes_per_second);

/// ceil(pkt_len * 8 / decode_bw(code)) in nanoseconds; the code is in bits
/// per second and must decode to a nonzero value.
std::int64_t service_time_div(std::uint32_t pkt_len, BwCode code);

/// Same value as service_time_div() computed with a precomputed reciprocal
/// per BW code instead of a division.
std::int64_t service_time_recip(std::uint32_t pkt_len, BwCode code);

/// Service time used by the router pipeline (division or reciprocal path,
/// selected at build time with HUMMINGBIRD_POLICER_RECIPROCAL).
inline std::int64_t service_time_code(std::uint32_t pkt_len, BwCode code)
{
#ifdef HUMMINGBIRD_POLICER_RECIPROCAL
    return service_time_recip(pkt_len, code);
#else
    return service_time_div(pkt_len, code);
#endif
}

/// Per-ingress token-bucket array indexed by ResID.
///
/// Concurrent monitor() calls are safe: each entry is updated with an atomic
/// read-modify-write, so calls for one ResID are serialized and distinct
/// ResIDs never interfere.
class TokenBucketArray
{
public:
    explicit TokenBucketArray(std::size_t size, Nanos burst_time = kDefaultBurstTime);

    Verdict monitor(std::uint32_t res_id, std::uint64_t bytes_per_second,
        std::uint32_t pkt_len, Instant now);
    Verdict monitor(std::uint32_t res_id, BwCode bw, std::uint32_t pkt_len, Instant now);
    /// Charges a precomputed service time.
    Verdict charge(std::uint32_t res_id, std::int64_t cost_ns, Instant now);

    std::size_t size() const { return ts.size(); }
    std::size_t memory_bytes() const { return ts.size() * sizeof(std::int64_t); }
    Nanos burst_time() const { return burst; }
    /// Stored timestamp for \p res_id (unix nanoseconds).
    std::int64_t timestamp(std::uint32_t res_id) const { return ts.at(res_id); }
    /// Number of out-of-range ResIDs seen (treated as best effort).
    std::uint64_t out_of_range_count() const { return out_of_range; }

private:
    std::vector<std::int64_t> ts;
    Nanos burst;
    std::uint64_t out_of_range = 0;
};

/// ResID_max = ceil(R * total_bw / min_bw): the array length needed when
/// every reservation is at least \p min_bw.
std::uint64_t size_array(std::uint64_t total_bw, std::uint64_t min_bw, std::uint32_t competitiveness);

} // namespace hummingbird::policing
