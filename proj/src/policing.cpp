#include "hummingbird/policing.hpp"

#include "hummingbird/error.hpp"
#include "hummingbird/wire.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>

namespace hummingbird::policing {

namespace {

constexpr std::uint64_t kNanosPerSecond = 1'000'000'000;

// Numerators are pkt_len * 8e9 + (d - 1) < 2^50 for 16-bit pkt_len and
// d < 2^36, so a reciprocal with 50 + ceil(log2 d) fractional bits makes
// floor(n * m / 2^k) exact for all of them.
constexpr unsigned kNumeratorBits = 50;

struct Reciprocal
{
    std::uint64_t divisor = 0;
    unsigned __int128 multiplier = 0;
    unsigned shift = 0;
};

std::array<Reciprocal, kMaxBwCode + 1> build_reciprocals()
{
    std::array<Reciprocal, kMaxBwCode + 1> table{};
    for (std::uint16_t c = 0; c <= kMaxBwCode; ++c) {
        const std::uint64_t d = wire::decode_bw(BwCode{c});
        if (d == 0) continue;
        const unsigned log2d = d == 1 ? 0 : unsigned(std::bit_width(d - 1));
        const unsigned k = kNumeratorBits + log2d;
        const unsigned __int128 pow = static_cast<unsigned __int128>(1) << k;
        table[c] = Reciprocal{d, (pow + d - 1) / d, k};
    }
    return table;
}

const std::array<Reciprocal, kMaxBwCode + 1>& reciprocals()
{
    static const auto table = build_reciprocals();
    return table;
}

} // namespace

std::int64_t service_time(std::uint32_t pkt_len, std::uint64_t bytes_per_second)
{
    if (bytes_per_second == 0) throw Error(Errc::invalid_argument, "policing: bandwidth is zero");
    const unsigned __int128 num = static_cast<unsigned __int128>(pkt_len) * kNanosPerSecond;
    return static_cast<std::int64_t>((num + bytes_per_second - 1) / bytes_per_second);
}

std::int64_t service_time_div(std::uint32_t pkt_len, BwCode code)
{
    const std::uint64_t bps = wire::decode_bw(code);
    if (bps == 0) throw Error(Errc::invalid_argument, "policing: bandwidth is zero");
    const std::uint64_t num = std::uint64_t(pkt_len) * 8 * kNanosPerSecond;
    return static_cast<std::int64_t>((num + bps - 1) / bps);
}

std::int64_t service_time_recip(std::uint32_t pkt_len, BwCode code)
{
    const Reciprocal& r = reciprocals().at(code.value);
    if (r.divisor == 0) throw Error(Errc::invalid_argument, "policing: bandwidth is zero");
    const std::uint64_t num = std::uint64_t(pkt_len) * 8 * kNanosPerSecond + r.divisor - 1;
    return static_cast<std::int64_t>((num * r.multiplier) >> r.shift);
}

TokenBucketArray::TokenBucketArray(std::size_t size, Nanos burst_time)
    : ts(size, 0), burst(burst_time)
{
    if (burst_time < Nanos::zero())
        throw Error(Errc::invalid_argument, "policing: negative burst time");
}

Verdict TokenBucketArray::monitor(std::uint32_t res_id, std::uint64_t bytes_per_second,
    std::uint32_t pkt_len, Instant now)
{
    return charge(res_id, service_time(pkt_len, bytes_per_second), now);
}

Verdict TokenBucketArray::monitor(std::uint32_t res_id, BwCode bw, std::uint32_t pkt_len,
    Instant now)
{
    return charge(res_id, service_time_code(pkt_len, bw), now);
}

Verdict TokenBucketArray::charge(std::uint32_t res_id, std::int64_t cost_ns, Instant now)
{
    if (res_id >= ts.size()) {
        ++out_of_range;
        return Verdict::best_effort;
    }
    const std::int64_t t = unix_nanos(now);
    const std::int64_t limit = t + burst.count();
    std::atomic_ref<std::int64_t> slot(ts[res_id]);
    std::int64_t stored = slot.load(std::memory_order_relaxed);
    for (;;) {
        const std::int64_t next = std::max(stored, t) + cost_ns;
        if (next > limit) return Verdict::best_effort;
        if (slot.compare_exchange_weak(stored, next, std::memory_order_relaxed))
            return Verdict::priority;
    }
}

std::uint64_t size_array(std::uint64_t total_bw, std::uint64_t min_bw, std::uint32_t competitiveness)
{
    if (min_bw == 0) throw Error(Errc::invalid_argument, "policing: min_bw must be positive");
    if (competitiveness == 0)
        throw Error(Errc::invalid_argument, "policing: competitiveness must be >= 1");
    const unsigned __int128 num = static_cast<unsigned __int128>(total_bw) * competitiveness;
    return static_cast<std::uint64_t>((num + min_bw - 1) / min_bw);
}

} // namespace hummingbird::policing
