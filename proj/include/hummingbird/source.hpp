#pragma once

#include "hummingbird/crypto.hpp"
#include "hummingbird/time.hpp"
#include "hummingbird/wire.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

/// Packet construction at the sender and path reversal.
namespace hummingbird::source {

/// Data-plane credentials of one reserved hop, as delivered on redemption.
struct Credential
{
    ReservationInfo res;
    crypto::ReservationKey key;

    bool operator==(const Credential&) const = default;
};

struct PlannedHop
{
    wire::HopField hop; // carries the plain HopFieldMAC
    std::optional<Credential> reservation;
};

/// One path segment with its hops in traversal order.
struct PlannedSegment
{
    wire::InfoField info;
    std::vector<PlannedHop> hops;
};

struct PathPlan
{
    wire::IsdAs dst;
    std::vector<PlannedSegment> segments;

    std::size_t hop_count() const;
    std::size_t reserved_count() const;
};

/// Checks segment count, hop counts and flyover placement (a flyover must not
/// be the first hop field of a segment that follows another one). Throws
/// Error(invalid_argument).
void validate_plan(const PathPlan& plan);

/// One hop of a beacon, in construction direction.
struct BeaconHop
{
    std::uint16_t cons_ingress = 0;
    std::uint16_t cons_egress = 0;
    std::uint8_t exp_time = 63;
    crypto::ForwardingKey key;
};

/// Stand-in for beaconing: computes the chained hop-field MACs of a segment
/// whose hops are given in construction order. The returned segment lists
/// them in traversal order (reversed if \p cons_dir is false) with the SegID
/// a packet must carry on entry.
PlannedSegment beacon_segment(std::uint16_t seg_id, std::uint32_t timestamp, bool cons_dir,
    std::span<const BeaconHop> hops);

/// Per-source (BaseTimestamp, Millis, Counter) generator. The counter is
/// monotone within a millisecond and reset when the millisecond changes; a
/// clock running backwards keeps the last millisecond.
class CounterState
{
public:
    struct Stamp
    {
        std::uint32_t base_timestamp = 0;
        std::uint16_t millis = 0;
        std::uint32_t counter = 0;

        bool operator==(const Stamp&) const = default;
        auto operator<=>(const Stamp&) const = default;
    };

    /// Throws Error(counter_exhausted) once 2^22 packets were stamped in the
    /// current millisecond; the caller should back off until the next one.
    Stamp next(Instant now);

private:
    std::int64_t last_ms = -1;
    std::uint32_t next_counter = 0;
};

struct BuildOptions
{
    std::size_t tag_len = crypto::kDefaultTagLen;
    /// Emit flyovers even for reservations that are not active at build
    /// time. Only useful for negative tests.
    bool send_inactive = false;
};

/// Builds a packet with a zero-filled payload.
wire::Packet build(const PathPlan& plan, std::uint16_t payload_len, Instant now,
    CounterState& counter, const BuildOptions& opts = {});
wire::Packet build(const PathPlan& plan, std::span<const std::uint8_t> payload, Instant now,
    CounterState& counter, const BuildOptions& opts = {});

inline wire::Bytes build_packet(const PathPlan& plan, std::uint16_t payload_len, Instant now,
    CounterState& counter, const BuildOptions& opts = {})
{
    return wire::encode_packet(build(plan, payload_len, now, counter, opts));
}

/// Whether every hop field of the path has been processed.
bool fully_traversed(const wire::PathMetaHdr& meta);

/// Reverses a fully traversed path: segment and hop order are reversed, the
/// construction-direction flags flipped and flyovers turned into plain hop
/// fields. SegIDs are kept (they hold the value a reversed traversal needs).
/// Throws Error(bad_state) if the path was not fully traversed.
wire::HummingbirdPath reverse_path(const wire::HummingbirdPath& path);
/// Packet form: reverses the path, addresses the reply to \p reply_dst and
/// updates the header lengths. The payload is kept.
wire::Packet reverse_path(const wire::Packet& pkt, wire::IsdAs reply_dst);

} // namespace hummingbird::source
