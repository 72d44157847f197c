#pragma once

#include "hummingbird/crypto.hpp"
#include "hummingbird/policing.hpp"
#include "hummingbird/time.hpp"
#include "hummingbird/wire.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string_view>

/// Border-router packet pipeline: flyover processing, standard hop-field
/// processing and bandwidth monitoring, operating in place on packet bytes.
namespace hummingbird::router {

using namespace std::chrono_literals;

enum class Verdict
{
    drop,
    best_effort,
    priority
};

enum class Reason
{
    priority,          // every check passed
    no_flyover,        // standard hop, forwarded best effort
    stale,             // timestamp outside [-delta, max_age + delta]
    inactive,          // reservation not active at this router's clock
    overuse,           // policer verdict
    res_id_range,      // ResID beyond the policing array
    malformed,         // unparsable header or pointers
    misplaced_flyover, // flyover in the second segment at a boundary
    pkt_len_overflow,
    hop_expired,
    mac_mismatch,
    duplicate,         // rejected by the optional duplicate filter
};

std::string_view to_string(Verdict v);
std::string_view to_string(Reason r);

/// Tuple unique per packet and source, surfaced to the duplicate filter.
struct DuplicateKey
{
    std::uint32_t base_timestamp = 0;
    std::uint16_t millis = 0;
    std::uint32_t counter = 0;
    std::uint32_t res_id = 0;
};

struct RouterConfig
{
    crypto::SecretValue sv;
    crypto::ForwardingKey scion_key;
    Nanos delta = 500ms;   // max clock skew
    Nanos max_age = 1s;    // max packet age
    std::function<Instant()> clock;
    std::size_t tag_len = crypto::kDefaultTagLen;
    std::size_t policer_size = 1u << 16; // entries per ingress interface
    Nanos burst_time = policing::kDefaultBurstTime;
    /// Optional; returning true drops the packet. Called only for packets
    /// that passed flyover and hop-field verification.
    std::function<bool(const DuplicateKey&)> duplicate_filter;
};

struct ForwardDecision
{
    Verdict verdict = Verdict::drop;
    Reason reason = Reason::malformed;
    std::uint16_t ingress = 0; // traversal direction
    std::uint16_t egress = 0;
    bool flyover = false;
    std::uint32_t res_id = 0;

    bool operator==(const ForwardDecision&) const = default;
};

enum class FlyoverVerdict
{
    drop,
    best_effort,
    fly
};

struct FlyoverOutcome
{
    FlyoverVerdict verdict = FlyoverVerdict::drop;
    Reason reason = Reason::malformed;
    wire::MacInput ts; // DstAddr, PktLen and TS as fed to the MAC
    std::uint16_t pkt_len = 0;
    ReservationInfo res;
};

enum class HfVerdict
{
    drop,
    fwd
};

struct HfOutcome
{
    HfVerdict verdict = HfVerdict::drop;
    Reason reason = Reason::malformed;
};

/// Flyover processing for the hop field at CurrHF (flyover bit must be set).
/// Recomputes the reservation key and FlyoverMAC, writes the candidate
/// HopFieldMAC into the AggMAC field, then runs the freshness and
/// reservation-activity checks.
FlyoverOutcome flyover_processing(const RouterConfig& cfg, std::span<std::uint8_t> pkt, Instant now);

/// Standard SCION processing of the hop field at CurrHF: expiry, MAC check
/// against the MAC field (the candidate MAC for flyovers), SegID update and
/// CurrHF advance.
HfOutcome standard_hf_processing(const RouterConfig& cfg, std::span<std::uint8_t> pkt, Instant now);

/// Whether the hop field at CurrHF is the last one of a segment followed by
/// another segment, i.e. the AS owns two hop fields.
bool at_segment_boundary(std::span<const std::uint8_t> pkt);

class BorderRouter
{
public:
    explicit BorderRouter(RouterConfig cfg);

    /// Full pipeline at the current clock.
    ForwardDecision process_packet(std::span<std::uint8_t> pkt);
    ForwardDecision process_packet(std::span<std::uint8_t> pkt, Instant now);
    /// Pipeline for an AS that owns the last hop field of one segment and
    /// the first of the next. Precondition: at_segment_boundary(pkt).
    ForwardDecision segment_boundary_processing(std::span<std::uint8_t> pkt, Instant now);

    policing::TokenBucketArray& policer(std::uint16_t ingress);
    const RouterConfig& config() const { return cfg; }

private:
    RouterConfig cfg;
    std::map<std::uint16_t, policing::TokenBucketArray> policers;
};

} // namespace hummingbird::router
