#include "hummingbird/router.hpp"

#include "hummingbird/detail/bytes.hpp"
#include "hummingbird/error.hpp"

#include <algorithm>
#include <array>

namespace hummingbird::router {

namespace {

using hummingbird::detail::load_be16;
using hummingbird::detail::store_be16;

constexpr std::int64_t kNanosPerMilli = 1'000'000;
constexpr std::int64_t kNanosPerSecond = 1'000'000'000;
// SCION hop-field lifetime unit: 24h / 256.
constexpr std::int64_t kExpUnitNanos = 86'400 * kNanosPerSecond / 256;

// Position of the current hop field(s) inside a packet. Everything the
// router needs is read in O(1); hops other than the current ones are never
// touched.
struct Located
{
    wire::CommonHeader common;
    wire::PathMetaHdr meta;
    std::span<std::uint8_t> path;
    std::size_t num_inf = 0;
    std::array<std::size_t, wire::kMaxSegments> seg_end{};
    std::size_t hop_off = 0;
    bool flyover = false;
    bool boundary = false;
    bool second_is_flyover = false;
    std::uint16_t ingress = 0;
    std::uint16_t egress = 0;
};

[[noreturn]] void malformed(const char* what)
{
    throw Error(Errc::bad_state, what);
}

std::uint16_t traversal_ingress(const wire::InfoField& info, const wire::HopField& hop)
{
    return info.cons_dir ? hop.cons_ingress : hop.cons_egress;
}

std::uint16_t traversal_egress(const wire::InfoField& info, const wire::HopField& hop)
{
    return info.cons_dir ? hop.cons_egress : hop.cons_ingress;
}

wire::InfoField info_at(std::span<const std::uint8_t> path, std::size_t index)
{
    return wire::read_info(path.subspan(wire::kMetaHdrLen + wire::kInfoFieldLen * index));
}

Located locate(std::span<std::uint8_t> pkt)
{
    Located loc;
    loc.common = wire::read_common(pkt);
    const std::size_t hdr = std::size_t(loc.common.hdr_len) * 4;
    if (hdr > pkt.size() || hdr < wire::kCommonHdrLen + wire::kMetaHdrLen)
        malformed("header length out of range");
    loc.path = pkt.subspan(wire::kCommonHdrLen, hdr - wire::kCommonHdrLen);
    loc.meta = wire::read_meta(loc.path);
    wire::validate_segments(loc.meta);
    loc.num_inf = loc.meta.num_inf();
    if (loc.num_inf == 0) malformed("empty path");
    const std::size_t expected = wire::kMetaHdrLen + wire::kInfoFieldLen * loc.num_inf
        + 4 * loc.meta.hop_words();
    if (loc.path.size() != expected) malformed("path length does not match seg_len");
    wire::validate_pointers(loc.meta);

    std::size_t cum = 0;
    for (std::size_t i = 0; i < wire::kMaxSegments; ++i) loc.seg_end[i] = cum += loc.meta.seg_len[i];
    const std::size_t ci = loc.meta.curr_inf;
    if (loc.meta.curr_hf >= loc.seg_end[ci]) malformed("path already fully traversed");

    loc.hop_off = wire::hop_field_offset(loc.meta);
    loc.flyover = wire::is_flyover(loc.path.subspan(loc.hop_off));
    const std::size_t words = wire::words_of(loc.flyover ? wire::HopKind::flyover : wire::HopKind::normal);
    const std::size_t next = loc.meta.curr_hf + words;
    if (next > loc.seg_end[ci]) malformed("hop field crosses segment end");

    const wire::InfoField info = info_at(loc.path, ci);
    const wire::HopField first = wire::read_hop(loc.path.subspan(loc.hop_off));
    loc.ingress = traversal_ingress(info, first);
    loc.egress = traversal_egress(info, first);

    loc.boundary = next == loc.seg_end[ci] && ci + 1 < loc.num_inf;
    if (loc.boundary) {
        const std::size_t second_off = loc.hop_off + 4 * words;
        loc.second_is_flyover = wire::is_flyover(loc.path.subspan(second_off));
        if (next + wire::kHopFieldWords > loc.seg_end[ci + 1])
            malformed("second boundary hop field crosses segment end");
        const wire::InfoField next_info = info_at(loc.path, ci + 1);
        const wire::HopField second = wire::read_hop(loc.path.subspan(second_off));
        loc.egress = traversal_egress(next_info, second);
    }
    return loc;
}

FlyoverOutcome flyover_step(const RouterConfig& cfg, const Located& loc, Instant now)
{
    FlyoverOutcome out;
    const auto field = loc.path.subspan(loc.hop_off, wire::kFlyoverHopFieldLen);
    const wire::FlyoverHopField fly = wire::read_flyover(field);

    const std::uint32_t res_start = loc.meta.base_timestamp - fly.res_start_offset;
    out.res = ReservationInfo{
        .ingress = loc.ingress,
        .egress = loc.egress,
        .res_id = fly.res_id,
        .bw = fly.bw,
        .res_start = res_start,
        .duration = fly.res_duration,
    };
    const crypto::ReservationKey key = crypto::derive_key(cfg.sv, out.res);
    out.ts = wire::MacInput{
        .dst = loc.common.dst,
        .pkt_len = 0,
        .res_start_offset = fly.res_start_offset,
        .millis = loc.meta.millis_timestamp,
        .counter = loc.meta.counter,
    };
    const auto pkt_len = crypto::packet_length(loc.common.payload_len, loc.common.hdr_len);
    if (!pkt_len) {
        out.verdict = FlyoverVerdict::drop;
        out.reason = Reason::pkt_len_overflow;
        return out;
    }
    out.pkt_len = *pkt_len;
    out.ts.pkt_len = *pkt_len;

    const wire::Mac tag = crypto::flyover_mac(key, out.ts, cfg.tag_len);
    const wire::Mac candidate = crypto::aggregate_mac(fly.agg_mac, tag);
    std::copy(candidate.begin(), candidate.end(), field.begin() + 6);

    const std::int64_t t = unix_nanos(now);
    const std::int64_t abs_ts =
        (std::int64_t(loc.meta.base_timestamp) * 1000 + loc.meta.millis_timestamp) * kNanosPerMilli;
    const std::int64_t age = t - abs_ts;
    if (age < -cfg.delta.count() || age > (cfg.max_age + cfg.delta).count()) {
        out.verdict = FlyoverVerdict::best_effort;
        out.reason = Reason::stale;
        return out;
    }
    // No clock-skew allowance here: adjacent reservations may share a ResID.
    const std::int64_t start = (std::int64_t(loc.meta.base_timestamp) - fly.res_start_offset)
        * kNanosPerSecond;
    const std::int64_t end = start + std::int64_t(fly.res_duration) * kNanosPerSecond;
    if (t < start || t > end) {
        out.verdict = FlyoverVerdict::best_effort;
        out.reason = Reason::inactive;
        return out;
    }
    out.verdict = FlyoverVerdict::fly;
    out.reason = Reason::priority;
    return out;
}

// Verifies the hop field at CurrHF and advances the path pointers. At the
// end of a segment followed by another one, CurrINF moves on as well.
HfOutcome hf_step(const RouterConfig& cfg, Located& loc, Instant now)
{
    wire::PathMetaHdr& meta = loc.meta;
    const std::size_t off = wire::hop_field_offset(meta);
    const auto field = loc.path.subspan(off);
    const bool fly = wire::is_flyover(field);
    const wire::HopField hop = wire::read_hop(field);
    const std::size_t info_off = wire::info_field_offset(meta);
    wire::InfoField info = wire::read_info(loc.path.subspan(info_off));

    const std::int64_t expiry = std::int64_t(info.timestamp) * kNanosPerSecond
        + (1 + std::int64_t(hop.exp_time)) * kExpUnitNanos;
    if (unix_nanos(now) > expiry) return {HfVerdict::drop, Reason::hop_expired};

    const std::uint16_t mac_prefix = load_be16(hop.mac.data());
    if (!info.cons_dir) info.seg_id ^= mac_prefix;
    const wire::Mac expected = crypto::hop_field_mac(cfg.scion_key, info, info.seg_id, hop);
    if (!crypto::mac_equal(expected, hop.mac)) return {HfVerdict::drop, Reason::mac_mismatch};
    if (info.cons_dir) info.seg_id ^= mac_prefix;
    store_be16(&loc.path[info_off + 2], info.seg_id);

    meta = wire::advance_curr_hf(meta, fly ? wire::HopKind::flyover : wire::HopKind::normal);
    if (meta.curr_hf == loc.seg_end[meta.curr_inf] && meta.curr_inf + 1u < loc.num_inf)
        ++meta.curr_inf;
    wire::write_meta(loc.path, meta);
    return {HfVerdict::fwd, Reason::no_flyover};
}

ForwardDecision decide(Verdict v, Reason r, const Located& loc, std::uint32_t res_id = 0)
{
    return ForwardDecision{v, r, loc.ingress, loc.egress, loc.flyover, res_id};
}

} // namespace

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::drop: return "drop";
    case Verdict::best_effort: return "best_effort";
    case Verdict::priority: return "priority";
    }
    return "?";
}

std::string_view to_string(Reason r)
{
    switch (r) {
    case Reason::priority: return "priority";
    case Reason::no_flyover: return "no_flyover";
    case Reason::stale: return "stale";
    case Reason::inactive: return "inactive";
    case Reason::overuse: return "overuse";
    case Reason::res_id_range: return "res_id_range";
    case Reason::malformed: return "malformed";
    case Reason::misplaced_flyover: return "misplaced_flyover";
    case Reason::pkt_len_overflow: return "pkt_len_overflow";
    case Reason::hop_expired: return "hop_expired";
    case Reason::mac_mismatch: return "mac_mismatch";
    case Reason::duplicate: return "duplicate";
    }
    return "?";
}

FlyoverOutcome flyover_processing(const RouterConfig& cfg, std::span<std::uint8_t> pkt, Instant now)
{
    try {
        const Located loc = locate(pkt);
        if (!loc.flyover) throw Error(Errc::bad_state, "not a flyover hop");
        return flyover_step(cfg, loc, now);
    } catch (const Error&) {
        return FlyoverOutcome{};
    }
}

HfOutcome standard_hf_processing(const RouterConfig& cfg, std::span<std::uint8_t> pkt, Instant now)
{
    try {
        Located loc = locate(pkt);
        return hf_step(cfg, loc, now);
    } catch (const Error&) {
        return HfOutcome{};
    }
}

bool at_segment_boundary(std::span<const std::uint8_t> pkt)
{
    try {
        // locate() only reads through the span.
        auto mutable_view = std::span<std::uint8_t>(const_cast<std::uint8_t*>(pkt.data()), pkt.size());
        return locate(mutable_view).boundary;
    } catch (const Error&) {
        return false;
    }
}

BorderRouter::BorderRouter(RouterConfig config) : cfg(std::move(config))
{
    if (cfg.delta < Nanos::zero() || cfg.max_age < Nanos::zero())
        throw Error(Errc::invalid_argument, "router: delta and max_age must be non-negative");
    if (cfg.tag_len == 0 || cfg.tag_len > wire::kMacLen)
        throw Error(Errc::invalid_argument, "router: tag length must be in [1, 6]");
}

policing::TokenBucketArray& BorderRouter::policer(std::uint16_t ingress)
{
    auto it = policers.find(ingress);
    if (it == policers.end())
        it = policers.try_emplace(ingress, cfg.policer_size, cfg.burst_time).first;
    return it->second;
}

ForwardDecision BorderRouter::process_packet(std::span<std::uint8_t> pkt)
{
    return process_packet(pkt, cfg.clock ? cfg.clock() : Instant{});
}

ForwardDecision BorderRouter::process_packet(std::span<std::uint8_t> pkt, Instant now)
{
    Located loc;
    try {
        loc = locate(pkt);
    } catch (const Error&) {
        return ForwardDecision{};
    }
    if (loc.boundary) return segment_boundary_processing(pkt, now);

    try {
        FlyoverOutcome fo;
        if (loc.flyover) {
            fo = flyover_step(cfg, loc, now);
            if (fo.verdict == FlyoverVerdict::drop) return decide(Verdict::drop, fo.reason, loc);
        }
        const HfOutcome hf = hf_step(cfg, loc, now);
        if (hf.verdict == HfVerdict::drop) return decide(Verdict::drop, hf.reason, loc, fo.res.res_id);
        if (!loc.flyover) return decide(Verdict::best_effort, Reason::no_flyover, loc);
        if (fo.verdict != FlyoverVerdict::fly)
            return decide(Verdict::best_effort, fo.reason, loc, fo.res.res_id);

        if (cfg.duplicate_filter
            && cfg.duplicate_filter({loc.meta.base_timestamp, loc.meta.millis_timestamp,
                loc.meta.counter, fo.res.res_id}))
            return decide(Verdict::drop, Reason::duplicate, loc, fo.res.res_id);

        auto& bucket = policer(loc.ingress);
        if (fo.res.res_id >= bucket.size())
            return decide(Verdict::best_effort, Reason::res_id_range, loc, fo.res.res_id);
        if (wire::decode_bw(fo.res.bw) == 0
            || bucket.monitor(fo.res.res_id, fo.res.bw, fo.pkt_len, now) != policing::Verdict::priority)
            return decide(Verdict::best_effort, Reason::overuse, loc, fo.res.res_id);
        return decide(Verdict::priority, Reason::priority, loc, fo.res.res_id);
    } catch (const Error&) {
        return decide(Verdict::drop, Reason::malformed, loc);
    }
}

ForwardDecision BorderRouter::segment_boundary_processing(std::span<std::uint8_t> pkt, Instant now)
{
    Located loc;
    try {
        loc = locate(pkt);
    } catch (const Error&) {
        return ForwardDecision{};
    }
    if (!loc.boundary) return decide(Verdict::drop, Reason::malformed, loc);
    if (loc.second_is_flyover) return decide(Verdict::drop, Reason::misplaced_flyover, loc);

    try {
        FlyoverOutcome fo;
        if (loc.flyover) {
            fo = flyover_step(cfg, loc, now);
            if (fo.verdict == FlyoverVerdict::drop) return decide(Verdict::drop, fo.reason, loc);
        }
        // Both hop fields are verified; hf_step moves CurrINF into the next
        // segment after the first one.
        for (int i = 0; i < 2; ++i) {
            const HfOutcome hf = hf_step(cfg, loc, now);
            if (hf.verdict == HfVerdict::drop)
                return decide(Verdict::drop, hf.reason, loc, fo.res.res_id);
        }
        if (!loc.flyover) return decide(Verdict::best_effort, Reason::no_flyover, loc);
        if (fo.verdict != FlyoverVerdict::fly)
            return decide(Verdict::best_effort, fo.reason, loc, fo.res.res_id);

        if (cfg.duplicate_filter
            && cfg.duplicate_filter({loc.meta.base_timestamp, loc.meta.millis_timestamp,
                loc.meta.counter, fo.res.res_id}))
            return decide(Verdict::drop, Reason::duplicate, loc, fo.res.res_id);

        auto& bucket = policer(loc.ingress);
        if (fo.res.res_id >= bucket.size())
            return decide(Verdict::best_effort, Reason::res_id_range, loc, fo.res.res_id);
        if (wire::decode_bw(fo.res.bw) == 0
            || bucket.monitor(fo.res.res_id, fo.res.bw, fo.pkt_len, now) != policing::Verdict::priority)
            return decide(Verdict::best_effort, Reason::overuse, loc, fo.res.res_id);
        return decide(Verdict::priority, Reason::priority, loc, fo.res.res_id);
    } catch (const Error&) {
        return decide(Verdict::drop, Reason::malformed, loc);
    }
}

} // namespace hummingbird::router
