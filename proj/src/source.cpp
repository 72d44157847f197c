#include "hummingbird/source.hpp"

#include "hummingbird/detail/bytes.hpp"
#include "hummingbird/error.hpp"

#include <algorithm>
#include <string>

namespace hummingbird::source {

namespace {

constexpr std::int64_t kNanosPerSecond = 1'000'000'000;

void check_seg_len(std::size_t words, std::size_t index)
{
    if (words > 0x7f)
        throw Error(Errc::overflow, "segment " + std::to_string(index) + " exceeds 127 words");
}

bool reservation_active(const ReservationInfo& res, Instant now)
{
    const std::int64_t t = unix_nanos(now);
    const std::int64_t start = std::int64_t(res.res_start) * kNanosPerSecond;
    const std::int64_t end = start + std::int64_t(res.duration) * kNanosPerSecond;
    return start <= t && t <= end;
}

} // namespace

std::size_t PathPlan::hop_count() const
{
    std::size_t n = 0;
    for (const auto& seg : segments) n += seg.hops.size();
    return n;
}

std::size_t PathPlan::reserved_count() const
{
    std::size_t n = 0;
    for (const auto& seg : segments)
        n += std::count_if(seg.hops.begin(), seg.hops.end(),
            [](const PlannedHop& h) { return h.reservation.has_value(); });
    return n;
}

void validate_plan(const PathPlan& plan)
{
    if (plan.segments.empty() || plan.segments.size() > wire::kMaxSegments)
        throw Error(Errc::invalid_argument, "plan must have 1 to 3 segments");
    for (std::size_t i = 0; i < plan.segments.size(); ++i) {
        const auto& seg = plan.segments[i];
        if (seg.hops.empty())
            throw Error(Errc::invalid_argument, "segment " + std::to_string(i) + " has no hops");
        if (i > 0 && seg.hops.front().reservation)
            throw Error(Errc::invalid_argument,
                "flyover on the first hop field of segment " + std::to_string(i)
                    + "; it belongs on the last hop field of the previous segment");
    }
}

PlannedSegment beacon_segment(std::uint16_t seg_id, std::uint32_t timestamp, bool cons_dir,
    std::span<const BeaconHop> hops)
{
    PlannedSegment seg;
    seg.info = wire::InfoField{.peering = false, .cons_dir = cons_dir, .seg_id = seg_id,
        .timestamp = timestamp};
    std::uint16_t acc = seg_id;
    for (const auto& b : hops) {
        wire::HopField hf;
        hf.exp_time = b.exp_time;
        hf.cons_ingress = b.cons_ingress;
        hf.cons_egress = b.cons_egress;
        hf.mac = crypto::hop_field_mac(b.key, acc, timestamp, b.exp_time, b.cons_ingress,
            b.cons_egress);
        acc ^= detail::load_be16(hf.mac.data());
        seg.hops.push_back(PlannedHop{hf, std::nullopt});
    }
    if (!cons_dir) {
        // Against construction direction the packet enters with the fully
        // accumulated SegID and each router undoes one step.
        std::reverse(seg.hops.begin(), seg.hops.end());
        seg.info.seg_id = acc;
    }
    return seg;
}

CounterState::Stamp CounterState::next(Instant now)
{
    const std::int64_t ms = std::max(unix_millis(now), last_ms);
    if (ms != last_ms) {
        last_ms = ms;
        next_counter = 0;
    }
    if (next_counter > wire::kMaxCounter)
        throw Error(Errc::counter_exhausted, "counter exhausted within one millisecond");
    Stamp s;
    s.base_timestamp = std::uint32_t(ms / 1000);
    s.millis = std::uint16_t(ms % 1000);
    s.counter = next_counter++;
    return s;
}

wire::Packet build(const PathPlan& plan, std::uint16_t payload_len, Instant now,
    CounterState& counter, const BuildOptions& opts)
{
    const wire::Bytes payload(payload_len, 0);
    return build(plan, payload, now, counter, opts);
}

wire::Packet build(const PathPlan& plan, std::span<const std::uint8_t> payload, Instant now,
    CounterState& counter, const BuildOptions& opts)
{
    validate_plan(plan);
    if (payload.size() > 0xffff) throw Error(Errc::packet_length_overflow, "payload too large");
    if (opts.tag_len == 0 || opts.tag_len > wire::kMacLen)
        throw Error(Errc::invalid_argument, "tag length must be in [1, 6]");

    wire::Packet pkt;
    pkt.common.dst = plan.dst;
    pkt.payload.assign(payload.begin(), payload.end());
    auto& path = pkt.path;

    // Layout first: PktLen enters every flyover MAC.
    std::size_t hop_words = 0;
    for (std::size_t i = 0; i < plan.segments.size(); ++i) {
        std::size_t words = 0;
        for (const auto& h : plan.segments[i].hops)
            words += h.reservation ? wire::kFlyoverWords : wire::kHopFieldWords;
        check_seg_len(words, i);
        path.meta.seg_len[i] = std::uint8_t(words);
        path.infos.push_back(plan.segments[i].info);
        hop_words += words;
    }
    const std::size_t hdr_bytes = wire::kCommonHdrLen + path.encoded_size() + 4 * hop_words;
    if (hdr_bytes / 4 > 0xff) throw Error(Errc::overflow, "header exceeds 1020 bytes");
    const auto hdr_len = std::uint8_t(hdr_bytes / 4);
    const auto pkt_len = crypto::packet_length(std::uint16_t(payload.size()), hdr_len);
    if (!pkt_len) throw Error(Errc::packet_length_overflow, "PayloadLen + 4 * HdrLen exceeds 16 bits");

    // Validate reservations before consuming a counter value.
    const std::int64_t base_s = unix_seconds(now);
    for (const auto& seg : plan.segments) {
        for (const auto& h : seg.hops) {
            if (!h.reservation) continue;
            const auto& res = h.reservation->res;
            if (!opts.send_inactive && !reservation_active(res, now))
                throw Error(Errc::reservation_inactive,
                    "reservation " + std::to_string(res.res_id) + " is not active");
        }
    }

    const CounterState::Stamp stamp = counter.next(now);
    path.meta.base_timestamp = stamp.base_timestamp;
    path.meta.millis_timestamp = stamp.millis;
    path.meta.counter = stamp.counter;

    for (const auto& seg : plan.segments) {
        for (const auto& h : seg.hops) {
            if (!h.reservation) {
                path.hops.emplace_back(h.hop);
                continue;
            }
            const auto& [res, key] = *h.reservation;
            const std::int64_t offset = std::int64_t(stamp.base_timestamp) - res.res_start;
            if (offset < 0 || offset > 0xffff)
                throw Error(Errc::field_range,
                    "reservation start " + std::to_string(res.res_start)
                        + " not representable relative to " + std::to_string(base_s));
            wire::FlyoverHopField fly;
            fly.ingress_alert = h.hop.ingress_alert;
            fly.egress_alert = h.hop.egress_alert;
            fly.exp_time = h.hop.exp_time;
            fly.cons_ingress = h.hop.cons_ingress;
            fly.cons_egress = h.hop.cons_egress;
            fly.res_id = res.res_id;
            fly.bw = res.bw;
            fly.res_start_offset = std::uint16_t(offset);
            fly.res_duration = res.duration;
            const wire::MacInput in{
                .dst = plan.dst,
                .pkt_len = *pkt_len,
                .res_start_offset = fly.res_start_offset,
                .millis = stamp.millis,
                .counter = stamp.counter,
            };
            fly.agg_mac = crypto::aggregate_mac(h.hop.mac, crypto::flyover_mac(key, in, opts.tag_len));
            path.hops.emplace_back(fly);
        }
    }
    pkt.common.hdr_len = hdr_len;
    pkt.common.payload_len = std::uint16_t(payload.size());
    return pkt;
}

bool fully_traversed(const wire::PathMetaHdr& meta)
{
    const std::size_t n = meta.num_inf();
    return n > 0 && meta.curr_inf == n - 1 && meta.curr_hf == meta.hop_words();
}

wire::HummingbirdPath reverse_path(const wire::HummingbirdPath& path)
{
    if (!fully_traversed(path.meta))
        throw Error(Errc::bad_state, "path reversal requires a fully traversed path");
    const std::size_t n = path.infos.size();

    // Split hops by segment.
    std::vector<std::vector<wire::HopField>> segs(n);
    std::size_t seg = 0;
    std::size_t words = 0;
    std::size_t bound = path.meta.seg_len[0];
    for (const auto& hop : path.hops) {
        while (words >= bound) bound += path.meta.seg_len[++seg];
        const wire::HopKind kind = wire::kind_of(hop);
        if (const auto* fly = std::get_if<wire::FlyoverHopField>(&hop))
            segs[seg].push_back(wire::to_hop_field(*fly));
        else
            segs[seg].push_back(std::get<wire::HopField>(hop));
        words += wire::words_of(kind);
    }

    wire::HummingbirdPath out;
    out.meta.base_timestamp = path.meta.base_timestamp;
    out.meta.millis_timestamp = path.meta.millis_timestamp;
    out.meta.counter = path.meta.counter;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = n - 1 - i;
        wire::InfoField info = path.infos[src];
        info.cons_dir = !info.cons_dir;
        out.infos.push_back(info);
        out.meta.seg_len[i] = std::uint8_t(segs[src].size() * wire::kHopFieldWords);
        for (auto it = segs[src].rbegin(); it != segs[src].rend(); ++it) out.hops.emplace_back(*it);
    }
    return out;
}

wire::Packet reverse_path(const wire::Packet& pkt, wire::IsdAs reply_dst)
{
    wire::Packet out;
    out.path = reverse_path(pkt.path);
    out.common.dst = reply_dst;
    out.payload = pkt.payload;
    wire::finalize_lengths(out);
    return out;
}

} // namespace hummingbird::source
