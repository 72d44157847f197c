#include "hummingbird/bench.hpp"

#include "hummingbird/crypto.hpp"
#include "hummingbird/error.hpp"
#include "hummingbird/policing.hpp"
#include "hummingbird/router.hpp"
#include "hummingbird/source.hpp"
#include "hummingbird/wire.hpp"

#include <chrono>

namespace hummingbird::bench {

namespace {

template <typename F>
double time_ns(std::size_t n, F&& f)
{
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < n; ++i) f(i);
    const auto t1 = std::chrono::steady_clock::now();
    return double(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()) / double(n);
}

volatile std::uint8_t g_sink;

} // namespace

Result run(std::size_t packets, std::uint16_t payload)
{
    if (packets == 0) throw Error(Errc::invalid_argument, "bench needs at least one packet");
    const Instant now = from_unix_millis(1'700'000'000'005);
    crypto::SecretValue sv{};
    crypto::ForwardingKey fk{};
    for (std::size_t i = 0; i < 16; ++i) {
        sv.bytes[i] = std::uint8_t(i);
        fk.bytes[i] = std::uint8_t(0xa0 + i);
    }
    ReservationInfo res{0, 2, 7, BwCode{kMaxBwCode}, 1'699'999'990, 600};
    auto plan_for = [&](bool flyover, std::uint32_t res_id = 0) {
        const source::BeaconHop hops[] = {{0, 2, 63, fk}, {1, 0, 63, fk}};
        source::PathPlan plan;
        plan.dst = {1, 0xff00000001};
        plan.segments.push_back(source::beacon_segment(0x4242, 1'699'999'000, true, hops));
        if (flyover) {
            ReservationInfo r = res;
            r.res_id = res_id;
            plan.segments[0].hops[0].reservation = source::Credential{r, crypto::derive_key(sv, r)};
        }
        return plan;
    };
    source::CounterState counter;
    // Distinct reservations so the pipeline pays the key schedule per packet.
    std::vector<wire::Bytes> fly_pkts;
    for (std::uint32_t i = 0; i < 256; ++i)
        fly_pkts.push_back(source::build_packet(plan_for(true, i), payload, now, counter));
    const wire::Bytes& fly_pkt = fly_pkts[0];
    const wire::Bytes plain_pkt = source::build_packet(plan_for(false), payload, now, counter);
    wire::Bytes buf(fly_pkt.size());

    router::RouterConfig cfg;
    cfg.sv = sv;
    cfg.scion_key = fk;
    cfg.burst_time = std::chrono::hours(1); // measure the pipeline, not overuse
    router::BorderRouter router(cfg);
    policing::TokenBucketArray bucket(1 << 16, std::chrono::hours(1));
    const wire::MacInput in{{1, 0xff00000001}, std::uint16_t(fly_pkt.size()), 10, 5, 0};

    Result out;
    out.packets = packets;
    out.packet_bytes = fly_pkt.size();
    auto& rows = out.stages;
    rows.push_back({"copy packet into buffer", time_ns(packets, [&](std::size_t) {
        std::copy(fly_pkt.begin(), fly_pkt.end(), buf.begin());
        g_sink = buf[0];
    }), "-"});
    rows.push_back({"parse packet headers", time_ns(packets, [&](std::size_t) {
        const auto common = wire::read_common(fly_pkt);
        const auto path = std::span<const std::uint8_t>(fly_pkt).subspan(wire::kCommonHdrLen);
        const auto meta = wire::read_meta(path);
        const auto info = wire::read_info(path.subspan(wire::info_field_offset(meta)));
        const auto fly = wire::read_flyover(path.subspan(wire::hop_field_offset(meta)));
        g_sink = std::uint8_t(common.hdr_len ^ info.seg_id ^ fly.res_id);
    }), "14 + 30"});
    rows.push_back({"recompute hop field MAC", time_ns(packets, [&](std::size_t i) {
        g_sink = crypto::hop_field_mac(fk, std::uint16_t(i), 1'699'999'000, 63, 0, 2)[0];
    }), "46"});
    rows.push_back({"derive reservation key", time_ns(packets, [&](std::size_t i) {
        ReservationInfo r = res;
        r.res_id = std::uint32_t(i & kMaxResId);
        g_sink = crypto::derive_key(sv, r).bytes[0];
    }), "43"});
    // Distinct reservation keys so every iteration pays the key schedule.
    std::vector<crypto::ReservationKey> keys;
    for (std::uint32_t i = 0; i < 256; ++i) {
        ReservationInfo r = res;
        r.res_id = i;
        keys.push_back(crypto::derive_key(sv, r));
    }
    rows.push_back({"recompute flyover MAC", time_ns(packets, [&](std::size_t i) {
        wire::MacInput x = in;
        x.counter = std::uint32_t(i & wire::kMaxCounter);
        g_sink = crypto::flyover_mac(keys[i & 0xff], x)[0];
    }), "24 + 44"});
    rows.push_back({"check for overuse", time_ns(packets, [&](std::size_t i) {
        g_sink = std::uint8_t(bucket.monitor(std::uint32_t(i & 0xffff), res.bw, 1500, now));
    }), "39"});
        rows.push_back({"full pipeline, plain hop", time_ns(packets, [&](std::size_t) {
        std::copy(plain_pkt.begin(), plain_pkt.end(), buf.begin());
        g_sink = std::uint8_t(router.process_packet(std::span(buf.data(), plain_pkt.size()), now).verdict);
    }), "123"});
    rows.push_back({"full pipeline, flyover hop", time_ns(packets, [&](std::size_t i) {
        const auto& p = fly_pkts[i & 0xff];
        std::copy(p.begin(), p.end(), buf.begin());
        const auto d = router.process_packet(buf, now);
        out.priority += d.verdict == router::Verdict::priority;
    }), "308"});

    return out;
}

} // namespace hummingbird::bench
