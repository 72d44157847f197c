#include "hummingbird/vectors.hpp"

#include "hummingbird/error.hpp"
#include "hummingbird/ledger.hpp"
#include "hummingbird/router.hpp"
#include "hummingbird/source.hpp"

#include <json.hpp>

#include <fstream>

namespace hummingbird::vectors {

namespace {

constexpr std::uint64_t kSeed = 0x76656374; // "vect"
constexpr std::int64_t kBaseSecond = 1'700'000'000;
constexpr std::int64_t kNowMs = kBaseSecond * 1000 + 5;

struct As
{
    const char* name;
    wire::IsdAs ia;
};

constexpr As kAses[] = {
    {"A", {1, 0xff0000000110}},
    {"B", {1, 0xff0000000111}},
    {"C", {2, 0xff0000000112}},
    {"D", {2, 0xff0000000113}},
};

template <typename T>
T key_for(const char* label, std::size_t as)
{
    const auto d = ledger::derive_seed(kSeed, std::string(label) + "-" + kAses[as].name);
    T k;
    std::copy_n(d.begin(), k.bytes.size(), k.bytes.begin());
    return k;
}

crypto::SecretValue sv(std::size_t as) { return key_for<crypto::SecretValue>("sv", as); }
crypto::ForwardingKey fwd(std::size_t as) { return key_for<crypto::ForwardingKey>("fwd", as); }

// Linear topology A -1/1- B -2/1- C -2/1- D; traversal interfaces per AS.
constexpr std::uint16_t kIn[] = {0, 1, 1, 1};
constexpr std::uint16_t kOut[] = {1, 2, 2, 0};

source::Credential credential(std::size_t as, std::uint16_t in, std::uint16_t eg)
{
    ReservationInfo res;
    res.ingress = in;
    res.egress = eg;
    res.res_id = std::uint32_t(100 + as);
    res.bw = wire::quantize_bw(10'000'000);
    res.res_start = std::uint32_t(kBaseSecond - 10);
    res.duration = 60;
    return source::Credential{res, crypto::derive_key(sv(as), res)};
}

/// Single segment A..D in construction direction, flyovers at \p reserved.
source::PathPlan linear_plan(const std::vector<bool>& reserved)
{
    std::vector<source::BeaconHop> beacon;
    for (std::size_t i = 0; i < 4; ++i)
        beacon.push_back(source::BeaconHop{kIn[i], kOut[i], 63, fwd(i)});
    source::PathPlan plan;
    plan.dst = kAses[3].ia;
    plan.segments.push_back(source::beacon_segment(0x1234, std::uint32_t(kBaseSecond - 600), true, beacon));
    for (std::size_t i = 0; i < 4; ++i)
        if (reserved[i]) plan.segments[0].hops[i].reservation = credential(i, kIn[i], kOut[i]);
    return plan;
}

/// Two segments: [A, B] in construction direction and [B, C, D] against it,
/// with a flyover for B placed on its first hop field.
source::PathPlan boundary_plan()
{
    source::PathPlan plan;
    plan.dst = kAses[3].ia;
    const source::BeaconHop up[] = {{0, 1, 63, fwd(0)}, {1, 0, 63, fwd(1)}};
    plan.segments.push_back(source::beacon_segment(0x0a0b, std::uint32_t(kBaseSecond - 600), true, up));
    // Construction order D, C, B; traversal B, C, D.
    const source::BeaconHop down[] = {{0, 1, 63, fwd(3)}, {1, 2, 63, fwd(2)}, {2, 0, 63, fwd(1)}};
    plan.segments.push_back(source::beacon_segment(0x0c0d, std::uint32_t(kBaseSecond - 600), false, down));
    plan.segments[0].hops[1].reservation = credential(1, 1, 2);
    return plan;
}

router::RouterConfig router_config(std::size_t as)
{
    router::RouterConfig cfg;
    cfg.sv = sv(as);
    cfg.scion_key = fwd(as);
    return cfg;
}

Vector make(std::string name, std::string description, wire::Bytes pkt, std::size_t as,
    std::int64_t now_ms, std::string verdict, std::string reason)
{
    return Vector{std::move(name), std::move(description), std::move(pkt), sv(as), fwd(as), now_ms,
        std::move(verdict), std::move(reason)};
}

} // namespace

std::vector<Vector> all()
{
    std::vector<Vector> out;
    const Instant now = from_unix_millis(kNowMs);

    {
        source::CounterState c;
        out.push_back(make("flyover_4hop", "four flyovers, seen by the first AS",
            source::build_packet(linear_plan({true, true, true, true}), 1500, now, c), 0, kNowMs,
            "priority", "priority"));
    }
    {
        source::CounterState c;
        out.push_back(make("plain_4hop", "no reservations", source::build_packet(linear_plan({false, false, false, false}), 100, now, c),
            0, kNowMs, "best_effort", "no_flyover"));
    }
    {
        source::CounterState c;
        out.push_back(make("partial_2_4", "flyovers at the second and fourth AS, seen by the first",
            source::build_packet(linear_plan({false, true, false, true}), 500, now, c), 0, kNowMs,
            "best_effort", "no_flyover"));
    }
    {
        source::CounterState c;
        out.push_back(make("stale_4hop", "four flyovers, processed two seconds after sending",
            source::build_packet(linear_plan({true, true, true, true}), 1500, now, c), 0, kNowMs + 2000,
            "best_effort", "stale"));
    }
    {
        source::CounterState c;
        wire::Bytes pkt = source::build_packet(boundary_plan(), 1000, now, c);
        router::BorderRouter a(router_config(0));
        const auto d = a.process_packet(pkt, now);
        if (d.verdict == router::Verdict::drop) throw Error(Errc::bad_state, "vectors: first hop dropped");
        out.push_back(make("boundary_flyover", "segment change at B with B's flyover on its first hop field",
            std::move(pkt), 1, kNowMs, "priority", "priority"));
    }
    return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) { return ledger::hex(bytes); }

wire::Bytes from_hex(std::string_view text)
{
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    wire::Bytes out;
    int hi = -1;
    for (char c : text) {
        if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
        const int v = nibble(c);
        if (v < 0) throw Error(Errc::invalid_argument, std::string("not a hex digit: '") + c + "'");
        if (hi < 0) {
            hi = v;
        } else {
            out.push_back(std::uint8_t(hi << 4 | v));
            hi = -1;
        }
    }
    if (hi >= 0) throw Error(Errc::invalid_argument, "odd number of hex digits");
    return out;
}

std::string manifest(const std::vector<Vector>& vs)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& v : vs) {
        arr.push_back({
            {"name", v.name},
            {"description", v.description},
            {"file", v.name + ".hex"},
            {"sv", to_hex(v.sv.bytes)},
            {"fwd_key", to_hex(v.fwd.bytes)},
            {"now_ms", v.now_ms},
            {"verdict", v.verdict},
            {"reason", v.reason},
        });
    }
    return arr.dump(2) + "\n";
}

void write_fixtures(const std::string& dir)
{
    const auto vs = all();
    for (const auto& v : vs) {
        std::ofstream f(dir + "/" + v.name + ".hex", std::ios::binary);
        if (!f) throw Error(Errc::invalid_argument, "cannot write " + dir + "/" + v.name + ".hex");
        f << to_hex(v.packet) << "\n";
    }
    std::ofstream m(dir + "/vectors.json", std::ios::binary);
    if (!m) throw Error(Errc::invalid_argument, "cannot write " + dir + "/vectors.json");
    m << manifest(vs);
}

} // namespace hummingbird::vectors
