// One PASS/FAIL line per acceptance criterion. Criterion 12 is reported
// only and never affects the exit code.

#include "oracle.hpp"
#include "topo.hpp"

#include "hummingbird/bench.hpp"
#include "hummingbird/error.hpp"
#include "hummingbird/ledger.hpp"
#include "hummingbird/policing.hpp"
#include "hummingbird/residalloc.hpp"
#include "hummingbird/sim.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

using namespace hummingbird;
using topo::at_ms;
using namespace std::chrono_literals;

namespace {

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok && pass) detail << "first failure: " << what << "; ";
        pass = pass && ok;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1 ---------------------------------------------------------------------------

void codec(Outcome& o)
{
    const auto t0 = Clock::now();
    o.require(oracle::meta(wire::PathMetaHdr{}).size() == 12 && wire::kMetaHdrLen == 12, "meta size");
    o.require(oracle::info(wire::InfoField{}).size() == 8 && wire::kInfoFieldLen == 8, "info size");
    o.require(oracle::hop(wire::HopField{}).size() == 12 && wire::kHopFieldLen == 12, "hop size");
    o.require(oracle::flyover(wire::FlyoverHopField{}).size() == 20 && wire::kFlyoverHopFieldLen == 20,
        "flyover size");
    o.require(wire::mac_input_block(wire::MacInput{}).size() == 16, "mac input size");
    o.require(wire::resinfo_block(ReservationInfo{}).size() == 16, "resinfo size");

    std::mt19937_64 rng(1001);
    std::size_t info_checks = 0, hop_checks = 0;
    for (int i = 0; i < 10'000; ++i) {
        const auto p = oracle::random_path(rng);
        const auto b = wire::encode_path(p);
        const auto expect = oracle::path(p);
        if (b != expect) {
            o.require(false, "encode mismatch on path " + std::to_string(i));
            return;
        }
        if (!(wire::decode_path(b) == p) || wire::encode_path(wire::decode_path(b)) != b) {
            o.require(false, "round trip on path " + std::to_string(i));
            return;
        }
        const auto& m = p.meta;
        if (!p.infos.empty()) {
            const auto off = wire::info_field_offset(m);
            const auto want = oracle::info(p.infos[m.curr_inf]);
            o.require(off + 8 <= b.size() && std::equal(want.begin(), want.end(), b.begin() + long(off)),
                "info offset on path " + std::to_string(i));
            ++info_checks;
        }
        std::size_t words = 0;
        for (const auto& h : p.hops) {
            if (words == m.curr_hf) {
                const auto off = wire::hop_field_offset(m);
                const auto want = std::holds_alternative<wire::FlyoverHopField>(h)
                    ? oracle::flyover(std::get<wire::FlyoverHopField>(h))
                    : oracle::hop(std::get<wire::HopField>(h));
                o.require(off + want.size() <= b.size()
                        && std::equal(want.begin(), want.end(), b.begin() + long(off)),
                    "hop offset on path " + std::to_string(i));
                ++hop_checks;
                break;
            }
            words += wire::words_of(wire::kind_of(h));
        }
    }
    const double s = seconds_since(t0);
    o.require(s < 10, "runtime");
    o.detail << "10000 paths round-trip, " << info_checks << " info and " << hop_checks
             << " hop offsets checked, " << std::setprecision(2) << s << " s";
}

// 2 ---------------------------------------------------------------------------

struct Row
{
    bool fly, tag, fresh, active, hf, budget;
};

std::pair<router::Verdict, router::Reason> expected(const Row& r)
{
    using V = router::Verdict;
    using R = router::Reason;
    if (!r.fly) return r.hf ? std::pair{V::best_effort, R::no_flyover} : std::pair{V::drop, R::mac_mismatch};
    if (!r.tag || !r.hf) return {V::drop, R::mac_mismatch};
    if (!r.fresh) return {V::best_effort, R::stale};
    if (!r.active) return {V::best_effort, R::inactive};
    if (!r.budget) return {V::best_effort, R::overuse};
    return {V::priority, R::priority};
}

void truth_table(Outcome& o)
{
    const topo::Line line(1, 2002);
    topo::Line forged_hf = line;
    forged_hf.fwd[0].bytes[0] ^= 0x01;
    crypto::SecretValue other_sv = line.sv[0];
    other_sv.bytes[15] ^= 0x80;
    const std::uint32_t res_id = 5;
    std::size_t rows = 0, matched = 0;

    for (unsigned bits = 0; bits < 64; ++bits) {
        const Row r{bool(bits & 32), bool(bits & 16), bool(bits & 8), bool(bits & 4), bool(bits & 2), bool(bits & 1)};
        const topo::Line& beacon = r.hf ? line : forged_hf;
        source::Credential cred = r.active
            ? line.credential(0, res_id, 10'000'000, std::uint32_t(topo::kBase - 100), 1000)
            : line.credential(0, res_id, 10'000'000, std::uint32_t(topo::kBase - 100), 50);
        if (!r.tag) cred.key = crypto::derive_key(other_sv, cred.res);
        const auto plan = r.fly ? beacon.plan({cred}) : beacon.plan({});
        source::CounterState c;
        source::BuildOptions opts;
        opts.send_inactive = true;
        wire::Bytes pkt = source::build_packet(plan, 500, at_ms(0), c, opts);

        const Instant now = r.fresh ? at_ms(1) : at_ms(2000);
        router::BorderRouter br(line.config(0));
        auto& bucket = br.policer(line.in[0]);
        if (!r.budget) bucket.charge(res_id, std::chrono::nanoseconds(50ms).count(), now);
        const auto before = bucket.timestamp(res_id);
        const auto d = br.process_packet(pkt, now);
        const auto want = expected(r);
        ++rows;
        const bool ok = d.verdict == want.first && d.reason == want.second
            && (want.first == router::Verdict::priority || bucket.timestamp(res_id) == before);
        if (ok) ++matched;
        o.require(ok, "row " + std::to_string(bits) + " got " + std::string(router::to_string(d.verdict)) + "/"
                + std::string(router::to_string(d.reason)));
    }
    o.detail << matched << "/" << rows << " rows match";
}

// 3 ---------------------------------------------------------------------------

void policing_props(Outcome& o)
{
    const auto t0 = Clock::now();
    const std::uint64_t bw = 125'000; // bytes per second
    const std::uint32_t len = 1250;   // 10 ms of service time
    const std::size_t n = 100'000;
    auto fraction = [&](std::int64_t gap_ns) {
        policing::TokenBucketArray b(1, 50ms);
        std::size_t prio = 0;
        for (std::size_t k = 0; k < n; ++k)
            prio += b.monitor(0, bw, len, Instant(Nanos(std::int64_t(k) * gap_ns))) == policing::Verdict::priority;
        return double(prio) / double(n);
    };
    const double exact = fraction(10'000'000);
    const double twice = fraction(5'000'000);
    o.require(exact == 1.0, "exact rate");
    o.require(std::abs(twice - 0.5) <= 0.02, "2x overuse");

    // 10x flood, fixed and random packet sizes: integer conservation bound.
    bool bound = true;
    std::mt19937_64 rng(3003);
    for (int trial = 0; trial < 2; ++trial) {
        policing::TokenBucketArray b(1, 50ms);
        std::int64_t now = 1'000;
        const std::int64_t first = now;
        unsigned __int128 bytes = 0;
        for (std::size_t k = 0; k < n; ++k, now += 1'000'000) {
            const std::uint32_t l = trial == 0 ? len : std::uint32_t(40 + rng() % 2460);
            if (b.monitor(0, bw, l, Instant(Nanos(now))) == policing::Verdict::priority) bytes += l;
        }
        const std::int64_t window = now - 1'000'000 - first;
        bound = bound && bytes * 1'000'000'000u <= static_cast<unsigned __int128>(bw) * std::uint64_t(window + 50'000'000);
    }
    o.require(bound, "conservation bound");
    const double s = seconds_since(t0);
    o.require(s < 30, "runtime");
    o.detail << "exact " << exact * 100 << "%, 2x " << std::setprecision(4) << twice * 100
             << "%, 10x flood within bw*(window+50ms), " << std::setprecision(2) << s << " s";
}

// 4 ---------------------------------------------------------------------------

void memory_math(Outcome& o)
{
    const auto a = policing::size_array(100'000'000'000, 100'000, 3);
    const auto b = policing::size_array(100'000'000'000, 4'000'000, 3);
    o.require(a * 8 == 24'000'000, "24 MB example");
    o.require(b * 8 == 600'000, "600 kB example");
    o.require(policing::TokenBucketArray(b).memory_bytes() == 600'000, "array footprint");
    o.detail << a << " entries = " << a * 8 / 1'000'000 << " MB, " << b << " entries = " << b * 8 / 1000 << " kB";
}

// 5 ---------------------------------------------------------------------------

void first_fit(Outcome& o)
{
    using namespace residalloc;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(5005);
    double worst = 0;
    std::size_t ops = 0;
    for (int inst = 0; inst < 1000 && o.pass; ++inst) {
        const std::size_t n = 1 + rng() % 200;
        const std::int64_t horizon = 100 + std::int64_t(rng() % 5000);
        std::vector<ReservationInterval> all;
        for (std::size_t i = 0; i < n; ++i) {
            const auto s = std::int64_t(rng() % std::uint64_t(horizon));
            all.push_back({s, s + 1 + std::int64_t(rng() % std::uint64_t(horizon / 4 + 1)), Handle(i)});
        }
        FirstFitAllocator ff;
        std::map<Handle, std::pair<ReservationInterval, std::uint32_t>> held;
        auto check_new = [&](Handle h) {
            const auto& [iv, id] = held.at(h);
            for (const auto& [g, other] : held)
                if (g != h && other.second == id && iv.overlaps(other.first)) return false;
            return true;
        };
        for (const auto& iv : all) {
            held[iv.handle] = {iv, ff.assign(iv)};
            ++ops;
            o.require(check_new(iv.handle), "duplicate id in instance " + std::to_string(inst));
        }
        const auto omega = oracle::max_overlap(all);
        o.require(ff.high_water() <= 8 * omega, "8*omega bound in instance " + std::to_string(inst));
        worst = std::max(worst, double(ff.high_water()) / double(omega));
        // Releases followed by fresh arrivals keep the invariant.
        for (std::size_t i = 0; i < n / 2; ++i) {
            auto it = held.begin();
            std::advance(it, long(rng() % held.size()));
            ff.release(it->first);
            held.erase(it);
            ++ops;
            o.require(ff.active_count() == held.size(), "active count after release");
            const auto s = std::int64_t(rng() % std::uint64_t(horizon));
            const ReservationInterval iv{s, s + 1 + std::int64_t(rng() % 50), Handle(n + i)};
            held[iv.handle] = {iv, ff.assign(iv)};
            ++ops;
            o.require(check_new(iv.handle), "duplicate id after release in instance " + std::to_string(inst));
        }
    }
    const double s = seconds_since(t0);
    o.require(s < 60, "runtime");
    o.detail << "1000 instances, " << ops << " operations, worst max-id/omega " << std::setprecision(3) << worst
             << ", " << std::setprecision(2) << s << " s";
}

// 6 ---------------------------------------------------------------------------

constexpr std::int64_t kNine = 1'700'035'200 + 9 * 3600;
constexpr std::uint64_t kMbps = 1'000'000;

struct MiniLedger
{
    ledger::Pki pki{6006};
    wire::IsdAs ia{1, 0xff0000000110};
    ledger::AsCredentials creds = pki.enroll(ia);
    ledger::Ledger l{ledger::LedgerConfig{pki.root_key(), 0, "fee-sink"}};
    ledger::ObjectId token = 0;

    MiniLedger()
    {
        l.create_account("as", 0);
        token = l.register_as("as", creds.cert, ledger::prove_possession(creds, "as"));
    }

    ledger::ObjectId hour(std::uint16_t iface = 1)
    {
        return l.issue("as", token,
            ledger::AssetAttrs{ia, 100 * kMbps, kNine, kNine + 3600, iface, ledger::Direction::ingress, 600, 5 * kMbps});
    }
};

Errc error_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::schema;
}

void ledger_split(Outcome& o)
{
    {
        MiniLedger m;
        const auto a = m.hour();
        o.require(error_of([&] { m.l.split_time("as", a, kNine + 25 * 60); }) == Errc::misaligned, "9:25 rejected");
        const auto [x, y] = m.l.split_time("as", a, kNine + 10 * 60);
        o.require(m.l.asset(x)->attrs.start_time == kNine && m.l.asset(x)->attrs.expiration_time == kNine + 600
                && m.l.asset(y)->attrs.start_time == kNine + 600 && m.l.asset(y)->attrs.expiration_time == kNine + 3600,
            "9:10 split");
        o.require(error_of([&] { m.l.split_bandwidth("as", y, 3 * kMbps); }) == Errc::below_minimum, "3 Mbps rejected");
        const auto [rest, part] = m.l.split_bandwidth("as", y, 7 * kMbps);
        o.require(m.l.asset(rest)->attrs.bandwidth == 93 * kMbps && m.l.asset(part)->attrs.bandwidth == 7 * kMbps,
            "93 + 7 Mbps");
    }

    std::mt19937_64 rng(6006);
    std::size_t ops = 0, applied = 0;
    const auto t0 = Clock::now();
    MiniLedger base;
    base.hour(1);
    base.hour(2);
    const auto area = base.l.area_by_interface();
    for (int seq = 0; seq < 10'000 && o.pass; ++seq) {
        ledger::Ledger l = base.l;
        for (int step = 0; step < 12; ++step) {
            const auto mine = l.assets_of("as");
            const auto* a = mine[rng() % mine.size()];
            const auto* b = mine[rng() % mine.size()];
            ++ops;
            try {
                switch (rng() % 4) {
                case 0: l.split_time("as", a->id, a->attrs.start_time + 600 * std::int64_t(1 + rng() % 5)); break;
                case 1: l.split_bandwidth("as", a->id, kMbps * (1 + rng() % 99)); break;
                case 2: l.fuse_time("as", a->id, b->id); break;
                default: l.fuse_bandwidth("as", a->id, b->id); break;
                }
                ++applied;
            } catch (const Error&) {
            }
            if (l.area_by_interface() != area) {
                o.require(false, "area changed in sequence " + std::to_string(seq));
                break;
            }
        }
    }
    o.detail << "examples reproduced, 10000 sequences / " << ops << " ops (" << applied
             << " applied) conserve area, " << std::setprecision(2) << seconds_since(t0) << " s";
}

// 7 ---------------------------------------------------------------------------

struct PathMarket
{
    topo::Line line;
    ledger::Pki pki{7007};
    std::vector<ledger::AsCredentials> creds;
    ledger::Ledger l{ledger::LedgerConfig{pki.root_key(), 0, "fee-sink"}};
    std::vector<ledger::HopOrder> hops;

    explicit PathMarket(std::size_t n) : line(n, 7007 + n)
    {
        l.create_account("alice", 1'000'000'000'000'000'000);
        const ledger::Want want{topo::kBase - 600, topo::kBase + 600, 10 * kMbps};
        for (std::size_t i = 0; i < n; ++i) {
            const wire::IsdAs ia{1, 0xff0000000200 + i};
            creds.push_back(pki.enroll(ia));
            const std::string acct = "as" + std::to_string(i);
            l.create_account(acct, 0);
            const auto token = l.register_as(acct, creds[i].cert, ledger::prove_possession(creds[i], acct));
            l.register_seller(acct);
            auto attrs = ledger::AssetAttrs{ia, 100 * kMbps, topo::kBase - 600, topo::kBase + 3000, line.in[i],
                ledger::Direction::ingress, 600, kMbps};
            const auto in_l = l.create_listing(acct, l.issue(acct, token, attrs), 1 + i);
            attrs.interface = line.out[i];
            attrs.direction = ledger::Direction::egress;
            const auto eg_l = l.create_listing(acct, l.issue(acct, token, attrs), 1 + i);
            hops.push_back({in_l, eg_l, want});
        }
    }

    std::map<std::string, std::uint64_t> balances() const
    {
        std::map<std::string, std::uint64_t> b{{"alice", l.balance("alice")}};
        for (std::size_t i = 0; i < line.size(); ++i) b["as" + std::to_string(i)] = l.balance("as" + std::to_string(i));
        return b;
    }
};

void atomicity(Outcome& o)
{
    const auto eph = ledger::BoxKeyPair::from_seed(ledger::derive_seed(7007, "eph"));
    std::size_t injected = 0;
    std::size_t verified_hops = 0;
    for (std::size_t n : {1, 2, 4, 8, 16}) {
        PathMarket m(n);
        for (std::size_t k = 0; k < n; ++k) {
            const auto hash = m.l.state_hash();
            const auto bal = m.balances();
            auto hops = m.hops;
            auto calls = ledger::reserve_path_calls("alice", hops, eph.pub);
            switch (k % 3) {
            case 0: // misaligned ingress purchase
                hops[k].want.start_time += 1;
                calls = ledger::reserve_path_calls("alice", hops, eph.pub);
                break;
            case 1: // egress listing gone
                hops[k].egress_listing = 999'999;
                calls = ledger::reserve_path_calls("alice", hops, eph.pub);
                break;
            default: // redeem pairs two ingress assets
                calls[3 * k + 2].fn = [k, &eph](ledger::Ledger& l, const std::vector<ledger::CallResult>& prev) {
                    const auto in = prev[3 * k].ids.at(0);
                    return ledger::CallResult{{l.redeem("alice", in, in, eph.pub)}};
                };
            }
            const auto r = m.l.execute_atomic(calls);
            ++injected;
            o.require(!r.ok && r.failed_index && *r.failed_index / 3 == k,
                "failure at hop " + std::to_string(k) + " of " + std::to_string(n) + " not reported there");
            o.require(m.l.state_hash() == hash, "state hash changed, n=" + std::to_string(n) + " k=" + std::to_string(k));
            o.require(m.balances() == bal, "balances changed, n=" + std::to_string(n) + " k=" + std::to_string(k));
        }

        const auto total = m.l.total_balance();
        const auto r = m.l.execute_atomic(ledger::reserve_path_calls("alice", m.hops, eph.pub));
        o.require(r.ok, "all-success block for n=" + std::to_string(n) + ": " + r.message);
        if (!r.ok) continue;
        o.require(m.l.total_balance() == total, "balances not conserved");
        std::vector<std::optional<source::Credential>> creds;
        for (std::size_t i = 0; i < n; ++i) {
            ledger::AsService svc(m.creds[i], "as" + std::to_string(i), m.line.sv[i]);
            svc.process_pending(m.l);
            const auto req = r.results[3 * i + 2].ids.at(0);
            const auto* d = m.l.delivery(req);
            o.require(d != nullptr, "no delivery");
            if (!d) return;
            creds.push_back(ledger::open_delivery(*d, eph, m.l.certificate(m.creds[i].cert.as)->box_key));
        }
        source::CounterState c;
        wire::Bytes pkt = source::build_packet(m.line.plan(creds), 1000, at_ms(5), c);
        auto routers = m.line.routers();
        for (std::size_t i = 0; i < n; ++i) {
            const auto d = routers[i].process_packet(pkt, at_ms(6));
            o.require(d.verdict == router::Verdict::priority,
                "hop " + std::to_string(i) + " of " + std::to_string(n) + ": " + std::string(router::to_string(d.reason)));
            verified_hops += d.verdict == router::Verdict::priority;
        }
    }
    o.detail << injected << " injected failures rolled back, " << verified_hops
             << " delivered credentials verified as priority";
}

// 8 ---------------------------------------------------------------------------

std::size_t forgery_trials(std::size_t tag_len, std::size_t trials, std::uint64_t seed)
{
    const topo::Line line(1, 8008);
    const auto plan = line.reserved_plan(1'000'000'000);
    source::CounterState c;
    source::BuildOptions opts;
    opts.tag_len = tag_len;
    const wire::Bytes good = source::build_packet(plan, 64, at_ms(0), c, opts);
    const wire::Mac hf = plan.segments[0].hops[0].hop.mac;
    constexpr std::size_t kCounterOff = 12 + 8;
    constexpr std::size_t kAggOff = 12 + 12 + 8 + 6;

    router::RouterConfig cfg = line.config(0);
    cfg.tag_len = tag_len;
    router::BorderRouter r(cfg);
    std::mt19937_64 rng(seed);
    wire::Bytes buf(good.size());
    std::size_t accepted = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::copy(good.begin(), good.end(), buf.begin());
        // Random counter changes the true tag; the forger guesses the tag bytes.
        const std::uint32_t counter = std::uint32_t(rng()) & wire::kMaxCounter;
        buf[kCounterOff + 1] = std::uint8_t((buf[kCounterOff + 1] & 0xc0) | (counter >> 16));
        buf[kCounterOff + 2] = std::uint8_t(counter >> 8);
        buf[kCounterOff + 3] = std::uint8_t(counter);
        const std::uint64_t guess = rng();
        for (std::size_t i = 0; i < wire::kMacLen; ++i)
            buf[kAggOff + i] = std::uint8_t(hf[i] ^ (i < tag_len ? std::uint8_t(guess >> (8 * i)) : 0));
        accepted += r.process_packet(buf, at_ms(1)).verdict != router::Verdict::drop;
    }
    return accepted;
}

void forgery(Outcome& o)
{
    const auto t0 = Clock::now();
    const std::size_t n1 = 1'000'000;
    const std::size_t a1 = forgery_trials(1, n1, 81);
    const double p = 1.0 / 256;
    const double mean = double(n1) * p;
    const double sigma = std::sqrt(double(n1) * p * (1 - p));
    o.require(std::abs(double(a1) - mean) <= 3 * sigma, "l=1 acceptance outside 3 sigma");
    const std::size_t n6 = 10'000'000;
    const std::size_t a6 = forgery_trials(6, n6, 86);
    o.require(a6 == 0, "l=6 accepted a forgery");
    o.detail << "l=1: " << a1 << "/" << n1 << " (expected " << mean << " +/- " << std::setprecision(3) << 3 * sigma
             << "), l=6: " << a6 << "/" << n6 << ", " << std::setprecision(2) << seconds_since(t0) << " s";
}

// 9-11 ------------------------------------------------------------------------

sim::MetricsReport scenario(Outcome& o, const std::string& name)
{
    const auto sc = sim::load_scenario(std::string(HB_SCENARIO_DIR) + "/" + name + ".json");
    const auto rep = sim::run(sc, sc.seed.value_or(sim::kDefaultSeed));
    for (const auto& r : sim::check_assertions(sc, rep)) o.require(r.pass, name + ": " + r.message);
    return rep;
}

double metric(const sim::MetricsReport& rep, const std::string& name)
{
    return rep.metric(name).value_or(std::nan(""));
}

void qos(Outcome& o)
{
    const auto flood = scenario(o, "qos_flood");
    const double good = metric(flood, "flow.reserved.priority_goodput_bps");
    const double reserved = 10'000'000;
    o.require(good >= 0.99 * reserved, "reserved goodput below 99%");
    const auto silent = scenario(o, "silent_reservation");
    const double be = metric(silent, "flow.be.goodput_bps");
    const double cap = metric(silent, "link.A-D.capacity_bps");
    o.require(be >= 0.99 * cap, "best effort below link capacity");
    o.detail << std::setprecision(4) << "reserved goodput " << good / 1e6 << " Mbps of 10 under 1 Gbps flood; silent: best effort "
             << be / 1e6 << " of " << cap / 1e6 << " Mbps";
}

void replay(Outcome& o)
{
    const auto shared = scenario(o, "replay_shared");
    const auto separate = scenario(o, "replay_separate");
    const double demoted = metric(shared, "flow.p.demoted_fraction");
    const double restored = metric(separate, "flow.p.priority_fraction");
    o.require(demoted >= 0.45, "shared replay demotion below 45%");
    o.require(restored >= 0.99, "separate reservations below 99%");
    o.detail << std::setprecision(3) << "shared: " << demoted * 100 << "% of victim demoted; separate: "
             << restored * 100 << "% priority";
}

void fairness(Outcome& o)
{
    const auto rep = scenario(o, "starvation");
    const double spend = metric(rep, "account.attacker.spend");
    const double listed = metric(rep, "account.attacker.list_value");
    std::uint64_t s = 0, lv = 0;
    for (const auto& a : rep.accounts)
        if (a.name == "attacker") {
            s = a.spend;
            lv = a.list_value;
        }
    o.require(s == lv && s > 0, "spend differs from listed prices");
    o.require(spend == listed, "metric mismatch");
    o.detail << "attacker spend " << s << " == listed " << lv;
}

// 12 --------------------------------------------------------------------------

void performance(Outcome& o)
{
    const auto res = bench::run(200'000, 1500);
    const double mpps = res.flyover_pps() / 1e6;
    o.pass = mpps >= 1.0;
    o.detail << std::fixed << std::setprecision(2) << mpps << " Mpps flyover decode+verify (target 1, not asserted);";
    for (const auto& s : res.stages) o.detail << " " << s.name << " " << std::setprecision(0) << s.ns_per_packet << " ns [ref " << s.reference << "];";
}

} // namespace

int main()
{
    const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
        {"codec conformance", codec},
        {"decision table", truth_table},
        {"policing", policing_props},
        {"policing memory", memory_math},
        {"first fit", first_fit},
        {"ledger splitting", ledger_split},
        {"atomicity", atomicity},
        {"forgery resistance", forgery},
        {"qos scenarios", qos},
        {"replay scenarios", replay},
        {"economic fairness", fairness},
        {"performance (reported)", performance},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        Outcome o;
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << std::setw(2) << index << " " << name << ": " << o.detail.str()
                  << std::endl;
        if (!o.pass && index != 12) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
