#include "hummingbird/sim.hpp"

#include "hummingbird/error.hpp"
#include "hummingbird/ledger.hpp"
#include "hummingbird/router.hpp"
#include "hummingbird/source.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <queue>
#include <random>

namespace hummingbird::sim {

namespace {

constexpr std::int64_t kNanosPerMs = 1'000'000;
constexpr std::int64_t kNanosPerSecond = 1'000'000'000;

std::int64_t ms_to_ns(double ms) { return std::int64_t(std::llround(ms * double(kNanosPerMs))); }

/// Independent PRNG stream per entity: adding an entity does not shift the
/// randomness seen by the others.
std::mt19937_64 stream(std::uint64_t seed, const std::string& label)
{
    const auto d = ledger::derive_seed(seed, label);
    std::seed_seq seq(d.begin(), d.end());
    return std::mt19937_64(seq);
}

template <typename T>
T derive_key(std::uint64_t seed, const std::string& label)
{
    const auto d = ledger::derive_seed(seed, label);
    T k;
    std::copy_n(d.begin(), k.bytes.size(), k.bytes.begin());
    return k;
}

struct AsNode
{
    const AsSpec* spec = nullptr;
    wire::IsdAs ia;
    crypto::SecretValue sv;
    crypto::ForwardingKey fk;
    std::unique_ptr<router::BorderRouter> router;
    std::map<std::uint16_t, std::size_t> link_by_if; // egress interface -> directed link
    std::int64_t offset_ns = 0;
    std::unique_ptr<ledger::AsService> service;
    ledger::AccountId account;
};

struct Link
{
    std::size_t from = 0;
    std::size_t to = 0;
    std::uint16_t from_if = 0;
    std::uint16_t to_if = 0;
    std::uint64_t capacity = 0;
    std::int64_t delay_ns = 0;
    std::uint64_t buffer_bytes = 0;
    std::deque<std::size_t> prio;
    std::deque<std::size_t> be;
    std::uint64_t be_bytes = 0;
    bool busy = false;
    std::size_t in_flight = 0;
    LinkReport rep;
    std::int64_t busy_ns = 0;
};

/// One AS on a path with its traversal interfaces. Boundary ASes appear once,
/// located at their first hop field (the last one of the earlier segment).
struct AsHop
{
    std::size_t as = 0;
    std::uint16_t in_if = 0;
    std::uint16_t out_if = 0;
    std::size_t seg = 0;
    std::size_t pos = 0;
};

struct ResolvedPath
{
    std::vector<AsHop> hops;
    source::PathPlan plan;
};

struct Packet
{
    wire::Bytes bytes;
    std::size_t flow = 0;
    std::int64_t sent_ns = 0;
    bool flyover = false;
    bool demoted = false;
};

struct FlowRt
{
    const FlowSpec* spec = nullptr;
    const ResolvedPath* path = nullptr;
    source::PathPlan plan;
    source::CounterState counter;
    std::mt19937_64 rng;
    FlowReport rep;
    std::vector<std::int64_t> latencies;
    std::int64_t start_ns = 0;
    std::int64_t stop_ns = 0;
    std::uint64_t sent = 0;
    std::vector<std::size_t> replays; // replay adversaries observing this flow
};

enum class Ev
{
    send,
    link_done,
    arrive,
    inject // delayed replay copy: a = packet, b = link, iface = priority
};

struct Event
{
    std::int64_t t = 0;
    std::uint64_t seq = 0;
    Ev kind = Ev::send;
    std::size_t a = 0;
    std::size_t b = 0;
    std::uint16_t iface = 0;

    bool operator>(const Event& o) const { return t != o.t ? t > o.t : seq > o.seq; }
};

std::string kind_name(FlowKind k)
{
    switch (k) {
    case FlowKind::flow: return "flow";
    case FlowKind::best_effort_flood: return "best_effort_flood";
    case FlowKind::tag_forgery: return "tag_forgery";
    case FlowKind::overuse: return "overuse";
    case FlowKind::replay_on_reservation_set: return "replay_on_reservation_set";
    }
    return "?";
}

class Simulator
{
public:
    Simulator(const Scenario& sc, std::uint64_t seed);
    MetricsReport run();

private:
    void setup_network();
    void setup_paths();
    void setup_ledger();
    void procure(const ReservationSpec& r);
    void setup_flows();

    void schedule(std::int64_t t, Ev kind, std::size_t a, std::size_t b = 0, std::uint16_t iface = 0);
    Instant at(std::int64_t t) const { return base + Nanos(t); }
    std::size_t alloc_packet();
    void free_packet(std::size_t id) { free_ids.push_back(id); }

    void on_send(std::int64_t t, std::size_t f);
    void on_arrive(std::int64_t t, std::size_t as, std::uint16_t iface, std::size_t pid);
    void on_link_done(std::int64_t t, std::size_t l);
    void enqueue(std::int64_t t, std::size_t l, std::size_t pid, bool priority);
    void start_tx(std::int64_t t, std::size_t l);
    void drop(std::size_t pid, std::size_t as, const std::string& reason);
    std::size_t as_index(const std::string& name) const { return as_by_name.at(name); }
    std::uint16_t iface_towards(std::size_t from, std::size_t to) const;

    const Scenario& sc;
    std::uint64_t seed;
    Instant base;
    std::int64_t end_ns = 0;

    std::vector<AsNode> nodes;
    std::map<std::string, std::size_t> as_by_name;
    std::vector<Link> links;
    std::map<std::string, ResolvedPath> paths;
    std::vector<FlowRt> flows;
    std::map<std::string, std::size_t> flow_by_name;

    std::unique_ptr<ledger::Ledger> ledger;
    std::map<std::string, std::vector<std::pair<std::size_t, source::Credential>>> credentials;
    std::vector<ReservationReport> res_reports;
    std::map<std::string, AccountReport> account_reports;

    std::vector<Packet> pool;
    std::vector<std::size_t> free_ids;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    std::uint64_t next_seq = 0;
    std::map<std::string, std::map<std::string, std::uint64_t>> hop_counts;
};

Simulator::Simulator(const Scenario& scenario, std::uint64_t s)
    : sc(scenario), seed(s), base(from_unix_seconds(scenario.start_time))
{
    end_ns = ms_to_ns(sc.duration_ms + sc.drain_ms);
    setup_network();
    setup_paths();
    setup_ledger();
    for (const auto& r : sc.reservations) procure(r);
    setup_flows();
}

void Simulator::setup_network()
{
    for (const auto& a : sc.ases) {
        AsNode n;
        n.spec = &a;
        n.ia = wire::IsdAs{a.isd, a.as};
        n.sv = derive_key<crypto::SecretValue>(seed, "sv-" + a.name);
        n.fk = derive_key<crypto::ForwardingKey>(seed, "fwd-" + a.name);
        n.offset_ns = ms_to_ns(a.clock_offset_ms);
        router::RouterConfig cfg;
        cfg.sv = n.sv;
        cfg.scion_key = n.fk;
        cfg.delta = Nanos(ms_to_ns(sc.delta_ms));
        cfg.max_age = Nanos(ms_to_ns(sc.max_age_ms));
        cfg.tag_len = sc.tag_len;
        cfg.policer_size = sc.policer_size;
        cfg.burst_time = Nanos(ms_to_ns(sc.burst_ms));
        n.router = std::make_unique<router::BorderRouter>(cfg);
        n.account = "as:" + a.name;
        as_by_name[a.name] = nodes.size();
        nodes.push_back(std::move(n));
    }
    for (const auto& l : sc.links) {
        const std::size_t a = as_index(l.a), b = as_index(l.b);
        for (int dir = 0; dir < 2; ++dir) {
            Link k;
            k.from = dir == 0 ? a : b;
            k.to = dir == 0 ? b : a;
            k.from_if = dir == 0 ? l.a_if : l.b_if;
            k.to_if = dir == 0 ? l.b_if : l.a_if;
            k.capacity = l.capacity_bps;
            k.delay_ns = ms_to_ns(l.delay_ms);
            k.buffer_bytes = std::uint64_t(l.buffer_ms / 1000.0 * double(l.capacity_bps) / 8.0);
            k.rep.from = sc.ases[k.from].name;
            k.rep.to = sc.ases[k.to].name;
            k.rep.capacity_bps = l.capacity_bps;
            nodes[k.from].link_by_if[k.from_if] = links.size();
            links.push_back(std::move(k));
        }
    }
}

std::uint16_t Simulator::iface_towards(std::size_t from, std::size_t to) const
{
    for (const auto& [iface, l] : nodes[from].link_by_if)
        if (links[l].to == to) return iface;
    throw Error(Errc::schema, "scenario: no link " + sc.ases[from].name + "-" + sc.ases[to].name);
}

void Simulator::setup_paths()
{
    const auto beacon_ts = std::uint32_t(sc.start_time - 60);
    for (const auto& p : sc.paths) {
        ResolvedPath rp;
        rp.plan.dst = nodes[as_index(p.segments.back().ases.back())].ia;
        auto rng = stream(seed, "segid-" + p.name);
        for (std::size_t k = 0; k < p.segments.size(); ++k) {
            const auto& seg = p.segments[k];
            std::vector<std::pair<std::uint16_t, std::uint16_t>> io; // traversal in/out
            for (std::size_t j = 0; j < seg.ases.size(); ++j) {
                const std::size_t me = as_index(seg.ases[j]);
                const std::uint16_t in = j == 0 ? 0 : iface_towards(me, as_index(seg.ases[j - 1]));
                const std::uint16_t out = j + 1 == seg.ases.size() ? 0 : iface_towards(me, as_index(seg.ases[j + 1]));
                io.emplace_back(in, out);
                if (k > 0 && j == 0) {
                    rp.hops.back().out_if = out;
                } else {
                    rp.hops.push_back(AsHop{me, in, out, k, j});
                }
            }
            std::vector<source::BeaconHop> beacon;
            for (std::size_t j = 0; j < seg.ases.size(); ++j) {
                const auto [in, out] = io[j];
                source::BeaconHop b;
                b.cons_ingress = seg.cons_dir ? in : out;
                b.cons_egress = seg.cons_dir ? out : in;
                b.exp_time = 255;
                b.key = nodes[as_index(seg.ases[j])].fk;
                beacon.push_back(b);
            }
            if (!seg.cons_dir) std::reverse(beacon.begin(), beacon.end());
            const auto seg_id = std::uint16_t(rng());
            rp.plan.segments.push_back(source::beacon_segment(seg_id, beacon_ts, seg.cons_dir, beacon));
        }
        paths[p.name] = std::move(rp);
    }
}

void Simulator::setup_ledger()
{
    ledger::Pki pki(seed);
    ledger::LedgerConfig cfg;
    cfg.pki_root = pki.root_key();
    cfg.call_fee = sc.call_fee;
    ledger = std::make_unique<ledger::Ledger>(cfg);

    for (const auto& a : sc.accounts) {
        ledger->create_account(a.name, a.balance);
        account_reports[a.name] = AccountReport{a.name, a.balance, a.balance, 0, 0};
    }

    std::int64_t horizon = std::int64_t(std::ceil(sc.duration_ms / 1000.0));
    for (const auto& r : sc.reservations) horizon = std::max(horizon, r.to_s);
    for (auto& n : nodes) {
        const AsSpec& a = *n.spec;
        // AS accounts need funds only for call fees.
        ledger->create_account(n.account, sc.call_fee * 1'000'000);
        const auto creds = pki.enroll(n.ia);
        const auto token = ledger->register_as(n.account, creds.cert, ledger::prove_possession(creds, n.account));
        n.service = std::make_unique<ledger::AsService>(creds, n.account, n.sv);
        if (a.reservable_bps == 0) continue;
        ledger->register_seller(n.account);
        const std::int64_t g = a.granularity_s;
        const std::int64_t span = (horizon + g - 1) / g * g;
        std::vector<std::uint16_t> ifaces{0};
        for (const auto& [iface, _] : n.link_by_if) ifaces.push_back(iface);
        for (std::uint16_t iface : ifaces) {
            for (auto dir : {ledger::Direction::ingress, ledger::Direction::egress}) {
                ledger::AssetAttrs attrs;
                attrs.as = n.ia;
                attrs.bandwidth = a.reservable_bps;
                attrs.start_time = sc.start_time;
                attrs.expiration_time = sc.start_time + span;
                attrs.interface = iface;
                attrs.direction = dir;
                attrs.time_granularity = g;
                attrs.min_bandwidth = a.min_bandwidth_bps;
                const auto asset = ledger->issue(n.account, token, attrs);
                ledger->create_listing(n.account, asset, a.unit_price);
            }
        }
    }
}

void Simulator::procure(const ReservationSpec& r)
{
    ReservationReport rep;
    rep.name = r.name;
    rep.bandwidth_bps = r.bandwidth_bps;
    const ResolvedPath& p = paths.at(r.path);
    const ledger::Want want{sc.start_time + r.from_s, sc.start_time + r.to_s, r.bandwidth_bps};

    auto covering = [&](const AsHop& h, std::uint16_t iface, ledger::Direction dir) -> std::optional<ledger::ObjectId> {
        for (const auto* l : ledger->listings(nodes[h.as].ia, iface, dir)) {
            const auto& a = ledger->asset(l->asset)->attrs;
            if (a.start_time <= want.start_time && want.expiration_time <= a.expiration_time
                && a.bandwidth >= want.bandwidth)
                return l->id;
        }
        return std::nullopt;
    };

    std::vector<ledger::HopOrder> orders;
    std::vector<const AsHop*> reserved;
    std::uint64_t list_value = 0;
    for (const auto& h : p.hops) {
        const std::string& name = sc.ases[h.as].name;
        if (!r.at.empty() && std::find(r.at.begin(), r.at.end(), name) == r.at.end()) continue;
        const auto in = covering(h, h.in_if, ledger::Direction::ingress);
        const auto eg = covering(h, h.out_if, ledger::Direction::egress);
        // Without a covering listing the block still runs and fails on the
        // missing object, leaving the ledger untouched.
        const ledger::ObjectId in_id = in.value_or(0), eg_id = eg.value_or(0);
        for (auto id : {in, eg})
            if (id) list_value += ledger::Ledger::price(ledger->listing(*id)->unit_price, want);
        orders.push_back({in_id, eg_id, want});
        reserved.push_back(&h);
    }

    const auto eph = ledger::BoxKeyPair::from_seed(ledger::derive_seed(seed, "eph-" + r.name));
    const auto result = ledger->execute_atomic(ledger::reserve_path_calls(r.account, orders, eph.pub));
    if (!result.ok) {
        rep.ok = false;
        rep.error = std::string(to_string(*result.error)) + ": " + result.message;
        res_reports.push_back(rep);
        return;
    }
    account_reports[r.account].list_value += list_value;

    auto& creds = credentials[r.name];
    for (std::size_t i = 0; i < reserved.size(); ++i) {
        AsNode& n = nodes[reserved[i]->as];
        n.service->process_pending(*ledger);
        const auto request = result.results[3 * i + 2].ids.at(0);
        const auto* d = ledger->delivery(request);
        if (!d) throw Error(Errc::bad_state, "sim: no delivery for reservation " + r.name);
        const auto cred = ledger::open_delivery(*d, eph, ledger->certificate(n.ia)->box_key);
        creds.emplace_back(reserved[i]->as, cred);
        rep.res_ids[sc.ases[reserved[i]->as].name] = cred.res.res_id;
        rep.bw_codes[sc.ases[reserved[i]->as].name] = cred.res.bw.value;
        const auto granted = wire::decode_bw(cred.res.bw);
        rep.granted_bps = i == 0 ? granted : std::min(rep.granted_bps, granted);
    }
    rep.ok = true;
    res_reports.push_back(rep);
}

void Simulator::setup_flows()
{
    for (const auto& f : sc.flows) {
        FlowRt rt;
        rt.spec = &f;
        rt.rng = stream(seed, "flow-" + f.name);
        rt.rep.name = f.name;
        rt.rep.kind = kind_name(f.kind);
        flow_by_name[f.name] = flows.size();
        if (f.kind != FlowKind::replay_on_reservation_set) {
            rt.path = &paths.at(f.path);
            rt.plan = rt.path->plan;
            rt.start_ns = ms_to_ns(f.start_ms);
            rt.stop_ns = ms_to_ns(std::min(f.stop_ms, sc.duration_ms));
            rt.rep.active_s = double(rt.stop_ns - rt.start_ns) / double(kNanosPerSecond);
            for (const auto& r : f.reservations) {
                auto it = credentials.find(r);
                if (it == credentials.end()) continue; // procurement failed: send best effort
                for (const auto& [as, cred] : it->second) {
                    const auto hop = std::find_if(rt.path->hops.begin(), rt.path->hops.end(),
                        [&](const AsHop& h) { return h.as == as; });
                    if (hop == rt.path->hops.end()) continue;
                    if (hop->in_if != cred.res.ingress || hop->out_if != cred.res.egress)
                        throw Error(Errc::schema, "scenario: reservation " + r + " does not match path "
                                + f.path + " at AS " + sc.ases[as].name);
                    rt.plan.segments[hop->seg].hops[hop->pos].reservation = cred;
                }
            }
        }
        flows.push_back(std::move(rt));
    }
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const FlowSpec& f = *flows[i].spec;
        if (f.kind == FlowKind::replay_on_reservation_set)
            flows[flow_by_name.at(f.observe)].replays.push_back(i);
        else if (flows[i].start_ns < flows[i].stop_ns)
            schedule(flows[i].start_ns, Ev::send, i);
    }
}

void Simulator::schedule(std::int64_t t, Ev kind, std::size_t a, std::size_t b, std::uint16_t iface)
{
    events.push(Event{t, next_seq++, kind, a, b, iface});
}

std::size_t Simulator::alloc_packet()
{
    if (!free_ids.empty()) {
        const std::size_t id = free_ids.back();
        free_ids.pop_back();
        pool[id] = Packet{};
        return id;
    }
    pool.emplace_back();
    return pool.size() - 1;
}

void Simulator::on_send(std::int64_t t, std::size_t fi)
{
    FlowRt& f = flows[fi];
    const Instant now = at(t);
    // Reservations not active right now are left out: the packet then takes
    // the best-effort class at that hop.
    source::PathPlan plan = f.plan;
    for (auto& seg : plan.segments) {
        for (auto& h : seg.hops) {
            if (!h.reservation) continue;
            const auto& res = h.reservation->res;
            const std::int64_t s = std::int64_t(res.res_start) * kNanosPerSecond;
            const std::int64_t e = s + std::int64_t(res.duration) * kNanosPerSecond;
            const std::int64_t n = unix_nanos(now);
            if (n < s || n > e) h.reservation.reset();
        }
    }
    source::BuildOptions opts;
    opts.tag_len = sc.tag_len;

    std::size_t wire_size = 0;
    try {
        wire::Packet pkt = source::build(plan, std::uint16_t(f.spec->packet_bytes), now, f.counter, opts);
        if (f.spec->kind == FlowKind::tag_forgery) {
            for (auto& hop : pkt.path.hops)
                if (auto* fly = std::get_if<wire::FlyoverHopField>(&hop))
                    for (auto& b : fly->agg_mac) b = std::uint8_t(f.rng());
        }
        const std::size_t pid = alloc_packet();
        Packet& p = pool[pid];
        p.bytes = wire::encode_packet(pkt);
        p.flow = fi;
        p.sent_ns = t;
        wire_size = p.bytes.size();
        ++f.rep.sent_pkts;
        f.rep.offered_bytes += wire_size;
        schedule(t, Ev::arrive, f.path->hops.front().as, pid, 0);
    } catch (const Error& e) {
        if (e.code() != Errc::counter_exhausted) throw;
        ++f.rep.refused_pkts;
        wire_size = f.spec->packet_bytes + 100;
    }

    ++f.sent;
    std::int64_t next;
    const double interval_ns = double(wire_size) * 8e9 / double(f.spec->rate_bps);
    if (f.spec->poisson) {
        std::exponential_distribution<double> exp(1.0 / interval_ns);
        next = t + std::max<std::int64_t>(1, std::llround(exp(f.rng)));
    } else {
        // Anchored to the start so rounding does not accumulate.
        next = f.start_ns + std::llround(double(f.sent) * interval_ns);
        next = std::max(next, t + 1);
    }
    if (next < f.stop_ns) schedule(next, Ev::send, fi);
}

void Simulator::drop(std::size_t pid, std::size_t as, const std::string& reason)
{
    Packet& p = pool[pid];
    FlowRt& f = flows[p.flow];
    ++f.rep.dropped_pkts;
    f.rep.dropped_bytes += p.bytes.size();
    if (p.demoted) ++f.rep.demoted_pkts;
    ++hop_counts[sc.ases[as].name][reason];
    free_packet(pid);
}

void Simulator::on_arrive(std::int64_t t, std::size_t as, std::uint16_t iface, std::size_t pid)
{
    AsNode& n = nodes[as];
    const Instant now = at(t + n.offset_ns);
    const router::ForwardDecision d = n.router->process_packet(pool[pid].bytes, now);
    if (d.verdict == router::Verdict::drop) {
        drop(pid, as, std::string(router::to_string(d.reason)));
        return;
    }
    if (d.ingress != iface) {
        drop(pid, as, "ingress_mismatch");
        return;
    }
    ++hop_counts[sc.ases[as].name][std::string(router::to_string(d.reason))];
    Packet& p = pool[pid];
    if (d.flyover) {
        p.flyover = true;
        if (d.verdict != router::Verdict::priority) p.demoted = true;
    }

    if (d.egress == 0) {
        FlowRt& f = flows[p.flow];
        const auto meta = wire::read_meta(std::span<const std::uint8_t>(p.bytes).subspan(wire::kCommonHdrLen));
        if (!source::fully_traversed(meta)) {
            drop(pid, as, "local_delivery_mid_path");
            return;
        }
        if (p.flyover && !p.demoted) {
            ++f.rep.priority_pkts;
            f.rep.priority_bytes += p.bytes.size();
        } else {
            ++f.rep.best_effort_pkts;
            f.rep.best_effort_bytes += p.bytes.size();
        }
        if (p.demoted) ++f.rep.demoted_pkts;
        f.latencies.push_back(t - p.sent_ns);
        f.rep.delivery_s = std::max(f.rep.delivery_s, double(t - f.start_ns) / double(kNanosPerSecond));
        free_packet(pid);
        return;
    }
    auto lit = n.link_by_if.find(d.egress);
    if (lit == n.link_by_if.end()) {
        drop(pid, as, "no_link");
        return;
    }
    const bool priority = d.verdict == router::Verdict::priority;

    // Replay adversaries at this AS copy what they forward for the flow
    // they observe.
    const std::size_t flow = p.flow;
    for (std::size_t ai : flows[flow].replays) {
        FlowRt& adv = flows[ai];
        if (as_index(adv.spec->at) != as) continue;
        for (std::uint32_t c = 0; c < adv.spec->copies; ++c) {
            const std::size_t cid = alloc_packet();
            Packet& copy = pool[cid];
            copy.bytes = pool[pid].bytes;
            copy.flow = ai;
            copy.sent_ns = t;
            copy.flyover = pool[pid].flyover;
            ++adv.rep.sent_pkts;
            adv.rep.offered_bytes += copy.bytes.size();
            if (adv.spec->spread_ms > 0) {
                std::uniform_real_distribution<double> delay(0, adv.spec->spread_ms);
                const std::int64_t at = t + ms_to_ns(delay(adv.rng));
                copy.sent_ns = at;
                schedule(at, Ev::inject, cid, lit->second, priority ? 1 : 0);
            } else {
                enqueue(t, lit->second, cid, priority);
            }
        }
        adv.rep.active_s = flows[flow].rep.active_s;
    }
    enqueue(t, lit->second, pid, priority);
}

void Simulator::enqueue(std::int64_t t, std::size_t li, std::size_t pid, bool priority)
{
    Link& l = links[li];
    const std::size_t size = pool[pid].bytes.size();
    if (priority) {
        l.prio.push_back(pid);
    } else {
        if (l.be_bytes + size > l.buffer_bytes) {
            l.rep.dropped_bytes += size;
            drop(pid, l.from, "queue_overflow");
            return;
        }
        l.be_bytes += size;
        l.be.push_back(pid);
    }
    if (!l.busy) start_tx(t, li);
}

void Simulator::start_tx(std::int64_t t, std::size_t li)
{
    Link& l = links[li];
    std::size_t pid;
    if (!l.prio.empty()) {
        pid = l.prio.front();
        l.prio.pop_front();
        l.rep.priority_bytes += pool[pid].bytes.size();
    } else if (!l.be.empty()) {
        pid = l.be.front();
        l.be.pop_front();
        l.be_bytes -= pool[pid].bytes.size();
        l.rep.best_effort_bytes += pool[pid].bytes.size();
    } else {
        return;
    }
    const auto bits = static_cast<unsigned __int128>(pool[pid].bytes.size()) * 8 * kNanosPerSecond;
    const auto tx = std::int64_t((bits + l.capacity - 1) / l.capacity);
    l.busy = true;
    l.in_flight = pid;
    l.busy_ns += tx;
    schedule(t + tx, Ev::link_done, li);
}

void Simulator::on_link_done(std::int64_t t, std::size_t li)
{
    Link& l = links[li];
    schedule(t + l.delay_ns, Ev::arrive, l.to, l.in_flight, l.to_if);
    l.busy = false;
    start_tx(t, li);
}

MetricsReport Simulator::run()
{
    while (!events.empty()) {
        const Event e = events.top();
        if (e.t > end_ns) break;
        events.pop();
        switch (e.kind) {
        case Ev::send: on_send(e.t, e.a); break;
        case Ev::arrive: on_arrive(e.t, e.a, e.iface, e.b); break;
        case Ev::link_done: on_link_done(e.t, e.a); break;
        case Ev::inject: enqueue(e.t, e.b, e.a, e.iface != 0); break;
        }
    }

    MetricsReport rep;
    rep.scenario = sc.name;
    rep.seed = seed;
    for (auto& f : flows) {
        auto& lat = f.latencies;
        std::sort(lat.begin(), lat.end());
        auto pct = [&](double q) {
            if (lat.empty()) return 0.0;
            const auto idx = std::size_t(std::ceil(q * double(lat.size()))) - 1;
            return double(lat[std::min(idx, lat.size() - 1)]) / double(kNanosPerMs);
        };
        f.rep.latency_p50_ms = pct(0.50);
        f.rep.latency_p90_ms = pct(0.90);
        f.rep.latency_p99_ms = pct(0.99);
        f.rep.latency_max_ms = pct(1.0);
        rep.flows.push_back(f.rep);
    }
    rep.hops = hop_counts;
    for (auto& l : links) {
        l.rep.busy_s = double(l.busy_ns) / double(kNanosPerSecond);
        rep.links.push_back(l.rep);
    }
    for (auto& [name, a] : account_reports) {
        a.final = ledger->balance(name);
        a.spend = a.initial >= a.final ? a.initial - a.final : 0;
        rep.accounts.push_back(a);
    }
    rep.reservations = res_reports;
    rep.ledger_state_hash = ledger::hex(ledger->state_hash());
    return rep;
}

} // namespace

MetricsReport run(const Scenario& sc, std::uint64_t seed)
{
    Simulator sim(sc, seed);
    return sim.run();
}

} // namespace hummingbird::sim
