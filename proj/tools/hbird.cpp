// hbird: scenarios, ledger demo, packet inspection, benchmarks and fixtures.

#include "hummingbird/bench.hpp"
#include "hummingbird/error.hpp"
#include "hummingbird/ledger.hpp"
#include "hummingbird/policing.hpp"
#include "hummingbird/router.hpp"
#include "hummingbird/sim.hpp"
#include "hummingbird/source.hpp"
#include "hummingbird/vectors.hpp"
#include "hummingbird/wire.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace hummingbird;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitAssertions = 1;
constexpr int kExitUsage = 2;

struct Common
{
    std::uint64_t seed = sim::kDefaultSeed;
    bool seed_given = false;
    std::string out;
    std::string format = "table";
};

std::uint64_t effective_seed(const Common& c, std::optional<std::uint64_t> scenario_seed)
{
    if (const char* env = std::getenv("HB_SEED")) {
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(env, &pos, 0);
            if (pos != std::string(env).size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw Error(Errc::invalid_argument, std::string("HB_SEED is not an unsigned integer: ") + env);
        }
    }
    if (c.seed_given) return c.seed;
    return scenario_seed.value_or(sim::kDefaultSeed);
}

void emit(const Common& c, const std::string& text)
{
    if (c.out.empty() || c.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw Error(Errc::invalid_argument, "cannot write " + c.out);
    f << text;
}

// run ------------------------------------------------------------------------

int cmd_run(const Common& c, const std::string& scenario_path)
{
    const sim::Scenario sc = sim::load_scenario(scenario_path);
    const std::uint64_t seed = effective_seed(c, sc.seed);
    const sim::MetricsReport rep = sim::run(sc, seed);
    const auto results = sim::check_assertions(sc, rep);
    bool ok = true;
    std::string text = c.format == "records" ? rep.records() : rep.table();
    if (c.format == "records") {
        for (const auto& r : results) {
            json j{{"type", "assertion"}, {"metric", r.spec.metric}, {"op", r.spec.op},
                {"actual", r.actual}, {"expected", r.expected}, {"pass", r.pass}};
            text += j.dump() + "\n";
        }
    } else if (!results.empty()) {
        text += "\nassertions\n";
        for (const auto& r : results) text += std::string(r.pass ? "  PASS " : "  FAIL ") + r.message + "\n";
    }
    for (const auto& r : results) ok = ok && r.pass;
    emit(c, text);
    return ok ? 0 : kExitAssertions;
}

// ledger-demo ----------------------------------------------------------------

int cmd_ledger_demo(const Common& c)
{
    const std::uint64_t seed = effective_seed(c, std::nullopt);
    ledger::Pki pki(seed);
    ledger::Ledger l(ledger::LedgerConfig{pki.root_key(), 0, "fee-sink"});
    const wire::IsdAs ia{1, 0xff0000000110};
    const auto creds = pki.enroll(ia);
    l.create_account("as", 0);
    l.create_account("alice", 1'000'000'000'000);
    const auto token = l.register_as("as", creds.cert, ledger::prove_possession(creds, "as"));

    // 9:00-10:00 on some day, 10-minute granularity, 100 Mbps, min 5 Mbps.
    const std::int64_t nine = 1'700'035'200 + 9 * 3600;
    ledger::AssetAttrs attrs{ia, 100'000'000, nine, nine + 3600, 1, ledger::Direction::ingress, 600, 5'000'000};
    const auto asset = l.issue("as", token, attrs);
    std::ostringstream notes;
    auto attempt = [&](const std::string& what, auto&& f) {
        try {
            f();
            notes << what << ": ok\n";
        } catch (const Error& e) {
            notes << what << ": rejected (" << to_string(e.code()) << ")\n";
        }
    };
    attempt("split_time 9:25", [&] { l.split_time("as", asset, nine + 25 * 60); });
    const auto [early, late] = l.split_time("as", asset, nine + 10 * 60);
    notes << "split_time 9:10: ok -> 9:00-9:10 and 9:10-10:00\n";
    attempt("split_bandwidth 3 Mbps", [&] { l.split_bandwidth("as", late, 3'000'000); });
    const auto [rest, part] = l.split_bandwidth("as", late, 7'000'000);
    notes << "split_bandwidth 7 Mbps: ok -> " << l.asset(rest)->attrs.bandwidth / 1'000'000 << " Mbps and "
          << l.asset(part)->attrs.bandwidth / 1'000'000 << " Mbps\n";
    const auto fused = l.fuse_bandwidth("as", rest, part);
    notes << "fuse_bandwidth: ok -> " << l.asset(fused)->attrs.bandwidth / 1'000'000 << " Mbps\n";

    l.register_seller("as");
    const auto listing = l.create_listing("as", fused, 1);
    // Egress side for the same window so the pair can be redeemed.
    attrs.interface = 2;
    attrs.direction = ledger::Direction::egress;
    attrs.start_time = nine + 600;
    const auto eg = l.issue("as", token, attrs);
    const auto eg_listing = l.create_listing("as", eg, 1);
    const ledger::Want want{nine + 1200, nine + 1800, 20'000'000};
    const auto eph = ledger::BoxKeyPair::from_seed(ledger::derive_seed(seed, "demo-eph"));
    const auto block = l.execute_atomic(ledger::reserve_path_calls("alice", {{listing, eg_listing, want}}, eph.pub));
    notes << "atomic buy+redeem: " << (block.ok ? "ok" : "failed: " + block.message) << "\n";
    if (block.ok) {
        ledger::AsService svc(creds, "as", crypto::SecretValue{});
        svc.process_pending(l);
        const auto req = block.results[2].ids.at(0);
        const auto cred = ledger::open_delivery(*l.delivery(req), eph, l.certificate(ia)->box_key);
        notes << "delivered: ResID " << cred.res.res_id << ", In " << cred.res.ingress << ", Eg "
              << cred.res.egress << ", BW code " << cred.res.bw.value << " (" << wire::decode_bw(cred.res.bw)
              << " bps), start " << cred.res.res_start << ", duration " << cred.res.duration << " s\n";
        notes << "remaining listings: " << l.all_listings().size() << "\n";
    }
    notes << "alice balance: " << l.balance("alice") << ", AS balance: " << l.balance("as") << "\n";

    std::string text;
    if (c.format == "records") {
        for (const auto& r : l.log()) {
            json j{{"type", "call"}, {"name", r.name}, {"args_digest", r.args_digest},
                {"result", r.result}, {"state_hash", r.state_hash}};
            text += j.dump() + "\n";
        }
    } else {
        text = notes.str() + "\ncall log\n" + l.export_log();
    }
    emit(c, text);
    return 0;
}

// packet ---------------------------------------------------------------------

json hop_json(const wire::Hop& hop)
{
    if (const auto* f = std::get_if<wire::FlyoverHopField>(&hop)) {
        return {{"type", "flyover"}, {"ingress_alert", f->ingress_alert}, {"egress_alert", f->egress_alert},
            {"exp_time", f->exp_time}, {"cons_ingress", f->cons_ingress}, {"cons_egress", f->cons_egress},
            {"agg_mac", vectors::to_hex(f->agg_mac)}, {"res_id", f->res_id}, {"bw", f->bw.value},
            {"bw_bps", wire::decode_bw(f->bw)}, {"res_start_offset", f->res_start_offset},
            {"res_duration", f->res_duration}};
    }
    const auto& h = std::get<wire::HopField>(hop);
    return {{"type", "hop"}, {"ingress_alert", h.ingress_alert}, {"egress_alert", h.egress_alert},
        {"exp_time", h.exp_time}, {"cons_ingress", h.cons_ingress}, {"cons_egress", h.cons_egress},
        {"mac", vectors::to_hex(h.mac)}};
}

json packet_json(const wire::Packet& p)
{
    json infos = json::array();
    for (const auto& i : p.path.infos)
        infos.push_back({{"peering", i.peering}, {"cons_dir", i.cons_dir}, {"seg_id", i.seg_id}, {"timestamp", i.timestamp}});
    json hops = json::array();
    for (const auto& h : p.path.hops) hops.push_back(hop_json(h));
    const auto& m = p.path.meta;
    return {{"hdr_len", p.common.hdr_len}, {"payload_len", p.common.payload_len},
        {"dst", std::to_string(p.common.dst.isd) + "-" + std::to_string(p.common.dst.as)},
        {"meta", {{"curr_inf", m.curr_inf}, {"curr_hf", m.curr_hf},
                     {"seg_len", {m.seg_len[0], m.seg_len[1], m.seg_len[2]}},
                     {"base_timestamp", m.base_timestamp}, {"millis", m.millis_timestamp}, {"counter", m.counter}}},
        {"infos", infos}, {"hops", hops}};
}

wire::Bytes read_packet_arg(const std::string& hex, const std::string& file)
{
    if (!hex.empty()) return vectors::from_hex(hex);
    std::ifstream f(file);
    if (!f) throw Error(Errc::invalid_argument, "cannot read " + file);
    std::stringstream ss;
    ss << f.rdbuf();
    return vectors::from_hex(ss.str());
}

template <typename K>
K key_arg(const std::string& hex, const char* what)
{
    const auto b = vectors::from_hex(hex);
    if (b.size() != 16) throw Error(Errc::invalid_argument, std::string(what) + " must be 16 bytes of hex");
    K k;
    std::copy(b.begin(), b.end(), k.bytes.begin());
    return k;
}

const vectors::Vector& find_vector(const std::vector<vectors::Vector>& vs, const std::string& name)
{
    for (const auto& v : vs)
        if (v.name == name) return v;
    throw Error(Errc::invalid_argument, "unknown vector '" + name + "'");
}

// bench ----------------------------------------------------------------------

int cmd_bench(const Common& c, std::size_t packets, std::uint16_t payload)
{
    const bench::Result res = bench::run(packets, payload);
    const double total = res.stages.back().ns_per_packet;
    const auto priority = res.priority;
    std::string text;
    if (c.format == "records") {
        for (const auto& r : res.stages) {
            json j{{"type", "bench"}, {"stage", r.name}, {"ns_per_packet", r.ns_per_packet}, {"reference_ns", r.reference}};
            text += j.dump() + "\n";
        }
        json s{{"type", "bench_summary"}, {"packets", packets}, {"payload_bytes", payload},
            {"packet_bytes", res.packet_bytes}, {"flyover_pps", 1e9 / total}, {"priority", priority}};
        text += s.dump() + "\n";
    } else {
        std::ostringstream os;
        os << "packets " << packets << ", payload " << payload << " B, packet " << res.packet_bytes << " B\n\n";
        os << std::left << std::setw(32) << "stage" << std::right << std::setw(14) << "ns/packet"
           << std::setw(18) << "reference ns" << "\n";
        os << std::fixed << std::setprecision(1);
        for (const auto& r : res.stages)
            os << std::left << std::setw(32) << r.name << std::right << std::setw(14) << r.ns_per_packet << std::setw(18)
               << r.reference << "\n";
        os << "\nflyover decode+verify: " << std::setprecision(3) << 1e3 / total
           << " Mpps per core (target 1 Mpps, not asserted); " << priority << "/" << packets
           << " priority verdicts\n";
        os << "reference column: published per-stage border-router timings (different hardware)\n";
        text = os.str();
    }
    emit(c, text);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hummingbird reservations: simulation, ledger, packets, benchmarks"};
    app.require_subcommand(1);
    Common common;
    auto* seed_opt = app.add_option("--seed", common.seed, "RNG seed (HB_SEED overrides)");
    app.add_option("--out", common.out, "Output file (default stdout)");
    app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"table", "records"}));
    app.fallthrough();

    std::string scenario;
    auto* run = app.add_subcommand("run", "Run a scenario and check its assertions");
    run->add_option("--scenario", scenario, "Scenario JSON file")->required();

    auto* demo = app.add_subcommand("ledger-demo", "Asset splitting, purchase and redemption walkthrough");

    auto* packet = app.add_subcommand("packet", "Encode, decode or verify packets");
    packet->require_subcommand(1);
    std::string vector_name, hex, file, sv_hex, fwd_hex;
    std::int64_t now_ms = 0;
    std::size_t tag_len = crypto::kDefaultTagLen;
    auto* encode = packet->add_subcommand("encode", "Print a fixture vector as hex");
    encode->add_option("--vector", vector_name, "Vector name (see 'vectors')")->required();
    auto* decode = packet->add_subcommand("decode", "Decode a hex packet");
    auto* hex_opt = decode->add_option("--hex", hex, "Packet as hex");
    auto* file_opt = decode->add_option("--file", file, "File with hex packet");
    hex_opt->excludes(file_opt);
    auto* verify = packet->add_subcommand("verify", "Run the router pipeline on a hex packet");
    auto* vhex = verify->add_option("--hex", hex, "Packet as hex");
    auto* vfile = verify->add_option("--file", file, "File with hex packet");
    vhex->excludes(vfile);
    auto* vvec = verify->add_option("--vector", vector_name, "Use a fixture's packet, keys and clock");
    auto* vsv = verify->add_option("--sv", sv_hex, "AS secret value (32 hex digits)");
    auto* vfwd = verify->add_option("--fwd-key", fwd_hex, "AS hop-field key (32 hex digits)");
    auto* vnow = verify->add_option("--now-ms", now_ms, "Router clock, unix milliseconds");
    verify->add_option("--tag-len", tag_len, "Flyover tag length")->check(CLI::Range(1, 6));
    vvec->excludes(vsv)->excludes(vfwd);

    std::size_t packets = 200'000;
    std::uint16_t payload = 1500;
    auto* bench = app.add_subcommand("bench", "Per-stage router timings");
    bench->add_option("--packets", packets, "Iterations per stage");
    bench->add_option("--payload", payload, "Payload bytes");

    std::string fixtures_dir = "tests/fixtures";
    auto* vec = app.add_subcommand("vectors", "Regenerate fixture files");
    vec->add_option("--dir", fixtures_dir, "Fixture directory");

    CLI11_PARSE(app, argc, argv);
    common.seed_given = seed_opt->count() > 0;

    try {
        if (run->parsed()) return cmd_run(common, scenario);
        if (demo->parsed()) return cmd_ledger_demo(common);
        if (bench->parsed()) return cmd_bench(common, packets, payload);
        if (vec->parsed()) {
            vectors::write_fixtures(fixtures_dir);
            for (const auto& v : vectors::all()) std::cout << fixtures_dir << "/" << v.name << ".hex\n";
            std::cout << fixtures_dir << "/vectors.json\n";
            return 0;
        }
        if (encode->parsed()) {
            const auto vs = vectors::all();
            emit(common, vectors::to_hex(find_vector(vs, vector_name).packet) + "\n");
            return 0;
        }
        if (decode->parsed()) {
            if (hex.empty() && file.empty()) throw CLI::RequiredError("--hex or --file");
            const auto pkt = wire::decode_packet(read_packet_arg(hex, file));
            emit(common, packet_json(pkt).dump(common.format == "records" ? -1 : 2) + "\n");
            return 0;
        }
        if (verify->parsed()) {
            router::RouterConfig cfg;
            cfg.tag_len = tag_len;
            wire::Bytes pkt;
            Instant now;
            if (!vector_name.empty()) {
                const auto vs = vectors::all();
                const auto& v = find_vector(vs, vector_name);
                pkt = hex.empty() && file.empty() ? v.packet : read_packet_arg(hex, file);
                cfg.sv = v.sv;
                cfg.scion_key = v.fwd;
                now = from_unix_millis(vnow->count() ? now_ms : v.now_ms);
            } else {
                if (hex.empty() && file.empty()) throw CLI::RequiredError("--hex or --file");
                if (sv_hex.empty() || fwd_hex.empty() || !vnow->count())
                    throw CLI::RequiredError("--sv, --fwd-key and --now-ms (or --vector)");
                pkt = read_packet_arg(hex, file);
                cfg.sv = key_arg<crypto::SecretValue>(sv_hex, "--sv");
                cfg.scion_key = key_arg<crypto::ForwardingKey>(fwd_hex, "--fwd-key");
                now = from_unix_millis(now_ms);
            }
            router::BorderRouter router(cfg);
            const auto d = router.process_packet(pkt, now);
            json j{{"verdict", std::string(router::to_string(d.verdict))},
                {"reason", std::string(router::to_string(d.reason))}, {"ingress", d.ingress},
                {"egress", d.egress}, {"flyover", d.flyover}, {"res_id", d.res_id}};
            if (common.format == "records") {
                emit(common, j.dump() + "\n");
            } else {
                std::ostringstream os;
                os << "verdict " << j["verdict"].get<std::string>() << "\nreason  "
                   << j["reason"].get<std::string>() << "\ningress " << d.ingress << "\negress  " << d.egress
                   << "\nflyover " << (d.flyover ? "yes" : "no") << "\nres_id  " << d.res_id << "\n";
                emit(common, os.str());
            }
            return 0;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "hbird: " << e.what() << " [" << to_string(e.code()) << "]\n";
        return kExitUsage;
    }
    return 0;
}
