#include "hummingbird/error.hpp"
#include "hummingbird/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace hummingbird::sim {

namespace {

using json = nlohmann::json;

[[noreturn]] void schema(const std::string& what)
{
    throw Error(Errc::schema, "scenario: " + what);
}

// Typed access to one JSON object; unknown keys are rejected by done().
class Fields
{
public:
    Fields(const json& j, std::string ctx) : j(j), ctx(std::move(ctx))
    {
        if (!j.is_object()) schema(this->ctx + ": expected an object");
    }

    bool has(const char* key) const { return j.contains(key); }

    template <typename T>
    T req(const char* key)
    {
        seen.insert(key);
        if (!j.contains(key)) schema(ctx + ": missing field '" + key + "'");
        return convert<T>(j.at(key), ctx + "." + key);
    }

    template <typename T>
    T opt(const char* key, T def)
    {
        seen.insert(key);
        if (!j.contains(key)) return def;
        return convert<T>(j.at(key), ctx + "." + key);
    }

    const json* array(const char* key, bool required)
    {
        seen.insert(key);
        if (!j.contains(key)) {
            if (required) schema(ctx + ": missing field '" + key + "'");
            return nullptr;
        }
        if (!j.at(key).is_array()) schema(ctx + "." + key + ": expected an array");
        return &j.at(key);
    }

    void done() const
    {
        for (const auto& [k, _] : j.items())
            if (!seen.contains(k)) schema(ctx + ": unknown field '" + k + "'");
    }

    template <typename T>
    static T convert(const json& v, const std::string& where)
    {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) schema(where + ": expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) schema(where + ": expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) schema(where + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) {
                    const auto u = v.get<std::uint64_t>();
                    if (u > std::numeric_limits<T>::max()) schema(where + ": value out of range");
                    return T(u);
                }
                const auto s = v.get<std::int64_t>();
                if (s < 0 || std::uint64_t(s) > std::numeric_limits<T>::max())
                    schema(where + ": value out of range");
                return T(s);
            } else {
                if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::uint64_t(std::numeric_limits<T>::max()))
                    schema(where + ": value out of range");
                const auto s = v.get<std::int64_t>();
                if (s < std::numeric_limits<T>::min() || s > std::numeric_limits<T>::max())
                    schema(where + ": value out of range");
                return T(s);
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) schema(where + ": expected a number");
            const double d = v.get<double>();
            if (!std::isfinite(d)) schema(where + ": expected a finite number");
            return T(d);
        } else {
            static_assert(sizeof(T) == 0, "unsupported field type");
        }
    }

private:
    const json& j;
    std::string ctx;
    std::set<std::string> seen;
};

std::vector<std::string> string_list(const json& arr, const std::string& ctx)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < arr.size(); ++i)
        out.push_back(Fields::convert<std::string>(arr[i], ctx + "[" + std::to_string(i) + "]"));
    return out;
}

FlowKind parse_kind(const std::string& s, const std::string& ctx)
{
    if (s == "flow") return FlowKind::flow;
    if (s == "best_effort_flood") return FlowKind::best_effort_flood;
    if (s == "tag_forgery") return FlowKind::tag_forgery;
    if (s == "overuse") return FlowKind::overuse;
    if (s == "replay_on_reservation_set") return FlowKind::replay_on_reservation_set;
    schema(ctx + ": unknown adversary kind '" + s + "'");
}

FlowSpec parse_flow(const json& j, const std::string& ctx, bool adversary)
{
    Fields f(j, ctx);
    FlowSpec fl;
    fl.name = f.req<std::string>("name");
    fl.kind = adversary ? parse_kind(f.req<std::string>("kind"), ctx) : FlowKind::flow;
    if (fl.kind == FlowKind::replay_on_reservation_set) {
        fl.at = f.req<std::string>("at");
        fl.observe = f.req<std::string>("observe");
        fl.copies = f.req<std::uint32_t>("copies");
        fl.spread_ms = f.opt<double>("spread_ms", 0);
    } else {
        fl.path = f.req<std::string>("path");
        fl.rate_bps = f.req<std::uint64_t>("rate_bps");
        fl.packet_bytes = f.opt<std::uint32_t>("packet_bytes", 1000);
        fl.start_ms = f.opt<double>("start_ms", 0);
        fl.stop_ms = f.req<double>("stop_ms");
        fl.poisson = f.opt<std::string>("arrival", "cbr") == "poisson";
        if (j.contains("arrival") && j.at("arrival") != "cbr" && j.at("arrival") != "poisson")
            schema(ctx + ".arrival: expected 'cbr' or 'poisson'");
        if (const json* r = f.array("reservations", false)) fl.reservations = string_list(*r, ctx + ".reservations");
    }
    f.done();
    return fl;
}

template <typename T, typename Get>
void require_unique(const std::vector<T>& items, Get name, const std::string& what)
{
    std::set<std::string> names;
    for (const auto& it : items)
        if (!names.insert(name(it)).second) schema("duplicate " + what + " name '" + name(it) + "'");
}

bool linked(const Scenario& sc, const std::string& a, const std::string& b)
{
    return std::any_of(sc.links.begin(), sc.links.end(), [&](const LinkSpec& l) {
        return (l.a == a && l.b == b) || (l.a == b && l.b == a);
    });
}

void validate(const Scenario& sc)
{
    auto name_of = [](const auto& x) { return x.name; };
    require_unique(sc.ases, name_of, "AS");
    require_unique(sc.accounts, name_of, "account");
    require_unique(sc.paths, name_of, "path");
    require_unique(sc.reservations, name_of, "reservation");
    require_unique(sc.flows, name_of, "flow/adversary");

    std::set<std::string> ases, accounts, paths, reservations, flows;
    for (const auto& a : sc.ases) ases.insert(a.name);
    for (const auto& a : sc.accounts) accounts.insert(a.name);
    for (const auto& p : sc.paths) paths.insert(p.name);
    for (const auto& r : sc.reservations) reservations.insert(r.name);
    for (const auto& f : sc.flows) flows.insert(f.name);

    if (sc.duration_ms <= 0) schema("duration_ms must be positive");
    if (sc.drain_ms < 0 || sc.delta_ms < 0 || sc.max_age_ms < 0 || sc.burst_ms < 0)
        schema("drain_ms, delta_ms, max_age_ms and burst_ms must be non-negative");
    if (sc.tag_len < 1 || sc.tag_len > 6) schema("tag_len must be in [1, 6]");
    if (sc.policer_size == 0) schema("policer_size must be positive");
    if (sc.start_time < 0 || sc.start_time > 0xffffffffLL) schema("start_time must fit in 32 bits");

    for (const auto& a : sc.ases) {
        if (std::abs(a.clock_offset_ms) > sc.delta_ms)
            schema("AS " + a.name + ": clock offset exceeds delta_ms");
        if (a.granularity_s <= 0) schema("AS " + a.name + ": granularity_s must be positive");
        if (a.as >= (1ull << 48)) schema("AS " + a.name + ": AS number exceeds 48 bits");
    }
    std::set<std::pair<std::string, std::uint16_t>> ifaces;
    for (const auto& l : sc.links) {
        const std::string id = "link " + l.a + "-" + l.b;
        if (!ases.contains(l.a) || !ases.contains(l.b)) schema(id + ": unknown AS");
        if (l.a == l.b) schema(id + ": self link");
        if (l.a_if == 0 || l.b_if == 0) schema(id + ": interface 0 is reserved for the local host");
        if (!ifaces.insert({l.a, l.a_if}).second || !ifaces.insert({l.b, l.b_if}).second)
            schema(id + ": interface id used twice");
        if (l.capacity_bps == 0) schema(id + ": capacity_bps must be positive");
        if (l.delay_ms < 0 || l.buffer_ms < 0) schema(id + ": negative delay or buffer");
    }
    for (const auto& p : sc.paths) {
        const std::string id = "path " + p.name;
        if (p.segments.empty() || p.segments.size() > 3) schema(id + ": needs 1 to 3 segments");
        std::size_t total = 0;
        for (std::size_t k = 0; k < p.segments.size(); ++k) {
            const auto& s = p.segments[k].ases;
            if (s.empty()) schema(id + ": empty segment");
            if (k > 0 && (p.segments[k - 1].ases.back() != s.front()))
                schema(id + ": segment " + std::to_string(k) + " must start at the previous segment's last AS");
            if (k > 0 && s.size() < 2) schema(id + ": a joined segment needs at least 2 ASes");
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (!ases.contains(s[i])) schema(id + ": unknown AS " + s[i]);
                if (i > 0 && !linked(sc, s[i - 1], s[i])) schema(id + ": no link " + s[i - 1] + "-" + s[i]);
            }
            total += s.size() - (k > 0 ? 1 : 0);
        }
        if (total < 2) schema(id + ": needs at least 2 ASes");
    }
    for (const auto& r : sc.reservations) {
        const std::string id = "reservation " + r.name;
        if (!accounts.contains(r.account)) schema(id + ": unknown account " + r.account);
        if (!paths.contains(r.path)) schema(id + ": unknown path " + r.path);
        const auto& p = *std::find_if(sc.paths.begin(), sc.paths.end(), [&](const PathSpec& x) { return x.name == r.path; });
        for (const auto& a : r.at) {
            const bool on_path = std::any_of(p.segments.begin(), p.segments.end(), [&](const SegmentSpec& s) {
                return std::find(s.ases.begin(), s.ases.end(), a) != s.ases.end();
            });
            if (!on_path) schema(id + ": AS " + a + " is not on path " + r.path);
        }
        if (r.bandwidth_bps == 0) schema(id + ": bandwidth_bps must be positive");
        if (r.from_s < 0 || r.to_s <= r.from_s) schema(id + ": need 0 <= from_s < to_s");
        if (r.to_s - r.from_s > 0xffff) schema(id + ": duration exceeds 65535 s");
    }
    for (const auto& f : sc.flows) {
        const std::string id = "flow " + f.name;
        if (f.kind == FlowKind::replay_on_reservation_set) {
            if (!ases.contains(f.at)) schema(id + ": unknown AS " + f.at);
            if (!flows.contains(f.observe)) schema(id + ": unknown observed flow " + f.observe);
            if (f.copies == 0) schema(id + ": copies must be positive");
            if (f.spread_ms < 0 || f.spread_ms > sc.max_age_ms)
                schema(id + ": spread_ms must lie in [0, max_age_ms]");
            continue;
        }
        if (!paths.contains(f.path)) schema(id + ": unknown path " + f.path);
        if (f.rate_bps == 0) schema(id + ": rate_bps must be positive");
        if (f.packet_bytes > 60000) schema(id + ": packet_bytes too large");
        if (f.start_ms < 0 || f.stop_ms <= f.start_ms) schema(id + ": need 0 <= start_ms < stop_ms");
        for (const auto& r : f.reservations)
            if (!reservations.contains(r)) schema(id + ": unknown reservation " + r);
    }
    static const std::set<std::string> ops{"==", "!=", "<", "<=", ">", ">="};
    for (std::size_t i = 0; i < sc.assertions.size(); ++i) {
        const auto& a = sc.assertions[i];
        const std::string id = "assertions[" + std::to_string(i) + "]";
        if (!ops.contains(a.op)) schema(id + ": unknown op '" + a.op + "'");
        if (a.value.has_value() == a.ref.has_value()) schema(id + ": need exactly one of value and ref");
    }
}

double percentile_or_zero(double v) { return std::isfinite(v) ? v : 0; }

} // namespace

Scenario parse_scenario(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        schema(std::string("invalid JSON: ") + e.what());
    }
    Fields f(root, "scenario");
    Scenario sc;
    sc.name = f.req<std::string>("name");
    if (root.contains("seed")) sc.seed = f.req<std::uint64_t>("seed");
    sc.start_time = f.opt<std::int64_t>("start_time", sc.start_time);
    sc.duration_ms = f.req<double>("duration_ms");
    sc.drain_ms = f.opt<double>("drain_ms", sc.drain_ms);
    sc.delta_ms = f.opt<double>("delta_ms", sc.delta_ms);
    sc.max_age_ms = f.opt<double>("max_age_ms", sc.max_age_ms);
    sc.burst_ms = f.opt<double>("burst_ms", sc.burst_ms);
    sc.tag_len = f.opt<std::uint32_t>("tag_len", sc.tag_len);
    sc.call_fee = f.opt<std::uint64_t>("call_fee", sc.call_fee);
    sc.policer_size = f.opt<std::uint32_t>("policer_size", sc.policer_size);

    const json& ases = *f.array("ases", true);
    for (std::size_t i = 0; i < ases.size(); ++i) {
        Fields a(ases[i], "ases[" + std::to_string(i) + "]");
        AsSpec s;
        s.name = a.req<std::string>("name");
        s.isd = a.opt<std::uint16_t>("isd", 1);
        s.as = a.req<std::uint64_t>("as");
        s.clock_offset_ms = a.opt<double>("clock_offset_ms", 0);
        s.reservable_bps = a.opt<std::uint64_t>("reservable_bps", 0);
        s.unit_price = a.opt<std::uint64_t>("unit_price", 1);
        s.min_bandwidth_bps = a.opt<std::uint64_t>("min_bandwidth_bps", 0);
        s.granularity_s = a.opt<std::int64_t>("granularity_s", 1);
        a.done();
        sc.ases.push_back(s);
    }
    const json& links = *f.array("links", true);
    for (std::size_t i = 0; i < links.size(); ++i) {
        Fields l(links[i], "links[" + std::to_string(i) + "]");
        LinkSpec s;
        s.a = l.req<std::string>("a");
        s.a_if = l.req<std::uint16_t>("a_if");
        s.b = l.req<std::string>("b");
        s.b_if = l.req<std::uint16_t>("b_if");
        s.capacity_bps = l.req<std::uint64_t>("capacity_bps");
        s.delay_ms = l.opt<double>("delay_ms", 0);
        s.buffer_ms = l.opt<double>("buffer_ms", 50);
        l.done();
        sc.links.push_back(s);
    }
    if (const json* accts = f.array("accounts", false)) {
        for (std::size_t i = 0; i < accts->size(); ++i) {
            Fields a((*accts)[i], "accounts[" + std::to_string(i) + "]");
            AccountSpec s;
            s.name = a.req<std::string>("name");
            s.balance = a.req<std::uint64_t>("balance");
            a.done();
            sc.accounts.push_back(s);
        }
    }
    const json& paths = *f.array("paths", true);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const std::string ctx = "paths[" + std::to_string(i) + "]";
        Fields p(paths[i], ctx);
        PathSpec s;
        s.name = p.req<std::string>("name");
        if (paths[i].contains("ases") == paths[i].contains("segments"))
            schema(ctx + ": need exactly one of 'ases' and 'segments'");
        if (const json* a = p.array("ases", false)) {
            s.segments.push_back(SegmentSpec{string_list(*a, ctx + ".ases"), true});
        } else {
            const json& segs = *p.array("segments", true);
            for (std::size_t k = 0; k < segs.size(); ++k) {
                const std::string sctx = ctx + ".segments[" + std::to_string(k) + "]";
                Fields sf(segs[k], sctx);
                SegmentSpec seg;
                seg.ases = string_list(*sf.array("ases", true), sctx + ".ases");
                seg.cons_dir = sf.opt<bool>("cons_dir", true);
                sf.done();
                s.segments.push_back(seg);
            }
        }
        p.done();
        sc.paths.push_back(s);
    }
    if (const json* res = f.array("reservations", false)) {
        for (std::size_t i = 0; i < res->size(); ++i) {
            const std::string ctx = "reservations[" + std::to_string(i) + "]";
            Fields r((*res)[i], ctx);
            ReservationSpec s;
            s.name = r.req<std::string>("name");
            s.account = r.req<std::string>("account");
            s.path = r.req<std::string>("path");
            if (const json* at = r.array("at", false)) s.at = string_list(*at, ctx + ".at");
            s.bandwidth_bps = r.req<std::uint64_t>("bandwidth_bps");
            s.from_s = r.req<std::int64_t>("from_s");
            s.to_s = r.req<std::int64_t>("to_s");
            r.done();
            sc.reservations.push_back(s);
        }
    }
    if (const json* flows = f.array("flows", false))
        for (std::size_t i = 0; i < flows->size(); ++i)
            sc.flows.push_back(parse_flow((*flows)[i], "flows[" + std::to_string(i) + "]", false));
    if (const json* adv = f.array("adversaries", false))
        for (std::size_t i = 0; i < adv->size(); ++i)
            sc.flows.push_back(parse_flow((*adv)[i], "adversaries[" + std::to_string(i) + "]", true));
    if (const json* as = f.array("assertions", false)) {
        for (std::size_t i = 0; i < as->size(); ++i) {
            Fields a((*as)[i], "assertions[" + std::to_string(i) + "]");
            AssertionSpec s;
            s.metric = a.req<std::string>("metric");
            s.op = a.req<std::string>("op");
            if ((*as)[i].contains("value")) s.value = a.req<double>("value");
            if ((*as)[i].contains("ref")) s.ref = a.req<std::string>("ref");
            s.factor = a.opt<double>("factor", 1.0);
            a.done();
            sc.assertions.push_back(s);
        }
    }
    f.done();
    validate(sc);
    return sc;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) schema("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

// Report ---------------------------------------------------------------------

std::map<std::string, double> MetricsReport::metrics() const
{
    std::map<std::string, double> m;
    auto ratio = [](double a, double b) { return b > 0 ? a / b : 0.0; };
    for (const auto& f : flows) {
        const std::string p = "flow." + f.name + ".";
        m[p + "sent_pkts"] = double(f.sent_pkts);
        m[p + "offered_bytes"] = double(f.offered_bytes);
        m[p + "priority_pkts"] = double(f.priority_pkts);
        m[p + "priority_bytes"] = double(f.priority_bytes);
        m[p + "best_effort_pkts"] = double(f.best_effort_pkts);
        m[p + "best_effort_bytes"] = double(f.best_effort_bytes);
        m[p + "dropped_pkts"] = double(f.dropped_pkts);
        m[p + "dropped_bytes"] = double(f.dropped_bytes);
        m[p + "demoted_pkts"] = double(f.demoted_pkts);
        m[p + "refused_pkts"] = double(f.refused_pkts);
        m[p + "priority_fraction"] = ratio(double(f.priority_bytes), double(f.offered_bytes));
        m[p + "delivered_fraction"] =
            ratio(double(f.priority_bytes + f.best_effort_bytes), double(f.offered_bytes));
        m[p + "demoted_fraction"] = ratio(double(f.demoted_pkts), double(f.sent_pkts));
        // Queued packets drain after the flow stops, so goodput spans until the last delivery.
        const double span = std::max(f.active_s, f.delivery_s);
        m[p + "priority_goodput_bps"] = ratio(8.0 * double(f.priority_bytes), span);
        m[p + "best_effort_goodput_bps"] = ratio(8.0 * double(f.best_effort_bytes), span);
        m[p + "goodput_bps"] = ratio(8.0 * double(f.priority_bytes + f.best_effort_bytes), span);
        m[p + "offered_bps"] = ratio(8.0 * double(f.offered_bytes), f.active_s);
        m[p + "latency_p50_ms"] = percentile_or_zero(f.latency_p50_ms);
        m[p + "latency_p90_ms"] = percentile_or_zero(f.latency_p90_ms);
        m[p + "latency_p99_ms"] = percentile_or_zero(f.latency_p99_ms);
        m[p + "latency_max_ms"] = percentile_or_zero(f.latency_max_ms);
    }
    for (const auto& [as, reasons] : hops)
        for (const auto& [r, n] : reasons) m["hop." + as + "." + r] = double(n);
    for (const auto& l : links) {
        const std::string p = "link." + l.from + "-" + l.to + ".";
        m[p + "capacity_bps"] = double(l.capacity_bps);
        m[p + "priority_bytes"] = double(l.priority_bytes);
        m[p + "best_effort_bytes"] = double(l.best_effort_bytes);
        m[p + "dropped_bytes"] = double(l.dropped_bytes);
        m[p + "busy_s"] = l.busy_s;
    }
    for (const auto& a : accounts) {
        const std::string p = "account." + a.name + ".";
        m[p + "initial"] = double(a.initial);
        m[p + "final"] = double(a.final);
        m[p + "spend"] = double(a.spend);
        m[p + "list_value"] = double(a.list_value);
    }
    for (const auto& r : reservations) {
        const std::string p = "reservation." + r.name + ".";
        m[p + "ok"] = r.ok ? 1 : 0;
        m[p + "bandwidth_bps"] = double(r.bandwidth_bps);
        m[p + "granted_bps"] = double(r.granted_bps);
    }
    return m;
}

std::optional<double> MetricsReport::metric(const std::string& name) const
{
    const auto m = metrics();
    auto it = m.find(name);
    if (it == m.end()) {
        // Reason counters that never fired are absent; read them as zero.
        if (name.rfind("hop.", 0) == 0) return 0.0;
        return std::nullopt;
    }
    return it->second;
}

std::string MetricsReport::records() const
{
    std::string out;
    auto emit = [&](json j) { out += j.dump() + "\n"; };
    emit({{"type", "summary"}, {"scenario", scenario}, {"seed", seed}, {"ledger_state_hash", ledger_state_hash}});
    for (const auto& f : flows) {
        emit({{"type", "flow"}, {"name", f.name}, {"kind", f.kind}, {"sent_pkts", f.sent_pkts},
            {"offered_bytes", f.offered_bytes}, {"priority_pkts", f.priority_pkts},
            {"priority_bytes", f.priority_bytes}, {"best_effort_pkts", f.best_effort_pkts},
            {"best_effort_bytes", f.best_effort_bytes}, {"dropped_pkts", f.dropped_pkts},
            {"dropped_bytes", f.dropped_bytes}, {"demoted_pkts", f.demoted_pkts},
            {"refused_pkts", f.refused_pkts}, {"active_s", f.active_s}, {"delivery_s", f.delivery_s},
            {"latency_p50_ms", f.latency_p50_ms}, {"latency_p90_ms", f.latency_p90_ms},
            {"latency_p99_ms", f.latency_p99_ms}, {"latency_max_ms", f.latency_max_ms}});
    }
    for (const auto& [as, reasons] : hops) emit({{"type", "hop"}, {"as", as}, {"reasons", reasons}});
    for (const auto& l : links) {
        emit({{"type", "link"}, {"from", l.from}, {"to", l.to}, {"capacity_bps", l.capacity_bps},
            {"priority_bytes", l.priority_bytes}, {"best_effort_bytes", l.best_effort_bytes},
            {"dropped_bytes", l.dropped_bytes}, {"busy_s", l.busy_s}});
    }
    for (const auto& a : accounts) {
        emit({{"type", "account"}, {"name", a.name}, {"initial", a.initial}, {"final", a.final},
            {"spend", a.spend}, {"list_value", a.list_value}});
    }
    for (const auto& r : reservations) {
        emit({{"type", "reservation"}, {"name", r.name}, {"ok", r.ok}, {"error", r.error},
            {"bandwidth_bps", r.bandwidth_bps}, {"granted_bps", r.granted_bps}, {"res_ids", r.res_ids}, {"bw_codes", r.bw_codes}});
    }
    return out;
}

std::string MetricsReport::table() const
{
    std::ostringstream os;
    os << "scenario " << scenario << "  seed " << seed << "\n\n";
    os << std::left << std::setw(16) << "flow" << std::setw(26) << "kind" << std::right
       << std::setw(10) << "sent" << std::setw(10) << "prio" << std::setw(10) << "be"
       << std::setw(10) << "dropped" << std::setw(10) << "demoted" << std::setw(12) << "prio Mbps"
       << std::setw(12) << "p50 ms" << std::setw(12) << "p99 ms" << "\n";
    os << std::fixed << std::setprecision(3);
    for (const auto& f : flows) {
        const double span = std::max(f.active_s, f.delivery_s);
        const double mbps = span > 0 ? 8.0 * double(f.priority_bytes) / span / 1e6 : 0;
        os << std::left << std::setw(16) << f.name << std::setw(26) << f.kind << std::right
           << std::setw(10) << f.sent_pkts << std::setw(10) << f.priority_pkts << std::setw(10)
           << f.best_effort_pkts << std::setw(10) << f.dropped_pkts << std::setw(10) << f.demoted_pkts
           << std::setw(12) << mbps << std::setw(12) << f.latency_p50_ms << std::setw(12)
           << f.latency_p99_ms << "\n";
    }
    os << "\nper-hop decisions\n";
    for (const auto& [as, reasons] : hops) {
        os << "  " << std::left << std::setw(10) << as;
        for (const auto& [r, n] : reasons) os << " " << r << "=" << n;
        os << "\n";
    }
    os << "\nlinks\n";
    for (const auto& l : links) {
        os << "  " << std::left << std::setw(12) << (l.from + "->" + l.to) << std::right
           << " prio=" << l.priority_bytes << " be=" << l.best_effort_bytes
           << " dropped=" << l.dropped_bytes << " busy_s=" << l.busy_s << "\n";
    }
    if (!accounts.empty()) {
        os << "\naccounts\n";
        for (const auto& a : accounts)
            os << "  " << std::left << std::setw(12) << a.name << std::right << " spend=" << a.spend
               << " list_value=" << a.list_value << " final=" << a.final << "\n";
    }
    if (!reservations.empty()) {
        os << "\nreservations\n";
        for (const auto& r : reservations) {
            os << "  " << std::left << std::setw(12) << r.name << (r.ok ? " ok" : " failed: " + r.error);
            for (const auto& [as, id] : r.res_ids) os << " " << as << ":" << id;
            os << "\n";
        }
    }
    return os.str();
}

std::vector<AssertionResult> check_assertions(const Scenario& sc, const MetricsReport& report)
{
    std::vector<AssertionResult> out;
    const auto m = report.metrics();
    auto lookup = [&](const std::string& name) -> std::optional<double> {
        auto it = m.find(name);
        if (it != m.end()) return it->second;
        if (name.rfind("hop.", 0) == 0) return 0.0;
        return std::nullopt;
    };
    for (const auto& a : sc.assertions) {
        AssertionResult r;
        r.spec = a;
        const auto actual = lookup(a.metric);
        std::optional<double> expected = a.value;
        if (a.ref) {
            const auto ref = lookup(*a.ref);
            expected = ref ? std::optional<double>(a.factor * *ref) : std::nullopt;
        }
        if (!actual || !expected) {
            r.pass = false;
            r.message = "unknown metric " + (actual ? *a.ref : a.metric);
            out.push_back(r);
            continue;
        }
        r.actual = *actual;
        r.expected = *expected;
        const double x = r.actual, y = r.expected;
        if (a.op == "==") r.pass = x == y;
        else if (a.op == "!=") r.pass = x != y;
        else if (a.op == "<") r.pass = x < y;
        else if (a.op == "<=") r.pass = x <= y;
        else if (a.op == ">") r.pass = x > y;
        else r.pass = x >= y;
        std::ostringstream os;
        os << std::setprecision(12) << a.metric << " = " << x << " " << a.op << " " << y;
        r.message = os.str();
        out.push_back(r);
    }
    return out;
}

} // namespace hummingbird::sim
