#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

/// Deterministic discrete-event simulator: ASes with border routers, directed
/// links with strict-priority queues, sources, the ledger and adversaries.
namespace hummingbird::sim {

struct AsSpec
{
    std::string name;
    std::uint16_t isd = 1;
    std::uint64_t as = 0;
    double clock_offset_ms = 0;
    std::uint64_t reservable_bps = 0; // per interface and direction
    std::uint64_t unit_price = 1;
    std::uint64_t min_bandwidth_bps = 0;
    std::int64_t granularity_s = 1;
};

struct LinkSpec
{
    std::string a;
    std::uint16_t a_if = 0;
    std::string b;
    std::uint16_t b_if = 0;
    std::uint64_t capacity_bps = 0;
    double delay_ms = 0;
    double buffer_ms = 50; // best-effort buffer in units of capacity
};

struct AccountSpec
{
    std::string name;
    std::uint64_t balance = 0;
};

struct SegmentSpec
{
    std::vector<std::string> ases; // traversal order
    bool cons_dir = true;
};

/// Consecutive segments share their boundary AS.
struct PathSpec
{
    std::string name;
    std::vector<SegmentSpec> segments;
};

struct ReservationSpec
{
    std::string name;
    std::string account;
    std::string path;
    std::vector<std::string> at; // reserved ASes; empty means every AS on the path
    std::uint64_t bandwidth_bps = 0;
    std::int64_t from_s = 0; // relative to the scenario start
    std::int64_t to_s = 0;
};

enum class FlowKind
{
    flow,
    best_effort_flood,
    tag_forgery,
    overuse,
    replay_on_reservation_set,
};

struct FlowSpec
{
    std::string name;
    FlowKind kind = FlowKind::flow;
    std::string path;
    std::uint64_t rate_bps = 0; // on-wire bytes, header included
    std::uint32_t packet_bytes = 1000; // payload
    double start_ms = 0;
    double stop_ms = 0;
    std::vector<std::string> reservations;
    bool poisson = false;
    // replay_on_reservation_set only
    std::string at;
    std::string observe;
    std::uint32_t copies = 0;
    double spread_ms = 0; // each copy is delayed uniformly in [0, spread_ms]
};

struct AssertionSpec
{
    std::string metric;
    std::string op; // ==, !=, <, <=, >, >=
    std::optional<double> value;
    std::optional<std::string> ref; // compare against factor * metric(ref)
    double factor = 1;
};

struct Scenario
{
    std::string name;
    std::optional<std::uint64_t> seed;
    std::int64_t start_time = 1'700'000'000; // unix seconds at simulation time 0
    double duration_ms = 1000;
    double drain_ms = 1000;
    double delta_ms = 500;
    double max_age_ms = 1000;
    double burst_ms = 50;
    std::uint32_t tag_len = 6;
    std::uint64_t call_fee = 0;
    std::uint32_t policer_size = 1u << 12;
    std::vector<AsSpec> ases;
    std::vector<LinkSpec> links;
    std::vector<AccountSpec> accounts;
    std::vector<PathSpec> paths;
    std::vector<ReservationSpec> reservations;
    std::vector<FlowSpec> flows; // regular flows and adversaries
    std::vector<AssertionSpec> assertions;
};

/// Parses and validates a JSON scenario. Throws Error(schema) with a
/// diagnostic naming the offending field.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

struct FlowReport
{
    std::string name;
    std::string kind;
    std::uint64_t sent_pkts = 0;
    std::uint64_t offered_bytes = 0;
    std::uint64_t priority_pkts = 0; // delivered, priority at every reserved hop
    std::uint64_t priority_bytes = 0;
    std::uint64_t best_effort_pkts = 0; // delivered otherwise
    std::uint64_t best_effort_bytes = 0;
    std::uint64_t dropped_pkts = 0;
    std::uint64_t dropped_bytes = 0;
    std::uint64_t demoted_pkts = 0; // flyover demoted at some hop
    std::uint64_t refused_pkts = 0; // not built (e.g. counter backpressure)
    double active_s = 0;
    double delivery_s = 0; // first send to last delivery, goodput divisor
    double latency_p50_ms = 0;
    double latency_p90_ms = 0;
    double latency_p99_ms = 0;
    double latency_max_ms = 0;
};

struct LinkReport
{
    std::string from;
    std::string to;
    std::uint64_t capacity_bps = 0;
    std::uint64_t priority_bytes = 0;
    std::uint64_t best_effort_bytes = 0;
    std::uint64_t dropped_bytes = 0;
    double busy_s = 0;
};

struct AccountReport
{
    std::string name;
    std::uint64_t initial = 0;
    std::uint64_t final = 0;
    std::uint64_t spend = 0;
    std::uint64_t list_value = 0; // sum of listed prices of purchased capacity
};

struct ReservationReport
{
    std::string name;
    bool ok = false;
    std::string error;
    std::uint64_t bandwidth_bps = 0; // requested
    std::uint64_t granted_bps = 0;   // smallest decoded BW code over the reserved hops
    std::map<std::string, std::uint32_t> res_ids; // per AS
    std::map<std::string, std::uint16_t> bw_codes;
};

struct AssertionResult
{
    AssertionSpec spec;
    double actual = 0;
    double expected = 0;
    bool pass = false;
    std::string message;
};

struct MetricsReport
{
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<FlowReport> flows;
    std::map<std::string, std::map<std::string, std::uint64_t>> hops; // AS -> reason -> count
    std::vector<LinkReport> links;
    std::vector<AccountReport> accounts;
    std::vector<ReservationReport> reservations;
    std::string ledger_state_hash;

    /// Flat metric namespace used by assertions, e.g.
    /// flow.v.priority_fraction, hop.Z.overuse, account.a.spend.
    std::map<std::string, double> metrics() const;
    std::optional<double> metric(const std::string& name) const;
    /// One JSON object per line: flows, hops, links, accounts, reservations.
    std::string records() const;
    std::string table() const;
};

std::vector<AssertionResult> check_assertions(const Scenario& sc, const MetricsReport& report);

/// Runs the scenario; \p seed overrides the scenario's seed.
MetricsReport run(const Scenario& sc, std::uint64_t seed);

inline constexpr std::uint64_t kDefaultSeed = 0x48425244; // "HBRD"

} // namespace hummingbird::sim
