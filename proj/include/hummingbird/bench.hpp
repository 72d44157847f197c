#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

/// Per-stage timings of the border-router pipeline on a single core.
namespace hummingbird::bench {

struct Stage
{
    std::string name;
    double ns_per_packet = 0;
    std::string reference; // published per-stage figure, "-" if none
};

struct Result
{
    std::vector<Stage> stages; // the last one is the full flyover pipeline
    std::size_t packets = 0;
    std::size_t packet_bytes = 0;
    std::uint64_t priority = 0; // priority verdicts in the flyover pipeline stage

    double flyover_pps() const { return stages.empty() ? 0 : 1e9 / stages.back().ns_per_packet; }
};

/// Runs every stage \p packets times. Throws Error(invalid_argument) for 0.
Result run(std::size_t packets, std::uint16_t payload);

} // namespace hummingbird::bench
