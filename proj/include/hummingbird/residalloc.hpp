#pragma once

#include "hummingbird/reservation.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

/// Online ResID assignment per ingress interface (First Fit interval coloring).
namespace hummingbird::residalloc {

using Handle = std::uint64_t;

/// Half-open time interval [start, end) of one reservation.
struct ReservationInterval
{
    std::int64_t start = 0;
    std::int64_t end = 0;
    Handle handle = 0;

    bool overlaps(const ReservationInterval& o) const { return start < o.end && o.start < end; }
};

struct Assignment
{
    ReservationInterval interval;
    std::uint32_t res_id = 0;
};

inline constexpr std::int64_t kNoClock = std::numeric_limits<std::int64_t>::min();

/// First Fit allocator for a single ingress interface.
class FirstFitAllocator
{
public:
    explicit FirstFitAllocator(std::uint32_t capacity = kMaxResId + 1);

    /// Assigns the smallest id not held by any stored interval overlapping
    /// \p interval. Intervals that ended at or before \p now are dropped first.
    /// Throws Error(id_space_exhausted) if no id below capacity is free.
    std::uint32_t assign(const ReservationInterval& interval, std::int64_t now = kNoClock);
    void release(Handle handle);
    void collect_expired(std::int64_t now);

    std::size_t active_count() const { return by_handle.size(); }
    /// Largest id ever assigned plus one (0 if nothing was assigned).
    std::uint32_t high_water() const { return high; }
    std::vector<Assignment> active() const;

private:
    bool id_free(std::uint32_t id, const ReservationInterval& interval) const;

    std::uint32_t capacity;
    std::uint32_t high = 0;
    // id -> (start -> interval); intervals sharing an id never overlap, so
    // each inner map is ordered by both start and end.
    std::map<std::uint32_t, std::map<std::int64_t, ReservationInterval>> by_id;
    std::unordered_map<Handle, std::uint32_t> by_handle;
};

/// One First Fit allocator per ingress interface.
class ResIdAllocator
{
public:
    explicit ResIdAllocator(std::uint32_t capacity = kMaxResId + 1) : capacity(capacity) {}

    std::uint32_t assign(std::uint16_t ingress, const ReservationInterval& interval,
        std::int64_t now = kNoClock);
    void release(std::uint16_t ingress, Handle handle);
    const FirstFitAllocator* find(std::uint16_t ingress) const;

private:
    std::uint32_t capacity;
    std::map<std::uint16_t, FirstFitAllocator> per_ingress;
};

/// Offline optimum: for interval graphs the chromatic number equals the
/// maximum number of intervals covering a single point.
std::uint32_t optimal_coloring(std::span<const ReservationInterval> intervals);

} // namespace hummingbird::residalloc
