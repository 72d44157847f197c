#include "hummingbird/residalloc.hpp"

#include "hummingbird/error.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace hummingbird::residalloc {

FirstFitAllocator::FirstFitAllocator(std::uint32_t capacity) : capacity(capacity)
{
    if (capacity == 0 || capacity > kMaxResId + 1)
        throw Error(Errc::invalid_argument, "residalloc: capacity must be in [1, 2^22]");
}

bool FirstFitAllocator::id_free(std::uint32_t id, const ReservationInterval& interval) const
{
    auto it = by_id.find(id);
    if (it == by_id.end()) return true;
    const auto& spans = it->second;
    // Last stored interval starting before the new one ends.
    auto next = spans.lower_bound(interval.end);
    if (next == spans.begin()) return true;
    return !std::prev(next)->second.overlaps(interval);
}

std::uint32_t FirstFitAllocator::assign(const ReservationInterval& interval, std::int64_t now)
{
    if (interval.start >= interval.end)
        throw Error(Errc::invalid_argument, "residalloc: interval start must precede end");
    if (by_handle.contains(interval.handle))
        throw Error(Errc::invalid_argument,
            "residalloc: handle " + std::to_string(interval.handle) + " already active");
    if (now != kNoClock) collect_expired(now);

    std::uint32_t id = 0;
    while (id < capacity && !id_free(id, interval)) ++id;
    if (id >= capacity)
        throw Error(Errc::id_space_exhausted, "residalloc: no free ResID below capacity");

    by_id[id].emplace(interval.start, interval);
    by_handle.emplace(interval.handle, id);
    high = std::max(high, id + 1);
    return id;
}

void FirstFitAllocator::release(Handle handle)
{
    auto it = by_handle.find(handle);
    if (it == by_handle.end())
        throw Error(Errc::unknown_handle, "residalloc: unknown handle " + std::to_string(handle));
    auto& spans = by_id.at(it->second);
    std::erase_if(spans, [&](const auto& kv) { return kv.second.handle == handle; });
    if (spans.empty()) by_id.erase(it->second);
    by_handle.erase(it);
}

void FirstFitAllocator::collect_expired(std::int64_t now)
{
    for (auto id_it = by_id.begin(); id_it != by_id.end();) {
        auto& spans = id_it->second;
        // Sorted by start and end alike, so expired intervals form a prefix.
        while (!spans.empty() && spans.begin()->second.end <= now) {
            by_handle.erase(spans.begin()->second.handle);
            spans.erase(spans.begin());
        }
        id_it = spans.empty() ? by_id.erase(id_it) : std::next(id_it);
    }
}

std::vector<Assignment> FirstFitAllocator::active() const
{
    std::vector<Assignment> out;
    for (const auto& [id, spans] : by_id)
        for (const auto& [start, iv] : spans) out.push_back({iv, id});
    return out;
}

std::uint32_t ResIdAllocator::assign(std::uint16_t ingress, const ReservationInterval& interval,
    std::int64_t now)
{
    auto it = per_ingress.try_emplace(ingress, capacity).first;
    return it->second.assign(interval, now);
}

void ResIdAllocator::release(std::uint16_t ingress, Handle handle)
{
    auto it = per_ingress.find(ingress);
    if (it == per_ingress.end())
        throw Error(Errc::unknown_handle,
            "residalloc: no reservations on ingress " + std::to_string(ingress));
    it->second.release(handle);
}

const FirstFitAllocator* ResIdAllocator::find(std::uint16_t ingress) const
{
    auto it = per_ingress.find(ingress);
    return it == per_ingress.end() ? nullptr : &it->second;
}

std::uint32_t optimal_coloring(std::span<const ReservationInterval> intervals)
{
    std::vector<std::pair<std::int64_t, int>> events;
    events.reserve(intervals.size() * 2);
    for (const auto& iv : intervals) {
        events.emplace_back(iv.start, +1);
        events.emplace_back(iv.end, -1);
    }
    // Ends sort before starts at the same instant: intervals are half-open.
    std::sort(events.begin(), events.end());
    int depth = 0;
    int best = 0;
    for (const auto& [t, delta] : events) {
        depth += delta;
        best = std::max(best, depth);
    }
    return static_cast<std::uint32_t>(best);
}

} // namespace hummingbird::residalloc
