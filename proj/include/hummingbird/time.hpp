#pragma once

#include <chrono>
#include <cstdint>

namespace hummingbird {

using Nanos = std::chrono::nanoseconds;
/// Unix time with nanosecond resolution. All clocks in the library use it.
using Instant = std::chrono::sys_time<Nanos>;

inline Instant from_unix_seconds(std::int64_t s)
{
    return Instant(std::chrono::seconds(s));
}

inline Instant from_unix_millis(std::int64_t ms)
{
    return Instant(std::chrono::milliseconds(ms));
}

inline std::int64_t unix_seconds(Instant t)
{
    return std::chrono::floor<std::chrono::seconds>(t).time_since_epoch().count();
}

inline std::int64_t unix_millis(Instant t)
{
    return std::chrono::floor<std::chrono::milliseconds>(t).time_since_epoch().count();
}

inline std::int64_t unix_nanos(Instant t) { return t.time_since_epoch().count(); }

} // namespace hummingbird
