#pragma once

#include <cstdint>

namespace meshroll {

// Simulated time. Integer nanoseconds since simulation start: all protocol
// periods (16 ms .. 800 ms), slot lengths and airtimes are exact in ns, so
// slot arithmetic never drifts.
using SimTime = std::int64_t;
using Duration = std::int64_t;

constexpr Duration kMicrosecond = 1'000;
constexpr Duration kMillisecond = 1'000'000;
constexpr Duration kSecond = 1'000'000'000;

constexpr Duration from_us(std::int64_t v) { return v * kMicrosecond; }
constexpr Duration from_ms(std::int64_t v) { return v * kMillisecond; }
constexpr Duration from_s(std::int64_t v) { return v * kSecond; }

constexpr double to_s(SimTime t) { return static_cast<double>(t) / 1e9; }
constexpr double to_ms(SimTime t) { return static_cast<double>(t) / 1e6; }

}  // namespace meshroll
