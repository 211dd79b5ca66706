#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/time.hpp"

namespace meshroll {

struct EngineStats {
    std::uint64_t dispatched = 0;
    SimTime final_clock = 0;
};

class PastEventError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Single-threaded discrete-event engine. Dispatch order is the total order
// (fire_at, insertion seq): ties fire in insertion order, so a run replays
// identically for a given scenario and seed. One engine instance per run;
// parallelism only exists across independent runs.
class Engine {
public:
    using EventId = std::uint64_t;
    using Handler = std::function<void()>;
    using TraceSink = std::function<void(SimTime, const char*, const char*)>;

    // target/kind are trace labels only; they must outlive the event
    // (string literals in practice).
    EventId schedule(SimTime at, const char* target, const char* kind, Handler fn);
    EventId schedule_in(Duration delay, const char* target, const char* kind, Handler fn) {
        return schedule(now_ + delay, target, kind, std::move(fn));
    }

    // True if the event was pending and is now dead.
    bool cancel(EventId id);

    // Dispatches every event with fire_at <= t_end; afterwards the clock sits
    // at t_end. Handlers may schedule more events (at or after the clock).
    EngineStats run_until(SimTime t_end);

    SimTime now() const { return now_; }
    std::uint64_t dispatched() const { return dispatched_; }
    bool pending_empty() const { return live_ == 0; }

    // FNV-1a over every dispatch record; pure function of the event sequence.
    std::uint64_t trace_hash() const { return trace_hash_; }
    void set_trace_sink(TraceSink sink) { sink_ = std::move(sink); }

private:
    struct Key {
        SimTime at;
        EventId seq;
        bool operator>(const Key& o) const {
            return at > o.at || (at == o.at && seq > o.seq);
        }
    };
    struct Record {
        const char* target;
        const char* kind;
        Handler fn;
    };

    void note_dispatch(SimTime at, const char* target, const char* kind);

    SimTime now_ = 0;
    EventId next_seq_ = 0;
    std::uint64_t dispatched_ = 0;
    std::uint64_t live_ = 0;
    std::uint64_t trace_hash_ = 0xcbf29ce484222325ULL;
    std::priority_queue<Key, std::vector<Key>, std::greater<Key>> queue_;
    std::unordered_map<EventId, Record> records_;
    TraceSink sink_;
};

}  // namespace meshroll
