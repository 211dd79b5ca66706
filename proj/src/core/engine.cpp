#include "core/engine.hpp"

namespace meshroll {

Engine::EventId Engine::schedule(SimTime at, const char* target, const char* kind, Handler fn) {
    if (at < now_) {
        throw PastEventError(std::string("event scheduled in the past: ") + target + "/" + kind);
    }
    EventId id = next_seq_++;
    queue_.push(Key{at, id});
    records_.emplace(id, Record{target, kind, std::move(fn)});
    ++live_;
    return id;
}

bool Engine::cancel(EventId id) {
    auto it = records_.find(id);
    if (it == records_.end()) return false;
    records_.erase(it);
    --live_;
    return true;
}

void Engine::note_dispatch(SimTime at, const char* target, const char* kind) {
    auto fnv = [this](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            trace_hash_ ^= p[i];
            trace_hash_ *= 0x100000001b3ULL;
        }
    };
    fnv(&at, sizeof(at));
    for (const char* s = target; *s; ++s) fnv(s, 1);
    for (const char* s = kind; *s; ++s) fnv(s, 1);
    if (sink_) sink_(at, target, kind);
}

EngineStats Engine::run_until(SimTime t_end) {
    EngineStats stats;
    while (!queue_.empty() && queue_.top().at <= t_end) {
        Key key = queue_.top();
        queue_.pop();
        auto it = records_.find(key.seq);
        if (it == records_.end()) continue;  // cancelled
        Record rec = std::move(it->second);
        records_.erase(it);
        --live_;
        now_ = key.at;
        note_dispatch(key.at, rec.target, rec.kind);
        ++dispatched_;
        ++stats.dispatched;
        rec.fn();
    }
    if (t_end > now_) now_ = t_end;
    stats.final_clock = now_;
    return stats;
}

}  // namespace meshroll
