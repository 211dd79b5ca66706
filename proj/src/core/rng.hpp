#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace meshroll {

// Labeled, seedable random streams. Every stream's state is derived purely
// from (run seed, label, a, b), so adding a node or creating streams in a
// different order never perturbs anybody else's draws.
struct RngStream {
    std::uint64_t state = 0;

    std::uint64_t next_u64();
    // [0, 1)
    double uniform();
    double uniform(double lo, double hi);
    // [0, n), unbiased
    std::uint32_t uniform_u32(std::uint32_t n);
    bool bernoulli(double p);
    // Box-Muller; two uniforms per draw, no cached spare (keeps replay exact)
    double normal(double mean = 0.0, double sigma = 1.0);
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_label(std::string_view label);

class RngManager {
public:
    explicit RngManager(std::uint64_t run_seed) : run_seed_(run_seed) {}

    std::uint64_t run_seed() const { return run_seed_; }

    // Cached lookup: the same key always returns the same stream object, so
    // repeated callers share one advancing state.
    RngStream& stream(std::string_view label, std::uint64_t a = 0, std::uint64_t b = 0);

    // Stateless derivation for one-shot draws (shadowing maps, per-node
    // constants) where callers want a fresh stream at a fixed origin.
    static RngStream derive(std::uint64_t run_seed, std::string_view label,
                            std::uint64_t a = 0, std::uint64_t b = 0);

private:
    std::uint64_t run_seed_;
    std::map<std::tuple<std::string, std::uint64_t, std::uint64_t>, RngStream> streams_;
};

}  // namespace meshroll
