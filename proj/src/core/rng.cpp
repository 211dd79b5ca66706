#include "core/rng.hpp"

#include <cmath>

namespace meshroll {

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_label(std::string_view label) {
    // FNV-1a 64
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t RngStream::next_u64() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double RngStream::uniform() {
    // 53 random bits into [0,1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint32_t RngStream::uniform_u32(std::uint32_t n) {
    if (n == 0) return 0;
    // Lemire's multiply-shift with rejection
    std::uint64_t x = next_u64() & 0xffffffffULL;
    std::uint64_t m = x * n;
    std::uint32_t l = static_cast<std::uint32_t>(m);
    if (l < n) {
        std::uint32_t t = (0u - n) % n;
        while (l < t) {
            x = next_u64() & 0xffffffffULL;
            m = x * n;
            l = static_cast<std::uint32_t>(m);
        }
    }
    return static_cast<std::uint32_t>(m >> 32);
}

bool RngStream::bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
}

double RngStream::normal(double mean, double sigma) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(6.283185307179586 * u2);
}

RngStream& RngManager::stream(std::string_view label, std::uint64_t a, std::uint64_t b) {
    auto key = std::make_tuple(std::string(label), a, b);
    auto it = streams_.find(key);
    if (it == streams_.end()) {
        it = streams_.emplace(std::move(key), derive(run_seed_, label, a, b)).first;
    }
    return it->second;
}

RngStream RngManager::derive(std::uint64_t run_seed, std::string_view label,
                             std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = mix64(run_seed ^ hash_label(label));
    s = mix64(s ^ mix64(a ^ 0xa0761d6478bd642fULL));
    s = mix64(s ^ mix64(b ^ 0xe7037ed1a0b428dbULL));
    return RngStream{s};
}

}  // namespace meshroll
