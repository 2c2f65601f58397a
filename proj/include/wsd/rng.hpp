#ifndef WSD_RNG_HPP
#define WSD_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace wsd {

// splitmix64 finalizer; used to derive independent per-cell seeds so that
// parallel and serial schedules draw identical streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t p : path) h = splitmix64(h ^ (p + 0x9e3779b97f4a7c15ULL));
    return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace wsd

#endif
