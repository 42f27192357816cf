#ifndef SLFV_RANDOM_HPP
#define SLFV_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace slfv
{

// Per-replica generator. The engine is fully specified by the standard, and all the
// variate transforms below are written out so streams are identical across platforms
// (std:: distributions are implementation-defined).
using Rng = std::mt19937_64;

// Reproducible stream for replica `replica_id` under `master_seed`.
inline Rng replica_stream(std::uint64_t master_seed, std::uint64_t replica_id)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(replica_id), static_cast<std::uint32_t>(replica_id >> 32),
                      0x5f4cu};
    return Rng(seq);
}

// Stream for one cell of a design, e.g. (replica, x value, experiment tag).
inline Rng replica_stream(std::uint64_t master_seed, std::uint64_t replica_id, std::uint64_t cell, std::uint32_t tag)
{
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(replica_id),  static_cast<std::uint32_t>(replica_id >> 32),
                      static_cast<std::uint32_t>(cell),        static_cast<std::uint32_t>(cell >> 32),
                      tag,                                     0x5f4du};
    return Rng(seq);
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng &rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng &rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

// Exp(rate) variate.
inline double exponential(Rng &rng, double rate)
{
    return -std::log1p(-uniform01(rng)) / rate;
}

// Uniform index in [0, n).
inline std::uint64_t uniform_index(Rng &rng, std::uint64_t n)
{
    return static_cast<std::uint64_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

} // namespace slfv

#endif
