#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace pmtc {

// Generator keyed by a tuple of 64-bit values (seed, replication, stream, ...).
// std::seed_seq keeps only 32 bits per element, so each key is split in two.
inline std::mt19937_64 make_rng(std::initializer_list<std::uint64_t> keys) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * keys.size());
    for (auto k : keys) {
        words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

}  // namespace pmtc
