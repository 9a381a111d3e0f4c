#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "textshape/error.hpp"
#include "textshape/rng.hpp"

namespace textshape {

/// Seeded MinHash over token strings. Each of the num_hashes permutations is
/// a 64-bit multiply-add of the token's FNV hash followed by an avalanche
/// mix; the signature entry is the minimum over the token set.
class MinHasher {
public:
    MinHasher(std::uint32_t num_hashes, std::uint64_t seed) : seed_(seed) {
        Rng rng = derive_rng(seed, "minhash-permutations");
        mult_.reserve(num_hashes);
        add_.reserve(num_hashes);
        for (std::uint32_t i = 0; i < num_hashes; ++i) {
            mult_.push_back(rng.next_u64() | 1ULL);  // odd multiplier
            add_.push_back(rng.next_u64());
        }
    }

    std::uint32_t num_hashes() const { return static_cast<std::uint32_t>(mult_.size()); }
    std::uint64_t seed() const { return seed_; }

    std::vector<std::uint64_t> signature(const std::vector<std::string>& token_set) const {
        std::vector<std::uint64_t> sig(mult_.size(), std::numeric_limits<std::uint64_t>::max());
        for (const auto& token : token_set) {
            const std::uint64_t base = fnv1a64(token);
            for (std::size_t i = 0; i < mult_.size(); ++i) {
                const std::uint64_t h = splitmix64(mult_[i] * base + add_[i]);
                if (h < sig[i]) sig[i] = h;
            }
        }
        return sig;
    }

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> mult_;
    std::vector<std::uint64_t> add_;
};

/// Hash of one band (rows_per_band consecutive signature entries).
inline std::uint64_t band_hash(const std::uint64_t* rows, std::size_t count) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::size_t i = 0; i < count; ++i) h = splitmix64(h ^ rows[i]);
    return h;
}

}  // namespace textshape
