// Copyright 2026 The kernelscape authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <string_view>
#include <vector>

namespace ks {

// All randomness in the project flows through this header. Seeds are derived,
// never shared, so any computation is a pure function of (inputs, seed) and
// results do not depend on evaluation order or thread count.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// FNV-1a, used for hashing string tags into seed material and for content
// hashes of persisted artifacts.
constexpr std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

constexpr std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t part) {
    return splitmix64(seed ^ splitmix64(part));
}

inline std::uint64_t derive_seed(std::uint64_t seed) { return splitmix64(seed); }

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t head, Rest... rest) {
    return derive_seed(seed_mix(seed, head), rest...);
}

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, Rest... rest) {
    return derive_seed(seed_mix(seed, fnv1a(tag)), rest...);
}

// Deterministic random stream. The engine is std::mt19937_64 (fully specified
// by the standard); every distribution below is hand-pinned on top of raw
// 64-bit draws, so a given seed produces the same stream on any platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0,1) with 53 random bits.
    double next_uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; consumes exactly two engine outputs.
    double next_normal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Unbiased integer in [0, bound) by rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = eng_();
            if (r >= threshold) return r % bound;
        }
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 eng_;
};

// Streaming FNV-1a accumulator for content hashes.
class HashAccumulator {
  public:
    void update(std::string_view bytes) {
        for (unsigned char c : bytes) {
            h_ ^= c;
            h_ *= 1099511628211ULL;
        }
    }
    std::uint64_t digest() const { return h_; }

  private:
    std::uint64_t h_ = 1469598103934665603ULL;
};

}  // namespace ks
