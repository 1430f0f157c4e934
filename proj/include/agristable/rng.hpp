// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

namespace agristable {

/// Reproducible random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the conversions to uniform and normal
/// variates below are written out so results do not depend on the
/// standard library's distribution implementations.
class RandomStream {
public:
    /// Substream keyed by `seed` and an arbitrary path of indices (e.g.
    /// replicate index, purpose tag). Streams with different keys are
    /// seeded independently, so evaluation order never matters.
    RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::vector<std::uint32_t> words;
        words.reserve(2 + 2 * path.size());
        auto push = [&](std::uint64_t v) {
            words.push_back(static_cast<std::uint32_t>(v));
            words.push_back(static_cast<std::uint32_t>(v >> 32));
        };
        push(seed);
        for (auto p : path) push(p);
        std::seed_seq seq(words.begin(), words.end());
        engine_.seed(seq);
    }

    explicit RandomStream(std::uint64_t seed) : RandomStream(seed, {}) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1).
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u == 0.0);
        return u;
    }

    /// Standard normal by Box-Muller; one engine pair per variate.
    double normal() {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace agristable
