#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

#include "psmote/error.hpp"

namespace psmote {

// Laplace noise scale parameter. Smaller epsilon = wider noise.
class PrivacyBudget {
public:
    explicit PrivacyBudget(double epsilon) : epsilon_(epsilon) {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
            throw InputError("privacy budget epsilon must be a positive finite real, got " +
                             std::to_string(epsilon));
        }
    }

    double epsilon() const { return epsilon_; }
    double scale() const { return 1.0 / epsilon_; }

private:
    double epsilon_;
};

// Deterministic splittable random stream (splitmix64 core).
//
// A stream is identified by a root seed and a path of integers; the same
// (seed, path) always replays the same draw sequence, and distinct paths
// yield statistically independent sequences. Synthesis derives one stream
// per (row, replicate, attribute), which makes results bit-identical for
// any thread scheduling.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(mix(seed ^ kRootTag)) {}

    RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
        : RngStream(seed) {
        for (std::uint64_t element : path) *this = child(element);
    }

    // Derives the substream for one path element. Does not disturb this
    // stream's own sequence.
    RngStream child(std::uint64_t element) const {
        RngStream sub(*this);
        sub.state_ = mix(state_ ^ mix(element * kGamma + kChildTag));
        return sub;
    }

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix(state_);
    }

    // Uniform on the open interval (0, 1); endpoints cannot occur.
    double unit_open() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kRootTag = 0x7F4A7C15F39CC060ull;
    static constexpr std::uint64_t kChildTag = 0xD1B54A32D192ED03ull;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

// Path elements reserving one substream family per randomized operation, so
// draws never overlap between e.g. QI selection and synthesis under the
// same seed.
namespace stream_domain {
inline constexpr std::uint64_t kQiSelect = 1;
inline constexpr std::uint64_t kSynthesis = 2;
inline constexpr std::uint64_t kBaselineSmote = 3;
inline constexpr std::uint64_t kRandomUndersample = 4;
inline constexpr std::uint64_t kHoldout = 5;
}  // namespace stream_domain

// Laplace(0, scale) quantile of the centered uniform u in (-1/2, 1/2):
// -scale * sign(u) * ln(1 - 2|u|). u = 0 maps to the median 0.
inline double laplace_inverse_cdf(double u, double scale) {
    const double sign = (u > 0.0) ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    return -scale * sign * std::log1p(-2.0 * std::abs(u));
}

// One sample from Laplace(0, 1/epsilon).
inline double laplace_draw(const PrivacyBudget& budget, RngStream& stream) {
    return laplace_inverse_cdf(stream.unit_open() - 0.5, budget.scale());
}

// Uniform over {+1, -1}.
inline int sign_choice(RngStream& stream) {
    return (stream.next_u64() >> 63) ? -1 : +1;
}

// Uniform over [0, bound). Unbiased (Lemire multiply-shift with rejection).
inline std::uint64_t uniform_index(RngStream& stream, std::uint64_t bound) {
    if (bound == 0) throw InputError("uniform_index: bound must be >= 1");
    unsigned __int128 m = static_cast<unsigned __int128>(stream.next_u64()) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
        const std::uint64_t threshold = (-bound) % bound;
        while (lo < threshold) {
            m = static_cast<unsigned __int128>(stream.next_u64()) * bound;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace psmote
