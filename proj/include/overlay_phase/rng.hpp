#pragma once

#include <cstdint>
#include <random>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace overlay_phase {

/// Seedable random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; it is keyed through std::seed_seq with
/// the four 32-bit words (seed lo, seed hi, stream lo, stream hi), so the
/// substream of (seed, stream) is the same on every platform. Distributions
/// come from Boost.Random, whose algorithms are header-defined.
///
/// Stream rule: trace number t of a run uses stream 3t for its leaf chain,
/// 3t+1 for its ultra chain and 3t+2 for synthetic neighbor identities.
/// The simulator uses stream 0 for its event loop.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    /// Uniform on [0, 1).
    double uniform() { return boost::random::uniform_01<double>{}(engine_); }

    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        return boost::random::poisson_distribution<int, double>{mean}(engine_);
    }

    double exponential(double rate) {
        return boost::random::exponential_distribution<double>{rate}(engine_);
    }

    /// Uniform integer on [0, n).
    std::size_t index(std::size_t n) {
        return boost::random::uniform_int_distribution<std::size_t>{0, n - 1}(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace overlay_phase
