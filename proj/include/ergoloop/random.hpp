#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ergoloop {

/// Purpose tags that keep streams for different analyses disjoint even when
/// they share a root seed.
enum class StreamPurpose : std::uint64_t {
    Simulate = 1,
    Contraction = 2,
    Fairness = 3,
    Kde = 4,
    Modulus = 5,
    Relu = 6,
    Mapping = 7,
};

/// Derives a 64-bit stream seed from (root, purpose, a, b) with splitmix64
/// finalisation. Streams are independent of scheduling: a trial's stream
/// depends only on its index.
std::uint64_t derive_seed(std::uint64_t root, StreamPurpose purpose, std::uint64_t a = 0,
                          std::uint64_t b = 0);

/// Random stream used for every stochastic draw. The double conversion is
/// done here rather than through std::uniform_real_distribution so that the
/// sequence is identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng stream(std::uint64_t root, StreamPurpose purpose, std::uint64_t a = 0,
                      std::uint64_t b = 0) {
        return Rng(derive_seed(root, purpose, a, b));
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    std::uint64_t next() { return engine_(); }

    bool operator==(const Rng&) const = default;

private:
    std::mt19937_64 engine_;
};

/// Picks an index from a probability row given u in [0, 1). Zero-probability
/// entries are never selected.
std::size_t pick_index(std::span<const double> probs, double u);

/// Source of stochastic pointer values. The engine asks for one choice per
/// draw site in a fixed order; different sources either sample, replay a
/// recorded map index, or enumerate.
class DrawSource {
public:
    virtual ~DrawSource() = default;
    virtual std::size_t draw(std::span<const double> probs) = 0;
};

/// Samples from an Rng and records every choice.
class RandomDraws final : public DrawSource {
public:
    explicit RandomDraws(Rng& rng) : rng_(rng) {}
    std::size_t draw(std::span<const double> probs) override;
    const std::vector<std::uint16_t>& choices() const { return choices_; }

private:
    Rng& rng_;
    std::vector<std::uint16_t> choices_;
};

/// Replays a recorded sequence of choices.
class ReplayDraws final : public DrawSource {
public:
    explicit ReplayDraws(std::span<const std::uint16_t> choices) : choices_(choices) {}
    std::size_t draw(std::span<const double> probs) override;
    bool exhausted() const { return next_ == choices_.size(); }

private:
    std::span<const std::uint16_t> choices_;
    std::size_t next_ = 0;
};

} // namespace ergoloop
