#include "ergoloop/random.hpp"

#include <string>

#include "ergoloop/error.hpp"

namespace ergoloop {
namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t root, StreamPurpose purpose, std::uint64_t a, std::uint64_t b)
{
    std::uint64_t h = splitmix64(root);
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    h = splitmix64(h ^ a);
    return splitmix64(h ^ (b + 0x632be59bd9b4e019ULL));
}

std::size_t Rng::index(std::size_t n)
{
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "Rng::index: empty range");
    // Rejection keeps the result unbiased.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

std::size_t pick_index(std::span<const double> probs, double u)
{
    double cumulative = 0.0;
    std::size_t last_positive = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_positive = i;
        cumulative += probs[i];
        if (u < cumulative) return i;
    }
    if (last_positive == probs.size()) {
        throw Error(ErrorCode::ProbabilityNotNormalized, "no outcome has positive probability");
    }
    // Rounding left u above the accumulated total.
    return last_positive;
}

std::size_t RandomDraws::draw(std::span<const double> probs)
{
    const std::size_t choice = pick_index(probs, rng_.uniform());
    choices_.push_back(static_cast<std::uint16_t>(choice));
    return choice;
}

std::size_t ReplayDraws::draw(std::span<const double> probs)
{
    if (next_ >= choices_.size()) {
        throw Error(ErrorCode::IndexOutOfRange, "replayed map index has fewer draws than the pass");
    }
    const std::size_t choice = choices_[next_++];
    if (choice >= probs.size()) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "replayed choice " + std::to_string(choice) + " outside a row of " +
                        std::to_string(probs.size()));
    }
    return choice;
}

} // namespace ergoloop
