#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergoloop/agent.hpp"
#include "ergoloop/engine.hpp"

namespace ergoloop {

/// How estimate_contraction_factor draws its starting pairs (x, x_hat).
struct PairSampler {
    enum class Kind {
        Box,        // both states uniform in the box
        Trajectory, // perturbed initial states, coupled for `warmup` passes
        Mixed,      // even trials Box, odd trials Trajectory
    };

    Kind kind = Kind::Mixed;
    double lo = -1.0;
    double hi = 1.0;
    double perturbation = 1.0;
    std::size_t warmup = 10;

    bool operator==(const PairSampler&) const = default;
};

std::string_view to_string(PairSampler::Kind kind);
PairSampler::Kind pair_sampler_kind_from_string(std::string_view text);

struct ContractionOptions {
    std::vector<Signal> reference_signals; // empty: use the graph as configured
    std::size_t iterations = 200;
    std::size_t trials = 500;
    PairSampler sampler;
    std::uint64_t seed = 0;
    NormKind norm = NormKind::Euclidean;
    double skip_threshold = 1e-12;
    InitialCondition initial; // base state for the Trajectory sampler
};

struct SignalContraction {
    std::optional<Signal> reference;
    double c_hat = 0.0;
    double std_error = 0.0;
    std::size_t ratios = 0;
    std::size_t pairs_used = 0;
    std::size_t pairs_skipped = 0;
    double max_pair_mean = 0.0; // largest per-pair average ratio
};

/// Monte-Carlo estimate of the contraction-on-average factor.
struct ContractionEstimate {
    double c_hat = 0.0;   // max over reference signals
    double std_error = 0.0;  // of the maximising signal
    double max_pair_mean = 0.0;
    std::size_t pairs_sampled = 0;
    NormKind norm = NormKind::Euclidean;
    std::vector<SignalContraction> breakdown;
};

enum class Certificate { Contractive, NonContractive, Inconclusive };

std::string_view to_string(Certificate c);

/// Contractive when c_hat + z*std_error < 1 and no sampled pair averaged a
/// ratio of 1 or more; non-contractive when c_hat - z*std_error >= 1;
/// inconclusive otherwise.
Certificate certify(const ContractionEstimate& estimate, double z = 3.0);

/// For each reference signal and trial: sample a pair, drive it with coupled
/// steps and average the per-step distance ratios. Steps whose starting
/// distance is below skip_threshold contribute nothing; a pair contributing
/// no ratio at all counts as skipped. Throws DegeneratePairs when more than
/// half of the pairs are skipped and InvalidArgument for trials < 2 or
/// iterations < 1. The standard error treats each pair's chain as one
/// cluster.
ContractionEstimate estimate_contraction_factor(const Interconnection& loop,
                                                const ContractionOptions& options);

struct StatePair {
    SystemState a;
    SystemState b;
};

/// Exact expectation over the map law: max over `pairs` of
/// sum_m p_m |F_m(a) - F_m(b)| / |a - b|. Draw probabilities are evaluated
/// along `a`'s pass, so state-dependent laws and cascades are enumerated
/// exactly. Throws TooManyMaps beyond `cap` outcomes and InvalidArgument for
/// coincident pairs.
double exact_contraction_factor(const Interconnection& loop, std::span<const StatePair> pairs,
                                NormKind norm = NormKind::Euclidean,
                                std::size_t cap = kDefaultEnumerationCap);

/// Box over one input of a node.
struct InputBox {
    Signal lo;
    Signal hi;
};

struct ModulusEstimate {
    std::string node;
    double modulus = 0.0; // a lower bound on the true Lipschitz modulus
    std::size_t samples = 0;
};

/// Largest observed |g(u) - g(v)| / |u - v| over `samples` random input pairs
/// drawn from `domain` (one box per declared input). Stochastic logics use
/// the same draws for u and v, so the result is the worst case over sampled
/// realisations. Delay nodes are measured input-to-next-output.
ModulusEstimate estimate_node_modulus(const NodeLogic& logic, std::span<const InputBox> domain,
                                      std::size_t samples, std::uint64_t seed,
                                      std::string node_name = {});

struct Connectivity {
    bool strongly_connected = false;
    bool primitive = false;
};

/// Transition graph on the agent's finite state space: s -> w_j(s) whenever
/// some admissible signal gives p_j > 0. Primitivity is tested with boolean
/// matrix powers up to the Wielandt bound (L-1)^2 + 1. Throws
/// InfiniteStateSpace for memoryless agents.
Connectivity check_connectivity(const AgentModel& agent, std::span<const double> admissible_signals);

} // namespace ergoloop
