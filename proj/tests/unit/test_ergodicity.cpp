#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "ergoloop/config.hpp"
#include "ergoloop/ergodicity.hpp"
#include "ergoloop/stats.hpp"

using namespace ergoloop;
using namespace ergoloop::testing;

namespace {

ContractionOptions box_options(std::size_t trials = 500, std::size_t iterations = 200, std::uint64_t seed = 1)
{
    ContractionOptions o;
    o.trials = trials;
    o.iterations = iterations;
    o.seed = seed;
    o.sampler.kind = PairSampler::Kind::Box;
    return o;
}

std::vector<StatePair> random_pairs(const Interconnection& loop, std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<StatePair> pairs;
    for (std::size_t i = 0; i < n; ++i) {
        pairs.push_back({sample_state(loop, -5, 5, rng), sample_state(loop, -5, 5, rng)});
    }
    return pairs;
}

AgentModel two_state_agent(std::vector<std::vector<std::size_t>> maps, std::vector<double> probs)
{
    AgentModel m;
    m.states = {{0.0}, {1.0}};
    m.transitions = std::move(maps);
    m.transition_law = ProbabilityLaw::constant(std::move(probs));
    m.outputs = {OutputMap{ResponseShape::constant(0.0), {1.0}}};
    m.output_law = ProbabilityLaw::constant({1.0});
    return m;
}

// Naive A^k > 0 check for k = 1..(n-1)^2+1, independent of the library's
// repeated squaring.
bool primitive_oracle(const AgentModel& agent)
{
    const std::size_t n = agent.states.size();
    std::vector<std::vector<int>> a(n, std::vector<int>(n, 0));
    const auto probs = agent.transition_law.evaluate(0.0);
    for (std::size_t j = 0; j < agent.transitions.size(); ++j) {
        if (probs[j] > 0.0) {
            for (std::size_t s = 0; s < n; ++s) a[s][agent.transitions[j][s]] = 1;
        }
    }
    auto p = a;
    for (std::size_t k = 1; k <= (n - 1) * (n - 1) + 1; ++k) {
        bool positive = true;
        for (const auto& row : p) {
            for (int v : row) positive = positive && v;
        }
        if (positive) return true;
        std::vector<std::vector<int>> next(n, std::vector<int>(n, 0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t l = 0; l < n; ++l) {
                for (std::size_t j = 0; j < n; ++j) next[i][j] |= p[i][l] & a[l][j];
            }
        }
        p = next;
    }
    return false;
}

} // namespace

TEST(Contraction, TwoMapScalarSystem)
{
    const Interconnection loop = scalar_ifs({0.5, 0.25}, {0.5, 0.5});
    const auto est = estimate_contraction_factor(loop, box_options());
    EXPECT_LT(std::abs(est.c_hat - 0.375), 3.0 * est.std_error) << est.c_hat << " +- " << est.std_error;
    EXPECT_GT(est.std_error, 0.0);
    EXPECT_EQ(est.pairs_sampled, 500u);
    ASSERT_EQ(est.breakdown.size(), 1u);
    EXPECT_FALSE(est.breakdown[0].reference.has_value());
    EXPECT_EQ(certify(est), Certificate::Contractive);
}

TEST(Contraction, DeterministicMapIsExact)
{
    const Interconnection loop = scalar_ifs({0.9}, {1.0});
    const auto est = estimate_contraction_factor(loop, box_options(100));
    EXPECT_NEAR(est.c_hat, 0.9, 1e-12);
    EXPECT_LT(est.std_error, 1e-12);
    EXPECT_NEAR(est.max_pair_mean, 0.9, 1e-12);
}

TEST(Contraction, WorkedExampleCallShape)
{
    const SystemConfig config = load_config(config_dir() / "worked_relu.yaml");
    ContractionOptions o = contraction_options(config);
    o.trials = 500;
    o.iterations = 200;
    const auto est = estimate_contraction_factor(build_interconnection(config), o);
    EXPECT_LT(est.c_hat, 1.0);
    ASSERT_EQ(est.breakdown.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        ASSERT_TRUE(est.breakdown[i].reference.has_value());
        EXPECT_EQ(*est.breakdown[i].reference, config.analysis.reference_signals[i]);
        EXPECT_LE(est.breakdown[i].c_hat, est.c_hat);
        EXPECT_GE(est.breakdown[i].std_error, 0.0);
    }
}

TEST(Contraction, ReproducibleForSeed)
{
    const Interconnection loop(worked_pi_graph());
    ContractionOptions o;
    o.trials = 40;
    o.iterations = 30;
    o.seed = 77;
    o.reference_signals = {{0.5}, {1.0}};
    const auto a = estimate_contraction_factor(loop, o);
    const auto b = estimate_contraction_factor(loop, o);
    EXPECT_EQ(a.c_hat, b.c_hat);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.breakdown[1].max_pair_mean, b.breakdown[1].max_pair_mean);
}

TEST(Contraction, Preconditions)
{
    const Interconnection loop = scalar_ifs({0.5}, {1.0});
    EXPECT_EQ(error_code([&] { estimate_contraction_factor(loop, box_options(1)); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code([&] { estimate_contraction_factor(loop, box_options(10, 0)); }), ErrorCode::InvalidArgument);
    ContractionOptions collapsed = box_options(10, 5);
    collapsed.sampler.lo = collapsed.sampler.hi = 0.3;
    EXPECT_EQ(error_code([&] { estimate_contraction_factor(loop, collapsed); }), ErrorCode::DegeneratePairs);
}

TEST(Contraction, TrajectoryAndMixedSamplersAgreeOnLinearSystem)
{
    const Interconnection loop = scalar_ifs({0.5, 0.25}, {0.5, 0.5});
    for (auto kind : {PairSampler::Kind::Trajectory, PairSampler::Kind::Mixed}) {
        ContractionOptions o = box_options(400, 100, 3);
        o.sampler.kind = kind;
        o.sampler.warmup = 2;
        const auto est = estimate_contraction_factor(loop, o);
        EXPECT_LT(std::abs(est.c_hat - 0.375), 3.0 * est.std_error) << to_string(kind);
    }
}

TEST(Certify, Verdicts)
{
    ContractionEstimate e;
    e.c_hat = 0.5;
    e.std_error = 0.1;
    e.max_pair_mean = 0.9;
    EXPECT_EQ(certify(e), Certificate::Contractive);
    e.max_pair_mean = 1.2;
    EXPECT_EQ(certify(e), Certificate::Inconclusive);
    e.c_hat = 0.95;
    e.max_pair_mean = 0.99;
    EXPECT_EQ(certify(e), Certificate::Inconclusive);
    e.c_hat = 1.5;
    e.max_pair_mean = 2.0;
    EXPECT_EQ(certify(e), Certificate::NonContractive);
    e.c_hat = 1.2;
    EXPECT_EQ(certify(e), Certificate::Inconclusive);
    EXPECT_EQ(certify(e, 1.0), Certificate::NonContractive);
}

TEST(ExactFactor, TwoMapScalarSystem)
{
    const Interconnection loop = scalar_ifs({0.5, 0.25}, {0.5, 0.5});
    const auto pairs = random_pairs(loop, 10, 4);
    EXPECT_NEAR(exact_contraction_factor(loop, pairs), 0.5 * 0.5 + 0.5 * 0.25, 1e-12);
    for (const auto& p : pairs) {
        EXPECT_NEAR(exact_contraction_factor(loop, std::span<const StatePair>(&p, 1)), 0.375, 1e-12);
    }
}

TEST(ExactFactor, IdentityMap)
{
    const Interconnection loop = scalar_ifs({1.0}, {1.0});
    EXPECT_NEAR(exact_contraction_factor(loop, random_pairs(loop, 5, 5)), 1.0, 1e-12);
}

TEST(ExactFactor, TwoAgentsBruteForce)
{
    const std::vector<double> slopes = {0.3, -0.6};
    const std::vector<double> probs = {0.4, 0.6};
    const Interconnection loop(scalar_loop(linear_population(2, slopes, probs)));
    double expected = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) expected += probs[i] * probs[j] * std::abs(slopes[i] + slopes[j]);
    }
    EXPECT_NEAR(exact_contraction_factor(loop, random_pairs(loop, 4, 6)), expected, 1e-12);

    // Same sum through the enumerated map law.
    double via_maps = 0.0;
    for (const auto& m : enumerate_maps(loop, {0.0})) {
        via_maps += m.probability * std::abs(slopes[m.index.choices[0]] + slopes[m.index.choices[1]]);
    }
    EXPECT_NEAR(via_maps, expected, 1e-12);
}

TEST(ExactFactor, Errors)
{
    const Interconnection loop = scalar_ifs({0.5, 0.25}, {0.5, 0.5});
    const SystemState s = initial_state(loop);
    const std::vector<StatePair> same = {{s, s}};
    EXPECT_EQ(error_code([&] { exact_contraction_factor(loop, same); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code([&] { exact_contraction_factor(loop, {}); }), ErrorCode::EmptyInput);
    const Interconnection wide(scalar_loop(linear_population(4, {0.1, 0.2}, {0.5, 0.5})));
    EXPECT_EQ(error_code([&] { exact_contraction_factor(wide, random_pairs(wide, 1, 1), NormKind::Euclidean, 8); }),
              ErrorCode::TooManyMaps);
}

TEST(Modulus, ScaleFilter)
{
    const FilterLogic f(FilterParams{FilterParams::Type::Scale, 2.0, 1, 1});
    const std::vector<InputBox> box = {{{-3.0}, {3.0}}};
    const auto m = estimate_node_modulus(f, box, 100, 1, "F");
    EXPECT_NEAR(m.modulus, 0.5, 1e-12);
    EXPECT_EQ(m.node, "F");
    EXPECT_EQ(m.samples, 100u);
}

TEST(Modulus, ReluApproachesOne)
{
    const ReluControllerLogic relu(ReluParams{1, 1, 1, 0, {1.0}, {0.0}, {1.0}, {0.0}});
    const std::vector<InputBox> box = {{{-1.0}, {1.0}}};
    const double few = estimate_node_modulus(relu, box, 10, 2).modulus;
    const double many = estimate_node_modulus(relu, box, 2000, 2).modulus;
    EXPECT_LE(many, 1.0 + 1e-12);
    EXPECT_GE(many, few);
    EXPECT_GT(many, 0.999);
}

TEST(Modulus, ProportionalGain)
{
    const PiControllerLogic pi(PiParams{2.0, 0.0, 1});
    const std::vector<InputBox> box = {{{-1.0}, {1.0}}};
    EXPECT_NEAR(estimate_node_modulus(pi, box, 50, 3).modulus, 2.0, 1e-12);
}

TEST(Modulus, Preconditions)
{
    const PiControllerLogic pi(PiParams{2.0, 0.0, 1});
    const std::vector<InputBox> box = {{{-1.0}, {1.0}}};
    EXPECT_EQ(error_code([&] { estimate_node_modulus(pi, box, 1, 3); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(error_code([&] { estimate_node_modulus(pi, {}, 10, 3); }), ErrorCode::DimensionMismatch);
}

TEST(Modulus, LinearLoopGainIsProductOfModuli)
{
    // Z -> P -> F -> Z with P = 0.5 pi (single map) and F = -S / 2.
    const PopulationParams pop = linear_population(1, {0.5}, {1.0});
    const FilterParams filter{FilterParams::Type::Scale, 2.0, 1, 1};
    SystemGraph g;
    add(g, "Z", NodeKind::Delay, DelayParams{});
    add(g, "P", NodeKind::Population, pop);
    add(g, "F", NodeKind::Filter, filter);
    g.connect_nodes("Z", "P");
    g.connect_nodes("P", "F");
    g.connect_nodes("F", "Z");
    g.set_start_node("Z");
    g.set_checkpoint_node("F");
    const Interconnection loop(g);

    const std::vector<InputBox> box = {{{-2.0}, {2.0}}};
    double product = 1.0;
    for (const char* id : {"Z", "P", "F"}) {
        product *= estimate_node_modulus(loop.logic(loop.index_of(id)), box, 200, 9, id).modulus;
    }
    const auto est = estimate_contraction_factor(loop, box_options(200, 50));
    EXPECT_LE(std::abs(est.c_hat - product), 3.0 * est.std_error + 1e-12) << est.c_hat << " vs " << product;
    EXPECT_NEAR(product, 0.25, 1e-12);
}

TEST(Connectivity, SwapAndIdentityIsPrimitive)
{
    const auto c = check_connectivity(two_state_agent({{1, 0}, {0, 1}}, {0.5, 0.5}), std::vector<double>{0.0});
    EXPECT_TRUE(c.strongly_connected);
    EXPECT_TRUE(c.primitive);
}

TEST(Connectivity, SwapOnlyIsPeriodic)
{
    const auto c = check_connectivity(two_state_agent({{1, 0}}, {1.0}), std::vector<double>{0.0});
    EXPECT_TRUE(c.strongly_connected);
    EXPECT_FALSE(c.primitive);
}

TEST(Connectivity, AbsorbingStateIsNotConnected)
{
    const auto c = check_connectivity(two_state_agent({{0, 0}, {0, 1}}, {0.5, 0.5}), std::vector<double>{0.0});
    EXPECT_FALSE(c.strongly_connected);
    EXPECT_FALSE(c.primitive);
}

TEST(Connectivity, ZeroProbabilityMapsAreIgnored)
{
    // Identity is never drawn, so only the swap edges remain.
    const auto c = check_connectivity(two_state_agent({{1, 0}, {0, 1}}, {1.0, 0.0}), std::vector<double>{0.0});
    EXPECT_TRUE(c.strongly_connected);
    EXPECT_FALSE(c.primitive);
}

TEST(Connectivity, SignalDependentLaw)
{
    AgentModel m = two_state_agent({{1, 0}, {0, 1}}, {0.5, 0.5});
    m.transition_law = ProbabilityLaw::logistic(1.0, 0.0, 0.0);
    const auto c = check_connectivity(m, std::vector<double>{-2.0, 2.0});
    EXPECT_TRUE(c.primitive);
}

TEST(Connectivity, MemorylessAgentRejected)
{
    const AgentModel m = AgentModel::memoryless({ResponseShape::constant(1.0)}, {1.0});
    EXPECT_EQ(error_code([&] { check_connectivity(m, std::vector<double>{0.0}); }), ErrorCode::InfiniteStateSpace);
}

TEST(Connectivity, PrimitiveImpliesStronglyConnectedAndMatchesOracle)
{
    Rng rng(12);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 2 + rng.index(4);
        const std::size_t maps = 1 + rng.index(3);
        AgentModel m;
        for (std::size_t s = 0; s < n; ++s) m.states.push_back({static_cast<double>(s)});
        std::vector<double> probs(maps, 1.0 / static_cast<double>(maps));
        for (std::size_t j = 0; j < maps; ++j) {
            std::vector<std::size_t> w(n);
            for (auto& v : w) v = rng.index(n);
            m.transitions.push_back(w);
        }
        m.transition_law = ProbabilityLaw::constant(probs);
        m.outputs = {OutputMap{ResponseShape::constant(0.0), {1.0}}};
        m.output_law = ProbabilityLaw::constant({1.0});
        const auto c = check_connectivity(m, std::vector<double>{0.0});
        if (c.primitive) {
            EXPECT_TRUE(c.strongly_connected);
        }
        if (c.strongly_connected) {
            EXPECT_EQ(c.primitive, primitive_oracle(m)) << "rep " << rep;
        }
    }
}

TEST(ErgodicitySignal, DistanceShrinksWithBurnIn)
{
    // x -> 0.5 x + 1 or 0.25 x - 1: contraction factor 0.375 with a
    // non-degenerate invariant law. Two far-apart starts, independent streams.
    const PopulationParams pop{
        1, AgentModel::memoryless({ResponseShape::affine(0.5, 1.0), ResponseShape::affine(0.25, -1.0)}, {0.5, 0.5}), 0.0};
    const Interconnection loop(scalar_loop(pop));
    const std::size_t trials = 1000;
    auto samples = [&](double start, std::size_t burn_in, std::uint64_t stream) {
        InitialCondition ic;
        ic.memory["Z"] = {start};
        const SystemState s0 = initial_state(loop, ic);
        std::vector<double> out;
        for (std::size_t t = 0; t < trials; ++t) {
            Rng rng = Rng::stream(stream, StreamPurpose::Simulate, t);
            SystemState s = s0;
            for (std::size_t k = 0; k < burn_in; ++k) s = step(loop, s, rng);
            out.push_back(s.nodes[loop.index_of("Z")].memory[0]);
        }
        return out;
    };
    const double slack = std::sqrt(2.0 / static_cast<double>(trials));
    std::vector<double> d;
    for (std::size_t burn_in : {0u, 50u, 200u}) {
        d.push_back(distribution_distance(samples(10.0, burn_in, 1), samples(-10.0, burn_in, 2)));
    }
    EXPECT_EQ(d[0], 1.0);
    EXPECT_LE(d[1], d[0] + slack);
    EXPECT_LE(d[2], d[1] + slack);

    // After burn-in both starts sample the invariant law, so over independent
    // stream pairs the 95% test rejects about 5% of the time. P(Bin(40, 0.05)
    // >= 8) is below 1e-3; a start-dependent law would reject every time.
    const double critical = ks_critical_value(trials, trials, 0.95);
    int rejections = 0;
    for (std::uint64_t pair = 0; pair < 40; ++pair) {
        rejections += distribution_distance(samples(10.0, 200, 100 + 2 * pair), samples(-10.0, 200, 101 + 2 * pair)) >
                      critical;
    }
    EXPECT_LT(rejections, 8);
}
