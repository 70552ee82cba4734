#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace ergoloop;
using namespace ergoloop::testing;

TEST(Reference, HeldSequenceRepeatsLastValue)
{
    const std::vector<Signal> seq = {{1.0}};
    EXPECT_EQ(reference_forward(seq, true, 57), Signal{1.0});
}

TEST(Reference, IndexesSequence)
{
    const std::vector<Signal> seq = {{0.0}, {0.5}, {1.0}};
    EXPECT_EQ(reference_forward(seq, false, 1), Signal{0.5});
}

TEST(Reference, Errors)
{
    EXPECT_EQ(error_code([] { reference_forward({}, true, 0); }), ErrorCode::EmptyInput);
    const std::vector<Signal> seq = {{0.0}, {0.5}, {1.0}};
    EXPECT_EQ(error_code([&] { reference_forward(seq, false, 3); }), ErrorCode::IndexOutOfRange);
    EXPECT_EQ(error_code([] { ReferenceLogic(ReferenceParams{}); }), ErrorCode::EmptyInput);
}

TEST(ErrorAggregate, Difference)
{
    EXPECT_EQ(error_aggregate({1.0}, {0.25}), Signal{0.75});
    EXPECT_EQ(error_aggregate({0.3, -2.0}, {0.3, -2.0}), (Signal{0.0, 0.0}));
    EXPECT_EQ(error_code([] { error_aggregate({1.0}, {1.0, 2.0}); }), ErrorCode::DimensionMismatch);
}

TEST(SumAggregate, Componentwise)
{
    const std::vector<Signal> three = {{1.0}, {2.0}, {3.0}};
    EXPECT_EQ(sum_aggregate(three), Signal{6.0});
    const std::vector<Signal> one = {{4.5, -1.0}};
    EXPECT_EQ(sum_aggregate(one), (Signal{4.5, -1.0}));
    EXPECT_EQ(error_code([] { sum_aggregate({}); }), ErrorCode::EmptyInput);
    const std::vector<Signal> ragged = {{1.0}, {1.0, 2.0}};
    EXPECT_EQ(error_code([&] { sum_aggregate(ragged); }), ErrorCode::DimensionMismatch);
}

TEST(Pi, PureProportional)
{
    for (double acc : {0.0, 3.0, -100.0}) {
        EXPECT_EQ(pi_forward({acc}, {0.75}, 1.0, 0.0).output, Signal{0.75});
    }
}

TEST(Pi, IntegralIncludesCurrentError)
{
    Signal acc{0.0};
    std::vector<double> outputs;
    for (int i = 0; i < 3; ++i) {
        auto r = pi_forward(acc, {0.5}, 0.0, 1.0);
        outputs.push_back(r.output[0]);
        acc = r.accumulator;
    }
    EXPECT_EQ(outputs, (std::vector<double>{0.5, 1.0, 1.5}));
}

TEST(Pi, ZeroGainsAlwaysZero)
{
    Signal acc{0.0};
    for (double e : {1.0, -3.0, 7.5}) {
        auto r = pi_forward(acc, {e}, 0.0, 0.0);
        EXPECT_EQ(r.output, Signal{0.0});
        acc = r.accumulator;
    }
}

TEST(Pi, MemorylessWithoutIntegralGain)
{
    const PiControllerLogic logic(PiParams{1.5, 0.0, 1});
    EXPECT_EQ(logic.full_memory_size(), 0u);
    Rng rng(1);
    RandomDraws draws(rng);
    NodeState s = logic.initial_state();
    StepContext ctx{0, draws};
    const Signal e{0.4};
    const Signal first = logic.forward(std::span<const Signal>(&e, 1), s, ctx);
    const Signal other{-9.0};
    logic.forward(std::span<const Signal>(&other, 1), s, ctx);
    const Signal again = logic.forward(std::span<const Signal>(&e, 1), s, ctx);
    EXPECT_EQ(first, again);
    EXPECT_TRUE(s.memory.empty());
}

TEST(Pi, NonFiniteGainRejected)
{
    EXPECT_EQ(error_code([] { PiControllerLogic(PiParams{NAN, 0.0, 1}); }), ErrorCode::NonFiniteSignal);
}

TEST(Relu, IdentityLayers)
{
    const ReluWeights w{1, 1, 1, {1.0}, {0.0}, {1.0}, {0.0}};
    EXPECT_EQ(relu_controller_forward({-1.0}, w), Signal{0.0});
    EXPECT_EQ(relu_controller_forward({2.0}, w), Signal{2.0});
}

TEST(Relu, AllOnesOneTwoOne)
{
    const ReluWeights w{1, 2, 1, {1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}, {0.0}};
    EXPECT_DOUBLE_EQ(relu_controller_forward({0.5}, w)[0], 1.0);
}

TEST(Relu, ShapeErrors)
{
    const ReluWeights w{1, 1, 1, {1.0}, {0.0}, {1.0}, {0.0}};
    EXPECT_EQ(error_code([&] { relu_controller_forward({1.0, 2.0}, w); }), ErrorCode::ShapeMismatch);
    ReluParams p;
    p.inputs = 1;
    p.hidden = 2;
    p.outputs = 1;
    p.w1 = {1.0};
    EXPECT_EQ(error_code([&] { resolve_relu_weights(p); }), ErrorCode::ShapeMismatch);
}

TEST(Relu, SeededWeightsAreDeterministic)
{
    ReluParams p;
    p.seed = 7;
    const auto a = resolve_relu_weights(p);
    const auto b = resolve_relu_weights(p);
    EXPECT_EQ(a.w1, b.w1);
    EXPECT_EQ(a.w2, b.w2);
    EXPECT_EQ(a.w1.size(), 8u);
    p.seed = 8;
    EXPECT_NE(resolve_relu_weights(p).w1, a.w1);
}

TEST(Population, DegenerateProbabilityAlwaysPicksSecond)
{
    const PopulationParams p{1, AgentModel::memoryless({ResponseShape::constant(0.0), ResponseShape::constant(1.0)},
                                                      {0.0, 1.0}),
                             0.0};
    Rng rng(3);
    RandomDraws draws(rng);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(population_forward(p, {0.3}, {}, draws).total, Signal{1.0});
    }
}

TEST(Population, MeanMatchesLinearExpectation)
{
    const double eps = 0.3;
    const double pi = 0.5;
    const PopulationParams p{20, AgentModel::memoryless({ResponseShape::constant(0.0),
                                                         ResponseShape::affine_clamped(1.0, 0.0, 0.0, 1.0)},
                                                        {eps, 1.0 - eps}),
                             0.0};
    // h1 = 0, h2(0.5) = clamp(0.5, 0, 1) = 0.5.
    const double expected = 20.0 * (eps * 0.0 + (1.0 - eps) * 0.5);
    const int trials = 4000;
    Rng rng(11);
    RandomDraws draws(rng);
    std::vector<double> ys;
    for (int t = 0; t < trials; ++t) ys.push_back(population_forward(p, {pi}, {}, draws).total[0]);
    const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / trials;
    double ss = 0.0;
    for (double y : ys) ss += (y - mean) * (y - mean);
    const double se = std::sqrt(ss / (trials - 1) / trials);
    EXPECT_LT(std::abs(mean - expected), 3.0 * se) << "mean " << mean << " se " << se;
}

TEST(Population, SwapAgentAlternates)
{
    AgentModel m;
    m.states = {{0.0}, {1.0}};
    m.transitions = {{1, 0}, {0, 1}}; // swap, identity
    m.transition_law = ProbabilityLaw::constant({1.0, 0.0});
    m.outputs = {OutputMap{ResponseShape::constant(0.0), {1.0}}};
    m.output_law = ProbabilityLaw::constant({1.0});
    const PopulationParams p{1, m, 0.0};
    Rng rng(5);
    RandomDraws draws(rng);
    std::vector<std::size_t> states = {0};
    std::vector<double> outputs;
    for (int k = 0; k < 6; ++k) {
        auto r = population_forward(p, {0.0}, states, draws);
        outputs.push_back(r.total[0]);
        states = r.states;
    }
    // y_i(k) reads x_i(k) before the move.
    EXPECT_EQ(outputs, (std::vector<double>{0, 1, 0, 1, 0, 1}));
}

TEST(Population, RowsMustBeNormalised)
{
    EXPECT_EQ(error_code([] {
                  PopulationLogic(PopulationParams{
                      1, AgentModel::memoryless({ResponseShape::constant(0), ResponseShape::constant(1)}, {0.5, 0.4}),
                      0.0});
              }),
              ErrorCode::ProbabilityNotNormalized);
    const std::vector<double> ok = {0.5, 0.5 + 5e-10};
    EXPECT_EQ(error_code([&] { check_probability_row(ok, "a"); }), std::nullopt);
    const std::vector<double> negative = {1.5, -0.5};
    EXPECT_EQ(error_code([&] { check_probability_row(negative, "a"); }), ErrorCode::ProbabilityNotNormalized);
}

TEST(Population, NonScalarSignalRejected)
{
    const PopulationParams p = linear_population(1, {1.0}, {1.0});
    Rng rng(1);
    RandomDraws draws(rng);
    EXPECT_EQ(error_code([&] { population_forward(p, {1.0, 2.0}, {}, draws); }), ErrorCode::DimensionMismatch);
}

TEST(Population, ReplayReproducesOutputs)
{
    const PopulationParams p = worked_population(0.4);
    Rng rng(21);
    RandomDraws record(rng);
    const auto first = population_forward(p, {0.7}, {}, record);
    ReplayDraws replay(record.choices());
    const auto again = population_forward(p, {0.7}, {}, replay);
    EXPECT_EQ(first.outputs, again.outputs);
    EXPECT_TRUE(replay.exhausted());
}

TEST(Population, OffsetShiftsOnlyNonConstantResponses)
{
    AgentModel m = AgentModel::memoryless({ResponseShape::constant(0.0), ResponseShape::affine(1.0, 0.0)}, {1.0, 0.0});
    EXPECT_DOUBLE_EQ(agent_output(m, m.outputs[0], 0.4, 0.3, 0), 0.0);
    EXPECT_DOUBLE_EQ(agent_output(m, m.outputs[1], 0.4, 0.3, 0), 0.7);
}

TEST(ProbabilityLaw, LogisticClampedAwayFromBounds)
{
    const auto law = ProbabilityLaw::logistic(100.0, 0.0, 1e-3);
    EXPECT_DOUBLE_EQ(law.evaluate(1.0)[1], 1.0 - 1e-3);
    EXPECT_DOUBLE_EQ(law.evaluate(-1.0)[1], 1e-3);
    const auto mid = ProbabilityLaw::logistic(2.0, 0.0).evaluate(0.0);
    EXPECT_DOUBLE_EQ(mid[0], 0.5);
    EXPECT_DOUBLE_EQ(mid[0] + mid[1], 1.0);
}

TEST(Delay, OneStepShift)
{
    Signal buffer{0.0};
    std::vector<double> out;
    for (double u : {5.0, 7.0}) {
        auto r = delay_forward(buffer, {u});
        out.push_back(r.output[0]);
        buffer = r.buffer;
    }
    EXPECT_EQ(out, (std::vector<double>{0.0, 5.0}));
    EXPECT_EQ(delay_forward({3.0}, {9.0}).output, Signal{3.0});
}

TEST(Delay, ShiftsAnySequence)
{
    Rng rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        const double initial = rng.uniform(-5, 5);
        std::vector<double> in(1 + rng.index(30));
        for (double& v : in) v = rng.uniform(-10, 10);
        Signal buffer{initial};
        std::vector<double> out;
        for (double u : in) {
            auto r = delay_forward(buffer, {u});
            out.push_back(r.output[0]);
            buffer = r.buffer;
        }
        std::vector<double> expected{initial};
        expected.insert(expected.end(), in.begin(), in.end() - 1);
        EXPECT_EQ(out, expected);
    }
}

TEST(Delay, TwoDelaysShiftByTwo)
{
    SystemGraph g;
    add(g, "r", NodeKind::Reference, ReferenceParams{{{1.0}, {0.0}}, true});
    add(g, "Z1", NodeKind::Delay, DelayParams{});
    add(g, "Z2", NodeKind::Delay, DelayParams{});
    add(g, "S", NodeKind::Aggregator, sum_op());
    g.connect_nodes("r", "Z1");
    g.connect_nodes("Z1", "Z2");
    g.connect_nodes("Z2", "S");
    g.set_start_node("r");
    g.set_checkpoint_node("S");
    const Interconnection loop(g);
    const Trajectory tr = simulate(loop, initial_state(loop), 5, 1);
    // Point k + 1 holds what pass k emitted: the unit pulse at pass 0 arrives
    // at pass 2.
    std::vector<double> seen;
    for (std::size_t k = 1; k < tr.size(); ++k) seen.push_back(tr[k].checkpoint[0]);
    EXPECT_EQ(seen, (std::vector<double>{0, 0, 1, 0, 0}));
}

TEST(Filter, ScaleNegatesAndDivides)
{
    std::vector<double> window;
    const FilterParams p{FilterParams::Type::Scale, 2.0, 1, 1};
    EXPECT_EQ(filter_forward(p, {4.0}, window), Signal{-2.0});
}

TEST(Filter, MovingAverageWindowOneIsIdentity)
{
    std::vector<double> window;
    const FilterParams p{FilterParams::Type::MovingAverage, 2.0, 1, 1};
    for (double v : {3.0, -1.0, 8.25}) EXPECT_EQ(filter_forward(p, {v}, window), Signal{v});
}

TEST(Filter, MovingAverageWarmsUp)
{
    std::vector<double> window;
    const FilterParams p{FilterParams::Type::MovingAverage, 2.0, 3, 1};
    std::vector<double> out;
    for (double v : {3.0, 6.0, 9.0}) out.push_back(filter_forward(p, {v}, window)[0]);
    EXPECT_EQ(out, (std::vector<double>{3.0, 4.5, 6.0}));
}

TEST(Filter, ParameterErrors)
{
    EXPECT_EQ(error_code([] { FilterLogic(FilterParams{FilterParams::Type::Scale, 0.0, 1, 1}); }),
              ErrorCode::ZeroDivisor);
    EXPECT_EQ(error_code([] { FilterLogic(FilterParams{FilterParams::Type::MovingAverage, 2.0, 0, 1}); }),
              ErrorCode::NonpositiveWindow);
}

TEST(MakeLogic, RejectsParamsOfOtherKind)
{
    EXPECT_EQ(error_code([] { make_logic(NodeKind::Filter, PiParams{}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(make_logic(NodeKind::Filter, FilterParams{})->kind(), NodeKind::Filter);
}
