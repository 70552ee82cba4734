#include "ergoloop/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "ergoloop/error.hpp"
#include "parallel.hpp"

namespace ergoloop {

std::string_view to_string(PairSampler::Kind kind)
{
    switch (kind) {
    case PairSampler::Kind::Box: return "box";
    case PairSampler::Kind::Trajectory: return "trajectory";
    case PairSampler::Kind::Mixed: return "mixed";
    }
    return "unknown";
}

PairSampler::Kind pair_sampler_kind_from_string(std::string_view text)
{
    using K = PairSampler::Kind;
    for (K k : {K::Box, K::Trajectory, K::Mixed}) {
        if (text == to_string(k)) return k;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown pair sampler '" + std::string(text) + "'");
}

std::string_view to_string(Certificate c)
{
    switch (c) {
    case Certificate::Contractive: return "contractive";
    case Certificate::NonContractive: return "non-contractive";
    case Certificate::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

Certificate certify(const ContractionEstimate& estimate, double z)
{
    if (estimate.c_hat + z * estimate.std_error < 1.0 && estimate.max_pair_mean < 1.0) {
        return Certificate::Contractive;
    }
    if (estimate.c_hat - z * estimate.std_error >= 1.0) return Certificate::NonContractive;
    return Certificate::Inconclusive;
}

namespace {

StatePair box_pair(const Interconnection& loop, const PairSampler& sampler, Rng& rng)
{
    SystemState a = sample_state(loop, sampler.lo, sampler.hi, rng);
    SystemState b = sample_state(loop, sampler.lo, sampler.hi, rng);
    return {std::move(a), std::move(b)};
}

// b starts from a with every existing memory coordinate shifted and agent
// states redrawn; both then follow the same maps for `warmup` passes.
StatePair trajectory_pair(const Interconnection& loop, const PairSampler& sampler,
                          const InitialCondition& initial, Rng& rng)
{
    SystemState a = initial_state(loop, initial);
    SystemState b = a;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        for (double& m : b.nodes[i].memory) m += rng.uniform(-sampler.perturbation, sampler.perturbation);
        if (!b.nodes[i].agents.empty()) {
            NodeState redraw = b.nodes[i];
            loop.logic(i).sample_state(redraw, 0.0, 0.0, rng);
            b.nodes[i].agents = redraw.agents;
        }
        if (loop.kind(i) == NodeKind::Delay) b.nodes[i].output = b.nodes[i].memory;
    }
    for (std::size_t w = 0; w < sampler.warmup; ++w) {
        auto next = coupled_step(loop, a, b, rng);
        a = std::move(next.a);
        b = std::move(next.b);
    }
    return {std::move(a), std::move(b)};
}

struct TrialResult {
    double sum = 0.0;
    std::size_t count = 0;
};

SignalContraction estimate_one(const Interconnection& loop, const ContractionOptions& options)
{
    std::vector<TrialResult> results(options.trials);
    detail::parallel_for(options.trials, [&](std::size_t t) {
        // Trial streams ignore the signal index: every reference signal sees
        // the same random numbers.
        Rng rng = Rng::stream(options.seed, StreamPurpose::Contraction, t);
        PairSampler::Kind kind = options.sampler.kind;
        if (kind == PairSampler::Kind::Mixed) {
            kind = t % 2 == 0 ? PairSampler::Kind::Box : PairSampler::Kind::Trajectory;
        }
        StatePair pair = kind == PairSampler::Kind::Box
                             ? box_pair(loop, options.sampler, rng)
                             : trajectory_pair(loop, options.sampler, options.initial, rng);
        TrialResult r;
        double d0 = state_distance(loop, pair.a, pair.b, options.norm);
        for (std::size_t i = 0; i < options.iterations; ++i) {
            auto next = coupled_step(loop, pair.a, pair.b, rng);
            const double d1 = state_distance(loop, next.a, next.b, options.norm);
            if (d0 >= options.skip_threshold) {
                r.sum += d1 / d0;
                ++r.count;
            }
            pair.a = std::move(next.a);
            pair.b = std::move(next.b);
            d0 = d1;
        }
        results[t] = r;
    });

    SignalContraction out;
    double total = 0.0;
    for (const auto& r : results) {
        if (r.count == 0) {
            ++out.pairs_skipped;
            continue;
        }
        ++out.pairs_used;
        out.ratios += r.count;
        total += r.sum;
        out.max_pair_mean = std::max(out.max_pair_mean, r.sum / static_cast<double>(r.count));
    }
    if (2 * out.pairs_skipped > options.trials) {
        throw Error(ErrorCode::DegeneratePairs,
                    std::to_string(out.pairs_skipped) + " of " + std::to_string(options.trials) +
                        " pairs never separated by more than the skip threshold");
    }
    out.c_hat = total / static_cast<double>(out.ratios);
    const double used = static_cast<double>(out.pairs_used);
    if (out.pairs_used >= 2) {
        const double mean_count = static_cast<double>(out.ratios) / used;
        double ss = 0.0;
        for (const auto& r : results) {
            if (r.count == 0) continue;
            const double dev = r.sum - out.c_hat * static_cast<double>(r.count);
            ss += dev * dev;
        }
        out.std_error = std::sqrt(ss / (used * (used - 1.0))) / mean_count;
    }
    return out;
}

} // namespace

ContractionEstimate estimate_contraction_factor(const Interconnection& loop,
                                                const ContractionOptions& options)
{
    if (options.trials < 2) throw Error(ErrorCode::InvalidArgument, "trials must be at least 2");
    if (options.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be at least 1");
    if (!(options.skip_threshold >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "skip threshold must be non-negative");
    }
    if (!(options.sampler.lo <= options.sampler.hi)) {
        throw Error(ErrorCode::InvalidArgument, "pair sampler box has lo > hi");
    }

    ContractionEstimate estimate;
    estimate.norm = options.norm;
    auto record = [&](SignalContraction sc) {
        estimate.pairs_sampled += options.trials;
        const bool first = estimate.breakdown.empty();
        if (first || sc.c_hat > estimate.c_hat) {
            estimate.c_hat = sc.c_hat;
            estimate.std_error = sc.std_error;
        }
        estimate.max_pair_mean = first ? sc.max_pair_mean
                                       : std::max(estimate.max_pair_mean, sc.max_pair_mean);
        estimate.breakdown.push_back(std::move(sc));
    };

    if (options.reference_signals.empty()) {
        record(estimate_one(loop, options));
    } else {
        for (const auto& signal : options.reference_signals) {
            SignalContraction sc = estimate_one(loop.with_reference(signal), options);
            sc.reference = signal;
            record(std::move(sc));
        }
    }
    return estimate;
}

namespace {

// Serves a fixed prefix of choices, then extends it with the first
// positive-probability entry of each new site, recording the rows.
class PrefixDraws final : public DrawSource {
public:
    explicit PrefixDraws(std::vector<std::uint16_t> prefix) : choices_(std::move(prefix)) {}

    std::size_t draw(std::span<const double> probs) override
    {
        if (next_ < choices_.size()) {
            rows_.emplace_back(probs.begin(), probs.end());
            return choices_[next_++];
        }
        std::size_t first = 0;
        while (first < probs.size() && !(probs[first] > 0.0)) ++first;
        if (first == probs.size()) {
            throw Error(ErrorCode::ProbabilityNotNormalized, "draw site with no positive probability");
        }
        rows_.emplace_back(probs.begin(), probs.end());
        choices_.push_back(static_cast<std::uint16_t>(first));
        ++next_;
        return first;
    }

    const std::vector<std::uint16_t>& choices() const { return choices_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

private:
    std::vector<std::uint16_t> choices_;
    std::vector<std::vector<double>> rows_;
    std::size_t next_ = 0;
};

double exact_pair(const Interconnection& loop, const StatePair& pair, NormKind norm,
                  std::size_t cap)
{
    const double d0 = state_distance(loop, pair.a, pair.b, norm);
    if (!(d0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "exact factor needs distinct states");

    double expectation = 0.0;
    std::size_t leaves = 0;
    std::vector<std::vector<std::uint16_t>> stack{{}};
    while (!stack.empty()) {
        std::vector<std::uint16_t> prefix = std::move(stack.back());
        stack.pop_back();
        const std::size_t fixed = prefix.size();
        PrefixDraws draws(std::move(prefix));
        const SystemState fa = step(loop, pair.a, draws);
        if (++leaves > cap) {
            throw Error(ErrorCode::TooManyMaps,
                        "map outcomes exceed the enumeration cap of " + std::to_string(cap));
        }
        const auto& choices = draws.choices();
        const auto& rows = draws.rows();
        double p = 1.0;
        for (std::size_t i = 0; i < choices.size(); ++i) p *= rows[i][choices[i]];
        ReplayDraws replay(choices);
        const SystemState fb = step(loop, pair.b, replay);
        expectation += p * state_distance(loop, fa, fb, norm) / d0;

        for (std::size_t i = fixed; i < choices.size(); ++i) {
            for (std::size_t j = choices[i] + 1u; j < rows[i].size(); ++j) {
                if (!(rows[i][j] > 0.0)) continue;
                std::vector<std::uint16_t> branch(choices.begin(), choices.begin() + i);
                branch.push_back(static_cast<std::uint16_t>(j));
                stack.push_back(std::move(branch));
            }
        }
    }
    return expectation;
}

} // namespace

double exact_contraction_factor(const Interconnection& loop, std::span<const StatePair> pairs,
                                NormKind norm, std::size_t cap)
{
    if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "exact factor needs at least one pair");
    double worst = 0.0;
    for (const auto& pair : pairs) worst = std::max(worst, exact_pair(loop, pair, norm, cap));
    return worst;
}

namespace {

double euclid(const Signal& a, const Signal& b)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

Signal draw_point(const InputBox& box, Rng& rng)
{
    Signal s(box.lo.size());
    for (std::size_t c = 0; c < s.size(); ++c) s[c] = rng.uniform(box.lo[c], box.hi[c]);
    return s;
}

} // namespace

ModulusEstimate estimate_node_modulus(const NodeLogic& logic, std::span<const InputBox> domain,
                                      std::size_t samples, std::uint64_t seed,
                                      std::string node_name)
{
    if (samples < 2) throw Error(ErrorCode::InvalidArgument, "modulus needs at least two samples");
    const bool delay = logic.kind() == NodeKind::Delay;
    const std::size_t want = logic.variables().size();
    if (logic.variadic() ? domain.empty() : domain.size() != want) {
        throw Error(ErrorCode::DimensionMismatch,
                    "modulus domain has " + std::to_string(domain.size()) + " boxes for " +
                        std::to_string(want) + " inputs");
    }
    for (const auto& box : domain) {
        if (box.lo.size() != box.hi.size() || box.lo.empty()) {
            throw Error(ErrorCode::DimensionMismatch, "input box bounds differ in dimension");
        }
    }

    ModulusEstimate est;
    est.node = std::move(node_name);
    for (std::size_t s = 0; s < samples; ++s) {
        Rng rng = Rng::stream(seed, StreamPurpose::Modulus, s);
        std::vector<Signal> u, v;
        for (const auto& box : domain) u.push_back(draw_point(box, rng));
        for (const auto& box : domain) v.push_back(draw_point(box, rng));
        double din = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) din += std::pow(euclid(u[i], v[i]), 2);
        din = std::sqrt(din);
        if (!(din > 0.0)) continue;

        Signal gu, gv;
        NodeState su = logic.initial_state();
        NodeState sv = su;
        RandomDraws record(rng);
        StepContext cu{0, record};
        if (delay) {
            logic.latch(u[0], su);
            logic.latch(v[0], sv);
            gu = logic.forward({}, su, cu);
            ReplayDraws replay(record.choices());
            StepContext cv{0, replay};
            gv = logic.forward({}, sv, cv);
        } else {
            gu = logic.forward(u, su, cu);
            ReplayDraws replay(record.choices());
            StepContext cv{0, replay};
            gv = logic.forward(v, sv, cv);
        }
        est.modulus = std::max(est.modulus, euclid(gu, gv) / din);
        ++est.samples;
    }
    return est;
}

namespace {

using BoolMatrix = std::vector<std::vector<char>>;

BoolMatrix multiply(const BoolMatrix& a, const BoolMatrix& b)
{
    const std::size_t n = a.size();
    BoolMatrix c(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            if (!a[i][k]) continue;
            for (std::size_t j = 0; j < n; ++j) c[i][j] |= b[k][j];
        }
    }
    return c;
}

std::vector<char> reach(const BoolMatrix& adj, bool reverse)
{
    const std::size_t n = adj.size();
    std::vector<char> seen(n, 0);
    std::queue<std::size_t> q;
    seen[0] = 1;
    q.push(0);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v = 0; v < n; ++v) {
            const bool edge = reverse ? adj[v][u] : adj[u][v];
            if (edge && !seen[v]) {
                seen[v] = 1;
                q.push(v);
            }
        }
    }
    return seen;
}

} // namespace

Connectivity check_connectivity(const AgentModel& agent, std::span<const double> admissible_signals)
{
    if (!agent.stateful()) {
        throw Error(ErrorCode::InfiniteStateSpace,
                    "agent has no finite state space to test for connectivity");
    }
    if (admissible_signals.empty()) {
        throw Error(ErrorCode::EmptyInput, "connectivity needs at least one admissible signal");
    }
    const std::size_t n = agent.states.size();
    BoolMatrix adj(n, std::vector<char>(n, 0));
    for (double pi : admissible_signals) {
        const auto probs = agent.transition_law.evaluate(pi);
        for (std::size_t j = 0; j < probs.size() && j < agent.transitions.size(); ++j) {
            if (!(probs[j] > 0.0)) continue;
            for (std::size_t s = 0; s < n; ++s) adj[s][agent.transitions[j][s]] = 1;
        }
    }

    Connectivity c;
    const auto fwd = reach(adj, false);
    const auto bwd = reach(adj, true);
    c.strongly_connected = std::all_of(fwd.begin(), fwd.end(), [](char x) { return x; }) &&
                           std::all_of(bwd.begin(), bwd.end(), [](char x) { return x; });
    if (!c.strongly_connected) return c;

    // A^w > 0 for w = (n-1)^2 + 1 iff primitive; computed by squaring.
    std::size_t w = (n - 1) * (n - 1) + 1;
    BoolMatrix result(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) result[i][i] = 1;
    BoolMatrix base = adj;
    while (w > 0) {
        if (w & 1U) result = multiply(result, base);
        w >>= 1U;
        if (w > 0) base = multiply(base, base);
    }
    c.primitive = std::all_of(result.begin(), result.end(), [](const auto& row) {
        return std::all_of(row.begin(), row.end(), [](char x) { return x; });
    });
    return c;
}

} // namespace ergoloop
