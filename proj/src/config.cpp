#include "ergoloop/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace ergoloop {

namespace {

std::string render_issues(const std::vector<ConfigIssue>& issues)
{
    std::string out;
    for (const auto& i : issues) {
        if (!out.empty()) out += "\n";
        if (i.line > 0) out += "line " + std::to_string(i.line) + ", column " + std::to_string(i.column) + ": ";
        if (!i.field.empty()) out += i.field + ": ";
        out += i.message;
    }
    return out;
}

} // namespace

ConfigError::ConfigError(ErrorCode code, std::vector<ConfigIssue> issues)
    : Error(code, render_issues(issues)), issues_(std::move(issues))
{
}

namespace {

// Collects every problem instead of stopping at the first one.
class Reader {
public:
    std::vector<ConfigIssue> issues;

    void issue(const YAML::Node& at, std::string field, std::string message)
    {
        ConfigIssue i;
        const YAML::Mark mark = at.Mark();
        if (mark.line >= 0) {
            i.line = static_cast<std::size_t>(mark.line) + 1;
            i.column = static_cast<std::size_t>(mark.column) + 1;
        }
        i.field = std::move(field);
        i.message = std::move(message);
        issues.push_back(std::move(i));
    }

    bool expect_map(const YAML::Node& node, const std::string& path)
    {
        if (node.IsMap()) return true;
        issue(node, path, "expected a mapping");
        return false;
    }

    bool expect_sequence(const YAML::Node& node, const std::string& path)
    {
        if (node.IsSequence()) return true;
        issue(node, path, "expected a sequence");
        return false;
    }

    void allow(const YAML::Node& map, std::initializer_list<std::string_view> keys,
               const std::string& path)
    {
        for (const auto& kv : map) {
            const auto key = kv.first.Scalar();
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                issue(kv.first, join(path, key), "unknown field");
            }
        }
    }

    template <class T>
    bool read(const YAML::Node& map, const char* key, const std::string& path, T& out)
    {
        const YAML::Node node = map[key];
        if (!node) return false;
        try {
            out = node.as<T>();
            return true;
        } catch (const YAML::Exception&) {
            issue(node, join(path, key), "cannot read value '" + describe(node) + "'");
            return false;
        }
    }

    template <class T>
    void require(const YAML::Node& map, const char* key, const std::string& path, T& out)
    {
        if (!map[key]) {
            issue(map, join(path, key), "required field is missing");
            return;
        }
        read(map, key, path, out);
    }

    std::optional<Signal> signal(const YAML::Node& node, const std::string& path)
    {
        try {
            if (node.IsScalar()) return Signal{node.as<double>()};
            if (node.IsSequence() && node.size() > 0) return node.as<std::vector<double>>();
        } catch (const YAML::Exception&) {
        }
        issue(node, path, "expected a number or a non-empty list of numbers");
        return std::nullopt;
    }

    static std::string join(const std::string& path, std::string_view key)
    {
        return path.empty() ? std::string(key) : path + "." + std::string(key);
    }

    static std::string describe(const YAML::Node& node)
    {
        if (node.IsScalar()) return node.Scalar();
        if (node.IsSequence()) return "<sequence>";
        if (node.IsMap()) return "<mapping>";
        return "<null>";
    }
};

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

ResponseShape parse_response(Reader& r, const YAML::Node& node, const std::string& path)
{
    ResponseShape s;
    if (!r.expect_map(node, path)) return s;
    r.allow(node, {"shape", "value", "slope", "intercept", "lo", "hi"}, path);
    std::string shape = "constant";
    r.require(node, "shape", path, shape);
    try {
        s.kind = response_kind_from_string(shape);
    } catch (const Error& e) {
        r.issue(node["shape"], Reader::join(path, "shape"), e.what());
    }
    r.read(node, "value", path, s.value);
    r.read(node, "slope", path, s.slope);
    r.read(node, "intercept", path, s.intercept);
    r.read(node, "lo", path, s.lo);
    r.read(node, "hi", path, s.hi);
    return s;
}

ProbabilityLaw parse_law(Reader& r, const YAML::Node& node, const std::string& path)
{
    ProbabilityLaw law;
    if (!r.expect_map(node, path)) return law;
    r.allow(node, {"probabilities", "logistic"}, path);
    if (node["probabilities"] && node["logistic"]) {
        r.issue(node, path, "give either probabilities or logistic, not both");
    }
    if (node["logistic"]) {
        const YAML::Node l = node["logistic"];
        const std::string lp = Reader::join(path, "logistic");
        law.kind = ProbabilityLaw::Kind::Logistic;
        if (r.expect_map(l, lp)) {
            r.allow(l, {"slope", "bias", "floor"}, lp);
            r.read(l, "slope", lp, law.slope);
            r.read(l, "bias", lp, law.bias);
            r.read(l, "floor", lp, law.floor);
        }
    } else {
        r.require(node, "probabilities", path, law.row);
    }
    return law;
}

AgentModel parse_agent(Reader& r, const YAML::Node& node, const std::string& path)
{
    AgentModel m;
    if (!r.expect_map(node, path)) return m;
    r.allow(node, {"states", "transitions", "transition_law", "outputs", "output_law", "initial_state"},
            path);
    r.read(node, "states", path, m.states);
    r.read(node, "transitions", path, m.transitions);
    if (node["transition_law"]) {
        m.transition_law = parse_law(r, node["transition_law"], Reader::join(path, "transition_law"));
    }
    const std::string op = Reader::join(path, "outputs");
    if (!node["outputs"]) {
        r.issue(node, op, "required field is missing");
    } else if (r.expect_sequence(node["outputs"], op)) {
        for (std::size_t i = 0; i < node["outputs"].size(); ++i) {
            const YAML::Node o = node["outputs"][i];
            const std::string p = at(op, i);
            OutputMap out;
            if (r.expect_map(o, p)) {
                r.allow(o, {"response", "state_weights"}, p);
                if (o["response"]) {
                    out.response = parse_response(r, o["response"], Reader::join(p, "response"));
                } else {
                    r.issue(o, Reader::join(p, "response"), "required field is missing");
                }
                r.read(o, "state_weights", p, out.state_weights);
            }
            m.outputs.push_back(std::move(out));
        }
    }
    if (node["output_law"]) {
        m.output_law = parse_law(r, node["output_law"], Reader::join(path, "output_law"));
    } else {
        r.issue(node, Reader::join(path, "output_law"), "required field is missing");
    }
    r.read(node, "initial_state", path, m.initial_state);
    return m;
}

NodeParams parse_params(Reader& r, const YAML::Node& node, NodeKind kind, const std::string& path)
{
    switch (kind) {
    case NodeKind::Reference: {
        r.allow(node, {"id", "kind", "values", "held"}, path);
        ReferenceParams p;
        const std::string vp = Reader::join(path, "values");
        if (!node["values"]) {
            r.issue(node, vp, "required field is missing");
        } else if (r.expect_sequence(node["values"], vp)) {
            for (std::size_t i = 0; i < node["values"].size(); ++i) {
                if (auto s = r.signal(node["values"][i], at(vp, i))) p.values.push_back(*s);
            }
        }
        r.read(node, "held", path, p.held);
        return p;
    }
    case NodeKind::Aggregator: {
        r.allow(node, {"id", "kind", "op", "dimension"}, path);
        AggregatorParams p;
        std::string op = "sum";
        r.read(node, "op", path, op);
        if (op == "error") {
            p.op = AggregatorParams::Op::Error;
        } else if (op != "sum") {
            r.issue(node["op"], Reader::join(path, "op"), "expected 'error' or 'sum'");
        }
        r.read(node, "dimension", path, p.dimension);
        return p;
    }
    case NodeKind::Controller: {
        std::string type = "pi";
        r.read(node, "type", path, type);
        if (type == "relu") {
            r.allow(node, {"id", "kind", "type", "inputs", "hidden", "outputs", "seed", "w1", "b1",
                           "w2", "b2"},
                    path);
            ReluParams p;
            r.read(node, "inputs", path, p.inputs);
            r.read(node, "hidden", path, p.hidden);
            r.read(node, "outputs", path, p.outputs);
            r.read(node, "seed", path, p.seed);
            r.read(node, "w1", path, p.w1);
            r.read(node, "b1", path, p.b1);
            r.read(node, "w2", path, p.w2);
            r.read(node, "b2", path, p.b2);
            return p;
        }
        if (type != "pi") r.issue(node["type"], Reader::join(path, "type"), "expected 'pi' or 'relu'");
        r.allow(node, {"id", "kind", "type", "kp", "ki", "dimension"}, path);
        PiParams p;
        r.read(node, "kp", path, p.kp);
        r.read(node, "ki", path, p.ki);
        r.read(node, "dimension", path, p.dimension);
        return p;
    }
    case NodeKind::Population: {
        r.allow(node, {"id", "kind", "agents", "offset", "agent"}, path);
        PopulationParams p;
        r.read(node, "agents", path, p.agents);
        r.read(node, "offset", path, p.offset);
        if (node["agent"]) {
            p.model = parse_agent(r, node["agent"], Reader::join(path, "agent"));
        } else {
            r.issue(node, Reader::join(path, "agent"), "required field is missing");
        }
        return p;
    }
    case NodeKind::Delay: {
        r.allow(node, {"id", "kind", "initial"}, path);
        DelayParams p;
        if (node["initial"]) {
            if (auto s = r.signal(node["initial"], Reader::join(path, "initial"))) p.initial = *s;
        }
        return p;
    }
    case NodeKind::Filter: {
        FilterParams p;
        std::string type = "scale";
        r.read(node, "type", path, type);
        if (type == "moving_average") {
            p.type = FilterParams::Type::MovingAverage;
        } else if (type != "scale") {
            r.issue(node["type"], Reader::join(path, "type"), "expected 'scale' or 'moving_average'");
        }
        r.allow(node, {"id", "kind", "type", "divisor", "window", "dimension"}, path);
        r.read(node, "divisor", path, p.divisor);
        r.read(node, "window", path, p.window);
        r.read(node, "dimension", path, p.dimension);
        return p;
    }
    }
    return ReferenceParams{};
}

InitialCondition parse_condition(Reader& r, const YAML::Node& node, const std::string& path)
{
    InitialCondition c;
    if (!r.expect_map(node, path)) return c;
    r.allow(node, {"memory", "agents"}, path);
    r.read(node, "memory", path, c.memory);
    r.read(node, "agents", path, c.agents);
    return c;
}

void parse_analysis(Reader& r, const YAML::Node& node, AnalysisConfig& a)
{
    const std::string path = "analysis";
    if (!r.expect_map(node, path)) return;
    r.allow(node, {"seed", "iterations", "trials", "reference_signals", "bandwidth", "kernel",
                   "grid_points", "burn_in", "window", "horizon", "treatment_step", "confidence", "z",
                   "initial_conditions", "pair_sampler", "skip_threshold", "norm", "classes",
                   "enumeration_cap"},
            path);
    r.read(node, "seed", path, a.seed);
    r.read(node, "iterations", path, a.iterations);
    r.read(node, "trials", path, a.trials);
    if (node["reference_signals"]) {
        const std::string sp = Reader::join(path, "reference_signals");
        if (r.expect_sequence(node["reference_signals"], sp)) {
            for (std::size_t i = 0; i < node["reference_signals"].size(); ++i) {
                if (auto s = r.signal(node["reference_signals"][i], at(sp, i))) {
                    a.reference_signals.push_back(*s);
                }
            }
        }
    }
    double bandwidth = 0.0;
    if (r.read(node, "bandwidth", path, bandwidth)) a.bandwidth = bandwidth;
    std::string text;
    if (r.read(node, "kernel", path, text)) {
        try {
            a.kernel = kernel_from_string(text);
        } catch (const Error& e) {
            r.issue(node["kernel"], Reader::join(path, "kernel"), e.what());
        }
    }
    r.read(node, "grid_points", path, a.grid_points);
    r.read(node, "burn_in", path, a.burn_in);
    r.read(node, "window", path, a.window);
    r.read(node, "horizon", path, a.horizon);
    r.read(node, "treatment_step", path, a.treatment_step);
    r.read(node, "confidence", path, a.confidence);
    r.read(node, "z", path, a.z);
    if (node["initial_conditions"]) {
        const std::string ip = Reader::join(path, "initial_conditions");
        if (r.expect_sequence(node["initial_conditions"], ip)) {
            for (std::size_t i = 0; i < node["initial_conditions"].size(); ++i) {
                a.initial_conditions.push_back(
                    parse_condition(r, node["initial_conditions"][i], at(ip, i)));
            }
        }
    }
    if (node["pair_sampler"]) {
        const YAML::Node ps = node["pair_sampler"];
        const std::string pp = Reader::join(path, "pair_sampler");
        if (r.expect_map(ps, pp)) {
            r.allow(ps, {"kind", "lo", "hi", "perturbation", "warmup"}, pp);
            if (r.read(ps, "kind", pp, text)) {
                try {
                    a.pair_sampler.kind = pair_sampler_kind_from_string(text);
                } catch (const Error& e) {
                    r.issue(ps["kind"], Reader::join(pp, "kind"), e.what());
                }
            }
            r.read(ps, "lo", pp, a.pair_sampler.lo);
            r.read(ps, "hi", pp, a.pair_sampler.hi);
            r.read(ps, "perturbation", pp, a.pair_sampler.perturbation);
            r.read(ps, "warmup", pp, a.pair_sampler.warmup);
        }
    }
    r.read(node, "skip_threshold", path, a.skip_threshold);
    if (r.read(node, "norm", path, text)) {
        try {
            a.norm = norm_kind_from_string(text);
        } catch (const Error& e) {
            r.issue(node["norm"], Reader::join(path, "norm"), e.what());
        }
    }
    r.read(node, "classes", path, a.classes);
    r.read(node, "enumeration_cap", path, a.enumeration_cap);

    auto positive = [&](const char* key, bool ok, const char* what) {
        if (!ok) r.issue(node[key] ? node[key] : node, Reader::join(path, key), what);
    };
    positive("trials", a.trials >= 2, "must be at least 2");
    positive("iterations", a.iterations >= 1, "must be at least 1");
    positive("window", a.window >= 1, "must be at least 1");
    positive("horizon", a.horizon > a.burn_in, "must exceed burn_in");
    positive("treatment_step", a.treatment_step >= 0, "must be non-negative");
    positive("confidence", a.confidence > 0.0 && a.confidence < 1.0, "must be in (0, 1)");
    positive("z", a.z > 0.0, "must be positive");
    positive("skip_threshold", a.skip_threshold >= 0.0, "must be non-negative");
    positive("grid_points", a.grid_points >= 2, "must be at least 2");
    if (a.bandwidth && !(*a.bandwidth > 0.0)) {
        r.issue(node["bandwidth"], Reader::join(path, "bandwidth"), "must be positive");
    }
}

} // namespace

SystemConfig parse_config(std::string_view text)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        ConfigIssue issue;
        issue.line = e.mark.line >= 0 ? static_cast<std::size_t>(e.mark.line) + 1 : 0;
        issue.column = e.mark.column >= 0 ? static_cast<std::size_t>(e.mark.column) + 1 : 0;
        issue.message = e.msg;
        throw ConfigError(ErrorCode::ParseError, {issue});
    }

    Reader r;
    SystemConfig config;
    if (!root.IsMap()) {
        r.issue(root, "", "configuration must be a mapping");
        throw ConfigError(ErrorCode::SemanticError, r.issues);
    }
    r.allow(root, {"nodes", "edges", "start", "checkpoint", "analysis"}, "");

    std::set<std::string> ids;
    const YAML::Node nodes = root["nodes"];
    if (!nodes) {
        r.issue(root, "nodes", "required field is missing");
    } else if (r.expect_sequence(nodes, "nodes")) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const YAML::Node n = nodes[i];
            const std::string path = at("nodes", i);
            if (!r.expect_map(n, path)) continue;
            NodeConfig nc;
            r.require(n, "id", path, nc.id);
            std::string kind;
            r.require(n, "kind", path, kind);
            if (kind.empty()) continue;
            try {
                nc.kind = node_kind_from_string(kind);
            } catch (const Error& e) {
                r.issue(n["kind"], Reader::join(path, "kind"), e.what());
                continue;
            }
            const std::size_t before = r.issues.size();
            nc.params = parse_params(r, n, nc.kind, path);
            if (!nc.id.empty() && !ids.insert(nc.id).second) {
                r.issue(n["id"], Reader::join(path, "id"), "duplicate node id '" + nc.id + "'");
            }
            if (r.issues.size() == before) {
                try {
                    make_logic(nc.kind, nc.params);
                } catch (const Error& e) {
                    r.issue(n, path, "node '" + nc.id + "': " + e.what());
                }
            }
            config.nodes.push_back(std::move(nc));
        }
    }

    auto known = [&](const YAML::Node& at_node, const std::string& field, const std::string& id) {
        if (!id.empty() && !ids.count(id)) r.issue(at_node, field, "unknown node '" + id + "'");
    };

    const YAML::Node edges = root["edges"];
    if (edges && r.expect_sequence(edges, "edges")) {
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const YAML::Node e = edges[i];
            const std::string path = at("edges", i);
            EdgeConfig ec;
            if (e.IsSequence() && e.size() == 2) {
                try {
                    ec.source = e[0].as<std::string>();
                    ec.target = e[1].as<std::string>();
                } catch (const YAML::Exception&) {
                    r.issue(e, path, "edge endpoints must be node ids");
                    continue;
                }
            } else if (e.IsMap()) {
                r.allow(e, {"source", "target"}, path);
                r.require(e, "source", path, ec.source);
                r.require(e, "target", path, ec.target);
            } else {
                r.issue(e, path, "expected [source, target] or {source, target}");
                continue;
            }
            known(e, path, ec.source);
            known(e, path, ec.target);
            config.edges.push_back(std::move(ec));
        }
    }

    r.require(root, "start", "", config.start);
    r.require(root, "checkpoint", "", config.checkpoint);
    if (root["start"]) known(root["start"], "start", config.start);
    if (root["checkpoint"]) known(root["checkpoint"], "checkpoint", config.checkpoint);

    if (root["analysis"]) parse_analysis(r, root["analysis"], config.analysis);
    for (const auto& [population, label] : config.analysis.classes) {
        known(root["analysis"]["classes"], "analysis.classes", population);
    }
    for (std::size_t i = 0; i < config.analysis.initial_conditions.size(); ++i) {
        const auto& c = config.analysis.initial_conditions[i];
        const YAML::Node node = root["analysis"]["initial_conditions"][i];
        for (const auto& [id, memory] : c.memory) known(node, at("analysis.initial_conditions", i), id);
        for (const auto& [id, agents] : c.agents) known(node, at("analysis.initial_conditions", i), id);
    }

    if (!r.issues.empty()) throw ConfigError(ErrorCode::SemanticError, r.issues);
    return config;
}

SystemConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

namespace {

void emit_flow(YAML::Emitter& out, const std::vector<double>& values)
{
    out << YAML::Flow << YAML::BeginSeq;
    for (double v : values) out << v;
    out << YAML::EndSeq;
}

void emit_law(YAML::Emitter& out, const ProbabilityLaw& law)
{
    out << YAML::BeginMap;
    if (law.kind == ProbabilityLaw::Kind::Constant) {
        out << YAML::Key << "probabilities" << YAML::Value;
        emit_flow(out, law.row);
    } else {
        out << YAML::Key << "logistic" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "slope" << YAML::Value << law.slope;
        out << YAML::Key << "bias" << YAML::Value << law.bias;
        out << YAML::Key << "floor" << YAML::Value << law.floor;
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
}

void emit_response(YAML::Emitter& out, const ResponseShape& s)
{
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "shape" << YAML::Value << std::string(to_string(s.kind));
    out << YAML::Key << "value" << YAML::Value << s.value;
    out << YAML::Key << "slope" << YAML::Value << s.slope;
    out << YAML::Key << "intercept" << YAML::Value << s.intercept;
    out << YAML::Key << "lo" << YAML::Value << s.lo;
    out << YAML::Key << "hi" << YAML::Value << s.hi;
    out << YAML::EndMap;
}

void emit_agent(YAML::Emitter& out, const AgentModel& m)
{
    out << YAML::BeginMap;
    if (m.stateful()) {
        out << YAML::Key << "states" << YAML::Value << YAML::BeginSeq;
        for (const auto& s : m.states) emit_flow(out, s);
        out << YAML::EndSeq;
        out << YAML::Key << "transitions" << YAML::Value << YAML::BeginSeq;
        for (const auto& t : m.transitions) {
            out << YAML::Flow << YAML::BeginSeq;
            for (std::size_t v : t) out << v;
            out << YAML::EndSeq;
        }
        out << YAML::EndSeq;
        out << YAML::Key << "transition_law" << YAML::Value;
        emit_law(out, m.transition_law);
        out << YAML::Key << "initial_state" << YAML::Value << m.initial_state;
    }
    out << YAML::Key << "outputs" << YAML::Value << YAML::BeginSeq;
    for (const auto& o : m.outputs) {
        out << YAML::BeginMap << YAML::Key << "response" << YAML::Value;
        emit_response(out, o.response);
        if (!o.state_weights.empty()) {
            out << YAML::Key << "state_weights" << YAML::Value;
            emit_flow(out, o.state_weights);
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "output_law" << YAML::Value;
    emit_law(out, m.output_law);
    out << YAML::EndMap;
}

void emit_params(YAML::Emitter& out, const NodeParams& params)
{
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ReferenceParams>) {
                out << YAML::Key << "values" << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (const auto& v : p.values) emit_flow(out, v);
                out << YAML::EndSeq;
                out << YAML::Key << "held" << YAML::Value << p.held;
            } else if constexpr (std::is_same_v<T, AggregatorParams>) {
                out << YAML::Key << "op" << YAML::Value
                    << (p.op == AggregatorParams::Op::Error ? "error" : "sum");
                out << YAML::Key << "dimension" << YAML::Value << p.dimension;
            } else if constexpr (std::is_same_v<T, PiParams>) {
                out << YAML::Key << "type" << YAML::Value << "pi";
                out << YAML::Key << "kp" << YAML::Value << p.kp;
                out << YAML::Key << "ki" << YAML::Value << p.ki;
                out << YAML::Key << "dimension" << YAML::Value << p.dimension;
            } else if constexpr (std::is_same_v<T, ReluParams>) {
                out << YAML::Key << "type" << YAML::Value << "relu";
                out << YAML::Key << "inputs" << YAML::Value << p.inputs;
                out << YAML::Key << "hidden" << YAML::Value << p.hidden;
                out << YAML::Key << "outputs" << YAML::Value << p.outputs;
                out << YAML::Key << "seed" << YAML::Value << p.seed;
                const std::pair<const char*, const std::vector<double>*> weights[] = {
                    {"w1", &p.w1}, {"b1", &p.b1}, {"w2", &p.w2}, {"b2", &p.b2}};
                for (const auto& [key, values] : weights) {
                    if (values->empty()) continue;
                    out << YAML::Key << key << YAML::Value;
                    emit_flow(out, *values);
                }
            } else if constexpr (std::is_same_v<T, PopulationParams>) {
                out << YAML::Key << "agents" << YAML::Value << p.agents;
                out << YAML::Key << "offset" << YAML::Value << p.offset;
                out << YAML::Key << "agent" << YAML::Value;
                emit_agent(out, p.model);
            } else if constexpr (std::is_same_v<T, DelayParams>) {
                out << YAML::Key << "initial" << YAML::Value;
                emit_flow(out, p.initial);
            } else if constexpr (std::is_same_v<T, FilterParams>) {
                const bool scale = p.type == FilterParams::Type::Scale;
                out << YAML::Key << "type" << YAML::Value << (scale ? "scale" : "moving_average");
                out << YAML::Key << "divisor" << YAML::Value << p.divisor;
                out << YAML::Key << "window" << YAML::Value << p.window;
                out << YAML::Key << "dimension" << YAML::Value << p.dimension;
            }
        },
        params);
}

void emit_analysis(YAML::Emitter& out, const AnalysisConfig& a)
{
    out << YAML::BeginMap;
    out << YAML::Key << "seed" << YAML::Value << a.seed;
    out << YAML::Key << "iterations" << YAML::Value << a.iterations;
    out << YAML::Key << "trials" << YAML::Value << a.trials;
    out << YAML::Key << "reference_signals" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& s : a.reference_signals) emit_flow(out, s);
    out << YAML::EndSeq;
    if (a.bandwidth) out << YAML::Key << "bandwidth" << YAML::Value << *a.bandwidth;
    out << YAML::Key << "kernel" << YAML::Value << std::string(to_string(a.kernel));
    out << YAML::Key << "grid_points" << YAML::Value << a.grid_points;
    out << YAML::Key << "burn_in" << YAML::Value << a.burn_in;
    out << YAML::Key << "window" << YAML::Value << a.window;
    out << YAML::Key << "horizon" << YAML::Value << a.horizon;
    out << YAML::Key << "treatment_step" << YAML::Value << a.treatment_step;
    out << YAML::Key << "confidence" << YAML::Value << a.confidence;
    out << YAML::Key << "z" << YAML::Value << a.z;
    out << YAML::Key << "initial_conditions" << YAML::Value << YAML::BeginSeq;
    for (const auto& c : a.initial_conditions) {
        out << YAML::BeginMap;
        out << YAML::Key << "memory" << YAML::Value << YAML::BeginMap;
        for (const auto& [id, m] : c.memory) {
            out << YAML::Key << id << YAML::Value;
            emit_flow(out, m);
        }
        out << YAML::EndMap;
        out << YAML::Key << "agents" << YAML::Value << YAML::BeginMap;
        for (const auto& [id, states] : c.agents) {
            out << YAML::Key << id << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (std::size_t s : states) out << s;
            out << YAML::EndSeq;
        }
        out << YAML::EndMap;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "pair_sampler" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(a.pair_sampler.kind));
    out << YAML::Key << "lo" << YAML::Value << a.pair_sampler.lo;
    out << YAML::Key << "hi" << YAML::Value << a.pair_sampler.hi;
    out << YAML::Key << "perturbation" << YAML::Value << a.pair_sampler.perturbation;
    out << YAML::Key << "warmup" << YAML::Value << a.pair_sampler.warmup;
    out << YAML::EndMap;
    out << YAML::Key << "skip_threshold" << YAML::Value << a.skip_threshold;
    out << YAML::Key << "norm" << YAML::Value << std::string(to_string(a.norm));
    out << YAML::Key << "classes" << YAML::Value << YAML::BeginMap;
    for (const auto& [id, label] : a.classes) out << YAML::Key << id << YAML::Value << label;
    out << YAML::EndMap;
    out << YAML::Key << "enumeration_cap" << YAML::Value << a.enumeration_cap;
    out << YAML::EndMap;
}

} // namespace

std::string emit_config(const SystemConfig& config)
{
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
    for (const auto& n : config.nodes) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << n.id;
        out << YAML::Key << "kind" << YAML::Value << std::string(to_string(n.kind));
        emit_params(out, n.params);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "edges" << YAML::Value << YAML::BeginSeq;
    for (const auto& e : config.edges) {
        out << YAML::Flow << YAML::BeginSeq << e.source << e.target << YAML::EndSeq;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "start" << YAML::Value << config.start;
    out << YAML::Key << "checkpoint" << YAML::Value << config.checkpoint;
    out << YAML::Key << "analysis" << YAML::Value;
    emit_analysis(out, config.analysis);
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

SystemGraph build_graph(const SystemConfig& config)
{
    SystemGraph g;
    for (const auto& n : config.nodes) g.add_node(n.id, n.kind, make_logic(n.kind, n.params));
    for (const auto& e : config.edges) g.connect_nodes(e.source, e.target);
    if (!config.start.empty()) g.set_start_node(config.start);
    if (!config.checkpoint.empty()) g.set_checkpoint_node(config.checkpoint);
    return g;
}

Interconnection build_interconnection(const SystemConfig& config)
{
    return Interconnection(build_graph(config));
}

ContractionOptions contraction_options(const SystemConfig& config)
{
    const auto& a = config.analysis;
    ContractionOptions o;
    o.reference_signals = a.reference_signals;
    o.iterations = a.iterations;
    o.trials = a.trials;
    o.sampler = a.pair_sampler;
    o.seed = a.seed;
    o.norm = a.norm;
    o.skip_threshold = a.skip_threshold;
    if (!a.initial_conditions.empty()) o.initial = a.initial_conditions.front();
    return o;
}

} // namespace ergoloop
