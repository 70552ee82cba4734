#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ergoloop/engine.hpp"
#include "ergoloop/ergodicity.hpp"
#include "ergoloop/error.hpp"
#include "ergoloop/logics.hpp"
#include "ergoloop/stats.hpp"

namespace ergoloop {

struct NodeConfig {
    std::string id;
    NodeKind kind = NodeKind::Reference;
    NodeParams params;
    bool operator==(const NodeConfig&) const = default;
};

struct EdgeConfig {
    std::string source;
    std::string target;
    bool operator==(const EdgeConfig&) const = default;
};

struct AnalysisConfig {
    std::uint64_t seed = 0;
    std::size_t iterations = 200;
    std::size_t trials = 500;
    std::vector<Signal> reference_signals;
    std::optional<double> bandwidth;
    Kernel kernel = Kernel::Gaussian;
    std::size_t grid_points = 512;
    std::size_t burn_in = 100;
    std::size_t window = 100;
    std::size_t horizon = 2000;
    std::int64_t treatment_step = 100;
    double confidence = 0.95;
    double z = 3.0;
    std::vector<InitialCondition> initial_conditions;
    PairSampler pair_sampler;
    double skip_threshold = 1e-12;
    NormKind norm = NormKind::Euclidean;
    std::map<std::string, std::string> classes; // population id -> class label
    std::size_t enumeration_cap = kDefaultEnumerationCap;

    bool operator==(const AnalysisConfig&) const = default;
};

/// Document model of a configuration file.
struct SystemConfig {
    std::vector<NodeConfig> nodes;
    std::vector<EdgeConfig> edges;
    std::string start;
    std::string checkpoint;
    AnalysisConfig analysis;

    bool operator==(const SystemConfig&) const = default;
};

struct ConfigIssue {
    std::size_t line = 0;   // 1-based; 0 when unknown
    std::size_t column = 0; // 1-based; 0 when unknown
    std::string field;
    std::string message;
};

/// ParseError (malformed YAML) or SemanticError (well-formed but invalid),
/// carrying every issue found.
class ConfigError : public Error {
public:
    ConfigError(ErrorCode code, std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

/// Parses a YAML configuration. Node parameters are checked by building
/// their logic; edges, start and checkpoint must name declared nodes.
SystemConfig parse_config(std::string_view text);

SystemConfig load_config(const std::filesystem::path& path);

/// Canonical YAML for a document; parse_config(emit_config(c)) == c.
std::string emit_config(const SystemConfig& config);

SystemGraph build_graph(const SystemConfig& config);
Interconnection build_interconnection(const SystemConfig& config);

/// Analysis settings mapped onto the library option records.
ContractionOptions contraction_options(const SystemConfig& config);

} // namespace ergoloop
