#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ergoloop/engine.hpp"
#include "ergoloop/ergodicity.hpp"
#include "ergoloop/fairness.hpp"
#include "ergoloop/stats.hpp"

namespace ergoloop {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Fixed formatting used by every CSV: %.17g, which round-trips doubles.
std::string format_double(double value);

/// Columns: k, y0..y{d-1} of the checkpoint node; with `full_state`, every
/// node's output components (<id>.y<c>) and memory (<id>.m<c>) follow.
std::string trajectory_csv(const Interconnection& loop, const Trajectory& trajectory,
                           bool full_state = false);

/// Columns: z, density.
std::string kde_csv(const KdeEstimate& estimate);

/// One row per reference signal.
std::string contraction_csv(const ContractionEstimate& estimate);

/// One row per agent and initial condition.
std::string agent_rows_csv(const std::vector<AgentRow>& rows);

nlohmann::json to_json(const ContractionEstimate& estimate);
nlohmann::json to_json(const TreatmentReport& report);
nlohmann::json to_json(const ImpactReport& report);
nlohmann::json to_json(const RobustnessReport& report);
nlohmann::json to_json(const FairnessReport& report);

/// Hex SHA-256.
std::string sha256_hex(std::string_view data);

struct RunManifest {
    std::string command;
    std::string config_path;
    std::string config_digest;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    std::vector<std::string> outputs;
    std::string started;
    std::string finished;
};

/// UTC ISO-8601 timestamp; honours SOURCE_DATE_EPOCH when set.
std::string timestamp_now();

nlohmann::json to_json(const RunManifest& manifest);

/// Writes atomically (temporary file then rename). Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace ergoloop
