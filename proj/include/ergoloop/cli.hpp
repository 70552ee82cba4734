#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace ergoloop {

/// Command-line values that take precedence over the config file.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> iterations;
};

/// Exit codes shared by every verb.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNonContractive = 2;
inline constexpr int kExitInconclusive = 3;

// Each verb writes its artifacts plus manifest.json under `out_dir` and
// returns an exit code; failures throw and leave no files behind.

int cmd_simulate(const std::filesystem::path& config, const CliOverrides& overrides,
                 const std::filesystem::path& out_dir, bool full_state, std::ostream& out);
int cmd_certify(const std::filesystem::path& config, const CliOverrides& overrides,
                const std::filesystem::path& out_dir, std::ostream& out);
/// `iterations` overrides the burn-in before the checkpoint is sampled.
int cmd_kde(const std::filesystem::path& config, const CliOverrides& overrides,
            const std::filesystem::path& out_dir, std::ostream& out);
int cmd_fairness(const std::filesystem::path& config, const CliOverrides& overrides,
                 const std::filesystem::path& out_dir, std::ostream& out);
/// Prints the DOT text; also writes graph.dot when `out_dir` is non-empty.
int cmd_export_dot(const std::filesystem::path& config, const std::filesystem::path& out_dir,
                   std::ostream& out);

/// Parses argv, dispatches to a verb and maps every error to exit code 1
/// with a message on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ergoloop
