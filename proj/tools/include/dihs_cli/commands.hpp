#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dihs::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kSolverStall = 3, kIoError = 4 };

int cmd_simulate(const std::filesystem::path& config, const std::vector<std::string>& overrides);

/// Counts come from `counts` if given, else from the meta.json artifacts,
/// else from <output_dir>/counts.bin.
int cmd_reconstruct(const std::filesystem::path& config, const std::vector<std::string>& overrides,
                    const std::optional<std::filesystem::path>& counts = std::nullopt);

int cmd_compare(const std::vector<std::filesystem::path>& runs, const std::filesystem::path& out_dir);

/// Writes per-view block scores at the regularizer's ridge value for x = 0
/// (or `lambda` if given). `exact` adds the dense oracle column.
int cmd_scores(const std::filesystem::path& config, const std::vector<std::string>& overrides,
               const std::optional<double>& lambda, bool exact, const std::optional<std::filesystem::path>& out);

}  // namespace dihs::cli
