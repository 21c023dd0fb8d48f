#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace qmem::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kRecordSchemaVersion = "1";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct ValidationIssue {
    std::string path;  // JSON-pointer of the offending field
    std::string message;
};

// Schema violations; maps to exit code 2 with an error-JSON report.
struct ConfigError : std::runtime_error {
    std::vector<ValidationIssue> issues;

    explicit ConfigError(std::string msg, std::vector<ValidationIssue> iss = {})
        : std::runtime_error(std::move(msg)), issues(std::move(iss)) {}
};

std::vector<std::string> known_subcommands();

// Schema check only; no side effects. The config's own "subcommand" field
// is used when `subcommand` is empty.
std::vector<ValidationIssue> validate_config(const std::string& subcommand,
                                             const nlohmann::json& config);

struct RunOptions {
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed_override;
    int threads = 1;
    bool force = false;
    bool emit_plots = false;
};

struct RunOutcome {
    std::filesystem::path out_dir;
    std::vector<std::string> artifacts;  // file names inside out_dir
};

// Parses, validates, executes and writes artifacts plus run_record.json.
// Throws ConfigError for schema problems, NumericError/ParameterError for
// runtime failures.
RunOutcome run_subcommand(const std::string& subcommand, const RunOptions& opts);

// ISO-8601 UTC timestamp; honors SOURCE_DATE_EPOCH for reproducible runs.
std::string run_timestamp();

}  // namespace qmem::cli
