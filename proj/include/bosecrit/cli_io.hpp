#pragma once

// Configuration, dispatch and serialization for the command-line front end.
//
// A config file is one JSON object with optional keys seed, threads, out, format and params;
// params holds the command block. Unknown keys at either level are rejected. Command-line
// flags override the file, and BOSECRIT_THREADS is the fallback for the thread count.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace bosecrit::cli {

inline constexpr const char* kSchemaVersion = "bosecrit-result/1";
inline constexpr const char* kCodeVersion = "1.0.0";

enum class Format { json, csv };

Format parse_format(const std::string& s);
std::string to_string(Format f);

struct GlobalOptions {
    std::uint64_t seed = 20240601;
    int threads = 0;            // 0: BOSECRIT_THREADS, else hardware concurrency
    std::string out_dir = ".";
    Format format = Format::json;
};

struct RunConfig {
    std::string command;
    GlobalOptions global;
    nlohmann::json params = nlohmann::json::object();   // defaults merged with the file block
};

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<nlohmann::json>> rows;
};

struct ResultRecord {
    std::string schema_version = kSchemaVersion;
    std::string command;
    nlohmann::json parameters = nlohmann::json::object();
    nlohmann::json values = nlohmann::json::object();
    nlohmann::json uncertainties = nlohmann::json::object();
    nlohmann::json provenance = nlohmann::json::object();  // seed, sizes, code version, timestamp
    std::vector<Table> tables;
    bool flagged = false;                     // computed, but some reliability flag is off
    std::vector<std::string> diagnostics;
};

// critical-constants, moments, sublimiting, iterated, spectrum-scan.
const std::vector<std::string>& commands();

// Throws ConfigError for unknown commands.
nlohmann::json default_params(const std::string& command);

// Merges `doc` over the defaults; throws ConfigError on unknown keys or mistyped values.
RunConfig load_config(const std::string& command, const nlohmann::json& doc);
RunConfig load_config_file(const std::string& command, const std::string& path);

ResultRecord cmd_critical_constants(const RunConfig& cfg);
ResultRecord cmd_moments(const RunConfig& cfg);
ResultRecord cmd_sublimiting(const RunConfig& cfg);
ResultRecord cmd_iterated(const RunConfig& cfg);
ResultRecord cmd_spectrum_scan(const RunConfig& cfg);
ResultRecord run(const RunConfig& cfg);

// Validates against tools/result.schema.json.
nlohmann::json to_json(const ResultRecord& r);
ResultRecord record_from_json(const nlohmann::json& j);

// Header row plus one line per row; comma-separated, '.' decimal, shortest round-trip numbers.
std::string to_csv(const Table& t);

// Writes <out>/<command>.json, or <out>/<command>_<table>.csv per table. Returns the paths.
std::vector<std::string> write_outputs(const ResultRecord& r, const GlobalOptions& g);

// Plain-text summary for stdout.
std::string summary(const ResultRecord& r);

// 0 on success, 2 when flagged.
int exit_code(const ResultRecord& r);

}  // namespace bosecrit::cli
