#pragma once

// On-disk form of a run: trajectories.csv, reports.csv and summary.json,
// each carrying the configuration hash.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "wavepilot/config.hpp"
#include "wavepilot/dynamics.hpp"

namespace wavepilot {

inline constexpr const char* kTrajectoriesFile = "trajectories.csv";
inline constexpr const char* kReportsFile = "reports.csv";
inline constexpr const char* kSummaryFile = "summary.json";

// 17 significant digits.
std::string format_real(double v);

// One-line JSON comment opening every CSV written for this configuration.
std::string header_line(const RunConfig& cfg, const std::string& kind);

void write_trajectories(const std::filesystem::path& file, const RunConfig& cfg, const TrajectoryRecord& rec);
void write_reports(const std::filesystem::path& file, const RunConfig& cfg, const TrajectoryRecord& rec);
nlohmann::json make_summary(const RunConfig& cfg, const TrajectoryRecord& rec, double runtime_seconds);
void write_summary(const std::filesystem::path& file, const nlohmann::json& summary);

struct LoadedRecord {
    RunConfig config;
    TrajectoryRecord record;
    nlohmann::json summary;
};

// Reads a run directory back. Throws Error on hash mismatches between the
// files, and on truncated or malformed trajectories.
LoadedRecord load_record(const std::filesystem::path& dir);

// Row-by-row CSV output with the provenance header already emitted.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, const std::string& header, const std::string& columns);
    CsvWriter& operator<<(const std::string& cell);
    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(std::size_t v);
    void end_row();
    // Flushes and reports write failures.
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::string row_;
    bool first_{true};
};

}  // namespace wavepilot
