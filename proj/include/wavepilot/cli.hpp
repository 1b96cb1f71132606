#pragma once

// Batch front-end: run, the analysis commands over a run directory, and
// parameter sweeps.

#include <filesystem>
#include <optional>
#include <string>

#include "wavepilot/config.hpp"
#include "wavepilot/dynamics.hpp"

namespace wavepilot {

enum ExitCode : int { kExitOk = 0, kExitFault = 1, kExitConfig = 2, kExitAnalysis = 3 };

struct CommandOptions {
    std::string config;                 // run, sweep
    std::string record;                 // analysis commands: a run directory
    std::optional<std::string> out;     // output directory
    std::optional<double> z;
    bool quiet{false};
};

int cmd_run(const CommandOptions& opt);
int cmd_compare_waist(const CommandOptions& opt);
int cmd_profile(const CommandOptions& opt);
int cmd_uncertainty(const CommandOptions& opt);
int cmd_fringes(const CommandOptions& opt);
int cmd_sweep(const CommandOptions& opt);

// Analysis writers shared by the commands and by `run` when the
// configuration lists analyses. Each returns a one-line human summary.
std::string write_waist(const std::filesystem::path& dir, const RunConfig& cfg, const TrajectoryRecord& rec);
std::string write_profile(const std::filesystem::path& dir, const RunConfig& cfg, const TrajectoryRecord& rec,
                          const std::vector<double>& stations);
std::string write_uncertainty(const std::filesystem::path& dir, const RunConfig& cfg, const TrajectoryRecord& rec,
                              const std::vector<double>& extra_stations);
std::string write_fringes(const std::filesystem::path& dir, const RunConfig& cfg, const TrajectoryRecord& rec,
                          std::optional<double> z);

// Smallest z reached by every ray in the snapshot.
double common_z(const Snapshot& s);

// Worker-thread cap from WAVEPILOT_THREADS, else the hardware concurrency.
unsigned thread_cap();

int run_cli(int argc, char** argv);

}  // namespace wavepilot
