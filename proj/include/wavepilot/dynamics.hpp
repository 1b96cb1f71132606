#pragma once

// Hamiltonian ray/particle systems and the synchronized kick-drift-kick
// stepper that advances a whole bundle.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wavepilot/core.hpp"
#include "wavepilot/transport.hpp"

namespace wavepilot {

struct StepReport {
    std::size_t step{0};
    double time{0.0};
    std::vector<double> hamiltonian;  // filled on snapshot steps only
    double max_drift{0.0};            // max_j |H_j - H_j(0)| / max(|H_j(0)|, E)
    double max_perpendicularity{0.0};  // max_j |grad Q_j . p_j| / (|grad Q_j| |p_j|)
    double max_flux_error{0.0};
    double max_momentum_drift{0.0};
    std::size_t clamp_count{0};
    bool crossing{false};
};

struct Snapshot {
    std::size_t step{0};
    double time{0.0};
    std::vector<RayState> rays;
};

struct FaultRecord {
    std::string kind;
    std::string message;
    std::size_t step{0};
};

struct TrajectoryRecord {
    Scenario scenario;
    std::vector<double> launch_spacings;
    std::vector<Snapshot> snapshots;
    std::vector<StepReport> reports;
    std::optional<FaultRecord> fault;

    const Snapshot& launch() const { return snapshots.front(); }
    const Snapshot& last() const { return snapshots.back(); }
};

// Hamiltonian of one ray given the medium sample at its position:
// EM/massless: hbar (c/2k0)(k^2 - (n k0)^2) + W, on shell 0;
// quantum: p^2/2m + V + Q; relativistic: V + sqrt((pc)^2 + (m0 c^2)^2 + 2 E Q).
double hamiltonian(const RayState& ray, const Scenario& scenario, const FieldSample& medium);

// Recomputes amplitudes by flux transport and the wave potential in place.
// Returns the number of clamped amplitudes.
std::size_t refresh_wave_potential(Bundle& bundle, const Scenario& scenario);

struct StepDiagnostics {
    double max_perpendicularity{0.0};
    std::size_t clamp_count{0};
    bool crossing{false};  // eikonal runs only; coupled runs fault instead
};

struct StepResult {
    Bundle bundle;
    StepDiagnostics diagnostics;
};

StepResult advance(const Bundle& bundle, const Scenario& scenario, double dt);

inline Bundle step(const Bundle& bundle, const Scenario& scenario, double dt) {
    return advance(bundle, scenario, dt).bundle;
}

// Launches the bundle and integrates the configured number of steps. Faults
// stop the run; the record then holds everything up to the fault.
TrajectoryRecord run(const Scenario& scenario);

// Velocity dr/dt of a ray with momentum p at a point where the medium
// sample is `medium`.
Vec2 ray_velocity(const Vec2& momentum, const Scenario& scenario, const FieldSample& medium);

}  // namespace wavepilot
