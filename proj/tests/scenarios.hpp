#pragma once

// Scenario builders shared by the unit tests and the acceptance driver.

#include <cmath>
#include <cstddef>

#include "wavepilot/core.hpp"

namespace scenarios {

using namespace wavepilot;

inline double rayleigh_length(const Scenario& sc) { return kPi * sc.beam.w0 * sc.beam.w0 / sc.lambda0; }

// Integrate until the axial ray reaches z_final with a step no larger than
// dt_factor times the default, taking about `snapshots` snapshots.
inline void set_length(Scenario& sc, double z_final, double dt_factor = 1.0, std::size_t snapshots = 60) {
    const double t_final = z_final / sc.launch_speed();
    const double dt = sc.default_dt() * dt_factor;
    sc.integration.n_steps = static_cast<std::size_t>(std::ceil(t_final / dt));
    sc.integration.dt = t_final / static_cast<double>(sc.integration.n_steps);
    sc.integration.snapshot_stride = std::max<std::size_t>(1, sc.integration.n_steps / snapshots);
}

// Gaussian beam, lambda0/w0 = 2e-4, spacing 0.02 w0 so that rays sit at +-w0.
inline Scenario gaussian(double span = 3.0, double rayleighs = 3.0, System system = System::Quantum) {
    Scenario sc;
    sc.system = system;
    sc.units = Units::for_system(system);
    sc.medium = system == System::EM ? Medium::vacuum_index() : Medium::free_space();
    sc.beam.kind = ProfileKind::Gaussian;
    sc.beam.span = span;
    sc.beam.ray_count = static_cast<std::size_t>(std::lround(2.0 * span / 0.02)) + 1;
    set_length(sc, rayleighs * rayleigh_length(sc));
    return sc;
}

// Super-Gaussian slit of order 4 traced to three Rayleigh lengths.
inline Scenario slit() {
    Scenario sc;
    sc.units = Units::for_system(System::Quantum);
    sc.beam.kind = ProfileKind::SuperGaussian;
    sc.beam.order = 4.0;
    sc.beam.span = 2.2;
    sc.beam.ray_count = 601;
    sc.regularization.amplitude_floor = 1e-12;
    set_length(sc, 3.0 * rayleigh_length(sc), 4.0, 30);
    return sc;
}

// Eikonal rays in V = x^2 / 2 (unit frequency).
inline Scenario oscillator(double dt, double t_final) {
    Scenario sc;
    sc.units = Units::for_system(System::Quantum);
    sc.medium = Medium{MediumKind::Potential, QuadraticField{0.0, 1.0, 0.0, {}}, {}};
    sc.beam.ray_count = 5;
    sc.beam.span = 1.0;
    sc.wave_potential_enabled = false;
    sc.integration.n_steps = static_cast<std::size_t>(std::lround(t_final / dt));
    sc.integration.dt = t_final / static_cast<double>(sc.integration.n_steps);
    sc.integration.snapshot_stride = sc.integration.n_steps;
    return sc;
}

}  // namespace scenarios
