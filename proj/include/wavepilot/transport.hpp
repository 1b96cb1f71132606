#pragma once

// Wavefront geometry and the amplitude closure that couples the rays: tube
// flux conservation, transverse Laplacian of the amplitude along the front,
// and the wave potential with its tangential gradient.

#include <cstddef>
#include <span>
#include <vector>

#include "wavepilot/core.hpp"

namespace wavepilot {

struct WavefrontFrame {
    std::vector<double> arc_coords;  // cumulative arc length, starts at 0
    std::vector<double> segments;    // |r_{j+1} - r_j|, one fewer than rays
    std::vector<double> spacings;    // Voronoi tube widths
    std::vector<Vec2> tangents;      // point towards increasing launch index
    std::vector<Vec2> normals;       // unit momentum directions

    std::size_t size() const noexcept { return arc_coords.size(); }
};

// Throws CrossingFault when neighbouring rays are out of order along the front.
WavefrontFrame build_frame(const Bundle& bundle);

// R_j = R_j(0) sqrt(w_j(0) |p_j(0)| / (w_j |p_j|)), which holds the tube flux
// R^2 w |p| at its launch value.
std::vector<double> transport_amplitude(const Bundle& bundle, const WavefrontFrame& frame);

// Second derivative of the amplitude with respect to arc length.
std::vector<double> transverse_laplacian(const WavefrontFrame& frame, std::span<const double> amplitudes,
                                         EdgePolicy policy = EdgePolicy::CopyInterior,
                                         StencilForm form = StencilForm::Direct, double amplitude_floor = 0.0);

struct WavePotentialSample {
    std::vector<double> values;
    std::size_t clamp_count{0};
};

// -coef * lap / R with coef = c/2k0 (EM), hbar^2/2m (quantum), hbar^2 c^2/2E
// (relativistic) or hbar c/2k0 (massless). Amplitudes below the floor are
// clamped before the division. Eikonal runs return zeros.
WavePotentialSample wave_potential(const Scenario& scenario, std::span<const double> laplacians,
                                   std::span<const double> amplitudes);

double wave_potential_coefficient(const Scenario& scenario);

// Arc-length derivative of the potential, laid along each ray's tangent so
// the result is orthogonal to that ray's momentum.
std::vector<Vec2> wave_potential_gradient(const WavefrontFrame& frame, std::span<const double> potentials);

// Tube flux R^2 w |p| of every ray.
std::vector<double> tube_fluxes(const Bundle& bundle, const WavefrontFrame& frame);

// Staggered layout: tube k sits between rays k and k+1. The tube frame has
// the tube midpoints as arc coordinates and the ray separations as widths.
WavefrontFrame tube_frame(const WavefrontFrame& rays);

// Tube amplitudes from conservation of R^2 |r_{k+1} - r_k| (|p_k| + |p_{k+1}|) / 2.
std::vector<double> transport_tube_amplitudes(const Bundle& bundle, const WavefrontFrame& rays);

// Ray-centred gradient of a tube-centred potential: interior rays use the
// difference of the two adjacent tubes, end rays a one-sided three-tube
// stencil. Directed along the ray tangents.
std::vector<Vec2> staggered_gradient(const WavefrontFrame& rays, const WavefrontFrame& tubes,
                                     std::span<const double> tube_values);

// Linear interpolation of tube values onto the rays.
std::vector<double> tubes_to_rays(const WavefrontFrame& rays, const WavefrontFrame& tubes,
                                  std::span<const double> tube_values);

struct CouplingField {
    std::vector<double> amplitudes;       // per ray, flux transported
    std::vector<double> ray_potentials;   // W or Q sampled at each ray
    std::vector<double> tube_potentials;  // staggered layout only
    std::size_t clamp_count{0};
};

// Amplitudes and wave potential of a bundle on its current front, using the
// scenario's discretization, stencil form and edge policy.
CouplingField evaluate_coupling(const Scenario& scenario, const Bundle& bundle, const WavefrontFrame& frame);

// Gradient of the wave potential currently stored in the bundle.
std::vector<Vec2> coupling_gradient(const Scenario& scenario, const Bundle& bundle, const WavefrontFrame& frame);

}  // namespace wavepilot
