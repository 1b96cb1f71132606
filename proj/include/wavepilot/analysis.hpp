#pragma once

// Post-processing of trajectory records: intensity profiles, waist lines,
// divergence, uncertainty product, a Fresnel diffraction oracle and fringe
// extraction.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wavepilot/core.hpp"
#include "wavepilot/dynamics.hpp"

namespace wavepilot {

struct ProfileSample {
    double x{0.0};
    double intensity{0.0};  // R^2
    double p_x{0.0};
    std::size_t ray{0};
};

struct IntensityProfile {
    double z{0.0};
    std::vector<ProfileSample> samples;  // sorted by x
    std::string provenance;
    std::size_t rays_total{0};

    bool partial() const noexcept { return samples.size() < rays_total; }
};

// Interpolates every ray's snapshot series linearly to the plane z = const.
// Rays that never cross the plane are left out (see partial()).
IntensityProfile intensity_profile(const TrajectoryRecord& record, double z);

// Paraxial Gaussian waist ordinate sqrt(w0^2 + (lambda0 z / (pi w0))^2).
double waist_line(double z, double w0, double lambda0);

// Ray indices launched closest to -w0 and +w0. Throws IdentificationError if
// either lies further than half a launch spacing away.
std::pair<std::size_t, std::size_t> waist_rays(const TrajectoryRecord& record);

struct WaistRow {
    std::size_t step{0};
    double z{0.0};
    double x_minus{0.0};
    double x_plus{0.0};
    double analytic{0.0};
    double error{0.0};  // max of both sides, relative to the analytic value
};

struct WaistComparison {
    std::vector<WaistRow> rows;
    double max_error{0.0};
};

WaistComparison compare_waist(const TrajectoryRecord& record);
inline double waist_error(const TrajectoryRecord& record) { return compare_waist(record).max_error; }

struct SlopeEstimate {
    double slope{0.0};        // fitted asymptote of |x| / z
    double local_slope{0.0};  // dx/dz between the last two snapshots
    double analytic{0.0};     // lambda0 / (pi w0)
    std::size_t points{0};
};

// Asymptotic divergence of the ray launched at launch index `ray`: least
// squares fit of x^2 = a + b z^2 over snapshots with z >= z_min.
SlopeEstimate asymptotic_slope(const TrajectoryRecord& record, std::size_t ray, double z_min);

struct UncertaintyProduct {
    double z{0.0};
    double delta_x{0.0};
    double delta_px{0.0};
    double product{0.0};
    double over_h{0.0};     // product / (2 pi hbar)
    double over_hbar{0.0};  // product / hbar
    bool degenerate{false};
};

// Delta x = 2 w0; Delta p_x is the full p_x range over the rays reaching z.
UncertaintyProduct uncertainty_product(const TrajectoryRecord& record, double z);
// Same with Delta x and Delta p_x as intensity-weighted standard deviations.
UncertaintyProduct uncertainty_product_rms(const TrajectoryRecord& record, double z);

// Fresnel propagation of the launch amplitude to station z, evaluated by
// composite Simpson quadrature with at least `points_per_cycle` samples per
// phase cycle. Intensities use the same normalization as R^2.
std::vector<double> diffraction_oracle(const BeamProfile& profile, double lambda0, double z,
                                       std::span<const double> xs, double points_per_cycle = 20.0);

enum class ExtremumKind { Maximum, Minimum };

struct Extremum {
    double x{0.0};
    double intensity{0.0};
    ExtremumKind kind{ExtremumKind::Maximum};
};

std::vector<Extremum> fringe_extrema(std::span<const double> xs, std::span<const double> intensity);
std::vector<Extremum> fringe_extrema(const IntensityProfile& profile);

// Minima on one side of the axis ordered by distance from it.
std::vector<double> minima_by_side(const std::vector<Extremum>& extrema, bool positive_side);

// Sum over rays of R^2 w |p| for one snapshot, w being Voronoi widths along
// the wavefront.
double total_flux(const Snapshot& snapshot);

std::string_view to_string(ExtremumKind k) noexcept;

}  // namespace wavepilot
