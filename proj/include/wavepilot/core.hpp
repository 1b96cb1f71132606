#pragma once

// Domain types shared by every stage of a run: unit conventions, media,
// beam profiles, ray bundles and the scenario that ties them together.

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wavepilot/vec2.hpp"

namespace wavepilot {

inline constexpr double kPi = 3.14159265358979323846;

// Which Hamiltonian system drives the rays.
enum class System { EM, Quantum, Relativistic, Massless };

enum class UnitMode { EM, Quantum, Relativistic };

std::string_view to_string(System s) noexcept;
System parse_system(std::string_view name);

// Normalization constants. Lengths are always in units of the beam waist w0.
// EM runs fix c = 1; quantum runs fix hbar = m = 1; relativistic runs fix
// hbar = m0 = 1 and leave c free so that p0 / (m0 c) can be chosen.
struct Units {
    UnitMode mode{UnitMode::Quantum};
    double hbar{1.0};
    double c{1.0};
    double mass{1.0};  // m for quantum runs, m0 for relativistic ones

    static Units for_system(System system, double c = 1.0);

    friend bool operator==(const Units&, const Units&) = default;
};

struct RayState {
    Vec2 position;
    Vec2 momentum;  // hbar k in EM and massless runs
    double amplitude{0.0};
    double wave_potential{0.0};  // W in EM runs, Q otherwise
    std::size_t launch_index{0};
};

// Rays sharing one wavefront, ordered by launch abscissa.
struct Bundle {
    UnitMode mode{UnitMode::Quantum};
    std::vector<RayState> rays;
    std::vector<double> launch_spacings;
    std::vector<double> launch_amplitudes;
    std::vector<double> launch_momentum_norms;
    // tubes between rays j and j+1
    std::vector<double> tube_launch_amplitudes;
    std::vector<double> tube_launch_widths;
    std::vector<double> tube_launch_momenta;
    std::vector<double> tube_potentials;
    double time{0.0};
    std::size_t step_count{0};

    std::size_t size() const noexcept { return rays.size(); }
};

enum class ProfileKind { Gaussian, SuperGaussian, Table };

struct BeamProfile {
    ProfileKind kind{ProfileKind::Gaussian};
    double w0{1.0};
    double order{4.0};  // super-Gaussian exponent: exp(-|x/w0|^order)
    std::vector<double> table_x;
    std::vector<double> table_amplitude;
    double span{3.0};
    std::size_t ray_count{201};

    static constexpr std::size_t kMinRays = 5;

    // Launch amplitude at transverse coordinate x.
    double amplitude(double x) const;
    // Abscissas of the launch grid on [-span, span].
    std::vector<double> launch_abscissas() const;
    void validate() const;
};

enum class MediumKind { Index, Potential };

struct UniformField {
    double value{0.0};
};

// base + kx (x - x0)^2 / 2 + kz (z - z0)^2 / 2
struct QuadraticField {
    double base{0.0};
    double kx{0.0};
    double kz{0.0};
    Vec2 center;
};

struct LinearField {
    double base{0.0};
    Vec2 slope;
};

// base + amplitude * exp(-|r - center|^2 / width^2)
struct GaussianField {
    double base{0.0};
    double amplitude{0.0};
    Vec2 center;
    double width{1.0};
};

// Regular grid, bilinear interpolation, row-major with x fastest.
struct TableField {
    double x_min{0.0};
    double x_max{1.0};
    double z_min{0.0};
    double z_max{1.0};
    std::size_t nx{2};
    std::size_t nz{2};
    std::vector<double> values;
};

using FieldShape = std::variant<UniformField, QuadraticField, LinearField, GaussianField, TableField>;

struct DomainBox {
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    double x_min{-kInf};
    double x_max{kInf};
    double z_min{-kInf};
    double z_max{kInf};

    bool contains(const Vec2& p) const noexcept {
        return p.x >= x_min && p.x <= x_max && p.z >= z_min && p.z <= z_max;
    }
};

struct FieldSample {
    double value{0.0};
    Vec2 gradient;
};

// Refractive index n(x, z) or potential energy V(x, z).
struct Medium {
    MediumKind kind{MediumKind::Potential};
    FieldShape shape{UniformField{0.0}};
    DomainBox domain;

    static Medium vacuum_index() { return {MediumKind::Index, UniformField{1.0}, {}}; }
    static Medium free_space() { return {MediumKind::Potential, UniformField{0.0}, {}}; }
};

FieldSample eval_medium(const Medium& medium, const Vec2& position);

enum class EdgePolicy { CopyInterior, OneSided };

// How the transverse Laplacian is sampled: second differences of R itself,
// or of ln R via lap R / R = (ln R)'' + ((ln R)')^2.
enum class StencilForm { Direct, Logarithmic };

// Where the wave potential lives: on the rays themselves (Voronoi tubes), or
// on the tubes between neighbouring rays with forces from midpoint differences.
enum class Discretization { Staggered, Collocated };

struct Integration {
    double dt{0.0};  // 0 selects the default step
    std::size_t n_steps{0};
    std::size_t snapshot_stride{1};
};

struct Regularization {
    double amplitude_floor{1e-8};  // relative to the largest launch amplitude
    EdgePolicy edge_policy{EdgePolicy::CopyInterior};
    StencilForm stencil_form{StencilForm::Logarithmic};
    Discretization discretization{Discretization::Staggered};
};

struct Scenario {
    System system{System::Quantum};
    Units units;
    Medium medium{Medium::free_space()};
    BeamProfile beam;
    double lambda0{2e-4};  // launch wavelength in units of w0
    Integration integration;
    bool wave_potential_enabled{true};
    Regularization regularization;

    // p0 = 2 pi hbar / lambda0, the launch momentum of every ray.
    double launch_momentum() const;
    // Vacuum wavenumber driving the EM-form equations (EM and massless runs).
    double k0() const;
    // Total energy E for particle runs; omega = c k0 for EM runs.
    double energy() const;
    // Characteristic energy used to normalize Hamiltonian drift.
    double energy_scale() const;
    // Absolute amplitude floor for the wave-potential division.
    double amplitude_floor() const;
    // Default step: a ray moving with the grid Nyquist transverse momentum
    // advances a quarter of the launch spacing.
    double default_dt() const;
    double effective_dt() const;
    // Speed of a free ray at launch.
    double launch_speed() const;

    void validate() const;
};

// Squared wavenumber of the matter wave at energy E in potential V.
// Throws EvanescentError when the result is negative.
double de_broglie_wavenumber_sq(double energy, double potential, double rest_mass, System system,
                                const Units& units);

Bundle make_bundle(const BeamProfile& profile, const Scenario& scenario);

// Voronoi widths of ordered coordinates: half the distance between the two
// neighbours, full distance to the single neighbour at the ends.
std::vector<double> voronoi_widths(const std::vector<double>& coords);

}  // namespace wavepilot
