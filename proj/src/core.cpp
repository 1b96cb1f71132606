#include "wavepilot/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavepilot/errors.hpp"

namespace wavepilot {

std::string_view to_string(System s) noexcept {
    switch (s) {
        case System::EM: return "em";
        case System::Quantum: return "quantum";
        case System::Relativistic: return "relativistic";
        case System::Massless: return "massless";
    }
    return "unknown";
}

System parse_system(std::string_view name) {
    if (name == "em") return System::EM;
    if (name == "quantum") return System::Quantum;
    if (name == "relativistic") return System::Relativistic;
    if (name == "massless") return System::Massless;
    throw ConfigError("unknown system '" + std::string(name) + "'");
}

Units Units::for_system(System system, double c) {
    switch (system) {
        case System::EM: return {UnitMode::EM, 1.0, 1.0, 0.0};
        case System::Quantum: return {UnitMode::Quantum, 1.0, 1.0, 1.0};
        case System::Relativistic: return {UnitMode::Relativistic, 1.0, c, 1.0};
        case System::Massless: return {UnitMode::Relativistic, 1.0, c, 0.0};
    }
    return {};
}

double BeamProfile::amplitude(double x) const {
    switch (kind) {
        case ProfileKind::Gaussian: {
            const double u = x / w0;
            return std::exp(-u * u);
        }
        case ProfileKind::SuperGaussian:
            return std::exp(-std::pow(std::abs(x / w0), order));
        case ProfileKind::Table: {
            if (table_x.empty() || x < table_x.front() || x > table_x.back()) return 0.0;
            const auto it = std::upper_bound(table_x.begin(), table_x.end(), x);
            if (it == table_x.end()) return table_amplitude.back();
            const auto hi = static_cast<std::size_t>(it - table_x.begin());
            const std::size_t lo = hi - 1;
            const double t = (x - table_x[lo]) / (table_x[hi] - table_x[lo]);
            return (1.0 - t) * table_amplitude[lo] + t * table_amplitude[hi];
        }
    }
    return 0.0;
}

std::vector<double> BeamProfile::launch_abscissas() const {
    std::vector<double> xs(ray_count);
    const double last = static_cast<double>(ray_count - 1);
    for (std::size_t j = 0; j < ray_count; ++j) {
        // symmetric construction keeps x_j == -x_{N-1-j} bit for bit
        const double u = (2.0 * static_cast<double>(j) - last) / last;
        xs[j] = span * u;
    }
    return xs;
}

void BeamProfile::validate() const {
    if (!(span > 0.0) || !std::isfinite(span)) throw ConfigError("beam.span must be positive");
    if (ray_count < kMinRays)
        throw ConfigError("beam.rays must be at least " + std::to_string(kMinRays));
    switch (kind) {
        case ProfileKind::Gaussian:
            if (!(w0 > 0.0)) throw ConfigError("beam.w0 must be positive");
            break;
        case ProfileKind::SuperGaussian:
            if (!(w0 > 0.0)) throw ConfigError("beam.w0 must be positive");
            if (!(order > 0.0)) throw ConfigError("beam.order must be positive");
            break;
        case ProfileKind::Table: {
            if (table_x.size() != table_amplitude.size())
                throw ConfigError("beam.table abscissas and amplitudes differ in length");
            if (table_x.size() < kMinRays)
                throw ConfigError("beam.table needs at least " + std::to_string(kMinRays) +
                                  " samples for the transverse stencil");
            if (!std::is_sorted(table_x.begin(), table_x.end()) ||
                std::adjacent_find(table_x.begin(), table_x.end()) != table_x.end())
                throw ConfigError("beam.table abscissas must be strictly increasing");
            if (std::any_of(table_amplitude.begin(), table_amplitude.end(),
                            [](double a) { return !(a >= 0.0); }))
                throw ConfigError("beam.table amplitudes must be nonnegative");
            if (table_x.front() > -span || table_x.back() < span)
                throw ConfigError("beam.table does not cover the launch span");
            break;
        }
    }
}

namespace {

FieldSample eval_shape(const UniformField& f, const Vec2&) { return {f.value, {}}; }

FieldSample eval_shape(const QuadraticField& f, const Vec2& p) {
    const double dx = p.x - f.center.x;
    const double dz = p.z - f.center.z;
    return {f.base + 0.5 * f.kx * dx * dx + 0.5 * f.kz * dz * dz, {f.kx * dx, f.kz * dz}};
}

FieldSample eval_shape(const LinearField& f, const Vec2& p) {
    return {f.base + dot(f.slope, p), f.slope};
}

FieldSample eval_shape(const GaussianField& f, const Vec2& p) {
    const Vec2 d = p - f.center;
    const double w2 = f.width * f.width;
    const double g = f.amplitude * std::exp(-norm_sq(d) / w2);
    return {f.base + g, d * (-2.0 * g / w2)};
}

FieldSample eval_shape(const TableField& f, const Vec2& p) {
    if (p.x < f.x_min || p.x > f.x_max || p.z < f.z_min || p.z > f.z_max)
        throw OutOfDomainError("tabulated field queried outside its grid");
    const double hx = (f.x_max - f.x_min) / static_cast<double>(f.nx - 1);
    const double hz = (f.z_max - f.z_min) / static_cast<double>(f.nz - 1);
    const double u = (p.x - f.x_min) / hx;
    const double v = (p.z - f.z_min) / hz;
    const auto i = std::min(static_cast<std::size_t>(u), f.nx - 2);
    const auto k = std::min(static_cast<std::size_t>(v), f.nz - 2);
    const double tx = u - static_cast<double>(i);
    const double tz = v - static_cast<double>(k);
    const auto at = [&](std::size_t a, std::size_t b) { return f.values[b * f.nx + a]; };
    const double f00 = at(i, k), f10 = at(i + 1, k), f01 = at(i, k + 1), f11 = at(i + 1, k + 1);
    const double value = (1 - tx) * (1 - tz) * f00 + tx * (1 - tz) * f10 + (1 - tx) * tz * f01 + tx * tz * f11;
    const double gx = ((1 - tz) * (f10 - f00) + tz * (f11 - f01)) / hx;
    const double gz = ((1 - tx) * (f01 - f00) + tx * (f11 - f10)) / hz;
    return {value, {gx, gz}};
}

}  // namespace

FieldSample eval_medium(const Medium& medium, const Vec2& position) {
    if (!medium.domain.contains(position))
        throw OutOfDomainError("medium queried outside the domain box at (" +
                               std::to_string(position.x) + ", " + std::to_string(position.z) + ")");
    const FieldSample s = std::visit([&](const auto& f) { return eval_shape(f, position); }, medium.shape);
    if (medium.kind == MediumKind::Index && !(s.value > 0.0))
        throw OutOfDomainError("refractive index is not positive at (" + std::to_string(position.x) +
                               ", " + std::to_string(position.z) + ")");
    return s;
}

double de_broglie_wavenumber_sq(double energy, double potential, double rest_mass, System system,
                                const Units& units) {
    const double hbar = units.hbar;
    const double c = units.c;
    double k2 = 0.0;
    switch (system) {
        case System::Quantum:
            k2 = 2.0 * units.mass * (energy - potential) / (hbar * hbar);
            break;
        case System::Relativistic: {
            const double a = (energy - potential) / (hbar * c);
            const double b = rest_mass * c / hbar;
            k2 = a * a - b * b;
            break;
        }
        case System::Massless: {
            const double a = (energy - potential) / (hbar * c);
            k2 = a * a;
            break;
        }
        case System::EM:
            throw ConfigError("de Broglie wavenumber is undefined for EM runs");
    }
    if (k2 < 0.0) throw EvanescentError("ray entered a classically forbidden region");
    return k2;
}

double Scenario::launch_momentum() const { return 2.0 * kPi * units.hbar / lambda0; }

double Scenario::k0() const {
    if (system == System::Massless) return energy() / (units.hbar * units.c);
    return 2.0 * kPi / lambda0;
}

double Scenario::energy() const {
    const double p0 = launch_momentum();
    const double c = units.c;
    switch (system) {
        case System::EM: return c * (2.0 * kPi / lambda0);
        case System::Quantum: {
            const double v0 = medium.kind == MediumKind::Potential ? eval_medium(medium, {}).value : 0.0;
            return p0 * p0 / (2.0 * units.mass) + v0;
        }
        case System::Relativistic: {
            const double v0 = medium.kind == MediumKind::Potential ? eval_medium(medium, {}).value : 0.0;
            const double rest = units.mass * c * c;
            return std::sqrt(p0 * p0 * c * c + rest * rest) + v0;
        }
        case System::Massless: {
            const double v0 = medium.kind == MediumKind::Potential ? eval_medium(medium, {}).value : 0.0;
            return p0 * c + v0;
        }
    }
    return 0.0;
}

double Scenario::energy_scale() const { return energy(); }

double Scenario::amplitude_floor() const {
    double peak = 0.0;
    for (double x : beam.launch_abscissas()) peak = std::max(peak, beam.amplitude(x));
    return regularization.amplitude_floor * peak;
}

double Scenario::launch_speed() const {
    const double p0 = launch_momentum();
    const double c = units.c;
    switch (system) {
        case System::EM: return c;
        case System::Quantum: return p0 / units.mass;
        case System::Relativistic:
        case System::Massless: {
            const double v0 = medium.kind == MediumKind::Potential ? eval_medium(medium, {}).value : 0.0;
            return c * c * p0 / (energy() - v0);
        }
    }
    return 0.0;
}

double Scenario::default_dt() const {
    const double h0 = 2.0 * beam.span / static_cast<double>(beam.ray_count - 1);
    const double p_nyquist = kPi * units.hbar / h0;
    // transverse speed scales like the longitudinal one at fixed |p|
    const double speed = launch_speed() * p_nyquist / launch_momentum();
    return 0.25 * h0 / speed;
}

double Scenario::effective_dt() const { return integration.dt > 0.0 ? integration.dt : default_dt(); }

void Scenario::validate() const {
    beam.validate();
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) throw ConfigError("lambda0 must be positive");
    if (!(units.hbar > 0.0) || !(units.c > 0.0)) throw ConfigError("units.hbar and units.c must be positive");
    const UnitMode expected = Units::for_system(system).mode;
    if (units.mode != expected) throw ConfigError("units do not match the selected system");
    if ((system == System::Quantum || system == System::Relativistic) && !(units.mass > 0.0))
        throw ConfigError("units.mass must be positive");
    if (system == System::Massless && units.mass != 0.0) throw ConfigError("massless runs need units.mass = 0");
    if (system == System::EM && medium.kind != MediumKind::Index)
        throw ConfigError("EM runs need a refractive-index medium");
    if (system != System::EM && medium.kind != MediumKind::Potential)
        throw ConfigError("particle runs need a potential medium");
    if (integration.dt < 0.0 || !std::isfinite(integration.dt)) throw ConfigError("integration.dt must be positive");
    if (integration.snapshot_stride == 0) throw ConfigError("integration.snapshot_stride must be positive");
    if (!(regularization.amplitude_floor > 0.0)) throw ConfigError("regularization.amplitude_floor must be positive");
    if (launch_momentum() <= 0.0) throw ConfigError("launch momentum must be positive");
    if (const auto* table = std::get_if<TableField>(&medium.shape)) {
        if (table->nx < 2 || table->nz < 2 || table->values.size() != table->nx * table->nz ||
            !(table->x_max > table->x_min) || !(table->z_max > table->z_min))
            throw ConfigError("medium table grid is inconsistent");
    }

    // every launch point must be classically allowed
    if (system != System::EM) {
        const double e = energy();
        for (double x : beam.launch_abscissas()) {
            const double v = eval_medium(medium, {x, 0.0}).value;
            try {
                de_broglie_wavenumber_sq(e, v, units.mass, system, units);
            } catch (const EvanescentError&) {
                throw ConfigError("launch point x=" + std::to_string(x) + " lies in a forbidden region");
            }
            if (system == System::Relativistic && !(e - v > units.mass * units.c * units.c))
                throw ConfigError("E - V must exceed the rest energy at launch");
        }
    } else {
        for (double x : beam.launch_abscissas()) eval_medium(medium, {x, 0.0});
    }
}

std::vector<double> voronoi_widths(const std::vector<double>& coords) {
    const std::size_t n = coords.size();
    std::vector<double> widths(n, 0.0);
    if (n < 2) return widths;
    widths.front() = coords[1] - coords[0];
    widths.back() = coords[n - 1] - coords[n - 2];
    for (std::size_t j = 1; j + 1 < n; ++j) widths[j] = 0.5 * (coords[j + 1] - coords[j - 1]);
    return widths;
}

Bundle make_bundle(const BeamProfile& profile, const Scenario& scenario) {
    profile.validate();
    const double p0 = scenario.launch_momentum();
    if (!(p0 > 0.0) || !std::isfinite(p0)) throw ConfigError("launch momentum must be positive");

    Bundle b;
    b.mode = scenario.units.mode;
    const auto xs = profile.launch_abscissas();
    b.rays.reserve(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        RayState r;
        r.position = {xs[j], 0.0};
        r.momentum = {0.0, p0};
        r.amplitude = profile.amplitude(xs[j]);
        r.launch_index = j;
        b.rays.push_back(r);
        b.launch_amplitudes.push_back(r.amplitude);
        b.launch_momentum_norms.push_back(p0);
    }
    b.launch_spacings = voronoi_widths(xs);
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const double mid = 0.5 * (xs[k] + xs[k + 1]);
        b.tube_launch_amplitudes.push_back(profile.amplitude(mid));
        b.tube_launch_widths.push_back(xs[k + 1] - xs[k]);
        b.tube_launch_momenta.push_back(p0);
    }
    b.tube_potentials.assign(xs.size() - 1, 0.0);
    return b;
}

}  // namespace wavepilot
