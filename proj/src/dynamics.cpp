#include "wavepilot/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <typeinfo>

#include "wavepilot/errors.hpp"

namespace wavepilot {

namespace {

bool uses_wave_form(System s) { return s == System::EM || s == System::Massless; }

// Refractive index and its gradient seen by an EM-form ray. Massless
// particles map onto the EM equations with n = 1 - V/E.
FieldSample index_sample(const Scenario& sc, const FieldSample& medium) {
    if (sc.system == System::EM) return medium;
    const double e = sc.energy();
    return {1.0 - medium.value / e, medium.gradient * (-1.0 / e)};
}

void check_allowed(const Scenario& sc, const FieldSample& medium) {
    if (sc.system == System::EM) return;
    de_broglie_wavenumber_sq(sc.energy(), medium.value, sc.units.mass, sc.system, sc.units);
    if (sc.system == System::Relativistic && !(sc.energy() - medium.value > 0.0))
        throw EvanescentError("E - V is not positive");
}

// Force from the medium alone.
Vec2 external_force(const Scenario& sc, const FieldSample& medium) {
    if (uses_wave_form(sc.system)) {
        const FieldSample n = index_sample(sc, medium);
        const double k0 = sc.k0();
        return n.gradient * (sc.units.hbar * sc.units.c * k0 * n.value);
    }
    return -medium.gradient;
}

// Multiplier of -grad Q in the momentum equation.
double coupling_factor(const Scenario& sc, const FieldSample& medium) {
    if (sc.system == System::Relativistic) return 1.0 / (1.0 - medium.value / sc.energy());
    return 1.0;
}

struct ForceField {
    std::vector<Vec2> force;
    double max_perpendicularity{0.0};
};

ForceField evaluate_forces(const Bundle& b, const Scenario& sc, const WavefrontFrame* frame) {
    const std::size_t n = b.size();
    ForceField out;
    out.force.resize(n);
    std::vector<Vec2> grad_q;
    if (sc.wave_potential_enabled) grad_q = coupling_gradient(sc, b, *frame);
    for (std::size_t j = 0; j < n; ++j) {
        const RayState& r = b.rays[j];
        const FieldSample m = eval_medium(sc.medium, r.position);
        check_allowed(sc, m);
        Vec2 f = external_force(sc, m);
        if (sc.wave_potential_enabled) {
            const Vec2& g = grad_q[j];
            f -= g * coupling_factor(sc, m);
            const double gn = norm(g);
            if (gn > 0.0) {
                const double perp = std::abs(dot(g, r.momentum)) / (gn * norm(r.momentum));
                out.max_perpendicularity = std::max(out.max_perpendicularity, perp);
            }
        }
        out.force[j] = f;
    }
    return out;
}

void kick(Bundle& b, const std::vector<Vec2>& force, double half_dt) {
    for (std::size_t j = 0; j < b.size(); ++j) b.rays[j].momentum = b.rays[j].momentum + force[j] * half_dt;
}

void drift(Bundle& b, const Scenario& sc, double dt) {
    for (auto& r : b.rays) {
        const FieldSample m = eval_medium(sc.medium, r.position);
        check_allowed(sc, m);
        r.position = r.position + ray_velocity(r.momentum, sc, m) * dt;
    }
}

std::size_t refresh_with_frame(Bundle& b, const Scenario& sc, const WavefrontFrame& frame) {
    CouplingField c = evaluate_coupling(sc, b, frame);
    for (std::size_t j = 0; j < b.size(); ++j) {
        b.rays[j].amplitude = c.amplitudes[j];
        b.rays[j].wave_potential = c.ray_potentials[j];
    }
    b.tube_potentials = std::move(c.tube_potentials);
    return c.clamp_count;
}

std::string fault_kind(const Error& e) {
    if (dynamic_cast<const CrossingFault*>(&e)) return "crossing";
    if (dynamic_cast<const EvanescentError*>(&e)) return "evanescent";
    if (dynamic_cast<const OutOfDomainError*>(&e)) return "out_of_domain";
    if (dynamic_cast<const StencilError*>(&e)) return "stencil";
    return "error";
}

}  // namespace

Vec2 ray_velocity(const Vec2& momentum, const Scenario& sc, const FieldSample& medium) {
    const Units& u = sc.units;
    switch (sc.system) {
        case System::Quantum: return momentum * (1.0 / u.mass);
        case System::Relativistic: return momentum * (u.c * u.c / (sc.energy() - medium.value));
        case System::EM:
        case System::Massless: return momentum * (u.c / (u.hbar * sc.k0()));
    }
    return {};
}

double hamiltonian(const RayState& ray, const Scenario& sc, const FieldSample& medium) {
    const Units& u = sc.units;
    const double p2 = norm_sq(ray.momentum);
    switch (sc.system) {
        case System::Quantum: return p2 / (2.0 * u.mass) + medium.value + ray.wave_potential;
        case System::Relativistic: {
            const double rest = u.mass * u.c * u.c;
            const double radicand = p2 * u.c * u.c + rest * rest + 2.0 * sc.energy() * ray.wave_potential;
            if (radicand < 0.0) throw EvanescentError("negative radicand in the relativistic Hamiltonian");
            return medium.value + std::sqrt(radicand);
        }
        case System::EM:
        case System::Massless: {
            const double k0 = sc.k0();
            const double n = index_sample(sc, medium).value;
            const double k2 = p2 / (u.hbar * u.hbar);
            return u.hbar * (u.c / (2.0 * k0)) * (k2 - (n * k0) * (n * k0)) + ray.wave_potential;
        }
    }
    return 0.0;
}

std::size_t refresh_wave_potential(Bundle& bundle, const Scenario& scenario) {
    const WavefrontFrame frame = build_frame(bundle);
    return refresh_with_frame(bundle, scenario, frame);
}

StepResult advance(const Bundle& bundle, const Scenario& sc, double dt) {
    if (bundle.mode != sc.units.mode) throw ConfigError("bundle and scenario use different unit modes");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");

    StepResult res{bundle, {}};
    Bundle& b = res.bundle;
    const double half = 0.5 * dt;

    std::optional<WavefrontFrame> frame;
    if (sc.wave_potential_enabled) frame = build_frame(b);
    const ForceField f0 = evaluate_forces(b, sc, frame ? &*frame : nullptr);
    kick(b, f0.force, half);
    drift(b, sc, dt);
    b.time += dt;
    b.step_count += 1;

    if (!sc.wave_potential_enabled) {
        // uncoupled rays may legitimately cross (caustics); amplitudes are
        // then frozen at their last well-defined values
        const ForceField f1 = evaluate_forces(b, sc, nullptr);
        kick(b, f1.force, half);
        try {
            const WavefrontFrame fin = build_frame(b);
            refresh_with_frame(b, sc, fin);
        } catch (const CrossingFault&) {
            res.diagnostics.crossing = true;
        }
        return res;
    }

    // amplitudes and wave potential on the new front, then the closing kick
    WavefrontFrame mid = build_frame(b);
    res.diagnostics.clamp_count = refresh_with_frame(b, sc, mid);
    const ForceField f1 = evaluate_forces(b, sc, &mid);
    kick(b, f1.force, half);

    // leave amplitudes and potential consistent with the final momenta
    const WavefrontFrame fin = build_frame(b);
    refresh_with_frame(b, sc, fin);

    res.diagnostics.max_perpendicularity = std::max(f0.max_perpendicularity, f1.max_perpendicularity);
    return res;
}

TrajectoryRecord run(const Scenario& scenario) {
    scenario.validate();
    TrajectoryRecord rec;
    rec.scenario = scenario;

    Bundle b = make_bundle(scenario.beam, scenario);
    refresh_wave_potential(b, scenario);
    rec.launch_spacings = b.launch_spacings;

    const std::size_t n = b.size();
    std::vector<double> h0(n);
    for (std::size_t j = 0; j < n; ++j)
        h0[j] = hamiltonian(b.rays[j], scenario, eval_medium(scenario.medium, b.rays[j].position));
    const double scale = std::abs(scenario.energy_scale());

    rec.snapshots.push_back({0, 0.0, b.rays});

    const double dt = scenario.effective_dt();
    const std::size_t stride = scenario.integration.snapshot_stride;
    for (std::size_t s = 1; s <= scenario.integration.n_steps; ++s) {
        StepResult res;
        try {
            res = advance(b, scenario, dt);
        } catch (const Error& e) {
            if (rec.snapshots.back().step != b.step_count) rec.snapshots.push_back({b.step_count, b.time, b.rays});
            rec.fault = FaultRecord{fault_kind(e), e.what(), s};
            StepReport rep;
            rep.step = s;
            rep.time = b.time + dt;
            rep.crossing = dynamic_cast<const CrossingFault*>(&e) != nullptr;
            rec.reports.push_back(std::move(rep));
            break;
        }
        b = std::move(res.bundle);

        const bool snap = s % stride == 0 || s == scenario.integration.n_steps;
        StepReport rep;
        rep.step = s;
        rep.time = b.time;
        rep.max_perpendicularity = res.diagnostics.max_perpendicularity;
        rep.clamp_count = res.diagnostics.clamp_count;
        rep.crossing = res.diagnostics.crossing;

        std::optional<WavefrontFrame> frame;
        if (!rep.crossing) frame = build_frame(b);
        if (snap) rep.hamiltonian.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const RayState& r = b.rays[j];
            const double h = hamiltonian(r, scenario, eval_medium(scenario.medium, r.position));
            if (snap) rep.hamiltonian[j] = h;
            rep.max_drift = std::max(rep.max_drift, std::abs(h - h0[j]) / std::max(std::abs(h0[j]), scale));
            const double pn = norm(r.momentum);
            const double p0 = b.launch_momentum_norms[j];
            rep.max_momentum_drift = std::max(rep.max_momentum_drift, std::abs(pn - p0) / p0);
            if (!frame) continue;
            const double flux = r.amplitude * r.amplitude * frame->spacings[j] * pn;
            const double flux0 = b.launch_amplitudes[j] * b.launch_amplitudes[j] * b.launch_spacings[j] * p0;
            if (flux0 > 0.0) rep.max_flux_error = std::max(rep.max_flux_error, std::abs(flux - flux0) / flux0);
        }
        rec.reports.push_back(std::move(rep));
        if (snap) rec.snapshots.push_back({s, b.time, b.rays});
    }
    return rec;
}

}  // namespace wavepilot
