#include "wavepilot/transport.hpp"

#include <array>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wavepilot/errors.hpp"

namespace wavepilot {

WavefrontFrame build_frame(const Bundle& bundle) {
    const std::size_t n = bundle.size();
    WavefrontFrame f;
    f.arc_coords.assign(n, 0.0);
    f.spacings.assign(n, 0.0);
    f.tangents.resize(n);
    f.normals.resize(n);
    if (n == 0) return f;
    f.segments.assign(n - 1, 0.0);

    for (std::size_t j = 0; j < n; ++j) {
        const Vec2& p = bundle.rays[j].momentum;
        const double pn = norm(p);
        if (!(pn > 0.0)) throw EvanescentError("ray " + std::to_string(j) + " has zero momentum");
        const Vec2 nrm{p.x / pn, p.z / pn};
        f.normals[j] = nrm;
        f.tangents[j] = {nrm.z, -nrm.x};
    }

    for (std::size_t j = 0; j + 1 < n; ++j) {
        const auto& a = bundle.rays[j];
        const auto& b = bundle.rays[j + 1];
        const Vec2 d = b.position - a.position;
        const double len = norm(d);
        if (b.launch_index <= a.launch_index || !(len > 0.0) || !(dot(d, f.tangents[j]) > 0.0) ||
            !(dot(d, f.tangents[j + 1]) > 0.0))
            throw CrossingFault(bundle.step_count, j, j + 1);
        f.segments[j] = len;
        f.arc_coords[j + 1] = f.arc_coords[j] + len;
    }

    if (n >= 2) {
        f.spacings.front() = f.segments.front();
        f.spacings.back() = f.segments.back();
        for (std::size_t j = 1; j + 1 < n; ++j) f.spacings[j] = 0.5 * (f.segments[j - 1] + f.segments[j]);
    }
    return f;
}

std::vector<double> transport_amplitude(const Bundle& bundle, const WavefrontFrame& frame) {
    const std::size_t n = bundle.size();
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double w = frame.spacings[j];
        if (!(w > 0.0)) throw CrossingFault(bundle.step_count, j == 0 ? 0 : j - 1, j);
        const double ratio = (bundle.launch_spacings[j] * bundle.launch_momentum_norms[j]) /
                             (w * norm(bundle.rays[j].momentum));
        r[j] = bundle.launch_amplitudes[j] * std::sqrt(ratio);
    }
    return r;
}

namespace {

// Fornberg weights for the m-th derivative at x0 from the given nodes.
template <std::size_t N>
std::array<double, N> fornberg_weights(const std::array<double, N>& nodes, double x0, int m) {
    std::array<std::array<double, N>, N> c{};
    std::array<std::array<double, N>, N> prev{};
    // c[j][k]: weight of node j for derivative k
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < N; ++i) {
        prev = c;
        const int mn = std::min<int>(static_cast<int>(i), m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * prev[i - 1][k - 1] - c5 * prev[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * prev[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::array<double, N> w{};
    for (std::size_t j = 0; j < N; ++j) w[j] = c[j][static_cast<std::size_t>(m)];
    return w;
}

// Derivative of order m at an end ray from `points` rays on that side.
double one_sided(const WavefrontFrame& frame, std::span<const double> f, std::size_t end, int m,
                 std::size_t points = 4) {
    const std::size_t n = f.size();
    const auto& s = frame.arc_coords;
    const auto idx = [&](std::size_t k) { return end == 0 ? k : n - 1 - k; };
    double out = 0.0;
    if (points == 3) {
        const std::array<double, 3> nodes{s[idx(0)], s[idx(1)], s[idx(2)]};
        const auto w = fornberg_weights(nodes, s[end], m);
        for (std::size_t k = 0; k < 3; ++k) out += w[k] * f[idx(k)];
    } else {
        const std::array<double, 4> nodes{s[idx(0)], s[idx(1)], s[idx(2)], s[idx(3)]};
        const auto w = fornberg_weights(nodes, s[end], m);
        for (std::size_t k = 0; k < 4; ++k) out += w[k] * f[idx(k)];
    }
    return out;
}

std::vector<double> direct_laplacian(const WavefrontFrame& frame, std::span<const double> r, EdgePolicy policy) {
    const std::size_t n = r.size();
    std::vector<double> lap(n, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double h1 = frame.segments[j - 1];
        const double h2 = frame.segments[j];
        lap[j] = 2.0 * (h2 * r[j - 1] - (h1 + h2) * r[j] + h1 * r[j + 1]) / (h1 * h2 * (h1 + h2));
    }
    switch (policy) {
        case EdgePolicy::CopyInterior:
            lap.front() = lap[1];
            lap.back() = lap[n - 2];
            break;
        case EdgePolicy::OneSided:
            lap.front() = one_sided(frame, r, 0, 2);
            lap.back() = one_sided(frame, r, n - 1, 2);
            break;
    }
    return lap;
}

// lap R = R ((ln R)'' + ((ln R)')^2); exact on Gaussian amplitudes.
std::vector<double> logarithmic_laplacian(const WavefrontFrame& frame, std::span<const double> r,
                                          EdgePolicy policy, double floor) {
    const std::size_t n = r.size();
    std::vector<double> lr(n);
    for (std::size_t j = 0; j < n; ++j) lr[j] = std::log(std::max(r[j], floor));

    std::vector<double> d1(n, 0.0), d2(n, 0.0);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double h1 = frame.segments[j - 1];
        const double h2 = frame.segments[j];
        const double den = h1 * h2 * (h1 + h2);
        d2[j] = 2.0 * (h2 * lr[j - 1] - (h1 + h2) * lr[j] + h1 * lr[j + 1]) / den;
        d1[j] = (h1 * h1 * lr[j + 1] - h2 * h2 * lr[j - 1] + (h2 * h2 - h1 * h1) * lr[j]) / den;
    }
    d1.front() = one_sided(frame, lr, 0, 1, 3);
    d1.back() = one_sided(frame, lr, n - 1, 1, 3);
    switch (policy) {
        case EdgePolicy::CopyInterior:
            d2.front() = d2[1];
            d2.back() = d2[n - 2];
            break;
        case EdgePolicy::OneSided:
            d2.front() = one_sided(frame, lr, 0, 2);
            d2.back() = one_sided(frame, lr, n - 1, 2);
            break;
    }
    std::vector<double> lap(n);
    for (std::size_t j = 0; j < n; ++j) lap[j] = r[j] * (d2[j] + d1[j] * d1[j]);
    return lap;
}

}  // namespace

namespace {

std::vector<double> laplacian_impl(const WavefrontFrame& frame, std::span<const double> amplitudes,
                                   EdgePolicy policy, StencilForm form, double amplitude_floor,
                                   std::size_t min_points) {
    const std::size_t n = amplitudes.size();
    if (n < min_points || frame.size() != n)
        throw StencilError("transverse Laplacian needs at least " + std::to_string(min_points) +
                           " samples, got " + std::to_string(n));
    if (form == StencilForm::Logarithmic) {
        const double floor = amplitude_floor > 0.0 ? amplitude_floor : std::numeric_limits<double>::min();
        return logarithmic_laplacian(frame, amplitudes, policy, floor);
    }
    return direct_laplacian(frame, amplitudes, policy);
}

}  // namespace

std::vector<double> transverse_laplacian(const WavefrontFrame& frame, std::span<const double> amplitudes,
                                         EdgePolicy policy, StencilForm form, double amplitude_floor) {
    return laplacian_impl(frame, amplitudes, policy, form, amplitude_floor, BeamProfile::kMinRays);
}

double wave_potential_coefficient(const Scenario& scenario) {
    const Units& u = scenario.units;
    switch (scenario.system) {
        case System::EM: return u.c / (2.0 * scenario.k0());
        case System::Quantum: return u.hbar * u.hbar / (2.0 * u.mass);
        case System::Relativistic: return u.hbar * u.hbar * u.c * u.c / (2.0 * scenario.energy());
        case System::Massless: return u.hbar * u.c / (2.0 * scenario.k0());
    }
    return 0.0;
}

WavePotentialSample wave_potential(const Scenario& scenario, std::span<const double> laplacians,
                                   std::span<const double> amplitudes) {
    const std::size_t n = amplitudes.size();
    WavePotentialSample out;
    out.values.assign(n, 0.0);
    if (!scenario.wave_potential_enabled) return out;

    const double coef = wave_potential_coefficient(scenario);
    const double floor = scenario.amplitude_floor();
    for (std::size_t j = 0; j < n; ++j) {
        double r = amplitudes[j];
        if (r < floor) {
            r = floor;
            ++out.clamp_count;
        }
        out.values[j] = -coef * laplacians[j] / r;
    }
    return out;
}

std::vector<Vec2> wave_potential_gradient(const WavefrontFrame& frame, std::span<const double> potentials) {
    const std::size_t n = potentials.size();
    if (frame.size() != n) throw StencilError("potentials do not match the frame");
    std::vector<Vec2> grad(n);
    if (n < 2) return grad;

    std::vector<double> d(n, 0.0);
    if (n >= 3) {
        d.front() = one_sided(frame, potentials, 0, 1, 3);
        d.back() = one_sided(frame, potentials, n - 1, 1, 3);
    } else {
        d.front() = d.back() = (potentials[1] - potentials[0]) / frame.segments.front();
    }
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double h1 = frame.segments[j - 1];
        const double h2 = frame.segments[j];
        d[j] = (h1 * h1 * potentials[j + 1] - h2 * h2 * potentials[j - 1] + (h2 * h2 - h1 * h1) * potentials[j]) /
               (h1 * h2 * (h1 + h2));
    }
    for (std::size_t j = 0; j < n; ++j) grad[j] = frame.tangents[j] * d[j];
    return grad;
}

std::vector<double> tube_fluxes(const Bundle& bundle, const WavefrontFrame& frame) {
    std::vector<double> flux(bundle.size());
    for (std::size_t j = 0; j < bundle.size(); ++j) {
        const auto& r = bundle.rays[j];
        flux[j] = r.amplitude * r.amplitude * frame.spacings[j] * norm(r.momentum);
    }
    return flux;
}

WavefrontFrame tube_frame(const WavefrontFrame& rays) {
    const std::size_t n = rays.segments.size();
    WavefrontFrame t;
    t.arc_coords.resize(n);
    t.spacings = rays.segments;
    t.tangents.resize(n);
    t.normals.resize(n);
    if (n == 0) return t;
    t.segments.resize(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        t.arc_coords[k] = rays.arc_coords[k] + 0.5 * rays.segments[k];
        Vec2 tg = rays.tangents[k] + rays.tangents[k + 1];
        tg *= 1.0 / norm(tg);
        t.tangents[k] = tg;
        t.normals[k] = {-tg.z, tg.x};
    }
    for (std::size_t k = 0; k + 1 < n; ++k) t.segments[k] = 0.5 * (rays.segments[k] + rays.segments[k + 1]);
    return t;
}

std::vector<double> transport_tube_amplitudes(const Bundle& bundle, const WavefrontFrame& rays) {
    const std::size_t n = rays.segments.size();
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = rays.segments[k];
        const double p = 0.5 * (norm(bundle.rays[k].momentum) + norm(bundle.rays[k + 1].momentum));
        const double ratio = (bundle.tube_launch_widths[k] * bundle.tube_launch_momenta[k]) / (w * p);
        r[k] = bundle.tube_launch_amplitudes[k] * std::sqrt(ratio);
    }
    return r;
}

std::vector<Vec2> staggered_gradient(const WavefrontFrame& rays, const WavefrontFrame& tubes,
                                     std::span<const double> q) {
    const std::size_t n = rays.size();
    const std::size_t m = tubes.size();
    if (m + 1 != n || q.size() != m || m < 3) throw StencilError("staggered gradient needs at least 3 tubes");
    std::vector<Vec2> grad(n);
    for (std::size_t j = 1; j + 1 < n; ++j) grad[j] = rays.tangents[j] * ((q[j] - q[j - 1]) / tubes.segments[j - 1]);

    const auto& c = tubes.arc_coords;
    const auto w0 = fornberg_weights(std::array<double, 3>{c[0], c[1], c[2]}, rays.arc_coords.front(), 1);
    grad.front() = rays.tangents.front() * (w0[0] * q[0] + w0[1] * q[1] + w0[2] * q[2]);
    const auto w1 = fornberg_weights(std::array<double, 3>{c[m - 1], c[m - 2], c[m - 3]}, rays.arc_coords.back(), 1);
    grad.back() = rays.tangents.back() * (w1[0] * q[m - 1] + w1[1] * q[m - 2] + w1[2] * q[m - 3]);
    return grad;
}

std::vector<double> tubes_to_rays(const WavefrontFrame& rays, const WavefrontFrame& tubes,
                                  std::span<const double> q) {
    const std::size_t n = rays.size();
    const std::size_t m = tubes.size();
    if (m + 1 != n || q.size() != m || m < 2) throw StencilError("tube values do not match the rays");
    std::vector<double> out(n);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double a = rays.segments[j - 1];
        const double b = rays.segments[j];
        out[j] = (b * q[j - 1] + a * q[j]) / (a + b);
    }
    const auto& c = tubes.arc_coords;
    out.front() = q[0] + (rays.arc_coords.front() - c[0]) * (q[1] - q[0]) / (c[1] - c[0]);
    out.back() = q[m - 1] + (rays.arc_coords.back() - c[m - 1]) * (q[m - 1] - q[m - 2]) / (c[m - 1] - c[m - 2]);
    return out;
}

CouplingField evaluate_coupling(const Scenario& sc, const Bundle& b, const WavefrontFrame& frame) {
    CouplingField out;
    out.amplitudes = transport_amplitude(b, frame);
    const std::size_t n = b.size();
    if (!sc.wave_potential_enabled) {
        out.ray_potentials.assign(n, 0.0);
        if (sc.regularization.discretization == Discretization::Staggered) out.tube_potentials.assign(n - 1, 0.0);
        return out;
    }
    const auto& reg = sc.regularization;
    const double floor = sc.amplitude_floor();
    if (reg.discretization == Discretization::Collocated) {
        const auto lap = laplacian_impl(frame, out.amplitudes, reg.edge_policy, reg.stencil_form, floor,
                                        BeamProfile::kMinRays);
        auto wp = wave_potential(sc, lap, out.amplitudes);
        out.ray_potentials = std::move(wp.values);
        out.clamp_count = wp.clamp_count;
        return out;
    }
    const WavefrontFrame tubes = tube_frame(frame);
    const auto amps = transport_tube_amplitudes(b, frame);
    const auto lap = laplacian_impl(tubes, amps, reg.edge_policy, reg.stencil_form, floor, 4);
    auto wp = wave_potential(sc, lap, amps);
    out.ray_potentials = tubes_to_rays(frame, tubes, wp.values);
    out.tube_potentials = std::move(wp.values);
    out.clamp_count = wp.clamp_count;
    return out;
}

std::vector<Vec2> coupling_gradient(const Scenario& sc, const Bundle& b, const WavefrontFrame& frame) {
    if (sc.regularization.discretization == Discretization::Collocated) {
        std::vector<double> q(b.size());
        for (std::size_t j = 0; j < b.size(); ++j) q[j] = b.rays[j].wave_potential;
        return wave_potential_gradient(frame, q);
    }
    return staggered_gradient(frame, tube_frame(frame), b.tube_potentials);
}

}  // namespace wavepilot
