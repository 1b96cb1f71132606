#include "wavepilot/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "wavepilot/errors.hpp"

namespace wavepilot {

namespace {

// Linear interpolation of ray j's snapshot series to the plane z. Returns
// false if the ray never crosses it.
bool ray_at_plane(const TrajectoryRecord& rec, std::size_t j, double z, ProfileSample& out) {
    const auto& snaps = rec.snapshots;
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        const RayState& a = snaps[i].rays[j];
        if (a.position.z == z) {
            out = {a.position.x, a.amplitude * a.amplitude, a.momentum.x, j};
            return true;
        }
        if (i + 1 == snaps.size()) break;
        const RayState& b = snaps[i + 1].rays[j];
        const double za = a.position.z;
        const double zb = b.position.z;
        if ((za < z && z < zb) || (zb < z && z < za)) {
            const double t = (z - za) / (zb - za);
            const double r = a.amplitude + t * (b.amplitude - a.amplitude);
            out = {a.position.x + t * (b.position.x - a.position.x), r * r,
                   a.momentum.x + t * (b.momentum.x - a.momentum.x), j};
            return true;
        }
    }
    return false;
}

double hbar_of(const TrajectoryRecord& rec) { return rec.scenario.units.hbar; }

}  // namespace

std::string_view to_string(ExtremumKind k) noexcept { return k == ExtremumKind::Maximum ? "max" : "min"; }

IntensityProfile intensity_profile(const TrajectoryRecord& record, double z) {
    if (record.snapshots.empty()) throw Error("record has no snapshots");
    IntensityProfile prof;
    prof.z = z;
    prof.rays_total = record.launch().rays.size();
    prof.provenance = "linear interpolation between " + std::to_string(record.snapshots.size()) + " snapshots";
    for (std::size_t j = 0; j < prof.rays_total; ++j) {
        ProfileSample s;
        if (ray_at_plane(record, j, z, s)) prof.samples.push_back(s);
    }
    std::stable_sort(prof.samples.begin(), prof.samples.end(),
                     [](const ProfileSample& a, const ProfileSample& b) { return a.x < b.x; });
    return prof;
}

double waist_line(double z, double w0, double lambda0) {
    const double s = lambda0 * z / (kPi * w0);
    return std::sqrt(w0 * w0 + s * s);
}

std::pair<std::size_t, std::size_t> waist_rays(const TrajectoryRecord& record) {
    if (record.snapshots.empty()) throw IdentificationError("record has no snapshots");
    const double w0 = record.scenario.beam.w0;
    const auto& rays = record.launch().rays;
    auto closest = [&](double target) {
        std::size_t best = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < rays.size(); ++j) {
            const double d = std::abs(rays[j].position.x - target);
            if (d < dist) {
                dist = d;
                best = j;
            }
        }
        const double half = 0.5 * record.launch_spacings.at(best);
        if (dist > half)
            throw IdentificationError("no ray launched within half a spacing of x = " + std::to_string(target));
        return best;
    };
    return {closest(-w0), closest(w0)};
}

WaistComparison compare_waist(const TrajectoryRecord& record) {
    if (record.scenario.beam.kind != ProfileKind::Gaussian)
        throw IdentificationError("waist comparison needs a Gaussian beam");
    const auto [jm, jp] = waist_rays(record);
    const double w0 = record.scenario.beam.w0;
    const double lambda0 = record.scenario.lambda0;
    WaistComparison out;
    for (const auto& s : record.snapshots) {
        const RayState& a = s.rays[jm];
        const RayState& b = s.rays[jp];
        WaistRow row;
        row.step = s.step;
        row.z = 0.5 * (a.position.z + b.position.z);
        row.x_minus = a.position.x;
        row.x_plus = b.position.x;
        row.analytic = waist_line(row.z, w0, lambda0);
        const double em = std::abs(std::abs(a.position.x) - waist_line(a.position.z, w0, lambda0)) /
                          waist_line(a.position.z, w0, lambda0);
        const double ep = std::abs(std::abs(b.position.x) - waist_line(b.position.z, w0, lambda0)) /
                          waist_line(b.position.z, w0, lambda0);
        row.error = std::max(em, ep);
        out.max_error = std::max(out.max_error, row.error);
        out.rows.push_back(row);
    }
    return out;
}

SlopeEstimate asymptotic_slope(const TrajectoryRecord& record, std::size_t ray, double z_min) {
    SlopeEstimate est;
    est.analytic = record.scenario.lambda0 / (kPi * record.scenario.beam.w0);
    // x^2 = a + b z^2, fit in the variable u = z^2
    double su = 0.0, sy = 0.0, suu = 0.0, suy = 0.0;
    std::size_t n = 0;
    for (const auto& s : record.snapshots) {
        const Vec2 r = s.rays.at(ray).position;
        if (r.z < z_min) continue;
        const double u = r.z * r.z;
        const double y = r.x * r.x;
        su += u;
        sy += y;
        suu += u * u;
        suy += u * y;
        ++n;
    }
    est.points = n;
    if (n >= 2) {
        const double dn = static_cast<double>(n);
        const double denom = dn * suu - su * su;
        if (denom > 0.0) {
            const double b = (dn * suy - su * sy) / denom;
            est.slope = b > 0.0 ? std::sqrt(b) : 0.0;
        }
    }
    const auto& snaps = record.snapshots;
    if (snaps.size() >= 2) {
        const Vec2 p1 = snaps[snaps.size() - 1].rays.at(ray).position;
        const Vec2 p0 = snaps[snaps.size() - 2].rays.at(ray).position;
        if (p1.z != p0.z) est.local_slope = std::abs((p1.x - p0.x) / (p1.z - p0.z));
    }
    return est;
}

UncertaintyProduct uncertainty_product(const TrajectoryRecord& record, double z) {
    const IntensityProfile prof = intensity_profile(record, z);
    UncertaintyProduct u;
    u.z = z;
    u.delta_x = 2.0 * record.scenario.beam.w0;
    if (prof.samples.size() < 2) {
        u.degenerate = true;
    } else {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& s : prof.samples) {
            lo = std::min(lo, s.p_x);
            hi = std::max(hi, s.p_x);
        }
        u.delta_px = hi - lo;
    }
    u.product = u.delta_x * u.delta_px;
    const double hbar = hbar_of(record);
    u.over_hbar = u.product / hbar;
    u.over_h = u.product / (2.0 * kPi * hbar);
    return u;
}

UncertaintyProduct uncertainty_product_rms(const TrajectoryRecord& record, double z) {
    const IntensityProfile prof = intensity_profile(record, z);
    UncertaintyProduct u;
    u.z = z;
    const std::size_t n = prof.samples.size();
    if (n < 2) {
        u.degenerate = true;
    } else {
        std::vector<double> xs(n);
        for (std::size_t i = 0; i < n; ++i) xs[i] = prof.samples[i].x;
        const auto w = voronoi_widths(xs);
        double m = 0.0, mx = 0.0, mp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double wt = prof.samples[i].intensity * w[i];
            m += wt;
            mx += wt * prof.samples[i].x;
            mp += wt * prof.samples[i].p_x;
        }
        mx /= m;
        mp /= m;
        double vx = 0.0, vp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double wt = prof.samples[i].intensity * w[i];
            vx += wt * (prof.samples[i].x - mx) * (prof.samples[i].x - mx);
            vp += wt * (prof.samples[i].p_x - mp) * (prof.samples[i].p_x - mp);
        }
        u.delta_x = std::sqrt(vx / m);
        u.delta_px = std::sqrt(vp / m);
    }
    u.product = u.delta_x * u.delta_px;
    const double hbar = hbar_of(record);
    u.over_hbar = u.product / hbar;
    u.over_h = u.product / (2.0 * kPi * hbar);
    return u;
}

namespace {

// Interval outside which the launch amplitude is below 1e-10 of its peak.
std::pair<double, double> profile_support(const BeamProfile& p) {
    const double tail = std::log(1e10);
    switch (p.kind) {
        case ProfileKind::Gaussian: return {-p.w0 * std::sqrt(tail), p.w0 * std::sqrt(tail)};
        case ProfileKind::SuperGaussian: {
            const double a = p.w0 * std::pow(tail, 1.0 / p.order);
            return {-a, a};
        }
        case ProfileKind::Table: return {p.table_x.front(), p.table_x.back()};
    }
    return {0.0, 0.0};
}

constexpr std::size_t kMaxOracleNodes = 200'000'000;

}  // namespace

std::vector<double> diffraction_oracle(const BeamProfile& profile, double lambda0, double z,
                                       std::span<const double> xs, double points_per_cycle) {
    if (!(z > 0.0)) throw OracleResolutionError("diffraction oracle needs z > 0");
    if (!(lambda0 > 0.0)) throw OracleResolutionError("diffraction oracle needs lambda0 > 0");
    if (!(points_per_cycle >= 20.0)) throw OracleResolutionError("fewer than 20 points per phase cycle");
    const auto [a, b] = profile_support(profile);
    const double lz = lambda0 * z;
    const double length = b - a;
    std::vector<double> out(xs.size());

    // nodes of the launch amplitude are shared by every output abscissa
    double far = 0.0;
    for (double x : xs) far = std::max({far, std::abs(x - a), std::abs(x - b)});
    // the local phase rate is 2 pi |x - x'| / (lambda0 z)
    double h = lz / (points_per_cycle * far);
    h = std::min(h, length / 4000.0);
    std::size_t n = static_cast<std::size_t>(std::ceil(length / h));
    n += n % 2;
    if (n > kMaxOracleNodes)
        throw OracleResolutionError("oracle needs " + std::to_string(n) + " nodes at z = " + std::to_string(z));
    h = length / static_cast<double>(n);

    std::vector<double> amp(n + 1);
    std::vector<double> xp(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        xp[i] = a + h * static_cast<double>(i);
        const double wt = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        amp[i] = wt * profile.amplitude(xp[i]);
    }
    const double k = kPi / lz;
    for (std::size_t m = 0; m < xs.size(); ++m) {
        const double x = xs[m];
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            if (amp[i] == 0.0) continue;
            const double d = x - xp[i];
            const double ph = k * d * d;
            re += amp[i] * std::cos(ph);
            im += amp[i] * std::sin(ph);
        }
        re *= h / 3.0;
        im *= h / 3.0;
        out[m] = (re * re + im * im) / lz;
    }
    return out;
}

std::vector<Extremum> fringe_extrema(std::span<const double> xs, std::span<const double> y) {
    std::vector<Extremum> out;
    const std::size_t n = std::min(xs.size(), y.size());
    if (n < 3) return out;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const bool is_max = y[i] > y[i - 1] && y[i] >= y[i + 1];
        const bool is_min = y[i] < y[i - 1] && y[i] <= y[i + 1];
        if (!is_max && !is_min) continue;
        const double x0 = xs[i - 1], x1 = xs[i], x2 = xs[i + 1];
        const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
        // parabola through the three samples
        const double d01 = (y1 - y0) / (x1 - x0);
        const double d12 = (y2 - y1) / (x2 - x1);
        const double c2 = (d12 - d01) / (x2 - x0);
        Extremum e{x1, y1, is_max ? ExtremumKind::Maximum : ExtremumKind::Minimum};
        if (c2 != 0.0) {
            const double xv = 0.5 * (x0 + x1) - d01 / (2.0 * c2);
            if (xv >= x0 && xv <= x2) {
                e.x = xv;
                e.intensity = y0 + d01 * (xv - x0) + c2 * (xv - x0) * (xv - x1);
            }
        }
        out.push_back(e);
    }
    std::stable_sort(out.begin(), out.end(), [](const Extremum& a, const Extremum& b) { return a.x < b.x; });
    return out;
}

std::vector<Extremum> fringe_extrema(const IntensityProfile& profile) {
    std::vector<double> xs, ys;
    xs.reserve(profile.samples.size());
    ys.reserve(profile.samples.size());
    for (const auto& s : profile.samples) {
        xs.push_back(s.x);
        ys.push_back(s.intensity);
    }
    return fringe_extrema(xs, ys);
}

std::vector<double> minima_by_side(const std::vector<Extremum>& extrema, bool positive_side) {
    std::vector<double> out;
    for (const auto& e : extrema) {
        if (e.kind != ExtremumKind::Minimum) continue;
        if (positive_side ? e.x > 0.0 : e.x < 0.0) out.push_back(std::abs(e.x));
    }
    std::sort(out.begin(), out.end());
    return out;
}

double total_flux(const Snapshot& snapshot) {
    const auto& rays = snapshot.rays;
    std::vector<double> arc(rays.size(), 0.0);
    for (std::size_t j = 1; j < rays.size(); ++j) arc[j] = arc[j - 1] + norm(rays[j].position - rays[j - 1].position);
    const auto w = voronoi_widths(arc);
    double sum = 0.0;
    for (std::size_t j = 0; j < rays.size(); ++j) sum += rays[j].amplitude * rays[j].amplitude * w[j] * norm(rays[j].momentum);
    return sum;
}

}  // namespace wavepilot
