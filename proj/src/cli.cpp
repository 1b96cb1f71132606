#include "wavepilot/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "wavepilot/analysis.hpp"
#include "wavepilot/errors.hpp"
#include "wavepilot/record_io.hpp"

namespace wavepilot {

namespace fs = std::filesystem;

namespace {

void say(const CommandOptions& opt, const std::string& line) {
    if (!opt.quiet) std::cout << line << '\n';
}

int report_error(const std::exception& e, int code) {
    std::cerr << "error: " << e.what() << '\n';
    return code;
}

fs::path ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw Error("cannot create " + p.string() + ": " + ec.message());
    return p;
}

struct RunOutcome {
    TrajectoryRecord record;
    nlohmann::json summary;
};

RunOutcome execute(const RunConfig& cfg, const fs::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutcome o{run(cfg.scenario), {}};
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_trajectories(dir / kTrajectoriesFile, cfg, o.record);
    write_reports(dir / kReportsFile, cfg, o.record);
    o.summary = make_summary(cfg, o.record, secs);
    write_summary(dir / kSummaryFile, o.summary);
    return o;
}

// Minima or maxima on one side of the axis (side -1, 0 or +1, where 0 means
// within `eps` of it), ordered by distance from it.
std::vector<double> extrema_by_side(const std::vector<Extremum>& ex, ExtremumKind kind, int side, double eps) {
    std::vector<double> out;
    for (const auto& e : ex) {
        if (e.kind != kind) continue;
        const int s = std::abs(e.x) <= eps ? 0 : (e.x > 0.0 ? 1 : -1);
        if (s == side) out.push_back(std::abs(e.x));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

double common_z(const Snapshot& s) {
    double z = s.rays.front().position.z;
    for (const auto& r : s.rays) z = std::min(z, r.position.z);
    return z;
}

unsigned thread_cap() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("WAVEPILOT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

std::string write_waist(const fs::path& dir, const RunConfig& cfg, const TrajectoryRecord& rec) {
    const WaistComparison cmp = compare_waist(rec);
    CsvWriter w(dir / "waist.csv", header_line(cfg, "waist"),
                "step,z,x_minus,x_plus,analytic_minus,analytic_plus,relative_error");
    for (const auto& r : cmp.rows) {
        w << r.step << r.z << r.x_minus << r.x_plus << -r.analytic << r.analytic << r.error;
        w.end_row();
    }
    w.close();
    std::string msg = fmt::format("max relative waist error: {}", format_real(cmp.max_error));
    if (!rec.scenario.wave_potential_enabled)
        msg += "\nNOTE: eikonal record; straight rays are expected to leave the waist hyperbola";
    return msg;
}

std::string write_profile(const fs::path& dir, const RunConfig& cfg, const TrajectoryRecord& rec,
                          const std::vector<double>& stations) {
    CsvWriter w(dir / "profile.csv", header_line(cfg, "profile"), "z,x,intensity,p_x,ray");
    std::string msg;
    for (double z : stations) {
        const IntensityProfile p = intensity_profile(rec, z);
        for (const auto& s : p.samples) {
            w << z << s.x << s.intensity << s.p_x << s.ray;
            w.end_row();
        }
        msg += fmt::format("profile at z = {}: {} of {} rays", format_real(z), p.samples.size(), p.rays_total);
        if (p.partial()) msg += " (WARNING: partial profile, some rays do not cross this plane)";
        msg += '\n';
    }
    w.close();
    if (!msg.empty()) msg.pop_back();
    return msg;
}

std::string write_uncertainty(const fs::path& dir, const RunConfig& cfg, const TrajectoryRecord& rec,
                              const std::vector<double>& extra_stations) {
    std::vector<double> zs;
    for (const auto& s : rec.snapshots) zs.push_back(common_z(s));
    zs.insert(zs.end(), extra_stations.begin(), extra_stations.end());
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end()), zs.end());

    CsvWriter w(dir / "uncertainty.csv", header_line(cfg, "uncertainty"),
                "z,delta_x,delta_px,product,product_over_h,product_over_hbar,rms_product_over_hbar,degenerate");
    UncertaintyProduct last;
    for (double z : zs) {
        const UncertaintyProduct u = uncertainty_product(rec, z);
        const UncertaintyProduct rms = uncertainty_product_rms(rec, z);
        w << z << u.delta_x << u.delta_px << u.product << u.over_h << u.over_hbar << rms.over_hbar
          << std::string(u.degenerate ? "1" : "0");
        w.end_row();
        last = u;
    }
    w.close();
    return fmt::format("uncertainty product at z = {}: {} h ({} hbar)", format_real(last.z), format_real(last.over_h),
                       format_real(last.over_hbar));
}

std::string write_fringes(const fs::path& dir, const RunConfig& cfg, const TrajectoryRecord& rec,
                          std::optional<double> z_opt) {
    const double z = z_opt ? *z_opt : common_z(rec.last());
    const IntensityProfile prof = intensity_profile(rec, z);
    if (prof.samples.size() < 5) throw Error(fmt::format("fewer than 5 rays reach z = {}", format_real(z)));
    const auto rays = fringe_extrema(prof);

    const double lo = prof.samples.front().x;
    const double hi = prof.samples.back().x;
    constexpr std::size_t kPoints = 8001;
    std::vector<double> xs(kPoints);
    for (std::size_t i = 0; i < kPoints; ++i) xs[i] = lo + (hi - lo) * static_cast<double>(i) / (kPoints - 1);
    const auto oracle = fringe_extrema(xs, diffraction_oracle(rec.scenario.beam, rec.scenario.lambda0, z, xs));
    const double eps = 1e-6 * (hi - lo);

    CsvWriter w(dir / "fringes.csv", header_line(cfg, "fringes"),
                "z,kind,side,order,x_ray,x_oracle,abs_offset,relative_offset");
    std::string msg = fmt::format("fringes at z = {}:", format_real(z));
    for (ExtremumKind kind : {ExtremumKind::Minimum, ExtremumKind::Maximum}) {
        for (int side : {-1, 0, 1}) {
            const auto a = extrema_by_side(rays, kind, side, eps);
            const auto b = extrema_by_side(oracle, kind, side, eps);
            const std::size_t n = std::max(a.size(), b.size());
            for (std::size_t i = 0; i < n; ++i) {
                w << z << std::string(to_string(kind)) << std::string(side == 0 ? "0" : (side > 0 ? "+" : "-"))
                  << (i + 1);
                const double xr = i < a.size() ? a[i] : std::nan("");
                const double xo = i < b.size() ? b[i] : std::nan("");
                // on-axis extrema have no meaningful relative offset
                w << xr << xo << std::abs(xr - xo) << (side == 0 ? std::nan("") : std::abs(xr - xo) / xo);
                w.end_row();
            }
            const bool positive = side > 0;
            if (kind == ExtremumKind::Minimum && side != 0) {
                double worst = 0.0;
                const std::size_t k = std::min<std::size_t>({3, a.size(), b.size()});
                for (std::size_t i = 0; i < k; ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / b[i]);
                msg += fmt::format(" side {}: {} minima (oracle {}), worst offset of the first {} = {};",
                                   positive ? "+" : "-", a.size(), b.size(), k, format_real(worst));
            }
        }
    }
    w.close();
    msg.pop_back();
    return msg;
}

int cmd_run(const CommandOptions& opt) {
    RunConfig cfg;
    try {
        cfg = load_config(opt.config);
    } catch (const ConfigError& e) {
        return report_error(e, kExitConfig);
    }
    try {
        const fs::path dir = ensure_dir(opt.out ? *opt.out : cfg.output.dir);
        const RunOutcome o = execute(cfg, dir);
        say(opt, fmt::format("wrote {} snapshots of {} rays to {} (config {})", o.record.snapshots.size(),
                             cfg.scenario.beam.ray_count, dir.string(), cfg.hash));
        if (o.record.fault) {
            std::cerr << "fault: " << o.record.fault->message << " (partial outputs retained)\n";
            return kExitFault;
        }
        for (const auto& a : cfg.output.analyses) {
            if (a == "waist") say(opt, write_waist(dir, cfg, o.record));
            if (a == "profile") say(opt, write_profile(dir, cfg, o.record, cfg.output.stations));
            if (a == "uncertainty") say(opt, write_uncertainty(dir, cfg, o.record, cfg.output.stations));
            if (a == "fringes") {
                std::optional<double> z;
                if (!cfg.output.stations.empty()) z = cfg.output.stations.back();
                say(opt, write_fringes(dir, cfg, o.record, z));
            }
        }
    } catch (const ConfigError& e) {
        return report_error(e, kExitConfig);
    } catch (const std::exception& e) {
        return report_error(e, kExitAnalysis);
    }
    return kExitOk;
}

namespace {

template <class F>
int analysis_command(const CommandOptions& opt, F&& body) {
    try {
        const LoadedRecord lr = load_record(opt.record);
        const fs::path dir = ensure_dir(opt.out ? fs::path(*opt.out) : fs::path(opt.record));
        say(opt, body(dir, lr));
    } catch (const std::exception& e) {
        return report_error(e, kExitAnalysis);
    }
    return kExitOk;
}

}  // namespace

int cmd_compare_waist(const CommandOptions& opt) {
    return analysis_command(opt, [&](const fs::path& dir, const LoadedRecord& lr) {
        return write_waist(dir, lr.config, lr.record);
    });
}

int cmd_profile(const CommandOptions& opt) {
    return analysis_command(opt, [&](const fs::path& dir, const LoadedRecord& lr) {
        std::vector<double> zs;
        if (opt.z) zs.push_back(*opt.z);
        else zs.push_back(common_z(lr.record.last()));
        return write_profile(dir, lr.config, lr.record, zs);
    });
}

int cmd_uncertainty(const CommandOptions& opt) {
    return analysis_command(opt, [&](const fs::path& dir, const LoadedRecord& lr) {
        std::vector<double> extra;
        if (opt.z) extra.push_back(*opt.z);
        return write_uncertainty(dir, lr.config, lr.record, extra);
    });
}

int cmd_fringes(const CommandOptions& opt) {
    return analysis_command(opt, [&](const fs::path& dir, const LoadedRecord& lr) {
        return write_fringes(dir, lr.config, lr.record, opt.z);
    });
}

int cmd_sweep(const CommandOptions& opt) {
    RunConfig base;
    std::vector<RunConfig> configs;
    std::vector<std::vector<std::string>> labels;
    std::vector<std::string> keys;
    try {
        base = load_config(opt.config);
        for (const auto& a : base.sweep) keys.push_back(a.key);
        std::ifstream in(opt.config);
        std::stringstream ss;
        ss << in.rdbuf();
        const YAML::Node root = YAML::Load(ss.str());
        const auto docs = expand_sweep(root);
        for (std::size_t i = 0; i < docs.size(); ++i) {
            configs.push_back(parse_config(docs[i], fmt::format("{}[sweep {}]", opt.config, i)));
            std::vector<std::string> row;
            for (const auto& k : keys) {
                YAML::Node n = YAML::Clone(docs[i]);
                std::stringstream path(k);
                for (std::string part; std::getline(path, part, '.');) n.reset(n[part]);
                YAML::Emitter em;
                em << YAML::Flow << n;
                row.emplace_back(em.c_str());
            }
            labels.push_back(std::move(row));
        }
    } catch (const std::exception& e) {
        return report_error(e, kExitConfig);
    }

    const fs::path root = opt.out ? fs::path(*opt.out) : fs::path(base.output.dir);
    std::vector<nlohmann::json> summaries(configs.size());
    std::vector<std::string> errors(configs.size());
    std::atomic<std::size_t> next{0};
    std::mutex io;
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            try {
                const fs::path dir = ensure_dir(root / fmt::format("run_{:04d}", i));
                summaries[i] = execute(configs[i], dir).summary;
                std::lock_guard lock(io);
                say(opt, fmt::format("sweep point {} of {} done ({})", i + 1, configs.size(), dir.string()));
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned n_threads = std::min<unsigned>(thread_cap(), static_cast<unsigned>(configs.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    int code = kExitOk;
    try {
        std::string cols = "index";
        for (const auto& k : keys) cols += "," + k;
        cols += ",config_hash,status,max_hamiltonian_drift,max_flux_error";
        CsvWriter w(ensure_dir(root) / "sweep.csv", header_line(base, "sweep"), cols);
        for (std::size_t i = 0; i < configs.size(); ++i) {
            w << i;
            for (const auto& l : labels[i]) w << ('"' + l + '"');
            w << configs[i].hash;
            if (!errors[i].empty()) {
                w << std::string("error") << std::string() << std::string();
                code = kExitAnalysis;
                std::cerr << "error: sweep point " << i << ": " << errors[i] << '\n';
            } else {
                const auto& s = summaries[i];
                const bool fault = !s["fault"].is_null();
                if (fault) code = std::max(code, static_cast<int>(kExitFault));
                w << std::string(fault ? "fault" : "ok")
                  << s["conservation"]["max_hamiltonian_drift"].get<double>()
                  << s["conservation"]["max_flux_error"].get<double>();
            }
            w.end_row();
        }
        w.close();
    } catch (const std::exception& e) {
        return report_error(e, kExitAnalysis);
    }
    say(opt, fmt::format("{} sweep points written under {}", configs.size(), root.string()));
    return code;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Coupled ray-bundle simulator driven by the wave potential"};
    app.require_subcommand(1);
    app.fallthrough();
    CommandOptions opt;
    std::string out;
    double z = 0.0;
    app.add_flag("--quiet,-q", opt.quiet, "Suppress progress output");

    auto with_out = [&](CLI::App* sub) { sub->add_option("--out", out, "Output directory"); };
    auto* run_cmd = app.add_subcommand("run", "Integrate a scenario and write trajectories, reports and summary");
    run_cmd->add_option("--config", opt.config, "YAML configuration")->required()->check(CLI::ExistingFile);
    with_out(run_cmd);
    auto* sweep_cmd = app.add_subcommand("sweep", "Run every point of the configuration's sweep grid");
    sweep_cmd->add_option("--config", opt.config, "YAML configuration with a sweep section")
        ->required()
        ->check(CLI::ExistingFile);
    with_out(sweep_cmd);

    std::vector<CLI::App*> analyses;
    auto analysis = [&](const char* name, const char* help, bool z_required) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("record", opt.record, "Run directory written by 'run'")->required()->check(CLI::ExistingDirectory);
        with_out(sub);
        auto* zo = sub->add_option("--z", z, "Station z in units of w0");
        if (z_required) zo->required();
        analyses.push_back(sub);
        return sub;
    };
    auto* waist_cmd = analysis("compare-waist", "Compare the +-w0 rays with the Gaussian waist lines", false);
    auto* profile_cmd = analysis("profile", "Intensity profile at a station", false);
    auto* unc_cmd = analysis("uncertainty", "Uncertainty product along the run", false);
    auto* fringe_cmd = analysis("fringes", "Fringe extrema against the Fresnel oracle", false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }
    if (!out.empty()) opt.out = out;
    for (auto* sub : analyses)
        if (sub->parsed() && sub->count("--z") > 0) opt.z = z;

    if (run_cmd->parsed()) return cmd_run(opt);
    if (sweep_cmd->parsed()) return cmd_sweep(opt);
    if (waist_cmd->parsed()) return cmd_compare_waist(opt);
    if (profile_cmd->parsed()) return cmd_profile(opt);
    if (unc_cmd->parsed()) return cmd_uncertainty(opt);
    if (fringe_cmd->parsed()) return cmd_fringes(opt);
    return kExitConfig;
}

}  // namespace wavepilot
