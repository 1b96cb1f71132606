#include "wavepilot/record_io.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "wavepilot/errors.hpp"

namespace wavepilot {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

std::string header_line(const RunConfig& cfg, const std::string& kind) {
    json h;
    h["file"] = kind;
    h["config_hash"] = cfg.hash;
    h["config"] = cfg.canonical;
    return "# " + h.dump();
}

CsvWriter::CsvWriter(const fs::path& file, const std::string& header, const std::string& columns)
    : path_(file), out_(file, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("cannot write " + file.string());
    out_ << header << '\n' << columns << '\n';
}

CsvWriter& CsvWriter::operator<<(const std::string& cell) {
    if (!first_) row_ += ',';
    row_ += cell;
    first_ = false;
    return *this;
}

CsvWriter& CsvWriter::operator<<(double v) { return *this << format_real(v); }

CsvWriter& CsvWriter::operator<<(std::size_t v) { return *this << std::to_string(v); }

void CsvWriter::end_row() {
    row_ += '\n';
    out_ << row_;
    row_.clear();
    first_ = true;
}

void CsvWriter::close() {
    out_.flush();
    if (!out_) throw Error("write failed for " + path_.string());
    out_.close();
}

void write_trajectories(const fs::path& file, const RunConfig& cfg, const TrajectoryRecord& rec) {
    CsvWriter w(file, header_line(cfg, "trajectories"), "step,time,ray,x,z,p_x,p_z,R,Q");
    for (const auto& s : rec.snapshots) {
        for (std::size_t j = 0; j < s.rays.size(); ++j) {
            const RayState& r = s.rays[j];
            w << s.step << s.time << r.launch_index << r.position.x << r.position.z << r.momentum.x << r.momentum.z
              << r.amplitude << r.wave_potential;
            w.end_row();
        }
    }
    w.close();
}

void write_reports(const fs::path& file, const RunConfig& cfg, const TrajectoryRecord& rec) {
    CsvWriter w(file, header_line(cfg, "reports"),
                "step,time,max_drift,max_perpendicularity,max_flux_error,max_momentum_drift,clamp_count,crossing,"
                "h_min,h_max");
    for (const auto& r : rec.reports) {
        w << r.step << r.time << r.max_drift << r.max_perpendicularity << r.max_flux_error << r.max_momentum_drift
          << r.clamp_count << std::string(r.crossing ? "1" : "0");
        if (r.hamiltonian.empty()) {
            w << std::string() << std::string();
        } else {
            const auto [lo, hi] = std::minmax_element(r.hamiltonian.begin(), r.hamiltonian.end());
            w << *lo << *hi;
        }
        w.end_row();
    }
    w.close();
}

json make_summary(const RunConfig& cfg, const TrajectoryRecord& rec, double runtime_seconds) {
    const Scenario& sc = rec.scenario;
    double drift = 0.0, perp = 0.0, flux = 0.0, pdrift = 0.0;
    std::size_t clamps = 0, clamp_max = 0, crossings = 0;
    for (const auto& r : rec.reports) {
        drift = std::max(drift, r.max_drift);
        perp = std::max(perp, r.max_perpendicularity);
        flux = std::max(flux, r.max_flux_error);
        pdrift = std::max(pdrift, r.max_momentum_drift);
        clamps += r.clamp_count;
        clamp_max = std::max(clamp_max, r.clamp_count);
        if (r.crossing && !rec.fault) ++crossings;
    }
    json s;
    s["config_hash"] = cfg.hash;
    s["config"] = cfg.canonical;
    s["system"] = std::string(to_string(sc.system));
    s["rays"] = sc.beam.ray_count;
    s["dt"] = sc.effective_dt();
    s["n_steps"] = sc.integration.n_steps;
    s["steps_completed"] = rec.snapshots.empty() ? 0 : rec.last().step;
    s["final_time"] = rec.snapshots.empty() ? 0.0 : rec.last().time;
    s["snapshots"] = rec.snapshots.size();
    s["conservation"] = {{"max_hamiltonian_drift", drift},
                         {"max_momentum_drift", pdrift},
                         {"max_flux_error", flux},
                         {"max_perpendicularity", perp}};
    s["clamp_count_total"] = clamps;
    s["clamp_count_max"] = clamp_max;
    s["eikonal_crossing_steps"] = crossings;
    s["partial"] = rec.fault.has_value();
    if (rec.fault)
        s["fault"] = {{"kind", rec.fault->kind}, {"message", rec.fault->message}, {"step", rec.fault->step}};
    else
        s["fault"] = nullptr;
    s["runtime_seconds"] = runtime_seconds;
    return s;
}

void write_summary(const fs::path& file, const json& summary) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + file.string());
    out << summary.dump(2) << '\n';
    if (!out) throw Error("write failed for " + file.string());
}

namespace {

json read_header(std::istream& in, const fs::path& file) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw Error(file.string() + ": missing provenance header");
    try {
        return json::parse(line.substr(2));
    } catch (const json::exception& e) {
        throw Error(file.string() + ": malformed provenance header: " + e.what());
    }
}

double to_real(const std::string& s, const fs::path& file, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(fmt::format("{}:{}: cannot read '{}' as a number", file.string(), line, s));
    return v;
}

std::size_t to_index(const std::string& s, const fs::path& file, std::size_t line) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(fmt::format("{}:{}: cannot read '{}' as an index", file.string(), line, s));
    return v;
}

}  // namespace

LoadedRecord load_record(const fs::path& dir) {
    LoadedRecord out;
    const fs::path sfile = dir / kSummaryFile;
    std::ifstream sin(sfile);
    if (!sin) throw Error("cannot open " + sfile.string());
    try {
        out.summary = json::parse(sin);
    } catch (const json::exception& e) {
        throw Error(sfile.string() + ": " + e.what());
    }
    const std::string hash = out.summary.value("config_hash", "");
    out.config = parse_config_text(out.summary.at("config").dump(), sfile.string());
    if (out.config.hash != hash)
        throw Error(sfile.string() + ": configuration does not match its hash " + hash);

    const fs::path tfile = dir / kTrajectoriesFile;
    std::ifstream tin(tfile);
    if (!tin) throw Error("cannot open " + tfile.string());
    const json th = read_header(tin, tfile);
    if (th.value("config_hash", "") != hash)
        throw Error(fmt::format("{}: config hash {} does not match {} in {}", tfile.string(),
                                th.value("config_hash", ""), hash, kSummaryFile));
    if (const fs::path rfile = dir / kReportsFile; fs::exists(rfile)) {
        std::ifstream rin(rfile);
        const json rh = read_header(rin, rfile);
        if (rh.value("config_hash", "") != hash)
            throw Error(fmt::format("{}: config hash {} does not match {} in {}", rfile.string(),
                                    rh.value("config_hash", ""), hash, kSummaryFile));
    }

    TrajectoryRecord& rec = out.record;
    rec.scenario = out.config.scenario;
    rec.launch_spacings = make_bundle(rec.scenario.beam, rec.scenario).launch_spacings;
    const std::size_t n = rec.scenario.beam.ray_count;

    std::string line;
    std::getline(tin, line);  // column names
    std::size_t lineno = 2;
    std::vector<std::string> cells;
    while (std::getline(tin, line)) {
        ++lineno;
        if (line.empty()) continue;
        cells.clear();
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        if (cells.size() != 9) throw Error(fmt::format("{}:{}: expected 9 columns", tfile.string(), lineno));
        const std::size_t step = to_index(cells[0], tfile, lineno);
        const std::size_t ray = to_index(cells[2], tfile, lineno);
        if (rec.snapshots.empty() || rec.snapshots.back().step != step) {
            if (!rec.snapshots.empty() && rec.snapshots.back().rays.size() != n)
                throw Error(fmt::format("{}: truncated snapshot at step {} ({} of {} rays)", tfile.string(),
                                        rec.snapshots.back().step, rec.snapshots.back().rays.size(), n));
            rec.snapshots.push_back({step, to_real(cells[1], tfile, lineno), {}});
        }
        Snapshot& s = rec.snapshots.back();
        if (ray != s.rays.size() || ray >= n)
            throw Error(fmt::format("{}:{}: unexpected ray index {}", tfile.string(), lineno, ray));
        RayState r;
        r.launch_index = ray;
        r.position = {to_real(cells[3], tfile, lineno), to_real(cells[4], tfile, lineno)};
        r.momentum = {to_real(cells[5], tfile, lineno), to_real(cells[6], tfile, lineno)};
        r.amplitude = to_real(cells[7], tfile, lineno);
        r.wave_potential = to_real(cells[8], tfile, lineno);
        s.rays.push_back(r);
    }
    if (rec.snapshots.empty()) throw Error(tfile.string() + ": no snapshots");
    if (rec.snapshots.back().rays.size() != n)
        throw Error(fmt::format("{}: truncated snapshot at step {} ({} of {} rays)", tfile.string(),
                                rec.snapshots.back().step, rec.snapshots.back().rays.size(), n));
    const std::size_t expected = out.summary.value("snapshots", std::size_t{0});
    if (rec.snapshots.size() != expected)
        throw Error(fmt::format("{}: record truncated after step {}: {} of {} snapshots present", tfile.string(),
                                rec.snapshots.back().step, rec.snapshots.size(), expected));
    if (out.summary.contains("fault") && !out.summary["fault"].is_null()) {
        const auto& f = out.summary["fault"];
        rec.fault = FaultRecord{f.value("kind", ""), f.value("message", ""), f.value("step", std::size_t{0})};
    }
    return out;
}

}  // namespace wavepilot
