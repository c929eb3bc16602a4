#pragma once

// Scenario pipelines and result persistence.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <array>
#include <filesystem>
#include <functional>
#include <tuple>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hetprobe/atomics.hpp"
#include "hetprobe/cloudsim.hpp"
#include "hetprobe/config.hpp"
#include "hetprobe/estimators.hpp"
#include "hetprobe/losses.hpp"
#include "hetprobe/merit.hpp"
#include "hetprobe/parallel.hpp"
#include "hetprobe/photodetect.hpp"
#include "hetprobe/random.hpp"
#include "hetprobe/response.hpp"
#include "hetprobe/version.hpp"

namespace hetprobe {

/// Column-labelled numeric table, written as one CSV file.
struct Table {
    std::string name;
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row)
    {
        detail::require(row.size() == columns.size(), "table " + name + ": row width does not match the header");
        rows.push_back(std::move(row));
    }

    std::vector<double> column(std::string_view col) const
    {
        const auto it = std::find(columns.begin(), columns.end(), col);
        detail::require(it != columns.end(), "table " + name + ": no column '" + std::string(col) + "'");
        const auto idx = static_cast<std::size_t>(it - columns.begin());
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[idx]);
        return out;
    }
};

struct ResultBundle {
    Scenario scenario = Scenario::NoiseCurve;
    std::vector<Table> tables;
    Json summary;

    const Table& table(std::string_view name) const
    {
        for (const auto& t : tables)
            if (t.name == name) return t;
        throw InputError("result has no table '" + std::string(name) + "'");
    }
};

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_csv(const Table& t)
{
    std::string out;
    for (const auto& c : t.comments) out += "# " + c + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
        out += "\n";
    }
    return out;
}

/// Reads a CSV with optional `#` comments and a header row.
inline Table parse_csv(std::istream& in, std::string name = "input")
{
    Table t;
    t.name = std::move(name);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(line.substr(line.find_first_not_of("# ") == std::string::npos ? line.size()
                                                                                                 : line.find_first_not_of("# ")));
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (t.columns.empty()) {
            t.columns = cells;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw InputError("csv line " + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) +
                             " fields, found " + std::to_string(cells.size()));
        std::vector<double> row;
        for (const auto& c : cells) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (end == c.c_str() || *end != '\0')
                throw InputError("csv line " + std::to_string(lineno) + ": '" + c + "' is not a number");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.columns.empty()) throw InputError("csv: no header row");
    return t;
}

inline std::filesystem::path resolve_output_dir(const ScenarioConfig& cfg)
{
    const std::string configured = cfg.text("output_dir");
    if (!configured.empty()) return configured;
    if (const char* env = std::getenv("HETPROBE_OUTPUT_DIR"); env && *env) return env;
    return "hetprobe-out";
}

/// Writes `<name>.csv` per table and `summary.json`; returns the files.
inline std::vector<std::filesystem::path> write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files;
    auto put = [&](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        out << text;
        if (!out) throw std::runtime_error("cannot write " + path.string());
        files.push_back(path);
    };
    for (const auto& t : bundle.tables) put(dir / (t.name + ".csv"), format_csv(t));
    put(dir / "summary.json", bundle.summary.dump(2) + "\n");
    return files;
}

namespace detail {

// Substream tags keep each scenario's draws disjoint.
inline constexpr std::uint64_t kNoiseCurveStream = 101;
inline constexpr std::uint64_t kSpectrumStream = 102;
inline constexpr std::uint64_t kOscillationStream = 103;

inline AtomicLine line_from(const ScenarioConfig& c)
{
    AtomicLine line;
    line.resonance = c.si("line.resonance_mhz");
    return line;
}

inline Polarization polarization_from(const ScenarioConfig& c)
{
    return c.text("probe.polarization") == "parallel" ? Polarization::parallel() : Polarization::perpendicular();
}

inline double half_splitting(const ScenarioConfig& c) { return 0.5 * c.si("beat.splitting_mhz"); }

/// Detector settings for pulses with `photons` detected in `window` seconds.
inline PulseConfig pulse_from(const ScenarioConfig& c, double photons, double window)
{
    PulseConfig p;
    p.duration = window;
    p.photon_rate = photons / window;
    p.beat_angular_frequency = 2.0 * constants::kPi * std::abs(c.si("beat.splitting_mhz"));
    p.quantum_efficiency = c.value("detector.quantum_efficiency");
    p.excess_noise = c.value("detector.excess_noise");
    p.electronic_noise = c.is_set("detector.electronic_noise")
                             ? c.value("detector.electronic_noise")
                             : calibrated_electronic_noise(p.excess_noise, c.value("detector.crossing_photons"));
    p.mode = c.text("detector.mode") == "time-domain" ? DetectorMode::TimeDomain : DetectorMode::Statistical;
    p.arrivals = c.text("detector.arrivals") == "deterministic" ? ArrivalModel::Deterministic : ArrivalModel::Poisson;
    p.filter_cutoff = c.si("detector.filter_cutoff_khz");
    p.samples_per_cycle = c.value("detector.samples_per_cycle");
    p.phase_noise_floor = c.value("detector.phase_noise_floor_rad");
    p.noiseless = c.flag("detector.noiseless");
    p.seed = c.seed();
    return p;
}

inline CloudState cloud_from(const ScenarioConfig& c)
{
    CloudState cloud;
    cloud.atom_number = c.value("cloud.atom_number");
    cloud.temperature = c.si("cloud.temperature_uk");
    cloud.trap.radial_frequency = c.value("trap.radial_hz");
    cloud.trap.axial_frequency = c.value("trap.axial_hz");
    cloud.trap.field_minimum = c.si("trap.field_min_mt");
    return cloud;
}

inline std::vector<double> linspace(double a, double b, long long n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

inline std::vector<double> logspace(double a, double b, long long n)
{
    auto v = linspace(std::log10(a), std::log10(b), n);
    for (auto& x : v) x = std::pow(10.0, x);
    v.front() = a;
    v.back() = b;
    return v;
}

inline Json fit_json(const FitResult& f)
{
    Json j;
    j["status"] = to_string(f.status);
    j["iterations"] = f.iterations;
    j["cost"] = f.cost;
    j["reduced_chi2"] = f.reduced_chi2();
    return j;
}

inline Json check(double value, double target, double tolerance, bool pass)
{
    return Json{{"value", value}, {"target", target}, {"tolerance", tolerance}, {"pass", pass}};
}

inline void nan_to_null(Json& j)
{
    if (j.is_number_float() && !std::isfinite(j.get<double>())) {
        j = nullptr;
    } else if (j.is_structured()) {
        for (auto& v : j) nan_to_null(v);
    }
}

} // namespace detail

// ---------------------------------------------------------------------------

/// Phase standard deviation versus detected photon number.
inline ResultBundle run_noise_curve(const ScenarioConfig& c)
{
    const auto photons = detail::logspace(c.value("noise_curve.n_min"), c.value("noise_curve.n_max"), c.integer("noise_curve.points"));
    const auto pulses = static_cast<std::size_t>(c.integer("noise_curve.pulses"));
    const double window = c.si("detector.window_us");

    struct Row {
        double mc, ideal, full;
    };
    const auto rows = parallel_map<Row>(photons.size(), c.threads(), [&](std::size_t k) {
        auto spread = [&](PulseConfig p, std::uint64_t variant) {
            p.seed = substream_seed(c.seed(), {detail::kNoiseCurveStream, k, variant});
            std::vector<DemodRecord> recs(pulses);
            for (std::size_t r = 0; r < pulses; ++r) recs[r] = simulate_pulse(p, 0.0, 0.0, r);
            return phase_spread(recs);
        };
        PulseConfig p = detail::pulse_from(c, photons[k], window);
        PulseConfig ideal = p;
        ideal.excess_noise = 1.0;
        ideal.electronic_noise = 0.0;
        return Row{spread(p, 0), spread(ideal, 1), predicted_sigma_phi(photons[k], p.excess_noise, p.electronic_noise)};
    });

    const PulseConfig ref = detail::pulse_from(c, photons.front(), window);
    const double x = ref.excess_noise, ce = ref.electronic_noise;
    const double rel_se = 1.0 / std::sqrt(2.0 * static_cast<double>(pulses - 1));

    Table t;
    t.name = "noise_curve";
    t.comments = {"phase standard deviation (rad) versus detected photons per window",
                  "window_s=" + format_double(window) + " pulses_per_point=" + std::to_string(pulses),
                  "excess_noise=" + format_double(x) + " electronic_noise=" + format_double(ce)};
    t.columns = {"N", "sigma_phi_mc", "sigma_phi_mc_err", "sigma_phi_model_full", "sigma_phi_shot_only",
                 "sigma_phi_avalanche", "sigma_phi_mc_ideal"};
    std::vector<DataPoint> data;
    double worst_full = 0.0, worst_ideal = 0.0;
    for (std::size_t k = 0; k < photons.size(); ++k) {
        const double n = photons[k];
        const double shot = std::sqrt(2.0 / n);
        t.add_row({n, rows[k].mc, rows[k].mc * rel_se, rows[k].full, shot, x * shot, rows[k].ideal});
        data.push_back({n, rows[k].mc, rows[k].mc * rel_se});
        worst_full = std::max(worst_full, std::abs(rows[k].mc / rows[k].full - 1.0));
        worst_ideal = std::max(worst_ideal, std::abs(rows[k].ideal / shot - 1.0));
    }

    ResultBundle b;
    b.scenario = Scenario::NoiseCurve;
    b.tables.push_back(std::move(t));
    b.summary["results"]["max_rel_dev_full"] = worst_full;
    b.summary["results"]["max_rel_dev_ideal"] = worst_ideal;
    if (!c.flag("detector.noiseless")) {
        const auto fit = fit_noise_model(data, true);
        b.summary["results"]["fit"] = detail::fit_json(fit.fit);
        b.summary["results"]["fit"]["excess_noise"] = fit.excess_noise;
        b.summary["results"]["fit"]["excess_noise_err"] = fit.excess_noise_error;
        b.summary["results"]["fit"]["electronic_noise"] = fit.electronic_noise;
        b.summary["results"]["fit"]["electronic_noise_err"] = fit.electronic_noise_error;
        b.summary["checks"]["excess_noise_recovered"] =
            detail::check(fit.excess_noise, x, 0.3, fit.fit.converged() && std::abs(fit.excess_noise - x) <= 0.3);
    }
    b.summary["checks"]["mc_matches_model"] = detail::check(worst_full, 0.0, 0.1, worst_full <= 0.1);
    b.summary["checks"]["ideal_matches_shot_noise"] = detail::check(worst_ideal, 0.0, 0.1, worst_ideal <= 0.1);
    return b;
}

/// Beat phase and amplitude change across a frequency scan, then the
/// two-parameter fit of the phase data.
inline ResultBundle run_spectrum(const ScenarioConfig& c)
{
    const AtomicLine line = detail::line_from(c);
    const Polarization pol = detail::polarization_from(c);
    const double df = detail::half_splitting(c);
    const double field = c.si("spectrum.field_mt");
    const double rho = c.value("spectrum.column_density");
    const double offset = c.si("spectrum.offset_mhz");
    const auto centres = detail::linspace(c.si("spectrum.scan_start_mhz"), c.si("spectrum.scan_stop_mhz"), c.integer("spectrum.points"));
    const auto shots = static_cast<std::size_t>(c.integer("spectrum.shots"));
    const PulseConfig base = detail::pulse_from(c, c.value("spectrum.photons"), c.si("detector.window_us"));

    struct Point {
        BeatObservables truth;
        double phi, phi_err, eps, eps_err;
    };
    const auto pts = parallel_map<Point>(centres.size(), c.threads(), [&](std::size_t k) {
        Point pt;
        pt.truth = beat_observables({centres[k] - offset, df}, rho, field, pol, line);
        PulseConfig p = base;
        p.seed = substream_seed(c.seed(), {detail::kSpectrumStream, k});
        std::vector<DemodRecord> atoms(shots), background(shots);
        for (std::size_t r = 0; r < shots; ++r) {
            atoms[r] = simulate_pulse(p, pt.truth.phase, pt.truth.amplitude_change, r);
            background[r] = simulate_pulse(p, 0.0, 0.0, shots + r);
        }
        const auto est = estimate_phase_amp(atoms, background);
        pt.phi = est.phase;
        pt.eps = est.amplitude_change;
        const double n = static_cast<double>(shots);
        if (base.noiseless) {
            pt.phi_err = pt.eps_err = 0.0;
            return pt;
        }
        pt.phi_err = std::sqrt((std::pow(phase_spread(atoms), 2) + std::pow(phase_spread(background), 2)) / n);
        auto amp_var = [](const std::vector<DemodRecord>& rs) {
            const double m = mean_amplitude(rs);
            double ss = 0.0;
            for (const auto& r : rs) ss += (r.amplitude() - m) * (r.amplitude() - m);
            return ss / static_cast<double>(rs.size() - 1);
        };
        const double aa = mean_amplitude(atoms), ab = mean_amplitude(background);
        pt.eps_err = std::sqrt(amp_var(atoms) / (n * ab * ab) + aa * aa * amp_var(background) / (n * ab * ab * ab * ab));
        return pt;
    });

    std::vector<DataPoint> data;
    bool thin = true;
    for (std::size_t k = 0; k < centres.size(); ++k) {
        data.push_back({centres[k], pts[k].phi, pts[k].phi_err > 0.0 ? pts[k].phi_err : 1.0});
        thin = thin && pts[k].truth.thin_sample;
    }
    const auto fit = fit_spectrum(data, df, field, pol, line, c.flag("spectrum.weighted"));

    Table t;
    t.name = "spectrum";
    t.comments = {"beat phase (rad) and fractional amplitude change versus centre frequency f0 (MHz)",
                  "shots_per_point=" + std::to_string(shots) + " with atoms and " + std::to_string(shots) + " without",
                  "fit columns use the phase-fit parameters only"};
    t.columns = {"f0", "phi_mean", "phi_err", "eps_mean", "eps_err", "phi_fit", "eps_fit", "phi_true", "eps_true"};
    for (std::size_t k = 0; k < centres.size(); ++k) {
        const auto model = fit.predict(centres[k]);
        t.add_row({centres[k] / 1e6, pts[k].phi, pts[k].phi_err, pts[k].eps, pts[k].eps_err, model.phase,
                   model.amplitude_change, pts[k].truth.phase, pts[k].truth.amplitude_change});
    }

    ResultBundle b;
    b.scenario = Scenario::Spectrum;
    b.tables.push_back(std::move(t));
    auto& r = b.summary["results"];
    r["fit"] = detail::fit_json(fit.fit);
    r["column_density"] = fit.column_density;
    r["column_density_err"] = fit.column_density_error;
    r["frequency_offset_mhz"] = fit.frequency_offset / 1e6;
    r["frequency_offset_err_mhz"] = fit.frequency_offset_error / 1e6;
    r["thin_sample"] = thin;
    b.summary["checks"]["column_density_recovered"] =
        detail::check(fit.column_density, rho, 0.6e12, fit.fit.converged() && std::abs(fit.column_density - rho) <= 0.6e12);
    return b;
}

/// Centre-of-mass oscillation observed through repeated phase measurements
/// at a probe one cloud radius from the trap centre.
inline ResultBundle run_oscillation(const ScenarioConfig& c)
{
    const AtomicLine line = detail::line_from(c);
    const Polarization pol = detail::polarization_from(c);
    const double df = detail::half_splitting(c);
    const double field = c.si("oscillation.field_mt");
    const double centre = line.resonance + zeeman_shift(2, 1, field, line) + c.si("oscillation.detuning_mhz");
    const double waist = c.si("probe.waist_um");

    CloudState cloud = detail::cloud_from(c);
    cloud.motion.amplitude = c.si("oscillation.amplitude_um");
    cloud.motion.frequency = c.value("oscillation.frequency_hz");
    cloud.motion.damping_time = c.is_set("oscillation.damping_ms") ? c.si("oscillation.damping_ms")
                                                                   : std::numeric_limits<double>::infinity();
    cloud.motion.phase = c.value("oscillation.phase_rad");
    const double probe_offset = c.is_set("oscillation.probe_offset_um") ? c.si("oscillation.probe_offset_um") : cloud.axial_radius();

    const double incident = c.value("oscillation.photons");
    const double pulse_length = c.si("oscillation.pulse_us");
    PumpPulse pump;
    pump.beat = {centre, df};
    pump.polarization = pol;
    pump.field = field;
    pump.photons = incident;
    pump.duration = pulse_length;
    pump.area = beam_area(waist);
    pump.scheme = c.text("loss_scan.scheme") == "full" ? PumpingScheme::FullManifold : PumpingScheme::StretchedStateOnly;
    const double q = pulse_loss_fraction(pump_rate_equations(pump, line));
    const double p_in = c.value("oscillation.probe_fraction");

    PulseConfig det = detail::pulse_from(c, c.value("detector.quantum_efficiency") * incident, pulse_length);
    det.seed = substream_seed(c.seed(), {detail::kOscillationStream});

    const auto n = static_cast<std::size_t>(c.integer("oscillation.points"));
    const double spacing = c.si("oscillation.spacing_ms");
    const double n0 = cloud.atom_number;

    Table t;
    t.name = "oscillation";
    t.comments = {"phase (rad) of each pulse versus time t (s)",
                  "centre_mhz=" + format_double(centre / 1e6) + " probe_offset_m=" + format_double(probe_offset),
                  "loss_per_pulse_q=" + format_double(q) + " probe_fraction=" + format_double(p_in)};
    t.columns = {"t", "phi", "phi_true", "com_offset", "survival", "phi_fit"};
    std::vector<DataPoint> data;
    std::vector<std::array<double, 5>> raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double time = spacing * static_cast<double>(i);
        const double surv = survival(static_cast<double>(i), q, p_in);
        cloud.atom_number = n0 * surv;
        const double x = com_offset(time, cloud);
        const auto obs = beat_observables({centre, df}, column_density(cloud, probe_offset - x, waist), field, pol, line);
        const auto rec = simulate_pulse(det, obs.phase, obs.amplitude_change, i);
        raw[i] = {time, rec.phase(), obs.phase, x, surv};
        data.push_back({time, rec.phase(), 1.0});
    }
    const auto fit = fit_damped_sine(data);
    for (const auto& r : raw) t.add_row({r[0], r[1], r[2], r[3], r[4], fit(r[0])});

    const double lost = 1.0 - survival(static_cast<double>(n), q, p_in);
    ResultBundle b;
    b.scenario = Scenario::Oscillation;
    b.tables.push_back(std::move(t));
    auto& r = b.summary["results"];
    r["fit"] = detail::fit_json(fit.fit);
    r["frequency_hz"] = fit.frequency;
    r["frequency_err_hz"] = fit.frequency_error();
    r["damping_time_s"] = fit.damping_time();
    r["amplitude_rad"] = fit.amplitude;
    r["loss_per_pulse"] = q;
    r["atom_loss"] = lost;
    const double f_true = cloud.motion.frequency;
    b.summary["checks"]["frequency_recovered"] =
        detail::check(fit.frequency, f_true, 1.0, fit.fit.converged() && std::abs(fit.frequency - f_true) <= 1.0);
    b.summary["checks"]["atom_loss_below_3pct"] = detail::check(lost, 0.0, 0.03, lost < 0.03);
    return b;
}

/// Surviving fraction after a train of probe pulses for both polarisations.
inline ResultBundle run_loss_scan(const ScenarioConfig& c)
{
    const AtomicLine line = detail::line_from(c);
    const auto centres = detail::linspace(c.si("loss_scan.scan_start_mhz"), c.si("loss_scan.scan_stop_mhz"), c.integer("loss_scan.points"));
    LossScanConfig base;
    base.half_splitting = detail::half_splitting(c);
    base.field = c.si("loss_scan.field_mt");
    base.duration = c.si("loss_scan.pulse_us");
    base.waist = c.si("probe.waist_um");
    base.probe_fraction = c.value("loss_scan.probe_fraction");
    base.pulses = c.value("loss_scan.pulses");
    base.scheme = c.text("loss_scan.scheme") == "full" ? PumpingScheme::FullManifold : PumpingScheme::StretchedStateOnly;

    LossScanConfig perp = base, par = base;
    perp.polarization = Polarization::perpendicular();
    perp.photons = c.value("loss_scan.photons_perpendicular");
    par.polarization = Polarization::parallel();
    par.photons = c.value("loss_scan.photons_parallel");
    const auto lp = loss_spectrum(centres, perp, line, c.threads());
    const auto lq = loss_spectrum(centres, par, line, c.threads());

    ResultBundle b;
    b.scenario = Scenario::LossScan;
    for (const auto& [name, pts, cfg] : {std::tuple{"loss_perpendicular", &lp, &perp}, std::tuple{"loss_parallel", &lq, &par}}) {
        Table t;
        t.name = name;
        t.comments = {"surviving fraction versus centre frequency f0 (MHz)",
                      "photons_per_pulse=" + format_double(cfg->photons) + " pulses=" + format_double(cfg->pulses) +
                          " probe_fraction=" + format_double(cfg->probe_fraction)};
        t.columns = {"f0", "survival", "survival_simple", "q_rate", "q_simple"};
        for (const auto& p : *pts) t.add_row({p.centre / 1e6, p.survival_rate, p.survival_simple, p.q_rate, p.q_simple});
        b.tables.push_back(std::move(t));
    }

    // Agreement of the one-line model where pumping per pulse is weak.
    double worst = 0.0;
    for (const auto& p : lp)
        if (p.q_rate < 0.05 && p.q_rate > 0.0) worst = std::max(worst, std::abs(p.q_simple / p.q_rate - 1.0));

    // Parallel light loses at least as many atoms wherever either curve dips.
    bool ordered = true;
    for (std::size_t i = 0; i < centres.size(); ++i)
        if (std::min(lp[i].survival_rate, lq[i].survival_rate) < 0.99) ordered = ordered && lq[i].survival_rate <= lp[i].survival_rate;

    // The two deepest local minima of the perpendicular curve.
    std::vector<std::pair<double, double>> minima;
    for (std::size_t i = 1; i + 1 < lp.size(); ++i)
        if (lp[i].survival_rate < lp[i - 1].survival_rate && lp[i].survival_rate <= lp[i + 1].survival_rate)
            minima.emplace_back(lp[i].survival_rate, lp[i].centre);
    std::sort(minima.begin(), minima.end());
    const double step = centres[1] - centres[0];
    const double sigma_minus = line.resonance + zeeman_shift(2, 1, base.field, line);
    double separation = std::numeric_limits<double>::quiet_NaN();
    bool located = minima.size() >= 2;
    if (located) {
        const double lo = std::min(minima[0].second, minima[1].second), hi = std::max(minima[0].second, minima[1].second);
        separation = hi - lo;
        located = std::abs(lo - (sigma_minus - base.half_splitting)) <= step &&
                  std::abs(hi - (sigma_minus + base.half_splitting)) <= step;
    }

    auto& r = b.summary["results"];
    r["min_survival_perpendicular"] = minima.empty() ? 1.0 : minima.front().first;
    r["dip_separation_mhz"] = separation / 1e6;
    r["sigma_minus_resonance_mhz"] = sigma_minus / 1e6;
    r["max_rel_dev_simple_q"] = worst;
    r["loss_coefficient"] = sigma_minus_loss_coefficient();
    b.summary["checks"]["simple_q_agrees"] = detail::check(worst, 0.0, 0.05, worst <= 0.05);
    b.summary["checks"]["parallel_loses_more"] = Json{{"pass", ordered}};
    b.summary["checks"]["dips_at_sigma_minus"] =
        detail::check(separation / 1e6, 2.0 * base.half_splitting / 1e6, step / 1e6,
                      located && std::abs(separation - 2.0 * base.half_splitting) <= step);
    return b;
}

/// Figure of merit across the centre frequency for two fields and for a
/// condensate target.
inline ResultBundle run_fom_scan(const ScenarioConfig& c)
{
    const AtomicLine line = detail::line_from(c);
    const double lo = c.si("fom_scan.scan_start_mhz"), hi = c.si("fom_scan.scan_stop_mhz");
    const auto centres = detail::linspace(lo, hi, c.integer("fom_scan.points"));

    FomConfig base;
    base.half_splitting = detail::half_splitting(c);
    base.waist = c.si("probe.waist_um");
    base.excess_noise = c.value("detector.excess_noise");
    base.quantum_efficiency = c.value("detector.quantum_efficiency");
    base.condensate_loss_factor = c.value("fom_scan.condensate_loss_factor");
    base.include_loss_coefficient = c.flag("fom_scan.include_loss_coefficient");
    base.polarization = detail::polarization_from(c);
    base.line = line;

    FomConfig low = base, high = base, bec = base;
    low.field = c.si("fom_scan.low_field_ut");
    high.field = c.si("fom_scan.high_field_ut");
    bec.field = low.field;
    bec.waist = c.si("fom_scan.condensate_waist_um");
    bec.regime = TargetRegime::Condensate;

    ResultBundle b;
    b.scenario = Scenario::FomScan;
    Json& r = b.summary["results"];
    double peak_low = 0.0, peak_high = 0.0, peak_bec = 0.0;
    for (const auto& [name, cfg, peak] : {std::tuple{"fom_low_field", &low, &peak_low}, std::tuple{"fom_high_field", &high, &peak_high},
                                          std::tuple{"fom_condensate", &bec, &peak_bec}}) {
        Table t;
        t.name = name;
        t.comments = {"figure of merit versus centre frequency f0 (MHz) from the zero-field resonance",
                      "field_t=" + format_double(cfg->field) + " waist_m=" + format_double(cfg->waist) +
                          " regime=" + (cfg->regime == TargetRegime::Condensate ? "condensate" : "thermal")};
        t.columns = {"f0", "fom", "phase_per_atom", "eps1"};
        for (const auto& p : fom_scan(centres, *cfg, c.threads()))
            t.add_row({p.centre / 1e6, p.value, p.phase_per_atom, p.sigma_minus_scatter});
        b.tables.push_back(std::move(t));

        const auto best = fom_optimize(*cfg, lo, hi);
        *peak = best.point.value;
        r[name] = {{"peak", best.point.value}, {"peak_centre_mhz", best.centre / 1e6}, {"interior", best.interior}};
    }
    const double ratio = peak_high / peak_low;
    r["high_to_low_ratio"] = ratio;
    b.summary["checks"]["low_field_peak"] =
        detail::check(peak_low, 1.0 / 400.0, 0.15, std::abs(peak_low * 400.0 - 1.0) <= 0.15);
    b.summary["checks"]["high_field_gain"] = detail::check(ratio, 1.8, 0.0, ratio >= 1.8);
    b.summary["checks"]["condensate_peak"] = detail::check(peak_bec, 0.03, 0.2, std::abs(peak_bec / 0.03 - 1.0) <= 0.2);
    return b;
}

/// Fits a model to columns of an existing CSV file.
inline ResultBundle run_fit(const ScenarioConfig& c)
{
    const std::string path = c.text("fit.input");
    std::ifstream in(path);
    if (!in) throw InputError("fit.input: cannot open '" + path + "'");
    const Table input = parse_csv(in);

    const std::string model = c.text("fit.model");
    auto pick = [&](const char* key, const char* fallback) {
        const std::string v = c.text(key);
        return v.empty() ? std::string(fallback) : v;
    };
    const bool is_noise = model == "noise", is_spectrum = model == "spectrum";
    const std::string xc = pick("fit.x_column", is_noise ? "N" : is_spectrum ? "f0" : "t");
    const std::string yc = pick("fit.y_column", is_noise ? "sigma_phi_mc" : is_spectrum ? "phi_mean" : "phi");
    const std::string sc = pick("fit.sigma_column", is_noise ? "sigma_phi_mc_err" : is_spectrum ? "phi_err" : "");
    const bool have_sigma = !sc.empty() && std::find(input.columns.begin(), input.columns.end(), sc) != input.columns.end();

    const auto xs = input.column(xc), ys = input.column(yc);
    const auto ss = have_sigma ? input.column(sc) : std::vector<double>(xs.size(), 1.0);
    const double x_scale = is_spectrum ? 1e6 : 1.0;
    std::vector<DataPoint> data;
    for (std::size_t i = 0; i < xs.size(); ++i) data.push_back({xs[i] * x_scale, ys[i], ss[i]});

    ResultBundle b;
    b.scenario = Scenario::Fit;
    Json& r = b.summary["results"];
    r["model"] = model;
    r["input"] = path;
    r["weighted"] = have_sigma && (is_noise || c.flag("spectrum.weighted"));
    std::function<double(double)> curve;
    if (is_noise) {
        const auto fit = fit_noise_model(data, have_sigma);
        r["fit"] = detail::fit_json(fit.fit);
        r["excess_noise"] = fit.excess_noise;
        r["excess_noise_err"] = fit.excess_noise_error;
        r["electronic_noise"] = fit.electronic_noise;
        r["electronic_noise_err"] = fit.electronic_noise_error;
        curve = [x = fit.excess_noise, ce = fit.electronic_noise](double n) { return predicted_sigma_phi(n, x, ce); };
    } else if (is_spectrum) {
        const auto fit = fit_spectrum(data, detail::half_splitting(c), c.si("spectrum.field_mt"), detail::polarization_from(c),
                                      detail::line_from(c), have_sigma && c.flag("spectrum.weighted"));
        r["fit"] = detail::fit_json(fit.fit);
        r["column_density"] = fit.column_density;
        r["column_density_err"] = fit.column_density_error;
        r["frequency_offset_mhz"] = fit.frequency_offset / 1e6;
        r["frequency_offset_err_mhz"] = fit.frequency_offset_error / 1e6;
        curve = [fit](double f) { return fit.predict_phase(f); };
    } else {
        const auto fit = fit_damped_sine(data, have_sigma);
        r["fit"] = detail::fit_json(fit.fit);
        r["amplitude"] = fit.amplitude;
        r["frequency_hz"] = fit.frequency;
        r["frequency_err_hz"] = fit.frequency_error();
        r["decay_rate"] = fit.decay_rate;
        r["decay_rate_err"] = fit.decay_rate_error();
        r["phase"] = fit.phase;
        r["offset"] = fit.offset;
        curve = [fit](double t) { return fit(t); };
    }

    Table t;
    t.name = "fit";
    t.comments = {"model=" + model + " input=" + path};
    t.columns = {xc, yc, "model", "residual"};
    for (const auto& d : data) {
        const double m = curve(d.x);
        t.add_row({d.x / x_scale, d.y, m, d.y - m});
    }
    b.tables.push_back(std::move(t));
    return b;
}

/// Runs the configured scenario and attaches provenance to the summary.
inline ResultBundle run_scenario(const ScenarioConfig& cfg)
{
    ResultBundle b;
    try {
        switch (cfg.scenario) {
        case Scenario::NoiseCurve: b = run_noise_curve(cfg); break;
        case Scenario::Spectrum: b = run_spectrum(cfg); break;
        case Scenario::Oscillation: b = run_oscillation(cfg); break;
        case Scenario::LossScan: b = run_loss_scan(cfg); break;
        case Scenario::FomScan: b = run_fom_scan(cfg); break;
        case Scenario::Fit: b = run_fit(cfg); break;
        }
    } catch (const NumericalError& e) {
        throw NumericalError("scenario " + to_string(cfg.scenario) + ": " + e.what());
    }
    Json summary;
    summary["scenario"] = to_string(cfg.scenario);
    summary["version"] = kVersion;
    summary["seed"] = cfg.seed();
    summary["config"] = cfg.tree;
    summary["results"] = b.summary.value("results", Json::object());
    summary["checks"] = b.summary.value("checks", Json::object());
    std::vector<std::string> files;
    for (const auto& t : b.tables) files.push_back(t.name + ".csv");
    summary["tables"] = files;
    detail::nan_to_null(summary);
    b.summary = std::move(summary);
    return b;
}

} // namespace hetprobe
