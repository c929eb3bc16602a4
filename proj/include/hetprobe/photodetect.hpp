#pragma once

// Detection chain for the beat note: photon statistics, avalanche excess
// noise, electronic noise and phase-sensitive (I/Q) demodulation.
//
// Quadratures are expressed in photon-count units: a pulse of N detected
// photons with beat phase phi integrates to (N/2) cos(phi), (N/2) sin(phi).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hetprobe/constants.hpp"
#include "hetprobe/errors.hpp"
#include "hetprobe/random.hpp"

namespace hetprobe {

enum class DetectorMode { Statistical, TimeDomain };
enum class ArrivalModel { Poisson, Deterministic };

/// Photon count at which the electronic noise equals the avalanche-degraded
/// shot noise: 580 detected photons per microsecond over a 10 us window.
inline constexpr double kElectronicCrossingPhotons = 580.0 * 10.0;

/// Count-equivalent electronic noise constant C_e fixed by requiring
/// C_e / N* = X sqrt(2 / N*) at the crossing count N*.
inline double calibrated_electronic_noise(double excess_noise, double crossing_photons = kElectronicCrossingPhotons)
{
    detail::require(crossing_photons > 0.0, "electronic noise crossing count must be positive");
    return excess_noise * std::sqrt(2.0 * crossing_photons);
}

/// Phase uncertainty of a single pulse with N detected photons.
inline double predicted_sigma_phi(double photons, double excess_noise, double electronic_noise)
{
    detail::require(photons > 0.0, "predicted_sigma_phi: photon number must be positive");
    const double avalanche = excess_noise * std::sqrt(2.0 / photons);
    const double electronic = electronic_noise / photons;
    return std::sqrt(avalanche * avalanche + electronic * electronic);
}

struct PulseConfig {
    double photon_rate = 3e10;  // detected photons per second
    double duration = 10e-6;    // s, an integer number of beat cycles
    double beat_angular_frequency = 2.0 * constants::kPi * 60e6;
    double quantum_efficiency = 0.77;
    double excess_noise = 3.3;
    double electronic_noise = calibrated_electronic_noise(3.3);
    std::uint64_t seed = 1;
    DetectorMode mode = DetectorMode::Statistical;

    // Disables every random draw in the statistical mode (test hook).
    bool noiseless = false;
    // Additive Gaussian phase noise (rad) from optical path fluctuations.
    double phase_noise_floor = 0.0;

    // Time-domain chain.
    double filter_cutoff = 650e3;     // Hz, single-pole low-pass after the mixer
    double samples_per_cycle = 16.0;  // sample rate in units of the beat frequency
    ArrivalModel arrivals = ArrivalModel::Poisson;

    double mean_photons() const { return photon_rate * duration; }
    double beat_cycles() const { return beat_angular_frequency * duration / (2.0 * constants::kPi); }

    void validate() const
    {
        detail::require(photon_rate >= 0.0 && std::isfinite(photon_rate), "pulse: photon rate must be non-negative");
        detail::require(duration > 0.0, "pulse: duration must be positive");
        detail::require(beat_angular_frequency > 0.0, "pulse: beat frequency must be positive");
        const double cycles = beat_cycles();
        detail::require(std::abs(cycles - std::round(cycles)) <= 1e-6 * std::max(1.0, cycles),
                        "pulse: duration must contain an integer number of beat cycles");
        detail::require(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0, "pulse: quantum efficiency must lie in (0, 1]");
        detail::require(excess_noise >= 1.0, "pulse: avalanche excess noise factor must be >= 1");
        detail::require(electronic_noise >= 0.0, "pulse: electronic noise must be non-negative");
        detail::require(phase_noise_floor >= 0.0, "pulse: phase noise floor must be non-negative");
        if (mode == DetectorMode::Statistical && !noiseless)
            detail::require(mean_photons() >= 100.0, "pulse: statistical mode needs at least 100 detected photons");
        if (mode == DetectorMode::TimeDomain) {
            detail::require(samples_per_cycle >= 8.0, "pulse: sample rate must be at least 8x the beat frequency");
            detail::require(filter_cutoff > 0.0, "pulse: filter cutoff must be positive");
        }
    }
};

/// Integrated outputs of the phase-sensitive detector for one pulse.
struct DemodRecord {
    double in_phase = 0.0;
    double quadrature = 0.0;
    double photon_estimate = 0.0;  // from the mean detector level

    /// Beat phase in (-pi, pi].
    double phase() const
    {
        const double p = std::atan2(quadrature, in_phase);
        return p <= -constants::kPi ? constants::kPi : p;
    }

    double amplitude() const { return std::hypot(in_phase, quadrature); }
};

/// Per-photon avalanche multiplication with unit mean and variance X^2 - 1,
/// drawn from a Gamma law (shape 1/(X^2-1), scale X^2-1).
class AvalancheGain {
  public:
    explicit AvalancheGain(double excess_noise) : variance_(excess_noise * excess_noise - 1.0)
    {
        detail::require(excess_noise >= 1.0, "avalanche gain: excess noise factor must be >= 1");
        if (variance_ > 0.0) gamma_ = std::gamma_distribution<double>(1.0 / variance_, variance_);
    }

    double mean() const { return 1.0; }
    double variance() const { return variance_; }

    template <class Engine>
    double operator()(Engine& rng)
    {
        return variance_ > 0.0 ? gamma_(rng) : 1.0;
    }

  private:
    double variance_;
    std::gamma_distribution<double> gamma_;
};

namespace detail {

// Electronic noise and path-length phase noise act on the integrated
// quadratures identically in both detector modes and draw from their own
// substreams, so the two modes share these draws for a given pulse.
inline void add_post_integration_noise(const PulseConfig& cfg, std::uint64_t pulse_index, DemodRecord& rec)
{
    if (cfg.electronic_noise > 0.0) {
        auto rng = make_rng(cfg.seed, {pulse_index, stream::kElectronic});
        std::normal_distribution<double> e(0.0, 0.5 * cfg.electronic_noise);
        rec.in_phase += e(rng);
        rec.quadrature += e(rng);
    }
    if (cfg.phase_noise_floor > 0.0) {
        auto rng = make_rng(cfg.seed, {pulse_index, stream::kPathNoise});
        const double d = std::normal_distribution<double>(0.0, cfg.phase_noise_floor)(rng);
        const double c = std::cos(d), s = std::sin(d);
        const double i = rec.in_phase, q = rec.quadrature;
        rec.in_phase = c * i - s * q;
        rec.quadrature = s * i + c * q;
    }
}

inline void require_signal(double amplitude_change)
{
    require(amplitude_change >= 0.0 && amplitude_change <= 1.0, "pulse: amplitude change must lie in [0, 1]");
}

} // namespace detail

/// Draws the integrated quadratures directly from their Poisson/Gaussian
/// moments. The draw is a pure function of (cfg.seed, pulse_index).
inline DemodRecord simulate_pulse_statistical(const PulseConfig& cfg, double phase, double amplitude_change,
                                              std::uint64_t pulse_index = 0)
{
    cfg.validate();
    detail::require_signal(amplitude_change);

    const double mean = cfg.mean_photons();
    if (cfg.noiseless) {
        const double a = 0.5 * mean * (1.0 - amplitude_change);
        return {a * std::cos(phase), a * std::sin(phase), mean};
    }

    auto rng = make_rng(cfg.seed, {pulse_index, stream::kPhotons});
    const auto n = static_cast<double>(std::poisson_distribution<long long>(mean)(rng));
    const double a = 0.5 * n * (1.0 - amplitude_change);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double sd = cfg.excess_noise * std::sqrt(0.5 * n);

    DemodRecord rec;
    rec.in_phase = a * std::cos(phase) + sd * unit(rng);
    rec.quadrature = a * std::sin(phase) + sd * unit(rng);
    rec.photon_estimate = n + cfg.excess_noise * std::sqrt(n) * unit(rng);
    detail::add_post_integration_noise(cfg, pulse_index, rec);
    return rec;
}

/// Filtered mixer outputs sampled at interval dt, in counts per second.
struct TimeDomainTrace {
    double dt = 0.0;
    std::vector<double> in_phase;
    std::vector<double> quadrature;
};

struct TimeDomainPulse {
    TimeDomainTrace trace;
    DemodRecord record;
};

namespace detail {

// Cumulative intensity of R(1 + a cos(W t + phi)) divided by R.
inline double cumulative_exposure(double t, double a, double omega, double phase)
{
    return t + a / omega * (std::sin(omega * t + phase) - std::sin(phase));
}

inline std::vector<double> deterministic_arrivals(std::size_t count, double duration, double a, double omega,
                                                  double phase)
{
    std::vector<double> times(count);
    const double total = cumulative_exposure(duration, a, omega, phase);
    for (std::size_t k = 0; k < count; ++k) {
        const double target = (static_cast<double>(k) + 0.5) / static_cast<double>(count) * total;
        double lo = 0.0, hi = duration;
        for (int it = 0; it < 64; ++it) {
            const double mid = 0.5 * (lo + hi);
            (cumulative_exposure(mid, a, omega, phase) < target ? lo : hi) = mid;
        }
        times[k] = 0.5 * (lo + hi);
    }
    return times;
}

} // namespace detail

/// Photon-level simulation: arrivals from the inhomogeneous Poisson process
/// R(1 + (1-eps) cos(W t + phi)), Gamma-distributed avalanche gain per
/// photon, mixing with cos / -sin local oscillators, a single-pole low-pass
/// filter, and integration of the filtered outputs. The filter is run until
/// its response has decayed so the integral carries no truncation bias.
inline TimeDomainPulse simulate_pulse_timedomain(const PulseConfig& cfg, double phase, double amplitude_change,
                                                 std::uint64_t pulse_index = 0)
{
    PulseConfig checked = cfg;
    checked.mode = DetectorMode::TimeDomain;
    checked.validate();
    detail::require_signal(amplitude_change);

    const double omega = cfg.beat_angular_frequency;
    const double dt = 2.0 * constants::kPi / (omega * cfg.samples_per_cycle);
    const auto n_window = static_cast<std::size_t>(std::llround(cfg.duration / dt));
    const double tau = 1.0 / (2.0 * constants::kPi * cfg.filter_cutoff);
    const auto n_tail = static_cast<std::size_t>(std::ceil(20.0 * tau / dt));
    const double modulation = 1.0 - amplitude_change;

    auto rng = make_rng(cfg.seed, {pulse_index, stream::kPhotons});
    std::vector<double> arrivals;
    if (cfg.arrivals == ArrivalModel::Deterministic) {
        const auto count = static_cast<std::size_t>(std::llround(cfg.mean_photons()));
        arrivals = detail::deterministic_arrivals(count, cfg.duration, modulation, omega, phase);
    } else {
        // Over an integer number of cycles the count is Poisson(R T); given the
        // count, arrival times are i.i.d. with density ~ 1 + a cos(W t + phi).
        const auto count = std::poisson_distribution<long long>(cfg.mean_photons())(rng);
        arrivals.reserve(static_cast<std::size_t>(count));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        while (arrivals.size() < static_cast<std::size_t>(count)) {
            const double t = u(rng) * cfg.duration;
            if (u(rng) * (1.0 + modulation) <= 1.0 + modulation * std::cos(omega * t + phase)) arrivals.push_back(t);
        }
    }

    AvalancheGain gain(cfg.excess_noise);
    std::vector<double> mixed_i(n_window + n_tail, 0.0), mixed_q(n_window + n_tail, 0.0);
    double total_charge = 0.0;
    for (double t : arrivals) {
        const double g = gain(rng);
        const auto bin = std::min(n_window - 1, static_cast<std::size_t>(t / dt));
        mixed_i[bin] += g * std::cos(omega * t);
        mixed_q[bin] -= g * std::sin(omega * t);
        total_charge += g;
    }

    TimeDomainPulse out;
    out.trace.dt = dt;
    out.trace.in_phase.resize(mixed_i.size());
    out.trace.quadrature.resize(mixed_q.size());
    const double decay = std::exp(-dt / tau);
    double yi = 0.0, yq = 0.0, sum_i = 0.0, sum_q = 0.0;
    for (std::size_t j = 0; j < mixed_i.size(); ++j) {
        yi = decay * yi + (1.0 - decay) * mixed_i[j] / dt;
        yq = decay * yq + (1.0 - decay) * mixed_q[j] / dt;
        out.trace.in_phase[j] = yi;
        out.trace.quadrature[j] = yq;
        sum_i += yi;
        sum_q += yq;
    }

    out.record.in_phase = sum_i * dt;
    out.record.quadrature = sum_q * dt;
    out.record.photon_estimate = total_charge;
    detail::add_post_integration_noise(cfg, pulse_index, out.record);
    return out;
}

/// Dispatches on cfg.mode.
inline DemodRecord simulate_pulse(const PulseConfig& cfg, double phase, double amplitude_change,
                                  std::uint64_t pulse_index = 0)
{
    if (cfg.mode == DetectorMode::TimeDomain)
        return simulate_pulse_timedomain(cfg, phase, amplitude_change, pulse_index).record;
    return simulate_pulse_statistical(cfg, phase, amplitude_change, pulse_index);
}

inline double wrap_phase(double p)
{
    p = std::remainder(p, 2.0 * constants::kPi);
    return p <= -constants::kPi ? p + 2.0 * constants::kPi : p;
}

inline double circular_mean_phase(std::span<const DemodRecord> records)
{
    detail::require(!records.empty(), "circular mean of an empty record set");
    double s = 0.0, c = 0.0;
    for (const auto& r : records) {
        const double p = r.phase();
        s += std::sin(p);
        c += std::cos(p);
    }
    return std::atan2(s, c);
}

/// Sample standard deviation of the phases about their circular mean.
inline double phase_spread(std::span<const DemodRecord> records)
{
    detail::require(records.size() >= 2, "phase spread needs at least two records");
    const double centre = circular_mean_phase(records);
    double ss = 0.0;
    for (const auto& r : records) {
        const double d = wrap_phase(r.phase() - centre);
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(records.size() - 1));
}

inline double mean_amplitude(std::span<const DemodRecord> records)
{
    detail::require(!records.empty(), "mean amplitude of an empty record set");
    double s = 0.0;
    for (const auto& r : records) s += r.amplitude();
    return s / static_cast<double>(records.size());
}

struct PhaseAmplitudeEstimate {
    double phase = 0.0;             // atoms minus background, wrapped to (-pi, pi]
    double amplitude_change = 0.0;  // 1 - <A>_atoms / <A>_background
};

inline PhaseAmplitudeEstimate estimate_phase_amp(std::span<const DemodRecord> with_atoms,
                                                 std::span<const DemodRecord> background)
{
    detail::require(!with_atoms.empty() && !background.empty(), "estimate_phase_amp: record sets must be non-empty");
    return {wrap_phase(circular_mean_phase(with_atoms) - circular_mean_phase(background)),
            1.0 - mean_amplitude(with_atoms) / mean_amplitude(background)};
}

} // namespace hetprobe
