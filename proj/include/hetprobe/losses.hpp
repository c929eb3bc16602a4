#pragma once

// Optical-pumping loss during a probe pulse. Ground-sublevel rate equations
// with the excited states adiabatically eliminated, the per-pulse loss
// fraction q, its linearised form, and the multi-pulse survival law.

#include <array>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include "hetprobe/atomics.hpp"
#include "hetprobe/constants.hpp"
#include "hetprobe/errors.hpp"
#include "hetprobe/parallel.hpp"
#include "hetprobe/response.hpp"

namespace hetprobe {

/// Ground populations indexed by m + 2 (m = -2..2) and excited populations
/// indexed by m' + 3 (m' = -3..3). The excited entries stay zero under
/// adiabatic elimination.
struct SublevelPopulations {
    std::array<double, 5> ground{0.0, 0.0, 0.0, 0.0, 1.0};
    std::array<double, 7> excited{};

    double& at(int m) { return ground[static_cast<std::size_t>(m + 2)]; }
    double at(int m) const { return ground[static_cast<std::size_t>(m + 2)]; }

    double total() const
    {
        double s = 0.0;
        for (double p : ground) s += p;
        for (double p : excited) s += p;
        return s;
    }

    static SublevelPopulations stretched() { return {}; }
};

/// Probability that an atom in ground sublevel m is still trapped after the
/// pulse.
struct RetentionRule {
    std::array<double, 5> retention{0.0, 0.0, 0.0, 0.1, 1.0};

    double at(int m) const { return retention[static_cast<std::size_t>(m + 2)]; }

    void validate() const
    {
        for (double r : retention) detail::require(r >= 0.0 && r <= 1.0, "retention probabilities must lie in [0, 1]");
    }
};

/// Which ground sublevels the probe excites. StretchedStateOnly follows the
/// level scheme out of |2,2> alone: atoms pumped elsewhere stay there.
/// FullManifold also excites m < 2, including repumping back to m = 2.
enum class PumpingScheme { StretchedStateOnly, FullManifold };

struct PumpPulse {
    BeatConfig beat;
    Polarization polarization = Polarization::perpendicular();
    double field = 0.0;            // T
    double photons = 6e5;          // incident photons in the pulse
    double duration = 30e-6;       // s
    double area = beam_area(100e-6);
    PumpingScheme scheme = PumpingScheme::StretchedStateOnly;
    double max_step_probability = 1e-3;

    void validate() const
    {
        beat.validate();
        detail::require(field >= 0.0, "pump: magnetic field must be non-negative");
        detail::require(photons >= 0.0, "pump: photon number must be non-negative");
        detail::require(duration > 0.0, "pump: duration must be positive");
        detail::require(area > 0.0, "pump: beam area must be positive");
        detail::require(max_step_probability > 0.0 && max_step_probability < 1.0,
                        "pump: step probability bound must lie in (0, 1)");
    }
};

using RateMatrix = std::array<std::array<double, 5>, 5>;

/// Generator of d(ground)/dt in s^-1. Each excitation |m> -> |m'> by one
/// frequency component occurs at
///   p_q (7 S_{m,m'}) L(delta) * 3 lambda^2 / (2 pi A) * (N/2) / T,
/// with L the Lorentzian, and is followed by decay with the F'=3 branching.
inline RateMatrix pumping_rate_matrix(const PumpPulse& pulse, const AtomicLine& line = {})
{
    pulse.validate();
    RateMatrix rates{};
    const double kappa = 3.0 * line.wavelength * line.wavelength / (2.0 * constants::kPi * pulse.area);
    const double photons_per_component = 0.5 * pulse.photons;
    const double g2 = line.gamma * line.gamma;

    const int m_lo = pulse.scheme == PumpingScheme::FullManifold ? -2 : 2;
    for (int m = m_lo; m <= 2; ++m) {
        for (int q = -1; q <= 1; ++q) {
            const double p = pulse.polarization.component(q);
            const int mp = m + q;
            if (p == 0.0 || std::abs(mp) > constants::kExcitedF) continue;
            const double strength = 7.0 * transition_strength(m, mp);
            double lorentz = 0.0;
            for (double f : {pulse.beat.upper(), pulse.beat.lower()}) {
                const double d = zeeman_detuning(f, m, mp, pulse.field, line);
                lorentz += g2 / (g2 + d * d);
            }
            const double rate = p * strength * lorentz * kappa * photons_per_component / pulse.duration;
            rates[m + 2][m + 2] -= rate;
            for (const auto& [dest, b] : branching_ratios(mp)) rates[dest + 2][m + 2] += rate * b;
        }
    }
    return rates;
}

/// Integrates the ground-sublevel rate equations over one pulse starting
/// from `initial` (default: all atoms in |m=2>) with fixed-step RK4. The step
/// keeps the scattering probability per step below max_step_probability.
inline SublevelPopulations pump_rate_equations(const PumpPulse& pulse, const AtomicLine& line = {},
                                               SublevelPopulations initial = SublevelPopulations::stretched())
{
    const RateMatrix rates = pumping_rate_matrix(pulse, line);
    double max_out = 0.0;
    for (int i = 0; i < 5; ++i) max_out = std::max(max_out, -rates[i][i]);
    if (max_out == 0.0) return initial;

    const double expected = max_out * pulse.duration / pulse.max_step_probability;
    if (!(expected < 1e8)) {
        std::ostringstream msg;
        msg << "pump_rate_equations: step budget exceeded (max scattering rate " << max_out << " s^-1 over "
            << pulse.duration << " s needs " << expected << " steps)";
        throw NumericalError(msg.str());
    }
    const auto steps = static_cast<long>(std::ceil(expected));
    const double h = pulse.duration / static_cast<double>(steps);

    using Vec = std::array<double, 5>;
    auto deriv = [&](const Vec& y) {
        Vec d{};
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) d[i] += rates[i][j] * y[j];
        return d;
    };
    auto axpy = [](const Vec& y, double a, const Vec& k) {
        Vec out;
        for (int i = 0; i < 5; ++i) out[i] = y[i] + a * k[i];
        return out;
    };

    Vec y = initial.ground;
    const double norm0 = initial.total();
    for (long s = 0; s < steps; ++s) {
        const Vec k1 = deriv(y);
        const Vec k2 = deriv(axpy(y, 0.5 * h, k1));
        const Vec k3 = deriv(axpy(y, 0.5 * h, k2));
        const Vec k4 = deriv(axpy(y, h, k3));
        for (int i = 0; i < 5; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    SublevelPopulations out = initial;
    out.ground = y;
    for (double p : y) {
        if (!std::isfinite(p) || p < -1e-9) {
            std::ostringstream msg;
            msg << "pump_rate_equations: unphysical population " << p << " after " << steps << " steps of " << h << " s";
            throw NumericalError(msg.str());
        }
    }
    if (std::abs(out.total() - norm0) > 1e-6)
        throw NumericalError("pump_rate_equations: population not conserved");
    return out;
}

/// q = 1 - sum_m pop(m) retention(m).
inline double pulse_loss_fraction(const SublevelPopulations& pop, const RetentionRule& rule = {})
{
    rule.validate();
    double kept = 0.0;
    for (int m = -2; m <= 2; ++m) kept += pop.at(m) * rule.at(m);
    return 1.0 - kept;
}

/// Loss per sigma-minus excitation of |m'=1>: sum_m b_{1->m} (1 - retention(m)).
inline double sigma_minus_loss_coefficient(const RetentionRule& rule = {})
{
    rule.validate();
    double c = 0.0;
    for (const auto& [m, b] : branching_ratios(1)) c += b * (1.0 - rule.at(m));
    return c;
}

inline constexpr double kSimpleLossCoefficient = 0.88;
inline constexpr double kSimpleLossValidity = 0.2;

/// Linearised loss q = 0.88 eps1 N_gamma, valid while eps1 N_gamma << 1.
inline double simple_q(double eps1, double photons)
{
    detail::require(eps1 >= 0.0 && photons >= 0.0, "simple_q: arguments must be non-negative");
    return kSimpleLossCoefficient * eps1 * photons;
}

inline bool simple_q_valid(double eps1, double photons) { return eps1 * photons <= kSimpleLossValidity; }

/// Fraction of trapped atoms left after k pulses, each removing a fraction q
/// of the fraction p of atoms that sit in the beam (full replacement of the
/// probed atoms between pulses).
inline double survival(double pulses, double q, double p)
{
    detail::require(pulses >= 0.0, "survival: pulse count must be non-negative");
    const double qp = q * p;
    detail::require(qp >= 0.0 && qp <= 1.0, "survival: q p must lie in [0, 1]");
    return std::pow(1.0 - qp, pulses);
}

struct LossScanConfig {
    double half_splitting = 30e6;
    double field = 0.6e-3;
    Polarization polarization = Polarization::perpendicular();
    double photons = 6e5;
    double duration = 30e-6;
    double waist = 100e-6;
    double probe_fraction = 0.012;
    double pulses = 200;
    PumpingScheme scheme = PumpingScheme::StretchedStateOnly;
    RetentionRule retention;
};

struct LossPoint {
    double centre = 0.0;
    double q_rate = 0.0;             // from the rate equations
    double q_simple = 0.0;           // 0.88 eps1 N (sigma-minus only)
    double survival_rate = 1.0;
    double survival_simple = 1.0;
};

/// Surviving fraction versus probe centre frequency. Points are independent
/// and evaluated on `threads` workers; output order follows the grid.
inline std::vector<LossPoint> loss_spectrum(std::span<const double> centres, const LossScanConfig& cfg,
                                            const AtomicLine& line = {}, unsigned threads = 1)
{
    return parallel_map<LossPoint>(centres.size(), threads, [&](std::size_t i) {
        PumpPulse pulse;
        pulse.beat = {centres[i], cfg.half_splitting};
        pulse.polarization = cfg.polarization;
        pulse.field = cfg.field;
        pulse.photons = cfg.photons;
        pulse.duration = cfg.duration;
        pulse.area = beam_area(cfg.waist);
        pulse.scheme = cfg.scheme;

        LossPoint pt;
        pt.centre = centres[i];
        pt.q_rate = pulse_loss_fraction(pump_rate_equations(pulse, line), cfg.retention);
        pt.q_simple = simple_q(sigma_minus_scatter_prob(pulse.beat, pulse.area, cfg.field, line), cfg.photons);
        pt.survival_rate = survival(cfg.pulses, pt.q_rate, cfg.probe_fraction);
        pt.survival_simple = survival(cfg.pulses, std::min(1.0, pt.q_simple), cfg.probe_fraction);
        return pt;
    });
}

} // namespace hetprobe
