#pragma once

// Dispersive and absorptive response of a thin atomic sample to the
// two-frequency probe, plus the per-atom quantities that feed the loss and
// figure-of-merit models.

#include <array>
#include <cmath>

#include "hetprobe/atomics.hpp"
#include "hetprobe/constants.hpp"
#include "hetprobe/errors.hpp"

namespace hetprobe {

/// Fractional field attenuation above which the linearised thin-sample
/// treatment is flagged.
inline constexpr double kThinSampleLimit = 0.1;

/// Gaussian probe beam. The effective area relates the peak photon fluence
/// to the photon number: A = pi w^2 / 2.
struct ProbeGeometry {
    double waist = 100e-6;

    double area() const
    {
        detail::require(waist > 0.0, "probe geometry: waist must be positive");
        return 0.5 * constants::kPi * waist * waist;
    }

    /// Column density equivalent to a single atom inside the beam.
    double single_atom_column_density() const { return 1.0 / area(); }
};

inline double beam_area(double waist) { return ProbeGeometry{waist}.area(); }

/// Two equal-power components at centre +/- half_splitting.
struct BeatConfig {
    double centre = 0.0;
    double half_splitting = 30e6;

    double upper() const { return centre + half_splitting; }
    double lower() const { return centre - half_splitting; }
    double beat_angular_frequency() const { return 4.0 * constants::kPi * half_splitting; }

    void validate() const { detail::require(half_splitting != 0.0, "beat: half splitting must be non-zero"); }
};

namespace detail {

struct LineSums {
    double dispersive = 0.0;  // sum p S gamma delta / (delta^2 + gamma^2)
    double absorptive = 0.0;  // sum p S gamma^2 / (delta^2 + gamma^2)
};

inline LineSums line_sums(double frequency, double field, const Polarization& pol, const AtomicLine& line)
{
    LineSums s;
    const double g = line.gamma;
    for (int mp = 1; mp <= 3; ++mp) {
        const double weight = pol.fraction(mp) * line_strength(mp);
        if (weight == 0.0) continue;
        const double d = zeeman_detuning(frequency, mp, field, line);
        const double denom = d * d + g * g;
        s.dispersive += weight * g * d / denom;
        s.absorptive += weight * g * g / denom;
    }
    return s;
}

inline double column_prefactor(double column_density, const AtomicLine& line)
{
    require(column_density >= 0.0, "column density must be non-negative");
    return 3.5 * 3.0 * line.wavelength * line.wavelength * column_density / (2.0 * constants::kPi);
}

} // namespace detail

/// Optical phase shift theta(f) in radians. Detuning convention: light
/// frequency minus transition frequency, so blue detuning gives theta > 0.
inline double phase_shift(double frequency, double column_density, double field, const Polarization& pol,
                          const AtomicLine& line = {})
{
    return detail::line_sums(frequency, field, pol, line).dispersive * detail::column_prefactor(column_density, line);
}

/// Fractional field attenuation alpha(f). Only meaningful while alpha << 1;
/// see thin_sample_ok().
inline double attenuation(double frequency, double column_density, double field, const Polarization& pol,
                          const AtomicLine& line = {})
{
    return detail::line_sums(frequency, field, pol, line).absorptive * detail::column_prefactor(column_density, line);
}

inline bool thin_sample_ok(double alpha) { return alpha <= kThinSampleLimit; }

/// Saturation check against caller-supplied intensity metadata.
inline bool below_saturation(double intensity, double threshold = 0.1,
                             double saturation_intensity = constants::kRbD2SaturationIntensity)
{
    return intensity / saturation_intensity <= threshold;
}

struct BeatObservables {
    double phase = 0.0;             // phi = theta(f0 + df) - theta(f0 - df)
    double amplitude_change = 0.0;  // eps = alpha(f0 + df) + alpha(f0 - df)
    bool thin_sample = true;        // both alphas below kThinSampleLimit

    double scattered_fraction() const { return 2.0 * amplitude_change; }
};

inline BeatObservables beat_observables(const BeatConfig& beat, double column_density, double field,
                                        const Polarization& pol, const AtomicLine& line = {})
{
    beat.validate();
    const double k = detail::column_prefactor(column_density, line);
    const auto hi = detail::line_sums(beat.upper(), field, pol, line);
    const auto lo = detail::line_sums(beat.lower(), field, pol, line);
    const double alpha_hi = hi.absorptive * k;
    const double alpha_lo = lo.absorptive * k;
    return {(hi.dispersive - lo.dispersive) * k, alpha_hi + alpha_lo, thin_sample_ok(alpha_hi) && thin_sample_ok(alpha_lo)};
}

/// epsilon_1: sigma-minus excitations per atom per incident photon for a
/// perpendicular-polarised probe of effective area A.
inline double sigma_minus_scatter_prob(const BeatConfig& beat, double area, double field, const AtomicLine& line = {})
{
    beat.validate();
    detail::require(area > 0.0, "beam area must be positive");
    const double g2 = line.gamma * line.gamma;
    const double d_hi = zeeman_detuning(beat.upper(), 1, field, line);
    const double d_lo = zeeman_detuning(beat.lower(), 1, field, line);
    return line.wavelength * line.wavelength / (40.0 * constants::kPi * area) *
           (g2 / (g2 + d_hi * d_hi) + g2 / (g2 + d_lo * d_lo));
}

/// phi_1: beat phase shift produced by a single atom in the beam.
inline double phase_per_atom(const BeatConfig& beat, double area, double field, const Polarization& pol,
                             const AtomicLine& line = {})
{
    detail::require(area > 0.0, "beam area must be positive");
    return beat_observables(beat, 1.0 / area, field, pol, line).phase;
}

} // namespace hetprobe
