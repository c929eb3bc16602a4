#pragma once

// Thermal cloud in a harmonic magnetic trap and the column density it
// presents to a Gaussian probe displaced along the axial (oscillation) axis.
// The probe propagates along one radial axis; the other radial axis is the
// transverse direction of the column.

#include <cmath>
#include <limits>

#include "hetprobe/constants.hpp"
#include "hetprobe/errors.hpp"

namespace hetprobe {

struct TrapConfig {
    double radial_frequency = 75.0;  // Hz
    double axial_frequency = 21.0;   // Hz
    double field_minimum = 0.6e-3;   // T

    void validate() const
    {
        detail::require(radial_frequency > 0.0 && axial_frequency > 0.0, "trap: frequencies must be positive");
        detail::require(field_minimum >= 0.0, "trap: field minimum must be non-negative");
    }
};

/// Damped centre-of-mass motion along the axial direction.
struct Trajectory {
    double amplitude = 0.0;   // m
    double frequency = 21.0;  // Hz
    double damping_time = std::numeric_limits<double>::infinity();  // s
    double phase = 0.0;       // rad
};

struct CloudState {
    double atom_number = 2.4e6;
    double temperature = 60e-6;  // K
    double atom_mass = constants::kRb87Mass;
    TrapConfig trap;
    Trajectory motion;

    void validate() const
    {
        trap.validate();
        detail::require(atom_number >= 0.0, "cloud: atom number must be non-negative");
        detail::require(temperature > 0.0, "cloud: temperature must be positive");
        detail::require(atom_mass > 0.0, "cloud: atom mass must be positive");
    }

    /// Gaussian rms radius sqrt(kT/m) / (2 pi f).
    double radius(double trap_frequency) const
    {
        return std::sqrt(constants::kBoltzmann * temperature / atom_mass) / (2.0 * constants::kPi * trap_frequency);
    }
    double axial_radius() const { return radius(trap.axial_frequency); }
    double radial_radius() const { return radius(trap.radial_frequency); }
};

namespace detail {

// rms width of cloud convolved with the normalised beam profile (rms w/2)
inline double beam_weighted_width(double sigma, double waist)
{
    return std::sqrt(sigma * sigma + 0.25 * waist * waist);
}

} // namespace detail

/// Beam-averaged column density (atoms/m^2) for a probe centred `offset`
/// from the cloud centre along the axial direction:
///   N / (2 pi s_z s_r) exp(-offset^2 / (2 s_z^2)),  s_i^2 = sigma_i^2 + w^2/4.
inline double column_density(const CloudState& cloud, double offset, double waist)
{
    cloud.validate();
    detail::require(waist > 0.0, "column_density: waist must be positive");
    const double sz = detail::beam_weighted_width(cloud.axial_radius(), waist);
    const double sr = detail::beam_weighted_width(cloud.radial_radius(), waist);
    return cloud.atom_number / (2.0 * constants::kPi * sz * sr) * std::exp(-offset * offset / (2.0 * sz * sz));
}

/// Cloud displacement x(t) = x0 exp(-t/tau) cos(2 pi f t + psi).
inline double com_offset(double t, const CloudState& cloud)
{
    detail::require(t >= 0.0, "com_offset: time must be non-negative");
    const auto& m = cloud.motion;
    const double envelope = std::isinf(m.damping_time) ? 1.0 : std::exp(-t / m.damping_time);
    return m.amplitude * envelope * std::cos(2.0 * constants::kPi * m.frequency * t + m.phase);
}

/// Fraction of the trapped atoms in the probe, weighted by the beam's
/// relative intensity exp(-2 r^2 / w^2). Equals the beam-averaged column
/// density times the effective area pi w^2 / 2, divided by N.
inline double fraction_in_probe(const CloudState& cloud, double waist, double offset)
{
    cloud.validate();
    detail::require(waist > 0.0, "fraction_in_probe: waist must be positive");
    if (std::isinf(waist)) return 1.0;
    const double b = 0.5 * waist;
    const double sz = detail::beam_weighted_width(cloud.axial_radius(), waist);
    const double sr = detail::beam_weighted_width(cloud.radial_radius(), waist);
    return (b / sz) * (b / sr) * std::exp(-offset * offset / (2.0 * sz * sz));
}

} // namespace hetprobe
