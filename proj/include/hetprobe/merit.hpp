#pragma once

// Figure of merit of the two-frequency probe: atom-number sensitivity per
// unit of sqrt(loss probability). It depends only on the operating point,
// never on the number of atoms or photons.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "hetprobe/atomics.hpp"
#include "hetprobe/errors.hpp"
#include "hetprobe/losses.hpp"
#include "hetprobe/parallel.hpp"
#include "hetprobe/photodetect.hpp"
#include "hetprobe/response.hpp"

namespace hetprobe {

enum class TargetRegime { Thermal, Condensate };

struct FomConfig {
    double half_splitting = 30e6;  // Hz; components at f0 +/- half_splitting
    double waist = 100e-6;
    double field = 10e-6;
    Polarization polarization = Polarization::perpendicular();
    double excess_noise = 3.3;
    double quantum_efficiency = 0.77;
    TargetRegime regime = TargetRegime::Thermal;
    // In a condensate every spontaneous emission removes the atom, so the
    // sigma-plus scattering adds to the sigma-minus loss (15:1 strengths).
    double condensate_loss_factor = 16.0;
    // Keep the sqrt(0.88) loss coefficient instead of rounding it to 1.
    bool include_loss_coefficient = false;
    AtomicLine line;

    double loss_scale() const { return regime == TargetRegime::Condensate ? condensate_loss_factor : 1.0; }

    void validate() const
    {
        if (!polarization.is_perpendicular())
            throw UnsupportedConfiguration(
                "figure of merit is defined for perpendicular polarisation only; with parallel light the same "
                "transition produces both the phase shift and the loss");
        detail::require(half_splitting != 0.0, "fom: half splitting must be non-zero");
        detail::require(waist > 0.0, "fom: waist must be positive");
        detail::require(field >= 0.0, "fom: field must be non-negative");
        detail::require(excess_noise >= 1.0, "fom: excess noise factor must be >= 1");
        detail::require(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0, "fom: quantum efficiency must lie in (0, 1]");
        detail::require(condensate_loss_factor > 0.0, "fom: condensate loss factor must be positive");
        line.validate();
    }
};

struct FomPoint {
    double centre = 0.0;
    double value = 0.0;
    double phase_per_atom = 0.0;          // rad per atom
    double sigma_minus_scatter = 0.0;     // eps1, per photon
    double loss_scale = 1.0;
    double quantum_efficiency = 0.77;
};

///   FoM = |phi_1| / (X sqrt(2 eps1 s)) * sqrt(eta)
/// with s the regime loss scale. Infinite only where eps1 vanishes exactly.
inline FomPoint figure_of_merit(double centre, const FomConfig& cfg)
{
    cfg.validate();
    const BeatConfig beat{centre, cfg.half_splitting};
    const double area = beam_area(cfg.waist);

    FomPoint pt;
    pt.centre = centre;
    pt.phase_per_atom = phase_per_atom(beat, area, cfg.field, cfg.polarization, cfg.line);
    pt.sigma_minus_scatter = sigma_minus_scatter_prob(beat, area, cfg.field, cfg.line);
    pt.loss_scale = cfg.loss_scale();
    pt.quantum_efficiency = cfg.quantum_efficiency;

    double loss = 2.0 * pt.sigma_minus_scatter * pt.loss_scale;
    if (cfg.include_loss_coefficient) loss *= kSimpleLossCoefficient;
    pt.value = loss > 0.0 ? std::abs(pt.phase_per_atom) / (cfg.excess_noise * std::sqrt(loss)) * std::sqrt(cfg.quantum_efficiency)
                          : std::numeric_limits<double>::infinity();
    return pt;
}

inline std::vector<FomPoint> fom_scan(std::span<const double> centres, const FomConfig& cfg, unsigned threads = 1)
{
    cfg.validate();
    return parallel_map<FomPoint>(centres.size(), threads, [&](std::size_t i) { return figure_of_merit(centres[i], cfg); });
}

struct FomOptimum {
    double centre = 0.0;
    FomPoint point;
    bool interior = true;  // false when the best grid point sits on a bound
};

/// Grid search followed by golden-section refinement on the bracketing
/// grid cells. Deterministic.
inline FomOptimum fom_optimize(const FomConfig& cfg, double lower, double upper, std::size_t grid_points = 2001)
{
    cfg.validate();
    detail::require(upper > lower, "fom_optimize: upper bound must exceed lower bound");
    detail::require(grid_points >= 3, "fom_optimize: need at least three grid points");

    const double step = (upper - lower) / static_cast<double>(grid_points - 1);
    std::size_t best = 0;
    double best_value = -1.0;
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double v = figure_of_merit(lower + step * static_cast<double>(i), cfg).value;
        if (v > best_value) {
            best_value = v;
            best = i;
        }
    }

    FomOptimum out;
    out.interior = best != 0 && best != grid_points - 1;
    if (!out.interior) {
        out.centre = lower + step * static_cast<double>(best);
        out.point = figure_of_merit(out.centre, cfg);
        return out;
    }

    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lower + step * static_cast<double>(best - 1);
    double b = lower + step * static_cast<double>(best + 1);
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = figure_of_merit(c, cfg).value;
    double fd = figure_of_merit(d, cfg).value;
    for (int it = 0; it < 200 && (b - a) > 1e-9 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = figure_of_merit(c, cfg).value;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = figure_of_merit(d, cfg).value;
        }
    }
    out.centre = 0.5 * (a + b);
    out.point = figure_of_merit(out.centre, cfg);
    return out;
}

/// sigma_Na = sigma_phi / |phi_1|; +inf when the probe has no phase response.
inline double atom_number_uncertainty(double phase_per_atom, double photons, double excess_noise, double electronic_noise)
{
    if (phase_per_atom == 0.0) return std::numeric_limits<double>::infinity();
    return predicted_sigma_phi(photons, excess_noise, electronic_noise) / std::abs(phase_per_atom);
}

/// Local phase imprinted on a condensate by the pulse: (N_gamma / N_a) phi.
inline double condensate_phase_imprint(double photons, double atoms, double phase)
{
    detail::require(atoms > 0.0, "condensate_phase_imprint: atom number must be positive");
    return photons / atoms * phase;
}

} // namespace hetprobe
