#pragma once

// Nonlinear least squares (damped Gauss-Newton with a Levenberg-Marquardt
// damping schedule and finite-difference Jacobians) and the three physical
// fits built on it: the beat-phase spectrum, the damped centre-of-mass
// oscillation, and the phase-noise model.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hetprobe/atomics.hpp"
#include "hetprobe/constants.hpp"
#include "hetprobe/errors.hpp"
#include "hetprobe/response.hpp"

namespace hetprobe {

enum class FitStatus { Converged, Degenerate, MaxIterations };

inline const char* to_string(FitStatus s)
{
    switch (s) {
    case FitStatus::Converged: return "converged";
    case FitStatus::Degenerate: return "degenerate";
    case FitStatus::MaxIterations: return "maxiter";
    }
    return "unknown";
}

struct FitResult {
    Eigen::VectorXd parameters;
    Eigen::MatrixXd covariance;
    double cost = 0.0;           // sum of squared weighted residuals
    double residual_norm = 0.0;  // sqrt(cost)
    FitStatus status = FitStatus::Degenerate;
    int iterations = 0;
    std::size_t data_points = 0;

    bool converged() const { return status == FitStatus::Converged; }

    double uncertainty(Eigen::Index i) const
    {
        if (covariance.size() == 0) return std::numeric_limits<double>::quiet_NaN();
        return std::sqrt(std::max(0.0, covariance(i, i)));
    }

    double reduced_chi2() const
    {
        const auto dof = static_cast<double>(data_points) - static_cast<double>(parameters.size());
        return dof > 0.0 ? cost / dof : std::numeric_limits<double>::quiet_NaN();
    }
};

/// One observation (x, y) with standard uncertainty sigma.
struct DataPoint {
    double x = 0.0;
    double y = 0.0;
    double sigma = 1.0;
};

struct LeastSquaresOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-8;   // relative parameter step
    double cost_tolerance = 1e-10;  // relative cost change
    double condition_limit = 1e-12; // smallest/largest eigenvalue of the scaled normal matrix
    // Multiply the covariance by the reduced chi^2 (use when sigma is unknown).
    bool scale_covariance = false;
    // Typical parameter magnitudes for finite-difference steps; empty means
    // max(|p_i|, 1).
    Eigen::VectorXd parameter_scale;
};

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

enum class DifferenceScheme { Forward, Central };

inline Eigen::MatrixXd finite_difference_jacobian(const ResidualFunction& residuals, const Eigen::VectorXd& p,
                                                  DifferenceScheme scheme = DifferenceScheme::Forward,
                                                  const Eigen::VectorXd& scale = {},
                                                  const Eigen::VectorXd* r0 = nullptr)
{
    const double eps = std::numeric_limits<double>::epsilon();
    const double rel = scheme == DifferenceScheme::Forward ? std::sqrt(eps) : std::cbrt(eps);
    const Eigen::VectorXd base = r0 ? *r0 : residuals(p);
    Eigen::MatrixXd jac(base.size(), p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        const double typical = scale.size() == p.size() ? std::abs(scale(j)) : 1.0;
        double h = rel * std::max(std::abs(p(j)), typical);
        Eigen::VectorXd up = p;
        up(j) += h;
        h = up(j) - p(j);  // exactly representable step
        if (scheme == DifferenceScheme::Forward) {
            jac.col(j) = (residuals(up) - base) / h;
        } else {
            Eigen::VectorXd down = p;
            down(j) -= h;
            jac.col(j) = (residuals(up) - residuals(down)) / (2.0 * h);
        }
    }
    return jac;
}

namespace detail {

inline bool well_conditioned(const Eigen::MatrixXd& normal, double limit)
{
    const Eigen::VectorXd d = normal.diagonal();
    if ((d.array() <= 0.0).any() || !d.allFinite()) return false;
    const Eigen::VectorXd inv_sqrt = d.array().rsqrt();
    const Eigen::MatrixXd scaled = inv_sqrt.asDiagonal() * normal * inv_sqrt.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return ev.minCoeff() > limit * ev.maxCoeff();
}

} // namespace detail

/// Minimises |r(p)|^2. Undamped Gauss-Newton steps are tried first; on
/// failure the Marquardt damping lambda diag(J^T J) grows by 10x until the
/// cost decreases, and shrinks by 10x after each success.
inline FitResult minimize_residuals(const ResidualFunction& residuals, Eigen::VectorXd p,
                                    const LeastSquaresOptions& opt = {})
{
    FitResult out;
    Eigen::VectorXd r = residuals(p);
    out.data_points = static_cast<std::size_t>(r.size());
    detail::require(r.size() >= p.size(), "least_squares: need at least as many residuals as parameters");
    if (!r.allFinite()) throw NumericalError("least_squares: non-finite residuals at the initial point");

    const Eigen::VectorXd& scale = opt.parameter_scale;
    double cost = r.squaredNorm();
    double lambda = 0.0;
    out.status = FitStatus::MaxIterations;

    for (int it = 1; it <= opt.max_iterations; ++it) {
        out.iterations = it;
        const Eigen::MatrixXd jac = finite_difference_jacobian(residuals, p, DifferenceScheme::Forward, scale, &r);
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd gradient = jac.transpose() * r;
        if (!detail::well_conditioned(normal, opt.condition_limit)) {
            out.status = FitStatus::Degenerate;
            break;
        }
        if (cost == 0.0) {
            out.status = FitStatus::Converged;
            break;
        }

        bool accepted = false;
        Eigen::VectorXd step;
        double new_cost = cost;
        while (lambda < 1e16) {
            Eigen::MatrixXd damped = normal;
            damped.diagonal() += lambda * normal.diagonal();
            step = damped.ldlt().solve(-gradient);
            const Eigen::VectorXd trial = p + step;
            const Eigen::VectorXd r_trial = residuals(trial);
            const double c = r_trial.allFinite() ? r_trial.squaredNorm() : std::numeric_limits<double>::infinity();
            if (c <= cost) {
                accepted = true;
                p = trial;
                r = r_trial;
                new_cost = c;
                lambda = lambda < 1e-12 ? 0.0 : lambda / 10.0;
                break;
            }
            lambda = lambda == 0.0 ? 1e-3 : lambda * 10.0;
        }
        if (!accepted) {
            out.status = FitStatus::Converged;  // no descent direction left at this precision
            break;
        }

        const double step_rel = step.norm() / (p.norm() + opt.step_tolerance);
        const double cost_rel = (cost - new_cost) / std::max(cost, std::numeric_limits<double>::min());
        cost = new_cost;
        if (step_rel < opt.step_tolerance || cost_rel < opt.cost_tolerance) {
            out.status = FitStatus::Converged;
            break;
        }
    }

    out.parameters = p;
    out.cost = cost;
    out.residual_norm = std::sqrt(cost);
    const Eigen::MatrixXd jac = finite_difference_jacobian(residuals, p, DifferenceScheme::Forward, scale, &r);
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    if (detail::well_conditioned(normal, opt.condition_limit)) {
        out.covariance = normal.ldlt().solve(Eigen::MatrixXd::Identity(p.size(), p.size()));
        out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
        if (opt.scale_covariance && out.data_points > static_cast<std::size_t>(p.size()))
            out.covariance *= out.reduced_chi2();
    } else {
        out.status = FitStatus::Degenerate;
        out.covariance = Eigen::MatrixXd::Constant(p.size(), p.size(), std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

using ScalarModel = std::function<double(double x, const Eigen::VectorXd& p)>;

/// Weighted least squares of y against model(x, p): minimises
/// sum ((y - model) / sigma)^2.
inline FitResult least_squares(const ScalarModel& model, std::span<const DataPoint> data, const Eigen::VectorXd& init,
                               const LeastSquaresOptions& opt = {})
{
    detail::require(static_cast<Eigen::Index>(data.size()) >= init.size(),
                    "least_squares: need at least as many points as parameters");
    for (const auto& d : data) detail::require(d.sigma > 0.0, "least_squares: sigma must be positive");
    const std::vector<DataPoint> points(data.begin(), data.end());
    auto residuals = [&model, points](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(static_cast<Eigen::Index>(points.size()));
        for (std::size_t i = 0; i < points.size(); ++i)
            r(static_cast<Eigen::Index>(i)) = (points[i].y - model(points[i].x, p)) / points[i].sigma;
        return r;
    };
    return minimize_residuals(residuals, init, opt);
}

// ---------------------------------------------------------------------------
// Spectrum fit: phi(f0) = rho * phi_unit(f0 - f_offset)

struct SpectrumFit {
    FitResult fit;
    double column_density = 0.0;
    double column_density_error = 0.0;
    double frequency_offset = 0.0;
    double frequency_offset_error = 0.0;

    double half_splitting = 30e6;
    double field = 0.0;
    Polarization polarization = Polarization::perpendicular();
    AtomicLine line;

    BeatObservables predict(double centre) const
    {
        const auto unit = beat_observables({centre - frequency_offset, half_splitting}, 1.0, field, polarization, line);
        return {column_density * unit.phase, column_density * unit.amplitude_change, true};
    }
    double predict_phase(double centre) const { return predict(centre).phase; }
    /// The amplitude curve implied by the phase-fit parameters, no extra freedom.
    double predict_amplitude_change(double centre) const { return predict(centre).amplitude_change; }
};

/// Fits beat-phase data (x = centre frequency in Hz, y = phase in rad) with
/// column density and a central frequency offset free. With
/// `weighted == false` the sigmas are ignored and the covariance is scaled by
/// the reduced chi^2.
inline SpectrumFit fit_spectrum(std::span<const DataPoint> data, double half_splitting, double field,
                                const Polarization& pol, const AtomicLine& line = {}, bool weighted = false)
{
    detail::require(data.size() >= 3, "fit_spectrum: need at least three points");
    detail::require(half_splitting != 0.0, "fit_spectrum: half splitting must be non-zero");
    constexpr double kRhoUnit = 1e12;  // atoms / m^2
    constexpr double kFreqUnit = 1e6;  // Hz

    std::vector<DataPoint> pts(data.begin(), data.end());
    if (!weighted)
        for (auto& d : pts) d.sigma = 1.0;

    SpectrumFit out;
    out.half_splitting = half_splitting;
    out.field = field;
    out.polarization = pol;
    out.line = line;

    auto unit_phase = [&](double centre, double offset) {
        return beat_observables({centre - offset, half_splitting}, 1.0, field, pol, line).phase;
    };

    const auto [lo_it, hi_it] = std::minmax_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.x < b.x; });
    const double x_lo = lo_it->x, x_hi = hi_it->x;
    const double mid = 0.5 * (x_lo + x_hi);

    // Coarse scan of the offset with the column density solved linearly.
    double max_shift = 0.0;
    for (int mp = 1; mp <= 3; ++mp) max_shift = std::max(max_shift, std::abs(zeeman_shift(2, mp, field, line)));
    const double step = 0.5 * line.gamma;
    const auto reach = static_cast<long>(std::ceil((0.5 * (x_hi - x_lo) + std::abs(half_splitting) + max_shift + 3.0 * line.gamma) / step));
    double best_cost = std::numeric_limits<double>::infinity(), best_offset = mid, best_rho = 0.0;
    for (long k = -reach; k <= reach; ++k) {
        const double offset = mid + static_cast<double>(k) * step;
        double suu = 0.0, suy = 0.0, syy = 0.0;
        for (const auto& d : pts) {
            const double w = 1.0 / (d.sigma * d.sigma);
            const double u = unit_phase(d.x, offset);
            suu += w * u * u;
            suy += w * u * d.y;
            syy += w * d.y * d.y;
        }
        if (suu <= 0.0) continue;
        const double cost = syy - suy * suy / suu;
        if (cost < best_cost) {
            best_cost = cost;
            best_offset = offset;
            best_rho = suy / suu;
        }
    }

    if (x_hi - x_lo < 2.0 * line.gamma) {
        out.fit.parameters = Eigen::Vector2d(best_rho / kRhoUnit, (best_offset - mid) / kFreqUnit);
        out.fit.status = FitStatus::Degenerate;
        out.fit.data_points = pts.size();
        out.column_density = best_rho;
        out.frequency_offset = best_offset;
        out.column_density_error = out.frequency_offset_error = std::numeric_limits<double>::quiet_NaN();
        return out;
    }

    // Offset is parameterised relative to the scan midpoint.
    ScalarModel model = [&](double x, const Eigen::VectorXd& p) {
        return p(0) * kRhoUnit * unit_phase(x, mid + p(1) * kFreqUnit);
    };
    LeastSquaresOptions opt;
    opt.scale_covariance = !weighted;
    opt.parameter_scale = Eigen::Vector2d(std::max(std::abs(best_rho) / kRhoUnit, 1e-3), line.gamma / kFreqUnit);
    out.fit = least_squares(model, pts, Eigen::Vector2d(best_rho / kRhoUnit, (best_offset - mid) / kFreqUnit), opt);

    out.column_density = out.fit.parameters(0) * kRhoUnit;
    out.frequency_offset = mid + out.fit.parameters(1) * kFreqUnit;
    out.column_density_error = out.fit.uncertainty(0) * kRhoUnit;
    out.frequency_offset_error = out.fit.uncertainty(1) * kFreqUnit;
    return out;
}

// ---------------------------------------------------------------------------
// Damped sine: y(t) = a exp(-k t) cos(2 pi f t + psi) + c

struct DampedSineFit {
    FitResult fit;
    double amplitude = 0.0;
    double frequency = 0.0;
    double decay_rate = 0.0;  // 1 / tau
    double phase = 0.0;
    double offset = 0.0;

    double damping_time() const
    {
        return decay_rate == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / decay_rate;
    }
    double frequency_error() const { return fit.uncertainty(1); }
    double decay_rate_error() const { return fit.uncertainty(2); }

    double operator()(double t) const
    {
        return amplitude * std::exp(-decay_rate * t) * std::cos(2.0 * constants::kPi * frequency * t + phase) + offset;
    }
};

/// Minimum number of periods the record must span.
inline constexpr double kMinimumSinePeriods = 2.0;
/// Periodogram peak must exceed this multiple of the median periodogram.
inline constexpr double kSpectralPeakThreshold = 10.0;

namespace detail {

inline std::complex<double> dft_at(std::span<const DataPoint> d, double mean, double f)
{
    std::complex<double> z{0.0, 0.0};
    for (const auto& p : d) z += (p.y - mean) * std::polar(1.0, -2.0 * constants::kPi * f * p.x);
    return z;
}

} // namespace detail

/// Fits a damped sinusoid. The frequency is seeded from the periodogram
/// peak (zero-padded grid, then golden-section refinement), the decay rate
/// from a log-linear regression of per-period amplitudes.
inline DampedSineFit fit_damped_sine(std::span<const DataPoint> data, bool weighted = false)
{
    detail::require(data.size() >= 8, "fit_damped_sine: need at least eight samples");
    std::vector<DataPoint> pts(data.begin(), data.end());
    std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.x < b.x; });
    if (!weighted)
        for (auto& d : pts) d.sigma = 1.0;

    const double t0 = pts.front().x;
    const double span = pts.back().x - t0;
    detail::require(span > 0.0, "fit_damped_sine: samples must span a positive time");
    const double n = static_cast<double>(pts.size());
    const double mean = std::accumulate(pts.begin(), pts.end(), 0.0, [](double s, auto& p) { return s + p.y; }) / n;
    const double nyquist = 0.5 * (n - 1.0) / span;

    // Zero-padded periodogram between half a cycle per record and Nyquist.
    const double df = 1.0 / (16.0 * span);
    std::vector<double> freqs, power;
    for (double f = 0.5 / span; f < nyquist; f += df) {
        freqs.push_back(f);
        power.push_back(std::norm(detail::dft_at(pts, mean, f)));
    }
    DampedSineFit out;
    if (freqs.size() < 3) {
        out.fit.status = FitStatus::Degenerate;
        return out;
    }
    const auto peak = static_cast<std::size_t>(std::max_element(power.begin(), power.end()) - power.begin());
    std::vector<double> sorted = power;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];

    double a = freqs[peak > 0 ? peak - 1 : 0], b = freqs[std::min(peak + 1, freqs.size() - 1)];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 60; ++it) {
        const double c = b - invphi * (b - a), d = a + invphi * (b - a);
        if (std::norm(detail::dft_at(pts, mean, c)) > std::norm(detail::dft_at(pts, mean, d)))
            b = d;
        else
            a = c;
    }
    const double f0 = 0.5 * (a + b);

    // Per-period amplitude by linear least squares on cos/sin at f0.
    std::vector<double> wt, wlog;
    const double period = 1.0 / f0;
    for (double start = t0; start + period <= pts.back().x + 1e-12 * span; start += period) {
        double scc = 0, sss = 0, scs = 0, syc = 0, sys = 0, tm = 0;
        int count = 0;
        for (const auto& p : pts) {
            if (p.x < start || p.x >= start + period) continue;
            const double c = std::cos(2.0 * constants::kPi * f0 * p.x), s = std::sin(2.0 * constants::kPi * f0 * p.x);
            scc += c * c; sss += s * s; scs += c * s;
            syc += (p.y - mean) * c; sys += (p.y - mean) * s;
            tm += p.x;
            ++count;
        }
        const double det = scc * sss - scs * scs;
        if (count < 4 || det <= 0.0) continue;
        const double ac = (syc * sss - sys * scs) / det, as = (sys * scc - syc * scs) / det;
        const double amp = std::hypot(ac, as);
        if (amp > 0.0) {
            wt.push_back(tm / count);
            wlog.push_back(std::log(amp));
        }
    }
    double decay0 = 0.0;
    if (wt.size() >= 2) {
        const double mt = std::accumulate(wt.begin(), wt.end(), 0.0) / static_cast<double>(wt.size());
        const double ml = std::accumulate(wlog.begin(), wlog.end(), 0.0) / static_cast<double>(wlog.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < wt.size(); ++i) {
            sxy += (wt[i] - mt) * (wlog[i] - ml);
            sxx += (wt[i] - mt) * (wt[i] - mt);
        }
        decay0 = std::max(0.0, -sxy / sxx);
    }

    // Amplitude and phase from the DFT at f0, referred to t = 0.
    const std::complex<double> z = detail::dft_at(pts, mean, f0);
    double amp0 = 2.0 * std::abs(z) / n;
    double phase0 = std::arg(z);

    const bool resolved = power[peak] >= kSpectralPeakThreshold * median && span * f0 >= kMinimumSinePeriods;
    out.frequency = f0;
    out.amplitude = amp0;
    out.decay_rate = decay0;
    out.phase = phase0;
    out.offset = mean;
    if (!resolved) {
        out.fit.status = FitStatus::Degenerate;
        out.fit.parameters = (Eigen::VectorXd(5) << amp0, f0, decay0, phase0, mean).finished();
        out.fit.data_points = pts.size();
        return out;
    }

    ScalarModel model = [](double t, const Eigen::VectorXd& p) {
        return p(0) * std::exp(-p(2) * t) * std::cos(2.0 * constants::kPi * p(1) * t + p(3)) + p(4);
    };
    LeastSquaresOptions opt;
    opt.scale_covariance = !weighted;
    opt.parameter_scale = (Eigen::VectorXd(5) << std::max(amp0, 1e-300), f0, 1.0 / span, 1.0,
                           std::max(std::abs(mean), amp0)).finished();
    out.fit = least_squares(model, pts, (Eigen::VectorXd(5) << amp0, f0, decay0, phase0, mean).finished(), opt);

    const auto& p = out.fit.parameters;
    out.amplitude = p(0);
    out.frequency = p(1);
    out.decay_rate = p(2);
    out.phase = p(3);
    out.offset = p(4);
    if (out.amplitude < 0.0) {
        out.amplitude = -out.amplitude;
        out.phase += constants::kPi;
    }
    out.phase = std::remainder(out.phase, 2.0 * constants::kPi);
    return out;
}

// ---------------------------------------------------------------------------
// Phase-noise model: sigma_phi(N) = sqrt(2 X^2 / N + C_e^2 / N^2)

struct NoiseModelFit {
    FitResult fit;
    double excess_noise = 0.0;
    double electronic_noise = 0.0;
    double excess_noise_error = 0.0;
    double electronic_noise_error = 0.0;
};

/// Minimum max(N)/min(N) ratio for the two noise terms to be separable.
inline constexpr double kNoiseModelDynamicRange = 100.0;

/// Fits (x = detected photons N, y = sigma_phi, sigma = its uncertainty).
inline NoiseModelFit fit_noise_model(std::span<const DataPoint> data, bool weighted = true)
{
    detail::require(data.size() >= 2, "fit_noise_model: need at least two points");
    std::vector<DataPoint> pts(data.begin(), data.end());
    for (const auto& d : pts) detail::require(d.x > 0.0 && d.y > 0.0, "fit_noise_model: N and sigma must be positive");
    if (!weighted)
        for (auto& d : pts) d.sigma = 1.0;

    // Linear seed: sigma^2 = u (2/N) + v (1/N^2), u = X^2, v = C_e^2.
    Eigen::MatrixXd design(pts.size(), 2);
    Eigen::VectorXd rhs(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double w = 1.0 / (2.0 * pts[i].y * pts[i].sigma);
        design(static_cast<Eigen::Index>(i), 0) = w * 2.0 / pts[i].x;
        design(static_cast<Eigen::Index>(i), 1) = w / (pts[i].x * pts[i].x);
        rhs(static_cast<Eigen::Index>(i)) = w * pts[i].y * pts[i].y;
    }
    const Eigen::Vector2d uv = design.colPivHouseholderQr().solve(rhs);
    const double x0 = std::sqrt(std::max(uv(0), 1e-6));
    const double c0 = std::sqrt(std::max(uv(1), 0.0));

    auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.x < b.x; });
    NoiseModelFit out;
    if (hi->x / lo->x < kNoiseModelDynamicRange) {
        out.fit.status = FitStatus::Degenerate;
        out.fit.parameters = Eigen::Vector2d(x0, c0);
        out.fit.data_points = pts.size();
        out.excess_noise = x0;
        out.electronic_noise = c0;
        out.excess_noise_error = out.electronic_noise_error = std::numeric_limits<double>::quiet_NaN();
        return out;
    }

    ScalarModel model = [](double n, const Eigen::VectorXd& p) {
        return std::sqrt(2.0 * p(0) * p(0) / n + p(1) * p(1) / (n * n));
    };
    LeastSquaresOptions opt;
    opt.scale_covariance = !weighted;
    const double typical_ce = std::max(c0, x0 * std::sqrt(2.0 * lo->x));
    opt.parameter_scale = Eigen::Vector2d(x0, typical_ce);
    // Start C_e away from zero where the model is flat in C_e.
    out.fit = least_squares(model, pts, Eigen::Vector2d(x0, std::max(c0, 0.1 * typical_ce)), opt);

    // The uncertainty of a sample spread is proportional to the true spread.
    // Weighting by the observed value favours low fluctuations and biases the
    // fit low, so the relative uncertainties are re-applied to the model.
    if (weighted) {
        std::vector<double> relative(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) relative[i] = pts[i].sigma / pts[i].y;
        for (int pass = 0; pass < 3 && out.fit.converged(); ++pass) {
            const Eigen::VectorXd p = out.fit.parameters;
            for (std::size_t i = 0; i < pts.size(); ++i) pts[i].sigma = relative[i] * model(pts[i].x, p);
            out.fit = least_squares(model, pts, p, opt);
        }
    }
    out.excess_noise = std::abs(out.fit.parameters(0));
    out.electronic_noise = std::abs(out.fit.parameters(1));
    out.excess_noise_error = out.fit.uncertainty(0);
    out.electronic_noise_error = out.fit.uncertainty(1);
    return out;
}

} // namespace hetprobe
