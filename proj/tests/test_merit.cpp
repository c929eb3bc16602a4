#include <gtest/gtest.h>

#include <cmath>
#include <type_traits>
#include <vector>

#include "hetprobe/merit.hpp"

using namespace hetprobe;

namespace {

FomConfig at_field(double field, double waist = 100e-6)
{
    FomConfig c;
    c.field = field;
    c.waist = waist;
    return c;
}

std::vector<double> grid(double lo, double hi, double step)
{
    std::vector<double> g;
    for (double f = lo; f <= hi + 0.5 * step; f += step) g.push_back(f);
    return g;
}

double peak(const FomConfig& c)
{
    double best = 0.0;
    for (const auto& p : fom_scan(grid(-80e6, 80e6, 0.05e6), c, 0)) best = std::max(best, p.value);
    return best;
}

double argmin_near(const FomConfig& c, double centre, double half_width)
{
    double best = std::numeric_limits<double>::infinity(), where = centre;
    for (double f : grid(centre - half_width, centre + half_width, 0.01e6)) {
        const double v = figure_of_merit(f, c).value;
        if (v < best) {
            best = v;
            where = f;
        }
    }
    return where;
}

} // namespace

static_assert(std::is_invocable_r_v<FomPoint, decltype(&figure_of_merit), double, const FomConfig&>,
              "figure of merit depends only on the centre frequency and the configuration");

TEST(Fom, CentredLowField)
{
    const auto p = figure_of_merit(0.0, at_field(10e-6));
    EXPECT_NEAR(1.0 / p.value, 425.389, 0.01);
    EXPECT_NEAR(p.value, 1.0 / 400.0, 0.15 / 400.0);
    EXPECT_NEAR(figure_of_merit(0.0, at_field(0.0)).phase_per_atom, 9.87768e-7, 1e-11);
    EXPECT_DOUBLE_EQ(p.loss_scale, 1.0);
    EXPECT_DOUBLE_EQ(p.quantum_efficiency, 0.77);
}

TEST(Fom, FrozenOracleHighField)
{
    EXPECT_NEAR(figure_of_merit(-17.1e6, at_field(650e-6)).value, 0.004387799526825981, 1e-12);
}

TEST(Fom, SharpMinimumAtSigmaPlusResonance)
{
    for (double field : {10e-6, 650e-6}) {
        const auto c = at_field(field);
        const double res = zeeman_shift(2, 3, field) - 30e6;
        const double where = argmin_near(c, res, 3e6);
        EXPECT_NEAR(where, res, 0.5e6) << field;
        EXPECT_LT(figure_of_merit(where, c).value, 0.01 * peak(c)) << field;
    }
}

TEST(Fom, MinimaMoveWithField)
{
    const auto low = at_field(10e-6), high = at_field(650e-6);
    // dispersive minima move up
    EXPECT_GT(argmin_near(high, zeeman_shift(2, 3, 650e-6) - 30e6, 3e6),
              argmin_near(low, zeeman_shift(2, 3, 10e-6) - 30e6, 3e6) + 5e6);
    // loss features (peak sigma-minus scattering) move down
    auto loss_peak = [](const FomConfig& c, double centre) {
        double best = 0.0, where = centre;
        for (double f : grid(centre - 5e6, centre + 5e6, 0.01e6)) {
            const double e = figure_of_merit(f, c).sigma_minus_scatter;
            if (e > best) {
                best = e;
                where = f;
            }
        }
        return where;
    };
    EXPECT_LT(loss_peak(high, 30e6), loss_peak(low, 30e6) - 2e6);
}

TEST(Fom, ZeroFieldSymmetry)
{
    const auto c = at_field(0.0);
    for (double f : {1e6, 7.3e6, 22e6, 41e6, 75e6}) {
        const double a = figure_of_merit(f, c).value, b = figure_of_merit(-f, c).value;
        EXPECT_NEAR(a / b, 1.0, 1e-12) << f;
    }
}

TEST(Fom, HighFieldDoublesPeak)
{
    const double lo = peak(at_field(10e-6));
    const double hi = peak(at_field(650e-6));
    EXPECT_NEAR(lo, 0.00235097, 1e-7);
    EXPECT_NEAR(hi, 0.0043878, 1e-6);
    EXPECT_GE(hi / lo, 1.8);
}

TEST(Fom, CondensatePeak)
{
    auto c = at_field(10e-6, 2e-6);
    c.regime = TargetRegime::Condensate;
    const double v = peak(c);
    EXPECT_NEAR(v, 0.0293872, 1e-6);
    EXPECT_NEAR(v, 0.03, 0.2 * 0.03);
}

TEST(Fom, CondensateIsQuarterOfThermal)
{
    for (double field : {0.0, 10e-6, 650e-6}) {
        for (double f : {-31e6, 0.0, 12e6}) {
            auto c = at_field(field, 7e-6);
            const double thermal = figure_of_merit(f, c).value;
            c.regime = TargetRegime::Condensate;
            EXPECT_NEAR(figure_of_merit(f, c).value, thermal / 4.0, thermal * 1e-15);
        }
    }
}

TEST(Fom, InverseWaistLaw)
{
    for (double f : {0.0, -17.1e6}) {
        const double ref = figure_of_merit(f, at_field(650e-6, 2e-6)).value * 2e-6;
        for (double w : {3e-6, 10e-6, 47e-6, 100e-6, 200e-6})
            EXPECT_NEAR(figure_of_merit(f, at_field(650e-6, w)).value * w / ref, 1.0, 1e-10) << w;
    }
}

TEST(Fom, LossCoefficientFlag)
{
    auto c = at_field(10e-6);
    const double plain = figure_of_merit(0.0, c).value;
    c.include_loss_coefficient = true;
    EXPECT_NEAR(figure_of_merit(0.0, c).value, plain / std::sqrt(0.88), 1e-15);
}

TEST(Fom, ParallelUnsupported)
{
    auto c = at_field(10e-6);
    c.polarization = Polarization::parallel();
    EXPECT_THROW(figure_of_merit(0.0, c), UnsupportedConfiguration);
    c = at_field(10e-6);
    c.waist = 0.0;
    EXPECT_THROW(figure_of_merit(0.0, c), InputError);
}

TEST(Optimize, ZeroFieldOptimumAtMidpoint)
{
    const auto opt = fom_optimize(at_field(0.0), -20e6, 20e6);
    EXPECT_TRUE(opt.interior);
    EXPECT_NEAR(opt.centre, 0.0, 0.02e6);
    EXPECT_NEAR(opt.point.value, 0.0023507516168917645, 1e-12);
}

TEST(Optimize, HighFieldMatchesBruteForce)
{
    const auto c = at_field(650e-6);
    const auto opt = fom_optimize(c, -40e6, 0.0);
    EXPECT_TRUE(opt.interior);
    EXPECT_NEAR(opt.centre, -17.09e6, 0.05e6);
    EXPECT_GE(opt.point.value, peak(c) * (1 - 1e-9));
}

TEST(Optimize, InvariantUnderJointNoiseEfficiencyScaling)
{
    auto a = at_field(650e-6);
    auto b = a;
    b.excess_noise = 1.65;
    b.quantum_efficiency = 0.1925;  // sqrt(eta)/X unchanged
    const auto oa = fom_optimize(a, -40e6, 0.0), ob = fom_optimize(b, -40e6, 0.0);
    EXPECT_DOUBLE_EQ(oa.centre, ob.centre);
    EXPECT_NEAR(oa.point.value / ob.point.value, 1.0, 1e-14);
}

TEST(Optimize, OptimumScalesInverselyWithWaist)
{
    const double v1 = fom_optimize(at_field(650e-6, 50e-6), -40e6, 0.0).point.value;
    const double v2 = fom_optimize(at_field(650e-6, 100e-6), -40e6, 0.0).point.value;
    EXPECT_NEAR(v1 / v2, 2.0, 1e-9);
}

TEST(Optimize, BoundaryMaximumFlagged)
{
    const auto opt = fom_optimize(at_field(10e-6), 1e6, 5e6);
    EXPECT_FALSE(opt.interior);
    EXPECT_THROW(fom_optimize(at_field(10e-6), 5e6, 1e6), InputError);
}

TEST(AtomNumber, Uncertainty)
{
    EXPECT_NEAR(atom_number_uncertainty(9.9e-7, 2e5, 3.3, 0.0) / atom_number_uncertainty(9.9e-7, 1e5, 3.3, 0.0),
                1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(atom_number_uncertainty(9.87768e-7, 3e5, 3.3, 0.0), 8.6e3, 0.05e3);
    EXPECT_TRUE(std::isinf(atom_number_uncertainty(0.0, 3e5, 3.3, 0.0)));
}

TEST(AtomNumber, UnitLossPulseAtOptimum)
{
    // q = eps1 N_gamma = 1 with N = eta N_gamma detected photons
    const auto opt = fom_optimize(at_field(0.0), -20e6, 20e6);
    const double n_gamma = 1.0 / opt.point.sigma_minus_scatter;
    const double sigma = atom_number_uncertainty(opt.point.phase_per_atom, 0.77 * n_gamma, 3.3, 0.0);
    EXPECT_NEAR(sigma, 1.0 / opt.point.value, 1e-9 * sigma);
    EXPECT_NEAR(sigma, 400.0, 0.15 * 400.0);
}

TEST(Imprint, Values)
{
    EXPECT_EQ(condensate_phase_imprint(1e3, 1e3, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(condensate_phase_imprint(1e3, 1e3, 0.37), 0.37);
    EXPECT_NEAR(condensate_phase_imprint(3e3, 1e3, 0.01), 3.0 * condensate_phase_imprint(1e3, 1e3, 0.01), 1e-17);
    EXPECT_THROW(condensate_phase_imprint(1.0, 0.0, 0.1), InputError);
}
