#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hetprobe/losses.hpp"

using namespace hetprobe;

namespace {

constexpr double kField = 0.6e-3;

PumpPulse pulse_at(double centre, Polarization pol = Polarization::perpendicular(), double photons = 6e5)
{
    PumpPulse p;
    p.beat = {centre, 30e6};
    p.polarization = pol;
    p.field = kField;
    p.photons = photons;
    return p;
}

double sigma_minus_resonance() { return zeeman_shift(2, 1, kField); }

} // namespace

TEST(RateEquations, NoPhotonsNoChange)
{
    const auto pop = pump_rate_equations(pulse_at(0.0, Polarization::perpendicular(), 0.0));
    EXPECT_EQ(pop.at(2), 1.0);
    for (int m = -2; m < 2; ++m) EXPECT_EQ(pop.at(m), 0.0);
}

TEST(RateEquations, FrozenOracleValues)
{
    struct Row {
        double centre, perpendicular, parallel;
    };
    const Row rows[] = {
        {-40e6, 0.024547047190773278, 0.08695661102575582},
        {-10e6, 0.003899665277664129, 0.05668878438922095},
        {5e6, 0.004017524389384764, 0.033599967430519385},
        {27e6, 0.1493081398033673, 0.2986873938735567},
    };
    for (const auto& r : rows) {
        const double qs = pulse_loss_fraction(pump_rate_equations(pulse_at(r.centre)));
        const double qp = pulse_loss_fraction(pump_rate_equations(pulse_at(r.centre, Polarization::parallel(), 9e5)));
        EXPECT_NEAR(qs / r.perpendicular, 1.0, 1e-7) << r.centre;
        EXPECT_NEAR(qp / r.parallel, 1.0, 1e-7) << r.centre;
    }
}

TEST(RateEquations, FullManifoldOracle)
{
    auto p = pulse_at(sigma_minus_resonance() + 30e6);
    p.scheme = PumpingScheme::FullManifold;
    EXPECT_NEAR(pulse_loss_fraction(pump_rate_equations(p)), 0.14892446470794773, 1e-8);
}

TEST(RateEquations, FarDetunedFirstOrder)
{
    for (double centre : {150e6, -150e6}) {
        const auto p = pulse_at(centre);
        const double eps1 = sigma_minus_scatter_prob(p.beat, p.area, kField);
        const double left = 1.0 - pump_rate_equations(p).at(2);
        EXPECT_NEAR(left / (eps1 * p.photons * (1.0 - 1.0 / 15.0)), 1.0, 1e-3) << centre;
    }
}

TEST(RateEquations, PopulationConserved)
{
    for (auto scheme : {PumpingScheme::StretchedStateOnly, PumpingScheme::FullManifold}) {
        for (double centre = -80e6; centre <= 80e6; centre += 7.5e6) {
            for (auto pol : {Polarization::perpendicular(), Polarization::parallel()}) {
                auto p = pulse_at(centre, pol, 5e6);
                p.scheme = scheme;
                const auto pop = pump_rate_equations(p);
                EXPECT_NEAR(pop.total(), 1.0, 1e-6);
                for (double v : pop.ground) EXPECT_GE(v, -1e-12);
            }
        }
    }
}

TEST(RateEquations, ParallelLosesMoreOnResonance)
{
    const double res = sigma_minus_resonance();
    for (double centre : {res - 30e6, res + 30e6, zeeman_shift(2, 2, kField) + 30e6, zeeman_shift(2, 2, kField) - 30e6}) {
        const double qs = pulse_loss_fraction(pump_rate_equations(pulse_at(centre)));
        const double qp = pulse_loss_fraction(pump_rate_equations(pulse_at(centre, Polarization::parallel())));
        EXPECT_GT(qp, qs) << centre;
    }
}

TEST(RateEquations, InvariantUnderJointScaling)
{
    auto a = pulse_at(12e6);
    auto b = a;
    b.photons *= 3.7;
    b.area *= 3.7;
    const double qa = pulse_loss_fraction(pump_rate_equations(a));
    const double qb = pulse_loss_fraction(pump_rate_equations(b));
    EXPECT_NEAR(qa / qb, 1.0, 1e-12);
}

TEST(RateEquations, StepBudgetFailureIsNumericalError)
{
    auto p = pulse_at(sigma_minus_resonance() + 30e6, Polarization::perpendicular(), 1e15);
    EXPECT_THROW(pump_rate_equations(p), NumericalError);
    p.duration = -1.0;
    EXPECT_THROW(pump_rate_equations(p), InputError);
}

TEST(LossFraction, RetentionRule)
{
    SublevelPopulations pop;
    EXPECT_EQ(pulse_loss_fraction(pop), 0.0);
    pop.at(2) = 0.0;
    pop.at(1) = 1.0;
    EXPECT_NEAR(pulse_loss_fraction(pop), 0.9, 1e-15);
    pop.at(1) = 0.0;
    pop.at(-1) = 1.0;
    EXPECT_EQ(pulse_loss_fraction(pop), 1.0);
    RetentionRule bad;
    bad.retention[0] = 1.5;
    EXPECT_THROW(pulse_loss_fraction(pop, bad), InputError);
}

TEST(LossFraction, OnSigmaMinusResonance)
{
    const double q = pulse_loss_fraction(pump_rate_equations(pulse_at(sigma_minus_resonance() + 30e6)));
    EXPECT_NEAR(q, 0.1499032633460049, 1e-8);
    EXPECT_NEAR(q, 0.16, 0.1 * 0.16);
}

TEST(SimpleLoss, Values)
{
    EXPECT_EQ(simple_q(6.2e-9, 0.0), 0.0);
    EXPECT_NEAR(simple_q(6.2e-9, 6e5), 3.3e-3, 0.05e-3);
    EXPECT_NEAR(0.40 + 0.9 * 0.53, 0.877, 1e-12);
    EXPECT_NEAR(sigma_minus_loss_coefficient(), 0.88, 1e-12);
    EXPECT_TRUE(simple_q_valid(6.2e-9, 6e5));
    EXPECT_FALSE(simple_q_valid(1e-6, 6e5));
    EXPECT_THROW(simple_q(-1.0, 1.0), InputError);
}

TEST(SimpleLoss, AgreesWithRateEquationsWhenSmall)
{
    LossScanConfig cfg;
    std::vector<double> grid;
    for (double f = -80e6; f <= 80e6; f += 0.25e6) grid.push_back(f);
    int compared = 0;
    for (const auto& pt : loss_spectrum(grid, cfg, {}, 0)) {
        if (pt.q_rate >= 0.05) continue;
        ++compared;
        EXPECT_NEAR(pt.q_simple / pt.q_rate, 1.0, 0.05) << pt.centre;
    }
    EXPECT_GT(compared, 400);
}

TEST(Survival, Values)
{
    EXPECT_EQ(survival(0, 0.5, 0.5), 1.0);
    EXPECT_NEAR(survival(200, 3.3e-3 * 49, 0.012), 0.68, 0.01);
    EXPECT_THROW(survival(1, 2.0, 1.0), InputError);
    EXPECT_THROW(survival(-1, 0.1, 0.1), InputError);
}

TEST(Survival, MonotoneInEachArgument)
{
    for (int k = 1; k < 300; k += 13) EXPECT_LT(survival(k + 1, 0.1, 0.012), survival(k, 0.1, 0.012));
    for (double q = 0.01; q < 1.0; q += 0.05) EXPECT_LT(survival(200, q + 0.01, 0.012), survival(200, q, 0.012));
    for (double p = 0.01; p < 1.0; p += 0.05) EXPECT_LT(survival(200, 0.1, p + 0.01), survival(200, 0.1, p));
}

TEST(LossSpectrum, ShapeAndOrdering)
{
    std::vector<double> grid;
    for (double f = -80e6; f <= 80e6; f += 0.5e6) grid.push_back(f);
    LossScanConfig perp;
    LossScanConfig par;
    par.polarization = Polarization::parallel();
    par.photons = 9e5;
    const auto a = loss_spectrum(grid, perp, {}, 2);
    const auto b = loss_spectrum(grid, par, {}, 2);
    ASSERT_EQ(a.size(), grid.size());

    EXPECT_GT(a.front().survival_rate, 0.98);
    EXPECT_GT(a.back().survival_rate, 0.98);

    // two deepest local minima of the perpendicular curve
    std::vector<std::pair<double, double>> minima;
    for (std::size_t i = 1; i + 1 < a.size(); ++i)
        if (a[i].survival_rate < a[i - 1].survival_rate && a[i].survival_rate <= a[i + 1].survival_rate)
            minima.emplace_back(a[i].survival_rate, a[i].centre);
    ASSERT_GE(minima.size(), 2u);
    std::sort(minima.begin(), minima.end());
    const double lo = std::min(minima[0].second, minima[1].second);
    const double hi = std::max(minima[0].second, minima[1].second);
    EXPECT_NEAR(hi - lo, 60e6, 0.5e6);
    EXPECT_NEAR(lo, sigma_minus_resonance() - 30e6, 0.5e6);
    EXPECT_NEAR(hi, sigma_minus_resonance() + 30e6, 0.5e6);

    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].survival_rate < 0.99) {
            EXPECT_LT(b[i].survival_rate, a[i].survival_rate) << grid[i];
        }
    }
}

TEST(LossSpectrum, ThreadCountDoesNotChangeResult)
{
    std::vector<double> grid;
    for (double f = -80e6; f <= 80e6; f += 5e6) grid.push_back(f);
    const auto a = loss_spectrum(grid, LossScanConfig{}, {}, 1);
    const auto b = loss_spectrum(grid, LossScanConfig{}, {}, 5);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].q_rate, b[i].q_rate);
}
