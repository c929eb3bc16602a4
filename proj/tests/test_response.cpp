#include <gtest/gtest.h>

#include <cmath>

#include "hetprobe/response.hpp"

using namespace hetprobe;

namespace {
const Polarization kPerp = Polarization::perpendicular();
const Polarization kPar = Polarization::parallel();
constexpr double kRho = 2.2e12;
}

// Reference values from tests/oracles/physics_oracle.py.
TEST(PhaseShift, OracleValues)
{
    EXPECT_NEAR(phase_shift(30e6, kRho, 0.0, kPerp), 0.017067398436505114, 1e-14);
    EXPECT_NEAR(attenuation(0.0, kRho, 0.0, kPerp), 0.17052598567960323, 1e-13);
}

TEST(PhaseShift, ZeroDensityGivesNothing)
{
    EXPECT_EQ(phase_shift(3e6, 0.0, 1e-4, kPerp), 0.0);
    EXPECT_EQ(attenuation(3e6, 0.0, 1e-4, kPerp), 0.0);
    const auto obs = beat_observables({5e6, 30e6}, 0.0, 1e-4, kPerp);
    EXPECT_EQ(obs.phase, 0.0);
    EXPECT_EQ(obs.amplitude_change, 0.0);
    EXPECT_THROW(phase_shift(0.0, -1.0, 0.0, kPerp), InputError);
}

TEST(PhaseShift, OnIsolatedResonanceDispersionVanishes)
{
    // pi light at B = 0 drives only m' = 2, so the line is isolated.
    EXPECT_EQ(phase_shift(0.0, kRho, 0.0, kPar), 0.0);
    EXPECT_GT(attenuation(0.0, kRho, 0.0, kPar), 0.0);
}

TEST(PhaseShift, SingleLineRatioIsDetuningOverWidth)
{
    const AtomicLine line;
    for (double f : {-20e6, -1e6, 0.5e6, 7e6, 33e6}) {
        const double ratio = phase_shift(f, kRho, 0.0, kPar) / attenuation(f, kRho, 0.0, kPar);
        EXPECT_NEAR(ratio, f / line.gamma, 1e-12 * std::max(1.0, std::abs(f / line.gamma)));
    }
}

TEST(PhaseShift, LinearInDensity)
{
    for (double f : {-12e6, 4e6, 29e6}) {
        EXPECT_NEAR(phase_shift(f, 3.0 * kRho, 2e-4, kPerp), 3.0 * phase_shift(f, kRho, 2e-4, kPerp), 1e-15);
        EXPECT_NEAR(attenuation(f, 3.0 * kRho, 2e-4, kPerp), 3.0 * attenuation(f, kRho, 2e-4, kPerp), 1e-15);
    }
}

TEST(Attenuation, MonotoneLorentzianAndPositive)
{
    double prev = attenuation(0.0, kRho, 0.0, kPar);
    for (double f = 1e6; f < 60e6; f += 1e6) {
        const double a = attenuation(f, kRho, 0.0, kPar);
        EXPECT_LE(a, prev);
        EXPECT_GT(a, 0.0);
        prev = a;
    }
}

TEST(Attenuation, ThinSampleFlag)
{
    EXPECT_TRUE(thin_sample_ok(0.05));
    EXPECT_FALSE(thin_sample_ok(0.2));
    // On resonance at this density the cycling line exceeds the thin limit.
    EXPECT_FALSE(beat_observables({30e6, 30e6}, kRho, 0.0, kPerp).thin_sample);
    EXPECT_TRUE(beat_observables({0.0, 30e6}, kRho, 0.0, kPerp).thin_sample);
}

TEST(Saturation, ThresholdFlag)
{
    EXPECT_TRUE(below_saturation(0.1 * constants::kRbD2SaturationIntensity));
    EXPECT_FALSE(below_saturation(0.2 * constants::kRbD2SaturationIntensity));
}

TEST(BeatObservablesTest, OracleValues)
{
    const auto a = beat_observables({10e6, 30e6}, kRho, 0.6e-3, kPerp);
    EXPECT_NEAR(a.phase, 0.03466267382949302, 1e-14);
    EXPECT_NEAR(a.amplitude_change, 0.0036375329421707956, 1e-15);
    EXPECT_NEAR(a.scattered_fraction(), 2.0 * a.amplitude_change, 0.0);
    const auto b = beat_observables({-5e6, 30e6}, kRho, 0.6e-3, kPar);
    EXPECT_NEAR(b.phase, 0.02279301632024477, 1e-14);
    EXPECT_NEAR(b.amplitude_change, 0.0026350816149644735, 1e-15);
}

TEST(BeatObservablesTest, SymmetricStraddleIsExtremum)
{
    // At B = 0 the phase is even in f0, so the straddle is stationary; it is
    // the smallest |phi| between the two dispersive features.
    const double df = 30e6, gamma = AtomicLine{}.gamma;
    const auto centre = beat_observables({0.0, df}, kRho, 0.0, kPerp);
    EXPECT_NEAR(centre.phase, 2.0 * phase_shift(df, kRho, 0.0, kPerp), 1e-15);
    for (double f0 = 0.25e6; f0 < df - 3.0 * gamma; f0 += 0.25e6) {
        const double p = beat_observables({f0, df}, kRho, 0.0, kPerp).phase;
        EXPECT_NEAR(p, beat_observables({-f0, df}, kRho, 0.0, kPerp).phase, 1e-15);
        EXPECT_GE(std::abs(p), std::abs(centre.phase));
    }
    const double h = 1e3;
    const double slope = (beat_observables({h, df}, kRho, 0.0, kPerp).phase - beat_observables({-h, df}, kRho, 0.0, kPerp).phase) / (2 * h);
    EXPECT_NEAR(slope, 0.0, 1e-18);
}

TEST(BeatObservablesTest, SplittingSignSymmetry)
{
    for (double f0 : {-25e6, -3e6, 8e6, 41e6}) {
        const auto up = beat_observables({f0, 30e6}, kRho, 0.6e-3, kPerp);
        const auto down = beat_observables({f0, -30e6}, kRho, 0.6e-3, kPerp);
        EXPECT_DOUBLE_EQ(up.phase, -down.phase);
        EXPECT_DOUBLE_EQ(up.amplitude_change, down.amplitude_change);
    }
}

TEST(BeatObservablesTest, ZeroFieldLimitMatchesUnshifted)
{
    AtomicLine no_zeeman;
    no_zeeman.bohr_magneton_over_h = 0.0;
    for (double f0 : {-17e6, 2e6, 30e6}) {
        const auto a = beat_observables({f0, 30e6}, kRho, 1e-15, kPerp);
        const auto b = beat_observables({f0, 30e6}, kRho, 0.6e-3, kPerp, no_zeeman);
        EXPECT_NEAR(a.phase, b.phase, 1e-12);
        EXPECT_NEAR(a.amplitude_change, b.amplitude_change, 1e-12);
    }
}

TEST(BeatObservablesTest, TwoDispersiveFeaturesSixtyMegahertzApart)
{
    // The phase changes sign where a component crosses the cycling
    // resonance, at f0 = shift +/- df.
    const double b = 0.6e-3, df = 30e6;
    std::vector<double> crossings;
    double prev = beat_observables({-80e6, df}, kRho, b, kPerp).phase;
    for (double f0 = -79.9e6; f0 <= 80e6; f0 += 0.1e6) {
        const double p = beat_observables({f0, df}, kRho, b, kPerp).phase;
        if (prev * p < 0.0) crossings.push_back(f0);
        prev = p;
    }
    ASSERT_EQ(crossings.size(), 2u);
    // the weak sigma-minus lines pull each crossing by a fraction of gamma
    EXPECT_NEAR(crossings[1] - crossings[0], 60e6, 0.5e6);
}

TEST(Geometry, AreaAndColumnDensity)
{
    const ProbeGeometry g{100e-6};
    EXPECT_NEAR(g.area(), 1.5707963267948966e-8, 1e-20);
    EXPECT_DOUBLE_EQ(g.single_atom_column_density(), 1.0 / g.area());
    EXPECT_THROW(ProbeGeometry{0.0}.area(), InputError);
    EXPECT_THROW(BeatConfig({0.0, 0.0}).validate(), InputError);
    EXPECT_DOUBLE_EQ(BeatConfig({0.0, 30e6}).beat_angular_frequency(), 4.0 * constants::kPi * 30e6);
}

TEST(ScatterProbability, OracleValues)
{
    const double area = beam_area(100e-6);
    EXPECT_NEAR(sigma_minus_scatter_prob({0.0, 30e6}, area, 0.0), 6.242073709243498e-09, 1e-20);
    // one component on the sigma-minus line
    EXPECT_NEAR(sigma_minus_scatter_prob({30e6, 30e6}, area, 0.0), 3.0919592593294086e-07, 1e-20);
    const double bare = std::pow(constants::kRbD2Wavelength, 2) / (40.0 * constants::kPi * area);
    EXPECT_NEAR(sigma_minus_scatter_prob({30e6, 30e6}, area, 0.0) / bare, 1.0, 0.01);
    EXPECT_LT(sigma_minus_scatter_prob({1e12, 30e6}, area, 0.0), 1e-10 * bare);
}

TEST(PhasePerAtom, OracleAndScaling)
{
    const BeatConfig beat{0.0, 30e6};
    const double p100 = phase_per_atom(beat, beam_area(100e-6), 0.0, kPerp);
    EXPECT_NEAR(std::abs(p100), 9.8777e-7, 1e-10);
    EXPECT_NEAR(phase_per_atom(beat, beam_area(200e-6), 0.0, kPerp), 0.25 * p100, 1e-20);
    EXPECT_NEAR(phase_per_atom(beat, 1e30, 0.0, kPerp), 0.0, 1e-30);
}
