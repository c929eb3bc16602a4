#pragma once

// Line data for the 87Rb |F=2> -> |F'=3> manifold: exact squared Wigner-3j
// symbols, relative line strengths, Zeeman-shifted detunings and decay
// branching. Frequencies are ordinary frequencies in Hz throughout.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <string>

#include "hetprobe/constants.hpp"
#include "hetprobe/errors.hpp"

namespace hetprobe {

/// Optical line parameters. `gamma` is the half-width (half the spontaneous
/// decay rate); `resonance` is the zero-field |2,2> -> |3,3> frequency and
/// defaults to 0 so that every frequency is a detuning.
struct AtomicLine {
    double wavelength = constants::kRbD2Wavelength;
    double gamma = 0.5 * constants::kRbD2NaturalLinewidth;
    double resonance = 0.0;
    double lande_ground = constants::kLandeGroundF2;
    double lande_excited = constants::kLandeExcitedF3;
    double bohr_magneton_over_h = constants::kBohrMagnetonOverH;

    void validate() const
    {
        detail::require(wavelength > 0.0 && std::isfinite(wavelength), "atomic line: wavelength must be positive");
        detail::require(gamma > 0.0 && std::isfinite(gamma), "atomic line: gamma must be positive");
    }
};

/// Power fractions of the probe driving sigma-minus, pi and sigma-plus
/// transitions out of |m=2>, i.e. towards |m'=1>, |m'=2>, |m'=3>.
class Polarization {
  public:
    enum class Mode { Perpendicular, Parallel, Explicit };

    static Polarization perpendicular() { return {Mode::Perpendicular, {0.5, 0.0, 0.5}}; }
    static Polarization parallel() { return {Mode::Parallel, {0.0, 1.0, 0.0}}; }

    static Polarization explicit_fractions(double sigma_minus, double pi, double sigma_plus)
    {
        const std::array<double, 3> p{sigma_minus, pi, sigma_plus};
        for (double v : p)
            detail::require(v >= 0.0 && v <= 1.0, "polarization: each fraction must lie in [0, 1]");
        detail::require(p[0] + p[1] + p[2] <= 1.0 + 1e-12, "polarization: fractions must sum to at most 1");
        return {Mode::Explicit, p};
    }

    Mode mode() const { return mode_; }

    /// Fraction driving |m=2> -> |m'>, m' in {1, 2, 3}.
    double fraction(int m_prime) const
    {
        detail::require(m_prime >= 1 && m_prime <= 3, "polarization: m' must be 1, 2 or 3");
        return fractions_[static_cast<std::size_t>(m_prime - 1)];
    }

    /// Fraction of the Delta-m = q component, q in {-1, 0, +1}.
    double component(int q) const
    {
        detail::require(q >= -1 && q <= 1, "polarization: component must be -1, 0 or +1");
        return fractions_[static_cast<std::size_t>(q + 1)];
    }

    bool is_perpendicular() const
    {
        return fractions_[1] == 0.0 && fractions_[0] == 0.5 && fractions_[2] == 0.5;
    }

    std::string name() const
    {
        switch (mode_) {
        case Mode::Perpendicular: return "perpendicular";
        case Mode::Parallel: return "parallel";
        case Mode::Explicit: break;
        }
        return "explicit";
    }

  private:
    Polarization(Mode mode, std::array<double, 3> fractions) : mode_(mode), fractions_(fractions) {}

    Mode mode_;
    std::array<double, 3> fractions_;
};

/// Exact non-negative rational.
struct ExactFraction {
    __int128 numerator = 0;
    __int128 denominator = 1;

    double value() const
    {
        return static_cast<double>(static_cast<long double>(numerator) / static_cast<long double>(denominator));
    }

    friend bool operator==(const ExactFraction& a, const ExactFraction& b)
    {
        return a.numerator == b.numerator && a.denominator == b.denominator;
    }
};

namespace detail {

using i128 = __int128;

inline i128 abs128(i128 v) { return v < 0 ? -v : v; }

inline i128 gcd128(i128 a, i128 b)
{
    a = abs128(a);
    b = abs128(b);
    while (b != 0) {
        const i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

inline i128 checked_mul(i128 a, i128 b)
{
    i128 out;
    if (__builtin_mul_overflow(a, b, &out)) throw NumericalError("wigner3j: exact arithmetic overflow");
    return out;
}

inline i128 binomial(std::int64_t n, std::int64_t k)
{
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    i128 c = 1;
    for (std::int64_t i = 1; i <= k; ++i) c = checked_mul(c, n - k + i) / i; // exact at every step
    return c;
}

inline int doubled(double x, const char* what)
{
    const double twice = 2.0 * x;
    const double rounded = std::round(twice);
    if (!std::isfinite(x) || std::abs(twice - rounded) > 1e-9)
        throw InputError(std::string("wigner3j: ") + what + " is not a half-integer");
    return static_cast<int>(rounded);
}

} // namespace detail

/// Squared 3j symbol from doubled quantum numbers (2j, 2m), evaluated as an
/// exact rational. Uses the binomial form of the Racah sum:
///   (3j)^2 = S^2 C(2j1,a) C(2j3,c) / [(J+1) C(J,b) prod_i C(2j_i, j_i+m_i)]
/// with a = j1+j2-j3, b = j1-j2+j3, c = -j1+j2+j3, J = j1+j2+j3 and
///   S = sum_k (-1)^k C(a,k) C(b, j1-m1-k) C(c, j2+m2-k).
inline ExactFraction wigner3j_sq_exact(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3)
{
    using detail::i128;
    const std::array<int, 3> tj{tj1, tj2, tj3};
    const std::array<int, 3> tm{tm1, tm2, tm3};
    for (std::size_t i = 0; i < 3; ++i) {
        detail::require(tj[i] >= 0, "wigner3j: j must be non-negative");
        detail::require(tj[i] <= 40, "wigner3j: j above 20 is not supported");
        detail::require((tj[i] - tm[i]) % 2 == 0, "wigner3j: j and m must differ by an integer");
    }

    const ExactFraction zero{0, 1};
    if (tm1 + tm2 + tm3 != 0) return zero;
    for (std::size_t i = 0; i < 3; ++i)
        if (std::abs(tm[i]) > tj[i]) return zero;
    if ((tj1 + tj2 + tj3) % 2 != 0) return zero;
    if (tj3 < std::abs(tj1 - tj2) || tj3 > tj1 + tj2) return zero;

    const std::int64_t a = (tj1 + tj2 - tj3) / 2;
    const std::int64_t b = (tj1 - tj2 + tj3) / 2;
    const std::int64_t c = (-tj1 + tj2 + tj3) / 2;
    const std::int64_t J = a + b + c;
    const std::int64_t j1_minus_m1 = (tj1 - tm1) / 2;
    const std::int64_t j2_plus_m2 = (tj2 + tm2) / 2;

    i128 sum = 0;
    for (std::int64_t k = 0; k <= a; ++k) {
        const i128 term = detail::checked_mul(
            detail::checked_mul(detail::binomial(a, k), detail::binomial(b, j1_minus_m1 - k)),
            detail::binomial(c, j2_plus_m2 - k));
        sum += (k % 2 == 0) ? term : -term;
    }
    if (sum == 0) return zero;

    std::array<i128, 4> num{detail::abs128(sum), detail::abs128(sum), detail::binomial(a + b, a),
                            detail::binomial(b + c, c)};
    std::array<i128, 5> den{J + 1, detail::binomial(J, b), detail::binomial(tj1, (tj1 + tm1) / 2),
                            detail::binomial(tj2, (tj2 + tm2) / 2), detail::binomial(tj3, (tj3 + tm3) / 2)};
    for (auto& n : num)
        for (auto& d : den) {
            const i128 g = detail::gcd128(n, d);
            n /= g;
            d /= g;
        }

    ExactFraction out{1, 1};
    for (auto n : num) out.numerator = detail::checked_mul(out.numerator, n);
    for (auto d : den) out.denominator = detail::checked_mul(out.denominator, d);
    const i128 g = detail::gcd128(out.numerator, out.denominator);
    out.numerator /= g;
    out.denominator /= g;
    return out;
}

/// Squared Wigner 3j symbol (j1 j2 j3; m1 m2 m3). Arguments must be integers
/// or half-integers; a violated selection rule yields 0.
inline double wigner3j_sq(double j1, double j2, double j3, double m1, double m2, double m3)
{
    return wigner3j_sq_exact(detail::doubled(j1, "j1"), detail::doubled(j2, "j2"), detail::doubled(j3, "j3"),
                             detail::doubled(m1, "m1"), detail::doubled(m2, "m2"), detail::doubled(m3, "m3"))
        .value();
}

/// Squared 3j coupling |F=2,m> -> |F'=3,m'>, zero unless |m'-m| <= 1.
inline double transition_strength(int m_ground, int m_excited)
{
    detail::require(std::abs(m_ground) <= constants::kGroundF, "transition_strength: |m| must be <= 2");
    detail::require(std::abs(m_excited) <= constants::kExcitedF, "transition_strength: |m'| must be <= 3");
    static const auto table = [] {
        std::array<std::array<double, 7>, 5> t{};
        for (int m = -2; m <= 2; ++m)
            for (int mp = -3; mp <= 3; ++mp)
                t[m + 2][mp + 3] = std::abs(mp - m) > 1 ? 0.0 : wigner3j_sq(3, 1, 2, -mp, mp - m, m);
        return t;
    }();
    return table[m_ground + 2][m_excited + 3];
}

/// S_m' for excitation out of the stretched state |m=2>.
inline double line_strength(int m_prime)
{
    detail::require(m_prime >= 1 && m_prime <= 3, "line_strength: m' must be 1, 2 or 3");
    return transition_strength(2, m_prime);
}

/// Zeeman shift (Hz) of the |2,m> -> |3,m'> transition frequency.
inline double zeeman_shift(int m_ground, int m_excited, double field, const AtomicLine& line = {})
{
    detail::require(field >= 0.0, "zeeman: magnetic field must be non-negative");
    return (line.lande_excited * m_excited - line.lande_ground * m_ground) * line.bohr_magneton_over_h * field;
}

/// Light frequency minus the Zeeman-shifted |2,m> -> |3,m'> resonance.
inline double zeeman_detuning(double frequency, int m_ground, int m_excited, double field, const AtomicLine& line = {})
{
    return frequency - (line.resonance + zeeman_shift(m_ground, m_excited, field, line));
}

/// Detuning delta_{m',f} of the |2,2> -> |3,m'> line.
inline double zeeman_detuning(double frequency, int m_prime, double field, const AtomicLine& line = {})
{
    detail::require(m_prime >= 1 && m_prime <= 3, "zeeman_detuning: m' must be 1, 2 or 3");
    return zeeman_detuning(frequency, 2, m_prime, field, line);
}

/// Decay probabilities |3,m'> -> |2,m>. Every F'=3 sublevel decays only into
/// F=2, so the map sums to one.
inline std::map<int, double> branching_ratios(int m_prime)
{
    detail::require(std::abs(m_prime) <= constants::kExcitedF, "branching_ratios: |m'| must be <= 3");
    std::map<int, double> out;
    double total = 0.0;
    for (int m = m_prime - 1; m <= m_prime + 1; ++m) {
        if (std::abs(m) > constants::kGroundF) continue;
        const double w = transition_strength(m, m_prime);
        if (w > 0.0) {
            out[m] = w;
            total += w;
        }
    }
    for (auto& [m, b] : out) b /= total;
    return out;
}

/// The three lines out of |m=2> at a given field.
struct TransitionSet {
    std::array<double, 3> strength{};  // S_1, S_2, S_3
    std::array<double, 3> shift{};     // Hz, relative to the zero-field resonance
    std::array<std::map<int, double>, 3> branching;
};

inline TransitionSet make_transition_set(double field, const AtomicLine& line = {})
{
    TransitionSet set;
    for (int mp = 1; mp <= 3; ++mp) {
        const auto i = static_cast<std::size_t>(mp - 1);
        set.strength[i] = line_strength(mp);
        set.shift[i] = zeeman_shift(2, mp, field, line);
        set.branching[i] = branching_ratios(mp);
    }
    return set;
}

} // namespace hetprobe
