#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistframe {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// e^{i*pi*t} with the argument reduced modulo 2 before evaluation, so that
/// rational multiples of pi produce consistent unit-modulus phases.
inline cplx phase_pi(double t) {
    double r = std::fmod(t, 2.0);
    return std::polar(1.0, kPi * r);
}

/// sin(pi x)/(pi x), continuous at 0.
double sinc(double x);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool bounded = true;

    static Interval unbounded() { return Interval{0.0, 0.0, false}; }
    bool empty() const { return bounded && hi <= lo; }
    double length() const { return hi - lo; }
    Interval shifted(double s) const {
        return bounded ? Interval{lo + s, hi + s, true} : *this;
    }
};

Interval intersect(const Interval& a, const Interval& b);

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Uniform grid on [-L, L) with spacing h = 1/q and optional midpoint offset.
/// Integer shifts move grid points to grid points: index j -> j + k*q.
class AxisGrid {
public:
    AxisGrid() = default;
    AxisGrid(double half_width, int samples_per_unit, bool midpoint);

    double half_width() const { return half_width_; }
    int samples_per_unit() const { return samples_per_unit_; }
    bool midpoint() const { return midpoint_; }
    int count() const { return count_; }
    double spacing() const { return spacing_; }
    double offset() const { return midpoint_ ? 0.5 * spacing_ : 0.0; }

    /// Sample j as (j + offset - L*q) * h; exact for dyadic q.
    double point(int j) const {
        return (static_cast<double>(j) + (midpoint_ ? 0.5 : 0.0) -
                static_cast<double>(lq_)) * spacing_;
    }

    /// Index of a point known to lie on the grid; throws otherwise.
    int index_of(double x) const;
    bool contains_index(int j) const { return j >= 0 && j < count_; }

    /// Grid with the same geometry but zero offset (kernel xi-axes use this).
    AxisGrid without_offset() const {
        return AxisGrid(half_width_, samples_per_unit_, false);
    }

    bool operator==(const AxisGrid& o) const {
        return half_width_ == o.half_width_ &&
               samples_per_unit_ == o.samples_per_unit_ &&
               midpoint_ == o.midpoint_;
    }
    bool operator!=(const AxisGrid& o) const { return !(*this == o); }

private:
    double half_width_ = 1.0;
    int samples_per_unit_ = 1;
    bool midpoint_ = false;
    long lq_ = 1;      // half_width * samples_per_unit, integral
    int count_ = 2;
    double spacing_ = 1.0;
};

/// make_grid(L, q, midpoint): L*q must be integral, q >= 1.
AxisGrid make_grid(double half_width, int samples_per_unit, bool midpoint = false);

enum class GridRole { line, phase_plane, group };

/// Ordered list of axes with a role tag (1 axis: line, 2n: phase plane,
/// 2n+1: group). This artifact exercises n = 1.
struct GridSpec {
    std::vector<AxisGrid> axes;
    GridRole role = GridRole::line;

    std::size_t dimension() const { return axes.size(); }
    std::size_t total_count() const;
    double cell_volume() const;
    void validate() const;

    bool operator==(const GridSpec& o) const {
        return axes == o.axes && role == o.role;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

GridSpec line_spec(const AxisGrid& x);
GridSpec phase_plane_spec(const AxisGrid& x, const AxisGrid& y);
GridSpec group_spec(const AxisGrid& x, const AxisGrid& y, const AxisGrid& t);

// ---------------------------------------------------------------------------
// Analytic 1-D factors
// ---------------------------------------------------------------------------

enum class FactorKind {
    indicator,        // chi_[a,b)
    gaussian,         // e^{-alpha x^2}
    sinc,             // sinc(a x) = sin(pi a x)/(pi a x)
    abs_exp,          // e^{-|x|}
    bump,             // e^{-1/((x-a)(b-x))} on (a,b), 0 outside
    step_decay,       // sum_{n=0..n_max} (n+1)^{-1} chi_[2n,2n+1)
    wrapped,          // e^{2 pi i mod x} * base(x - shift)
    spectral_quotient // defined by FT: base_ft(omega) / denom(-omega mod 1)
};

/// Library of separable 1-D factors with closed-form Fourier transforms where
/// they exist. The transform convention is F(w) = \int f(x) e^{-2 pi i x w} dx.
class Factor1D {
public:
    static Factor1D indicator(double a, double b);
    static Factor1D gaussian(double alpha);
    static Factor1D sinc_factor(double a = 1.0);
    static Factor1D abs_exp();
    static Factor1D bump(double a, double b);
    static Factor1D step_decay(int n_max);
    /// e^{2 pi i modulation x} * base(x - shift)
    static Factor1D wrapped(Factor1D base, double shift, double modulation);
    /// Factor whose transform is base's transform divided by a 1-periodic
    /// strictly positive sequence sampled at midpoints (j+1/2)/denom.size().
    static Factor1D spectral_quotient(Factor1D base, std::vector<double> denom);

    FactorKind kind() const { return kind_; }
    double param_a() const { return a_; }
    double param_b() const { return b_; }
    int n_max() const { return n_max_; }

    cplx operator()(double x) const;

    bool has_closed_ft() const;
    /// Continuum transform; closed form when available, quadrature otherwise.
    cplx ft(double omega) const;
    /// Riemann sum of the sampled factor over the given grid, evaluated in
    /// closed form for piecewise-constant kinds and by direct summation
    /// otherwise. Matches direct quadrature of the samples bit-for-bit in the
    /// piecewise-constant case.
    cplx grid_ft(double omega, const AxisGrid& grid) const;

    Interval support() const;
    /// Interval outside which |f| < 1e-22 (equals support when bounded).
    Interval effective_support() const;
    /// Upper bound on \int_{|w|>W} |F(w)|^2 dw.
    double ft_tail_sq(double W) const;

    bool is_real() const;
    std::string describe() const;

private:
    Factor1D() = default;

    FactorKind kind_ = FactorKind::indicator;
    double a_ = 0.0;
    double b_ = 0.0;
    int n_max_ = 0;
    double shift_ = 0.0;
    double modulation_ = 0.0;
    std::shared_ptr<const Factor1D> base_;
    std::vector<double> denom_;        // periodic samples, midpoint placement
    std::vector<cplx> denom_coeffs_;   // Fourier coefficients of 1/denom lookup

    cplx ft_numeric(double omega) const;
    double denom_at(double lambda) const;
    friend cplx factor_time_value(const Factor1D& f, double t);
};

/// \int f(t) conj(g(t - s)) dt, dispatching to closed forms (gaussians,
/// sincs, indicators, abs_exp autocorrelation) and falling back to midpoint
/// quadrature. `spacing` controls the fallback resolution.
cplx cross_correlation(const Factor1D& f, const Factor1D& g, double s,
                       double spacing = 1.0 / 64.0);

/// L2 mass of the step-decay pieces dropped past n_max:
/// sum_{n > n_max} (n+1)^{-2} = pi^2/6 - sum_{n <= n_max} (n+1)^{-2}.
double step_decay_tail_mass(int n_max);

// ---------------------------------------------------------------------------
// Sampled functions
// ---------------------------------------------------------------------------

struct LatticeIndex {
    int k = 0;
    int l = 0;
    bool operator==(const LatticeIndex& o) const { return k == o.k && l == o.l; }
};

class SampledFunction;

/// Finite twisted-translate combination over a separable base; carried as
/// metadata so kernel-side machinery can evaluate beyond the sample box.
struct TwistedCombination {
    std::shared_ptr<const SampledFunction> base;
    std::vector<std::pair<LatticeIndex, cplx>> terms;
};

/// Complex samples on a rectangular grid in 1, 2 or 3 variables, with
/// optional separable-factor metadata.
class SampledFunction {
public:
    SampledFunction() = default;
    SampledFunction(GridSpec spec, std::vector<cplx> values);

    const GridSpec& spec() const { return spec_; }
    const std::vector<cplx>& values() const { return values_; }
    std::vector<cplx>& values() { return values_; }

    const std::optional<std::vector<Factor1D>>& factors() const { return factors_; }
    void set_factors(std::vector<Factor1D> f) { factors_ = std::move(f); }
    cplx factor_scale() const { return factor_scale_; }
    void set_factor_scale(cplx s) { factor_scale_ = s; }

    std::shared_ptr<const TwistedCombination> combination() const { return combination_; }
    void set_combination(std::shared_ptr<const TwistedCombination> c) { combination_ = std::move(c); }

    cplx at(int i) const { return values_[static_cast<std::size_t>(i)]; }
    cplx at(int i, int j) const;
    cplx at(int i, int j, int k) const;
    cplx& ref(int i, int j);

    double norm_sq() const;

private:
    GridSpec spec_;
    std::vector<cplx> values_;
    std::optional<std::vector<Factor1D>> factors_;
    cplx factor_scale_ = 1.0;
    std::shared_ptr<const TwistedCombination> combination_;
};

/// Product of factor evaluations on the grid; factor metadata retained.
SampledFunction sample_separable(const std::vector<Factor1D>& factors,
                                 const GridSpec& spec);

/// L2 pairing by quadrature: sum f conj(g) * cell volume. Linear in the
/// first argument.
cplx inner_product(const SampledFunction& f, const SampledFunction& g);

/// Approximates \int f(x) e^{-2 pi i x w} dx for a 1-D sampled function.
cplx fourier_1d(const SampledFunction& f, double omega);
/// Same integral for a factor; uses the closed form when available.
cplx fourier_1d(const Factor1D& f, double omega);
/// Bound on the transform mass lost to truncating the factor at the grid box.
double fourier_tail_bound(const Factor1D& f, const AxisGrid& grid);

/// Midpoint quadrature of a callable over [lo, hi] at the given spacing.
template <typename F>
cplx midpoint_integral(F&& fn, double lo, double hi, double spacing) {
    if (hi <= lo) return 0.0;
    const long n = std::max<long>(1, std::lround((hi - lo) / spacing));
    const double h = (hi - lo) / static_cast<double>(n);
    cplx acc = 0.0;
    for (long j = 0; j < n; ++j) {
        acc += fn(lo + (static_cast<double>(j) + 0.5) * h);
    }
    return acc * h;
}

}  // namespace twistframe
