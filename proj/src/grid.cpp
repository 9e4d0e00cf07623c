#include "twistframe/grid.hpp"

#include <algorithm>
#include <cmath>

namespace twistframe {

double sinc(double x) {
    const double px = kPi * x;
    if (std::abs(px) < 1e-6) {
        const double p2 = px * px;
        return 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
    }
    return std::sin(px) / px;
}

Interval intersect(const Interval& a, const Interval& b) {
    if (!a.bounded) return b;
    if (!b.bounded) return a;
    return Interval{std::max(a.lo, b.lo), std::min(a.hi, b.hi), true};
}

// ---------------------------------------------------------------------------
// AxisGrid
// ---------------------------------------------------------------------------

AxisGrid::AxisGrid(double half_width, int samples_per_unit, bool midpoint)
    : half_width_(half_width),
      samples_per_unit_(samples_per_unit),
      midpoint_(midpoint) {
    if (samples_per_unit < 1) {
        throw std::invalid_argument("AxisGrid: samples_per_unit must be >= 1");
    }
    const double lq = half_width * static_cast<double>(samples_per_unit);
    lq_ = std::lround(lq);
    if (std::abs(lq - static_cast<double>(lq_)) > 1e-9 || lq_ < 1) {
        throw std::invalid_argument("AxisGrid: half_width * samples_per_unit must be a positive integer");
    }
    count_ = static_cast<int>(2 * lq_);
    spacing_ = 1.0 / static_cast<double>(samples_per_unit);
}

int AxisGrid::index_of(double x) const {
    const double j = (x + half_width_) / spacing_ - (midpoint_ ? 0.5 : 0.0);
    const long jr = std::lround(j);
    if (std::abs(j - static_cast<double>(jr)) > 1e-9) {
        throw std::invalid_argument("AxisGrid::index_of: point not on grid");
    }
    if (jr < 0 || jr >= count_) {
        throw std::out_of_range("AxisGrid::index_of: point outside box");
    }
    return static_cast<int>(jr);
}

AxisGrid make_grid(double half_width, int samples_per_unit, bool midpoint) {
    return AxisGrid(half_width, samples_per_unit, midpoint);
}

std::size_t GridSpec::total_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.count());
    return n;
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (const auto& a : axes) v *= a.spacing();
    return v;
}

void GridSpec::validate() const {
    const std::size_t expect =
        role == GridRole::line ? 1 : (role == GridRole::phase_plane ? 2 : 3);
    if (axes.size() % (role == GridRole::phase_plane ? 2 : 1) != 0 ||
        axes.size() < expect) {
        throw std::invalid_argument("GridSpec: axis count inconsistent with role");
    }
}

GridSpec line_spec(const AxisGrid& x) { return GridSpec{{x}, GridRole::line}; }

GridSpec phase_plane_spec(const AxisGrid& x, const AxisGrid& y) {
    return GridSpec{{x, y}, GridRole::phase_plane};
}

GridSpec group_spec(const AxisGrid& x, const AxisGrid& y, const AxisGrid& t) {
    return GridSpec{{x, y, t}, GridRole::group};
}

// ---------------------------------------------------------------------------
// Factor1D
// ---------------------------------------------------------------------------

Factor1D Factor1D::indicator(double a, double b) {
    if (!(b > a)) throw std::invalid_argument("indicator: requires b > a");
    Factor1D f;
    f.kind_ = FactorKind::indicator;
    f.a_ = a;
    f.b_ = b;
    return f;
}

Factor1D Factor1D::gaussian(double alpha) {
    if (!(alpha > 0)) throw std::invalid_argument("gaussian: alpha must be positive");
    Factor1D f;
    f.kind_ = FactorKind::gaussian;
    f.a_ = alpha;
    return f;
}

Factor1D Factor1D::sinc_factor(double a) {
    if (!(a > 0)) throw std::invalid_argument("sinc: rate must be positive");
    Factor1D f;
    f.kind_ = FactorKind::sinc;
    f.a_ = a;
    return f;
}

Factor1D Factor1D::abs_exp() {
    Factor1D f;
    f.kind_ = FactorKind::abs_exp;
    return f;
}

Factor1D Factor1D::bump(double a, double b) {
    if (!(b > a)) throw std::invalid_argument("bump: requires b > a");
    Factor1D f;
    f.kind_ = FactorKind::bump;
    f.a_ = a;
    f.b_ = b;
    return f;
}

Factor1D Factor1D::step_decay(int n_max) {
    if (n_max < 0) throw std::invalid_argument("step_decay: n_max must be >= 0");
    Factor1D f;
    f.kind_ = FactorKind::step_decay;
    f.n_max_ = n_max;
    return f;
}

Factor1D Factor1D::wrapped(Factor1D base, double shift, double modulation) {
    Factor1D f;
    f.kind_ = FactorKind::wrapped;
    f.shift_ = shift;
    f.modulation_ = modulation;
    f.base_ = std::make_shared<const Factor1D>(std::move(base));
    return f;
}

Factor1D Factor1D::spectral_quotient(Factor1D base, std::vector<double> denom) {
    if (denom.empty()) throw std::invalid_argument("spectral_quotient: empty denominator");
    for (double d : denom) {
        if (!(d > 0)) throw std::invalid_argument("spectral_quotient: denominator must be positive");
    }
    Factor1D f;
    f.kind_ = FactorKind::spectral_quotient;
    f.base_ = std::make_shared<const Factor1D>(std::move(base));
    f.denom_ = std::move(denom);
    // Fourier coefficients of the periodic sample sequence, for evaluation
    // between sample points.
    const std::size_t n = f.denom_.size();
    f.denom_coeffs_.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
        cplx acc = 0.0;
        const long mm = static_cast<long>(m) - static_cast<long>(n / 2);
        for (std::size_t j = 0; j < n; ++j) {
            const double lam = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
            acc += f.denom_[j] * phase_pi(-2.0 * static_cast<double>(mm) * lam);
        }
        f.denom_coeffs_[m] = acc / static_cast<double>(n);
    }
    return f;
}

double Factor1D::denom_at(double lambda) const {
    const std::size_t n = denom_.size();
    double frac = lambda - std::floor(lambda);
    // Exact sample hit: use the stored value.
    const double pos = frac * static_cast<double>(n) - 0.5;
    const long j = std::lround(pos);
    if (std::abs(pos - static_cast<double>(j)) < 1e-12) {
        const long jj = ((j % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n);
        return denom_[static_cast<std::size_t>(jj)];
    }
    cplx acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const long mm = static_cast<long>(m) - static_cast<long>(n / 2);
        acc += denom_coeffs_[m] * phase_pi(2.0 * static_cast<double>(mm) * frac);
    }
    return std::max(acc.real(), 1e-300);
}

cplx Factor1D::operator()(double x) const {
    switch (kind_) {
        case FactorKind::indicator:
            return (x >= a_ && x < b_) ? 1.0 : 0.0;
        case FactorKind::gaussian:
            return std::exp(-a_ * x * x);
        case FactorKind::sinc:
            return sinc(a_ * x);
        case FactorKind::abs_exp:
            return std::exp(-std::abs(x));
        case FactorKind::bump: {
            if (x <= a_ || x >= b_) return 0.0;
            return std::exp(-1.0 / ((x - a_) * (b_ - x)));
        }
        case FactorKind::step_decay: {
            if (x < 0.0) return 0.0;
            for (int n = 0; n <= n_max_; ++n) {
                if (x >= 2.0 * n && x < 2.0 * n + 1.0) {
                    return 1.0 / static_cast<double>(n + 1);
                }
            }
            return 0.0;
        }
        case FactorKind::wrapped:
            return phase_pi(2.0 * modulation_ * x) * (*base_)(x - shift_);
        case FactorKind::spectral_quotient: {
            // f(t) = \int H(lam)/denom(lam) e^{-2 pi i lam t} dlam with
            // H(lam) = base_ft(-lam).
            const double half = 6.0;
            const double dl = 1.0 / 512.0;
            cplx acc = 0.0;
            const long nsteps = std::lround(2.0 * half / dl);
            for (long j = 0; j < nsteps; ++j) {
                const double lam = -half + (static_cast<double>(j) + 0.5) * dl;
                acc += base_->ft(-lam) / denom_at(lam) * phase_pi(-2.0 * lam * x);
            }
            return acc * dl;
        }
    }
    return 0.0;
}

bool Factor1D::has_closed_ft() const {
    switch (kind_) {
        case FactorKind::bump:
            return false;
        case FactorKind::wrapped:
            return base_->has_closed_ft();
        case FactorKind::spectral_quotient:
            return base_->has_closed_ft();
        default:
            return true;
    }
}

namespace {

cplx indicator_ft(double a, double b, double omega) {
    // (b-a) e^{-pi i (a+b) w} sinc((b-a) w)
    const double len = b - a;
    return len * phase_pi(-(a + b) * omega) * sinc(len * omega);
}

}  // namespace

cplx Factor1D::ft(double omega) const {
    switch (kind_) {
        case FactorKind::indicator:
            return indicator_ft(a_, b_, omega);
        case FactorKind::gaussian:
            return std::sqrt(kPi / a_) * std::exp(-kPi * kPi * omega * omega / a_);
        case FactorKind::sinc: {
            const double w = std::abs(omega);
            if (w < 0.5 * a_) return 1.0 / a_;
            if (w == 0.5 * a_) return 0.5 / a_;
            return 0.0;
        }
        case FactorKind::abs_exp:
            return 2.0 / (1.0 + 4.0 * kPi * kPi * omega * omega);
        case FactorKind::bump:
            return ft_numeric(omega);
        case FactorKind::step_decay: {
            cplx acc = 0.0;
            for (int n = 0; n <= n_max_; ++n) {
                acc += indicator_ft(2.0 * n, 2.0 * n + 1.0, omega) /
                       static_cast<double>(n + 1);
            }
            return acc;
        }
        case FactorKind::wrapped:
            return phase_pi(-2.0 * shift_ * (omega - modulation_)) *
                   base_->ft(omega - modulation_);
        case FactorKind::spectral_quotient:
            return base_->ft(omega) / denom_at(-omega);
    }
    return 0.0;
}

cplx Factor1D::ft_numeric(double omega) const {
    const Interval s = support();
    if (!s.bounded) {
        throw std::runtime_error("ft_numeric: unbounded factor without closed form");
    }
    const long n = 1024;
    const double h = s.length() / static_cast<double>(n);
    cplx acc = 0.0;
    for (long j = 0; j < n; ++j) {
        const double x = s.lo + (static_cast<double>(j) + 0.5) * h;
        acc += (*this)(x)*phase_pi(-2.0 * x * omega);
    }
    return acc * h;
}

cplx Factor1D::grid_ft(double omega, const AxisGrid& grid) const {
    const double h = grid.spacing();
    if (kind_ == FactorKind::indicator || kind_ == FactorKind::step_decay) {
        // Closed-form geometric sum over the grid points inside each
        // constant piece, clipped to the box.
        auto piece = [&](double a, double b, double coeff) -> cplx {
            const double lo = std::max(a, grid.point(0));
            const double hi = std::min(b, grid.point(grid.count() - 1) + h);
            if (hi <= lo) return 0.0;
            // first index j with point(j) >= lo
            const double off = grid.midpoint() ? 0.5 : 0.0;
            const long j0 = static_cast<long>(
                std::ceil((lo + grid.half_width()) / h - off - 1e-12));
            const long j1 = static_cast<long>(
                std::ceil((hi + grid.half_width()) / h - off - 1e-12));
            const long n = j1 - j0;
            if (n <= 0) return 0.0;
            const cplx z = phase_pi(-2.0 * h * omega);
            const cplx z0 = phase_pi(-2.0 * grid.point(static_cast<int>(j0)) * omega);
            if (std::abs(1.0 - z) < 1e-9) {
                cplx acc = 0.0;
                cplx p = z0;
                for (long j = 0; j < n; ++j) {
                    acc += p;
                    p *= z;
                }
                return coeff * h * acc;
            }
            const cplx zn = phase_pi(-2.0 * h * static_cast<double>(n) * omega);
            return coeff * h * z0 * (1.0 - zn) / (1.0 - z);
        };
        if (kind_ == FactorKind::indicator) return piece(a_, b_, 1.0);
        cplx acc = 0.0;
        for (int n = 0; n <= n_max_; ++n) {
            acc += piece(2.0 * n, 2.0 * n + 1.0, 1.0 / static_cast<double>(n + 1));
        }
        return acc;
    }
    if (kind_ == FactorKind::wrapped &&
        (base_->kind_ == FactorKind::indicator ||
         base_->kind_ == FactorKind::step_decay)) {
        // Shift by an integer keeps grid alignment, so the lattice sum obeys
        // the same shift/modulation law as the continuum transform.
        const double kshift = std::round(shift_);
        if (shift_ == kshift) {
            AxisGrid g = grid;
            return phase_pi(-2.0 * shift_ * (omega - modulation_)) *
                   base_->grid_ft(omega - modulation_, g);
        }
    }
    if (kind_ == FactorKind::gaussian ||
        (kind_ == FactorKind::wrapped && base_->kind_ == FactorKind::gaussian)) {
        // Box and lattice corrections are below double precision at the
        // default grids.
        return ft(omega);
    }
    // Fallback: direct summation over the box.
    cplx acc = 0.0;
    for (int j = 0; j < grid.count(); ++j) {
        const double x = grid.point(j);
        const cplx v = (*this)(x);
        if (v != 0.0) acc += v * phase_pi(-2.0 * x * omega);
    }
    return acc * h;
}

Interval Factor1D::support() const {
    switch (kind_) {
        case FactorKind::indicator:
        case FactorKind::bump:
            return Interval{a_, b_, true};
        case FactorKind::step_decay:
            return Interval{0.0, 2.0 * n_max_ + 1.0, true};
        case FactorKind::wrapped:
            return base_->support().shifted(shift_);
        default:
            return Interval::unbounded();
    }
}

Interval Factor1D::effective_support() const {
    switch (kind_) {
        case FactorKind::gaussian: {
            const double r = std::sqrt(51.0 / a_);
            return Interval{-r, r, true};
        }
        case FactorKind::abs_exp:
            return Interval{-51.0, 51.0, true};
        case FactorKind::wrapped: {
            return base_->effective_support().shifted(shift_);
        }
        case FactorKind::sinc:
        case FactorKind::spectral_quotient:
            return Interval::unbounded();
        default:
            return support();
    }
}

double Factor1D::ft_tail_sq(double W) const {
    if (W <= 0.0) return 1e300;
    switch (kind_) {
        case FactorKind::indicator:
            // |F| <= 1/(pi w)
            return 2.0 / (kPi * kPi * W);
        case FactorKind::gaussian: {
            const double t = 2.0 * kPi * kPi * W * W / a_;
            return (kPi / a_) * std::exp(-t) * std::max(a_ / (kPi * kPi * W), 1.0);
        }
        case FactorKind::sinc:
            return W > 0.5 * a_ ? 0.0 : 1e300;
        case FactorKind::abs_exp:
            return 4.0 / (3.0 * std::pow(2.0 * kPi * W, 3) / 8.0 + 1.0);
        case FactorKind::bump:
            // Smooth and compactly supported; conservative rational bound.
            return 1.0 / (1.0 + std::pow(W, 4));
        case FactorKind::step_decay: {
            double c = 0.0;
            for (int n = 0; n <= n_max_; ++n) c += 1.0 / static_cast<double>(n + 1);
            return 2.0 * c * c / (kPi * kPi * W);
        }
        case FactorKind::wrapped:
            return base_->ft_tail_sq(W - std::abs(modulation_));
        case FactorKind::spectral_quotient: {
            double dmin = 1e300;
            for (double d : denom_) dmin = std::min(dmin, d);
            return base_->ft_tail_sq(W) / (dmin * dmin);
        }
    }
    return 1e300;
}

bool Factor1D::is_real() const {
    switch (kind_) {
        case FactorKind::wrapped:
            return modulation_ == 0.0 && base_->is_real();
        case FactorKind::spectral_quotient:
            return false;
        default:
            return true;
    }
}

std::string Factor1D::describe() const {
    switch (kind_) {
        case FactorKind::indicator:
            return "indicator[" + std::to_string(a_) + "," + std::to_string(b_) + ")";
        case FactorKind::gaussian:
            return "gaussian(" + std::to_string(a_) + ")";
        case FactorKind::sinc:
            return "sinc(" + std::to_string(a_) + ")";
        case FactorKind::abs_exp:
            return "abs_exp";
        case FactorKind::bump:
            return "bump(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
        case FactorKind::step_decay:
            return "step_decay(n<=" + std::to_string(n_max_) + ")";
        case FactorKind::wrapped:
            return "wrapped(" + base_->describe() + ")";
        case FactorKind::spectral_quotient:
            return "spectral_quotient(" + base_->describe() + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Cross-correlations of 1-D factors
// ---------------------------------------------------------------------------

cplx cross_correlation(const Factor1D& f, const Factor1D& g, double s,
                       double spacing) {
    // \int f(t) conj(g(t-s)) dt
    if (f.kind() == FactorKind::gaussian && g.kind() == FactorKind::gaussian) {
        const double a = f.param_a();
        const double b = g.param_a();
        return std::sqrt(kPi / (a + b)) * std::exp(-a * b * s * s / (a + b));
    }
    if (f.kind() == FactorKind::sinc && g.kind() == FactorKind::sinc &&
        f.param_a() == g.param_a()) {
        // FTs are matching boxes, so the correlation is again a sinc.
        return sinc(f.param_a() * s) / f.param_a();
    }
    if (f.kind() == FactorKind::indicator && g.kind() == FactorKind::indicator) {
        const double lo = std::max(f.param_a(), g.param_a() + s);
        const double hi = std::min(f.param_b(), g.param_b() + s);
        return std::max(0.0, hi - lo);
    }
    if (f.kind() == FactorKind::abs_exp && g.kind() == FactorKind::abs_exp) {
        const double t = std::abs(s);
        return std::exp(-t) * (1.0 + t);
    }
    if (f.kind() == FactorKind::spectral_quotient ||
        g.kind() == FactorKind::spectral_quotient) {
        // Frequency-domain pairing: \int Hf(l) conj(Hg(l)) e^{2 pi i l s} dl
        // with H(l) = ft(-l).
        const double half = 6.0;
        const double dl = 1.0 / 512.0;
        cplx acc = 0.0;
        const long n = std::lround(2.0 * half / dl);
        for (long j = 0; j < n; ++j) {
            const double lam = -half + (static_cast<double>(j) + 0.5) * dl;
            acc += f.ft(-lam) * std::conj(g.ft(-lam)) * phase_pi(2.0 * lam * s);
        }
        return acc * dl;
    }
    // Generic midpoint quadrature over the joint effective support.
    Interval w = intersect(f.effective_support(), g.effective_support().shifted(s));
    if (!w.bounded) w = Interval{-64.0, 64.0, true};
    w = intersect(w, Interval{-256.0, 256.0, true});
    if (w.empty()) return 0.0;
    return midpoint_integral(
        [&](double t) { return f(t) * std::conj(g(t - s)); }, w.lo, w.hi, spacing);
}

double step_decay_tail_mass(int n_max) {
    double kept = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        kept += 1.0 / (static_cast<double>(n + 1) * (n + 1));
    }
    return kPi * kPi / 6.0 - kept;
}

// ---------------------------------------------------------------------------
// SampledFunction
// ---------------------------------------------------------------------------

SampledFunction::SampledFunction(GridSpec spec, std::vector<cplx> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
    spec_.validate();
    if (values_.size() != spec_.total_count()) {
        throw std::invalid_argument("SampledFunction: value count does not match grid");
    }
}

cplx SampledFunction::at(int i, int j) const {
    const int ny = spec_.axes[1].count();
    return values_[static_cast<std::size_t>(i) * ny + j];
}

cplx SampledFunction::at(int i, int j, int k) const {
    const int ny = spec_.axes[1].count();
    const int nt = spec_.axes[2].count();
    return values_[(static_cast<std::size_t>(i) * ny + j) * nt + k];
}

cplx& SampledFunction::ref(int i, int j) {
    const int ny = spec_.axes[1].count();
    return values_[static_cast<std::size_t>(i) * ny + j];
}

double SampledFunction::norm_sq() const {
    double acc = 0.0;
    for (const cplx& v : values_) acc += std::norm(v);
    return acc * spec_.cell_volume();
}

SampledFunction sample_separable(const std::vector<Factor1D>& factors,
                                 const GridSpec& spec) {
    if (factors.size() != spec.dimension()) {
        throw std::invalid_argument("sample_separable: factor count does not match grid dimension");
    }
    std::vector<std::vector<cplx>> axis_values(factors.size());
    for (std::size_t d = 0; d < factors.size(); ++d) {
        const AxisGrid& g = spec.axes[d];
        axis_values[d].resize(static_cast<std::size_t>(g.count()));
        for (int j = 0; j < g.count(); ++j) {
            axis_values[d][static_cast<std::size_t>(j)] = factors[d](g.point(j));
        }
    }
    std::vector<cplx> values(spec.total_count());
    if (factors.size() == 1) {
        values = axis_values[0];
    } else if (factors.size() == 2) {
        const int n1 = spec.axes[1].count();
        for (int i = 0; i < spec.axes[0].count(); ++i) {
            for (int j = 0; j < n1; ++j) {
                values[static_cast<std::size_t>(i) * n1 + j] =
                    axis_values[0][i] * axis_values[1][j];
            }
        }
    } else {
        const int n1 = spec.axes[1].count();
        const int n2 = spec.axes[2].count();
        for (int i = 0; i < spec.axes[0].count(); ++i) {
            for (int j = 0; j < n1; ++j) {
                const cplx ij = axis_values[0][i] * axis_values[1][j];
                for (int k = 0; k < n2; ++k) {
                    values[(static_cast<std::size_t>(i) * n1 + j) * n2 + k] =
                        ij * axis_values[2][k];
                }
            }
        }
    }
    SampledFunction f(spec, std::move(values));
    f.set_factors(factors);
    return f;
}

cplx inner_product(const SampledFunction& f, const SampledFunction& g) {
    if (f.spec() != g.spec()) {
        throw std::invalid_argument("inner_product: grid specs differ");
    }
    cplx acc = 0.0;
    const auto& fv = f.values();
    const auto& gv = g.values();
    for (std::size_t i = 0; i < fv.size(); ++i) {
        acc += fv[i] * std::conj(gv[i]);
    }
    return acc * f.spec().cell_volume();
}

cplx fourier_1d(const SampledFunction& f, double omega) {
    if (f.spec().dimension() != 1) {
        throw std::invalid_argument("fourier_1d: expected a 1-D sampled function");
    }
    const AxisGrid& g = f.spec().axes[0];
    cplx acc = 0.0;
    for (int j = 0; j < g.count(); ++j) {
        acc += f.at(j) * phase_pi(-2.0 * g.point(j) * omega);
    }
    return acc * g.spacing();
}

cplx fourier_1d(const Factor1D& f, double omega) {
    // ft() falls back to quadrature for kinds without a closed form
    return f.ft(omega);
}

double fourier_tail_bound(const Factor1D& f, const AxisGrid& grid) {
    const Interval s = f.effective_support();
    const double L = grid.half_width();
    if (s.bounded && s.lo >= -L && s.hi <= L) return 0.0;
    if (f.kind() == FactorKind::sinc) {
        // |sinc|^2 tail ~ 2/(pi^2 a^2 L)
        return 2.0 / (kPi * kPi * f.param_a() * f.param_a() * L);
    }
    if (f.kind() == FactorKind::gaussian) {
        return std::exp(-f.param_a() * L * L);
    }
    if (f.kind() == FactorKind::abs_exp) {
        return std::exp(-2.0 * L);
    }
    return 1e-2;  // conservative default for exotic combinations
}

}  // namespace twistframe
