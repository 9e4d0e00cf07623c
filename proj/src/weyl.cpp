#include "twistframe/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "twistframe/parallel.hpp"

namespace twistframe::weyl {

// ---------------------------------------------------------------------------
// KernelModel
// ---------------------------------------------------------------------------

KernelModel KernelModel::separable(Factor1D f1, Factor1D f2, double lambda,
                                   cplx scale, FtMode mode,
                                   std::optional<AxisGrid> x_grid) {
    if (lambda == 0.0) throw std::invalid_argument("KernelModel: lambda must be nonzero");
    KernelModel m;
    m.f1_ = std::move(f1);
    m.f2_ = std::move(f2);
    m.lambda_ = lambda;
    m.scale_ = scale;
    m.mode_ = mode;
    m.x_grid_ = std::move(x_grid);
    m.terms_ = {Term{LatticeIndex{0, 0}, 1.0}};
    if (mode == FtMode::grid && !m.x_grid_) {
        throw std::invalid_argument("KernelModel: grid mode needs an x grid");
    }
    m.du_ = m.x_grid_ ? m.x_grid_->spacing() : 1.0 / 32.0;
    return m;
}

KernelModel KernelModel::with_terms(std::vector<Term> terms) const {
    if (lambda_ != 1.0) {
        throw std::invalid_argument("KernelModel: twisted combinations require lambda = 1");
    }
    if (terms.empty()) throw std::invalid_argument("KernelModel: empty combination");
    KernelModel m = *this;
    m.terms_ = std::move(terms);
    return m;
}

KernelModel KernelModel::divided_by(std::vector<double> weight) const {
    if (weight.empty()) throw std::invalid_argument("KernelModel: empty weight");
    KernelModel m = *this;
    m.weight_ = std::move(weight);
    return m;
}

cplx KernelModel::ft1(double omega) const {
    if (mode_ == FtMode::grid) return f1_.grid_ft(omega, *x_grid_);
    return f1_.ft(omega);
}

double KernelModel::weight_at(double xi) const {
    const std::size_t n = weight_.size();
    double frac = xi - std::floor(xi);
    const double pos = frac * static_cast<double>(n);
    long j = std::lround(pos);
    if (std::abs(pos - static_cast<double>(j)) > 1e-9) {
        throw std::runtime_error("KernelModel: weight lookup off the torus grid");
    }
    j %= static_cast<long>(n);
    return weight_[static_cast<std::size_t>(j)];
}

cplx KernelModel::eval(double xi, double eta) const {
    cplx acc = 0.0;
    for (const Term& t : terms_) {
        const double s = xi + static_cast<double>(t.idx.l);
        const cplx f2v = f2_(eta - s);
        if (f2v == 0.0) continue;
        const cplx ph =
            t.idx.k == 0 ? cplx(1.0)
                         : phase_pi((2.0 * xi + t.idx.l) * static_cast<double>(t.idx.k));
        acc += t.coeff * ph * f2v * ft1(-lambda_ * (s + eta) / 2.0);
    }
    acc *= scale_;
    if (!weight_.empty()) acc /= weight_at(xi);
    return acc;
}

Interval KernelModel::eta_window(double xi) const {
    Interval eff = f2_.effective_support();
    if (!eff.bounded) eff = Interval{-256.0, 256.0, true};
    bool first = true;
    Interval hull;
    for (const Term& t : terms_) {
        Interval w = eff.shifted(xi + static_cast<double>(t.idx.l));
        if (first) {
            hull = w;
            first = false;
        } else {
            hull.lo = std::min(hull.lo, w.lo);
            hull.hi = std::max(hull.hi, w.hi);
        }
    }
    return hull;
}

double KernelModel::xi_tail_sq(double W) const {
    double csum = 0.0;
    double lmax = 0.0;
    for (const Term& t : terms_) {
        csum += std::abs(t.coeff);
        lmax = std::max(lmax, std::abs(static_cast<double>(t.idx.l)));
    }
    const double f2n = std::abs(cross_correlation(f2_, f2_, 0.0));
    Interval eff = f2_.effective_support();
    const double umax = eff.bounded ? std::max(std::abs(eff.lo), std::abs(eff.hi)) : 8.0;
    const double Weff = std::abs(lambda_) * (W - lmax - 0.5 * umax);
    if (Weff <= 0.0) return 1e300;
    double wfloor = weight_.empty() ? 1.0 : weight_floor();
    const double base =
        f2n / std::abs(lambda_) * f1_.ft_tail_sq(Weff) * std::norm(scale_);
    return csum * csum * base / (wfloor * wfloor);
}

double KernelModel::weight_floor() const {
    double m = 1e300;
    for (double w : weight_) m = std::min(m, w);
    return std::max(m, 1e-300);
}

cplx kernel_row_cross(const KernelModel& a, const KernelModel& b, double xi_a,
                      double xi_b) {
    Interval w = intersect(a.eta_window(xi_a), b.eta_window(xi_b));
    if (w.empty()) return 0.0;
    const double du = std::min(a.du(), b.du());
    const long n = std::max<long>(1, std::lround(w.length() / du));
    const double h = w.length() / static_cast<double>(n);
    cplx acc = 0.0;
    for (long j = 0; j < n; ++j) {
        const double eta = w.lo + (static_cast<double>(j) + 0.5) * h;
        acc += a.eval(xi_a, eta) * std::conj(b.eval(xi_b, eta));
    }
    return acc * h;
}

cplx hs_inner_windowed(const KernelModel& a, const KernelModel& b,
                       double xi_halfwidth, double xi_spacing) {
    const long n = std::lround(2.0 * xi_halfwidth / xi_spacing);
    // Single-term kernels allow a tabulated sweep: the transform argument
    // depends on xi and eta only through 2 xi + u, so it is evaluated once
    // per diagonal instead of once per cell.
    const bool tabulated =
        a.terms().size() == 1 && b.terms().size() == 1 && !a.has_weight() &&
        !b.has_weight() && a.lambda() == b.lambda() && a.du() == xi_spacing &&
        b.du() == xi_spacing;
    if (tabulated) {
        const double du = xi_spacing;
        const double la = static_cast<double>(a.terms()[0].idx.l);
        const double lb = static_cast<double>(b.terms()[0].idx.l);
        const int ka = a.terms()[0].idx.k;
        const int kb = b.terms()[0].idx.k;
        Interval wa = a.eta_window(0.0);
        Interval wb = b.eta_window(0.0);
        Interval w = intersect(wa, wb);
        if (w.empty()) return 0.0;
        const long nu = std::max<long>(1, std::lround(w.length() / du));
        const double lambda = a.lambda();
        std::vector<cplx> upair(static_cast<std::size_t>(nu));
        for (long j = 0; j < nu; ++j) {
            const double u = w.lo + (static_cast<double>(j) + 0.5) * du;
            upair[static_cast<std::size_t>(j)] =
                a.y_factor()(u - la) * std::conj(b.y_factor()(u - lb)) * du;
        }
        const double base = -2.0 * xi_halfwidth + w.lo + 0.5 * du;
        const long nt = 2 * (n - 1) + nu;
        std::vector<cplx> gt(static_cast<std::size_t>(nt));
        for (long t = 0; t < nt; ++t) {
            const double v = base + static_cast<double>(t) * du;
            gt[static_cast<std::size_t>(t)] =
                a.transform_at(-lambda * (v + la) / 2.0) *
                std::conj(b.transform_at(-lambda * (v + lb) / 2.0));
        }
        const cplx s0 = a.terms()[0].coeff * a.scale() *
                        std::conj(b.terms()[0].coeff * b.scale());
        cplx acc = 0.0;
        for (long i = 0; i < n; ++i) {
            const double xi = -xi_halfwidth + static_cast<double>(i) * du;
            cplx row = 0.0;
            const cplx* g = gt.data() + 2 * i;
            for (long j = 0; j < nu; ++j) {
                row += upair[static_cast<std::size_t>(j)] * g[j];
            }
            cplx ph = 1.0;
            if (ka != 0 || kb != 0) {
                ph = phase_pi((2.0 * xi + la) * ka - (2.0 * xi + lb) * kb);
            }
            acc += row * ph;
        }
        return acc * s0 * du;
    }
    cplx acc = 0.0;
    for (long j = 0; j < n; ++j) {
        const double xi = -xi_halfwidth + static_cast<double>(j) * xi_spacing;
        acc += kernel_row_cross(a, b, xi, xi);
    }
    return acc * xi_spacing;
}

double hs_norm_sq_windowed(const KernelModel& m, double xi_halfwidth,
                           double xi_spacing) {
    return hs_inner_windowed(m, m, xi_halfwidth, xi_spacing).real();
}

// ---------------------------------------------------------------------------
// KernelMatrix and weyl_kernel
// ---------------------------------------------------------------------------

double KernelMatrix::hs_norm_sq() const {
    double acc = 0.0;
    for (const cplx& v : values) acc += std::norm(v);
    return acc * cell();
}

std::shared_ptr<const KernelModel> kernel_model_for(const SampledFunction& f,
                                                    double lambda, FtMode mode) {
    if (f.factors() && f.spec().role == GridRole::phase_plane) {
        const auto& fac = *f.factors();
        return std::make_shared<KernelModel>(KernelModel::separable(
            fac[0], fac[1], lambda, f.factor_scale(), mode, f.spec().axes[0]));
    }
    if (f.combination() && f.combination()->base &&
        f.combination()->base->factors()) {
        if (lambda != 1.0) return nullptr;
        auto base = kernel_model_for(*f.combination()->base, lambda, mode);
        if (!base) return nullptr;
        std::vector<KernelModel::Term> terms;
        terms.reserve(f.combination()->terms.size());
        for (const auto& [idx, c] : f.combination()->terms) {
            terms.push_back(KernelModel::Term{idx, c});
        }
        return std::make_shared<KernelModel>(base->with_terms(std::move(terms)));
    }
    return nullptr;
}

namespace {

void materialize_model(const KernelModel& model, const AxisGrid& xi_grid,
                       const AxisGrid& eta_grid, std::vector<cplx>& out) {
    const int n_xi = xi_grid.count();
    const int n_eta = eta_grid.count();
    const int n_diag = n_xi + n_eta - 1;
    out.assign(static_cast<std::size_t>(n_xi) * n_eta, 0.0);
    const double lambda = model.lambda();
    // Per term: the y factor depends only on j - i, the transform argument
    // only on i + j, and the twist phase only on i.
    for (const auto& term : model.terms()) {
        const double l = static_cast<double>(term.idx.l);
        std::vector<cplx> f2(static_cast<std::size_t>(n_diag));
        std::vector<cplx> ft(static_cast<std::size_t>(n_diag));
        std::vector<cplx> phase(static_cast<std::size_t>(n_xi));
        for (int d = 0; d < n_diag; ++d) {
            const int diff = d - (n_xi - 1);  // j - i
            const double u = eta_grid.point(0) + diff * eta_grid.spacing() -
                             xi_grid.point(0);
            f2[static_cast<std::size_t>(d)] = model.y_factor()(u - l);
        }
        for (int s = 0; s < n_diag; ++s) {  // i + j
            const double v =
                xi_grid.point(0) + eta_grid.point(0) + s * xi_grid.spacing();
            ft[static_cast<std::size_t>(s)] = model.transform_at(-lambda * (v + l) / 2.0);
        }
        for (int i = 0; i < n_xi; ++i) {
            const cplx ph = term.idx.k == 0
                                ? cplx(1.0)
                                : phase_pi((2.0 * xi_grid.point(i) + l) *
                                           static_cast<double>(term.idx.k));
            phase[static_cast<std::size_t>(i)] = term.coeff * model.scale() * ph;
        }
        parallel_rows(n_xi, default_thread_count(), [&](int i) {
            const cplx pi_ = phase[static_cast<std::size_t>(i)];
            cplx* row = out.data() + static_cast<std::size_t>(i) * n_eta;
            for (int j = 0; j < n_eta; ++j) {
                const cplx y = f2[static_cast<std::size_t>(j - i + n_xi - 1)];
                if (y == 0.0) continue;
                row[j] += pi_ * y * ft[static_cast<std::size_t>(i + j)];
            }
        });
    }
    if (model.has_weight()) {
        for (int i = 0; i < n_xi; ++i) {
            const double w = model.weight_value(xi_grid.point(i));
            cplx* row = out.data() + static_cast<std::size_t>(i) * n_eta;
            for (int j = 0; j < n_eta; ++j) row[j] /= w;
        }
    }
}

struct NonzeroRows {
    // for each y-row index, the half-open x-index range of nonzero samples
    std::vector<int> x_lo, x_hi;
};

NonzeroRows scan_nonzero(const SampledFunction& f) {
    const int nx = f.spec().axes[0].count();
    const int ny = f.spec().axes[1].count();
    NonzeroRows r;
    r.x_lo.assign(static_cast<std::size_t>(ny), nx);
    r.x_hi.assign(static_cast<std::size_t>(ny), 0);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            if (f.at(i, j) != 0.0) {
                auto ju = static_cast<std::size_t>(j);
                r.x_lo[ju] = std::min(r.x_lo[ju], i);
                r.x_hi[ju] = std::max(r.x_hi[ju], i + 1);
            }
        }
    }
    return r;
}

void materialize_direct(const SampledFunction& f, double lambda,
                        const AxisGrid& xi_grid, const AxisGrid& eta_grid,
                        std::vector<cplx>& out) {
    const AxisGrid& gx = f.spec().axes[0];
    const AxisGrid& gy = f.spec().axes[1];
    const int n_xi = xi_grid.count();
    const int n_eta = eta_grid.count();
    const long lq = std::lround(gy.half_width() * gy.samples_per_unit());
    const NonzeroRows rows = scan_nonzero(f);
    double cost = 0.0;
    for (int m = 0; m < gy.count(); ++m) {
        cost += std::max(0, rows.x_hi[static_cast<std::size_t>(m)] -
                                rows.x_lo[static_cast<std::size_t>(m)]);
    }
    cost *= static_cast<double>(n_xi);
    if (cost > 4e9) {
        throw std::runtime_error(
            "weyl_kernel: direct quadrature too large for this grid; use the fast path");
    }
    out.assign(static_cast<std::size_t>(n_xi) * n_eta, 0.0);
    const double hx = gx.spacing();
    for (int diff = -(n_xi - 1); diff < n_eta; ++diff) {
        const long m = diff + lq;
        if (m < 0 || m >= gy.count()) continue;
        const auto mu = static_cast<std::size_t>(m);
        const int xlo = rows.x_lo[mu];
        const int xhi = rows.x_hi[mu];
        if (xlo >= xhi) continue;
        const int i_lo = std::max(0, -diff);
        const int i_hi = std::min(n_xi, n_eta - diff);
        for (int i = i_lo; i < i_hi; ++i) {
            const int j = i + diff;
            const double v = xi_grid.point(i) + eta_grid.point(j);
            cplx acc = 0.0;
            for (int ix = xlo; ix < xhi; ++ix) {
                const cplx fv = f.at(ix, static_cast<int>(m));
                if (fv != 0.0) acc += fv * phase_pi(lambda * gx.point(ix) * v);
            }
            out[static_cast<std::size_t>(i) * n_eta + j] = acc * hx;
        }
    }
}

}  // namespace

KernelMatrix weyl_kernel(const SampledFunction& f, double lambda,
                         KernelRoute route) {
    if (lambda == 0.0) throw std::invalid_argument("weyl_kernel: lambda must be nonzero");
    if (f.spec().role != GridRole::phase_plane || f.spec().dimension() != 2) {
        throw std::invalid_argument("weyl_kernel: phase-plane function required");
    }
    KernelMatrix k;
    k.eta_grid = f.spec().axes[1];
    k.xi_grid = k.eta_grid.without_offset();
    k.lambda = lambda;
    k.source = std::make_shared<const SampledFunction>(f);

    auto grid_model = kernel_model_for(f, lambda, FtMode::grid);
    auto cont_model = kernel_model_for(f, lambda, FtMode::continuum);
    const bool fast = route == KernelRoute::fast_path ||
                      (route == KernelRoute::automatic && grid_model != nullptr);
    if (fast) {
        if (!grid_model) {
            throw std::invalid_argument("weyl_kernel: no factor metadata for the fast path");
        }
        materialize_model(*grid_model, k.xi_grid, k.eta_grid, k.values);
    } else {
        materialize_direct(f, lambda, k.xi_grid, k.eta_grid, k.values);
    }
    k.model = cont_model;
    k.model_grid = grid_model;
    return k;
}

// ---------------------------------------------------------------------------
// Twisted convolution
// ---------------------------------------------------------------------------

bool supports_fit_after_convolution(const SampledFunction& f,
                                    const SampledFunction& g) {
    auto bound = [](const SampledFunction& u, int axis) {
        const auto& grid = u.spec().axes[static_cast<std::size_t>(axis)];
        double lo = grid.half_width(), hi = -grid.half_width();
        double vmax = 0.0;
        for (const cplx& v : u.values()) vmax = std::max(vmax, std::abs(v));
        const double thresh = 1e-11 * vmax;
        const int nx = u.spec().axes[0].count();
        const int ny = u.spec().axes[1].count();
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) {
                if (std::abs(u.at(i, j)) > thresh) {
                    const double c = axis == 0 ? u.spec().axes[0].point(i)
                                               : u.spec().axes[1].point(j);
                    lo = std::min(lo, c);
                    hi = std::max(hi, c);
                }
            }
        }
        return std::pair<double, double>{lo, hi};
    };
    for (int axis = 0; axis < 2; ++axis) {
        auto [flo, fhi] = bound(f, axis);
        auto [glo, ghi] = bound(g, axis);
        const double L = f.spec().axes[static_cast<std::size_t>(axis)].half_width();
        if (flo + glo < -L || fhi + ghi >= L) return false;
    }
    return true;
}

SampledFunction twisted_convolution(const SampledFunction& f,
                                    const SampledFunction& g) {
    if (f.spec() != g.spec() || f.spec().role != GridRole::phase_plane) {
        throw std::invalid_argument("twisted_convolution: matching phase-plane specs required");
    }
    const AxisGrid& gx = f.spec().axes[0];
    const AxisGrid& gy = f.spec().axes[1];
    if (gx.midpoint() || gy.midpoint()) {
        throw std::invalid_argument("twisted_convolution: zero-offset grids required");
    }
    const int nx = gx.count();
    const int ny = gy.count();

    // bounding box of nonzero g samples
    int u0 = nx, u1 = 0, v0 = ny, v1 = 0;
    for (int iu = 0; iu < nx; ++iu) {
        for (int iv = 0; iv < ny; ++iv) {
            if (g.at(iu, iv) != 0.0) {
                u0 = std::min(u0, iu);
                u1 = std::max(u1, iu + 1);
                v0 = std::min(v0, iv);
                v1 = std::max(v1, iv + 1);
            }
        }
    }
    std::vector<cplx> out(static_cast<std::size_t>(nx) * ny, 0.0);
    SampledFunction result(f.spec(), std::move(out));
    if (u0 >= u1) return result;

    const double cell = f.spec().cell_volume();
    // phase e^{pi i (y u - x v)} splits into per-axis unimodular vectors
    std::vector<std::vector<cplx>> uphase(static_cast<std::size_t>(ny));
    for (int j = 0; j < ny; ++j) {
        auto& row = uphase[static_cast<std::size_t>(j)];
        row.resize(static_cast<std::size_t>(u1 - u0));
        const double y = gy.point(j);
        for (int iu = u0; iu < u1; ++iu) {
            row[static_cast<std::size_t>(iu - u0)] = phase_pi(y * gx.point(iu));
        }
    }
    // x_i - u_iu = (i - iu) h, which is sample index i - iu + Lq
    const int cx = std::lround(gx.half_width() * gx.samples_per_unit());
    const int cy = std::lround(gy.half_width() * gy.samples_per_unit());
    parallel_rows(nx, default_thread_count(), [&](int i) {
        const double x = gx.point(i);
        std::vector<cplx> vphase(static_cast<std::size_t>(v1 - v0));
        for (int iv = v0; iv < v1; ++iv) {
            vphase[static_cast<std::size_t>(iv - v0)] = phase_pi(-x * gy.point(iv));
        }
        for (int j = 0; j < ny; ++j) {
            const auto& urow = uphase[static_cast<std::size_t>(j)];
            cplx acc = 0.0;
            for (int iu = std::max(u0, i + cx - nx + 1); iu < std::min(u1, i + cx + 1); ++iu) {
                const int px = i - iu + cx;
                cplx inner = 0.0;
                for (int iv = std::max(v0, j + cy - ny + 1); iv < std::min(v1, j + cy + 1); ++iv) {
                    const int py = j - iv + cy;
                    const cplx fv = f.at(px, py);
                    if (fv == 0.0) continue;
                    inner += fv * g.at(iu, iv) * vphase[static_cast<std::size_t>(iv - v0)];
                }
                acc += inner * urow[static_cast<std::size_t>(iu - u0)];
            }
            result.ref(i, j) = acc * cell;
        }
    });
    return result;
}

// ---------------------------------------------------------------------------
// HS pairing and composition
// ---------------------------------------------------------------------------

cplx hs_inner(const KernelMatrix& k1, const KernelMatrix& k2) {
    if (k1.xi_grid != k2.xi_grid || k1.eta_grid != k2.eta_grid ||
        k1.lambda != k2.lambda) {
        throw std::invalid_argument("hs_inner: kernel grids or lambda differ");
    }
    cplx acc = 0.0;
    for (std::size_t i = 0; i < k1.values.size(); ++i) {
        acc += k1.values[i] * std::conj(k2.values[i]);
    }
    return acc * k1.cell();
}

KernelMatrix compose(const KernelMatrix& k1, const KernelMatrix& k2) {
    if (k1.eta_grid.without_offset() != k2.xi_grid) {
        throw std::invalid_argument("compose: inner grids incompatible");
    }
    if (k1.eta_grid.midpoint()) {
        throw std::invalid_argument("compose: zero-offset inner grid required");
    }
    if (k1.lambda != k2.lambda) {
        throw std::invalid_argument("compose: lambda mismatch");
    }
    KernelMatrix out;
    out.xi_grid = k1.xi_grid;
    out.eta_grid = k2.eta_grid;
    out.lambda = k1.lambda;
    const int n_i = k1.xi_grid.count();
    const int n_z = k1.eta_grid.count();
    const int n_j = k2.eta_grid.count();
    out.values.assign(static_cast<std::size_t>(n_i) * n_j, 0.0);
    const double hz = k1.eta_grid.spacing();
    for (int i = 0; i < n_i; ++i) {
        for (int z = 0; z < n_z; ++z) {
            const cplx a = k1.at(i, z);
            if (a == 0.0) continue;
            const cplx ah = a * hz;
            for (int j = 0; j < n_j; ++j) {
                out.at(i, j) += ah * k2.at(z, j);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kernel inversion
// ---------------------------------------------------------------------------

SampledFunction kernel_to_function(const KernelMatrix& k,
                                   const InversionOptions& opts) {
    const AxisGrid& eta = k.eta_grid;
    AxisGrid x_axis = opts.x_axis ? *opts.x_axis
                      : (k.source ? k.source->spec().axes[0]
                                  : eta.without_offset());
    const double h = k.xi_grid.spacing();
    const int q = k.xi_grid.samples_per_unit();
    const std::shared_ptr<const KernelModel>& ext =
        k.model_grid ? k.model_grid : k.model;
    // With a kernel model, integrate xi over a full frequency period of the
    // sampled transform; the discrete pair then inverts exactly.
    double B_default = k.xi_grid.half_width();
    if (ext) {
        B_default = std::max(B_default,
                             std::ceil(1.0 / (2.0 * std::abs(k.lambda) * h)));
    }
    double B = opts.xi_halfwidth.value_or(B_default);
    if (B != std::floor(B)) {
        throw std::invalid_argument("kernel_to_function: xi half-width must be integral");
    }
    const bool need_model = B > k.xi_grid.half_width();
    if (need_model && !ext) {
        throw std::invalid_argument(
            "kernel_to_function: enlarging the xi range needs an analytic kernel model");
    }
    const long n_xi = std::lround(2.0 * B * q);
    const int nx = x_axis.count();
    const int ny = eta.count();
    const double lambda = k.lambda;

    auto xi_at = [&](long j) { return (static_cast<double>(j) - B * q) * h; };
    auto diag_value = [&](long j, int m) -> cplx {
        const double xi = xi_at(j);
        const double y = eta.point(m);
        const double et = xi + y;
        if (ext && need_model) return ext->eval(xi, et);
        // matrix lookup
        int i;
        try {
            i = k.xi_grid.index_of(xi);
        } catch (const std::exception&) {
            return 0.0;
        }
        double pos = (et + eta.half_width()) / eta.spacing() - (eta.midpoint() ? 0.5 : 0.0);
        const long jj = std::lround(pos);
        if (std::abs(pos - static_cast<double>(jj)) > 1e-9 || jj < 0 ||
            jj >= eta.count()) {
            return 0.0;
        }
        return k.at(i, static_cast<int>(jj));
    };

    GridSpec out_spec = phase_plane_spec(x_axis, eta);
    std::vector<cplx> out(out_spec.total_count(), 0.0);

    const bool fold_ok = lambda == 1.0 && x_axis.samples_per_unit() == q;
    if (fold_ok) {
        // x_i xi_j = (2i+sx)(j - Bq) h^2 / 2 - (i + sx/2) h Lx ... assembled
        // from an exact root table of order 2 q^2 plus separable phases.
        const long period = 2L * q * q;
        std::vector<cplx> table(static_cast<std::size_t>(period));
        for (long r = 0; r < period; ++r) {
            table[static_cast<std::size_t>(r)] =
                phase_pi(-static_cast<double>(r) / static_cast<double>(q) /
                         static_cast<double>(q));
        }
        const int sx = x_axis.midpoint() ? 1 : 0;
        const double Lx = x_axis.half_width();
        const long Bq = std::lround(B * q);

        std::vector<cplx> fold(static_cast<std::size_t>(std::min<long>(n_xi, period)));
        std::vector<cplx> diag(static_cast<std::size_t>(n_xi));
        for (int m = 0; m < ny; ++m) {
            const double y = eta.point(m);
            for (long j = 0; j < n_xi; ++j) {
                diag[static_cast<std::size_t>(j)] = diag_value(j, m);
            }
            // C[p] = sum_{j = p mod period} D(j) e^{2 pi i (j - Bq) h Lx}
            std::fill(fold.begin(), fold.end(), cplx(0.0));
            const long fold_n = static_cast<long>(fold.size());
            for (long j = 0; j < n_xi; ++j) {
                const cplx w = phase_pi(2.0 * (static_cast<double>(j) - Bq) * h * Lx);
                fold[static_cast<std::size_t>(j % fold_n)] +=
                    diag[static_cast<std::size_t>(j)] * w;
            }
            for (int i = 0; i < nx; ++i) {
                const long a = 2L * i + sx;
                cplx s = 0.0;
                for (long p = 0; p < fold_n; ++p) {
                    // e^{-2 pi i (2i+sx) j h^2 / 2} = table[(2i+sx) j mod 2q^2]
                    const long r = (a * p) % period;
                    s += fold[static_cast<std::size_t>(p)] *
                         table[static_cast<std::size_t>(r)];
                }
                const double x = x_axis.point(i);
                // apply the separated phases and the leading measure factors
                const cplx pre = phase_pi(static_cast<double>(a) * B /
                                          static_cast<double>(q));
                out[static_cast<std::size_t>(i) * ny + m] =
                    std::abs(lambda) * phase_pi(-lambda * x * y) * pre * s * h;
            }
        }
    } else {
        std::vector<cplx> diag(static_cast<std::size_t>(n_xi));
        for (int m = 0; m < ny; ++m) {
            const double y = eta.point(m);
            for (long j = 0; j < n_xi; ++j) {
                diag[static_cast<std::size_t>(j)] = diag_value(j, m);
            }
            for (int i = 0; i < nx; ++i) {
                const double x = x_axis.point(i);
                const cplx step = phase_pi(-2.0 * lambda * x * h);
                cplx ph = phase_pi(-2.0 * lambda * x * xi_at(0));
                cplx s = 0.0;
                for (long j = 0; j < n_xi; ++j) {
                    s += diag[static_cast<std::size_t>(j)] * ph;
                    ph *= step;
                }
                out[static_cast<std::size_t>(i) * ny + m] =
                    std::abs(lambda) * phase_pi(-lambda * x * y) * s * h;
            }
        }
    }
    return SampledFunction(out_spec, std::move(out));
}

}  // namespace twistframe::weyl
