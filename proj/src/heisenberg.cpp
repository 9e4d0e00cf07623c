#include "twistframe/heisenberg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace twistframe::heisenberg {

HLatticeIndex group_product(const HLatticeIndex& a, const HLatticeIndex& b) {
    // (x,y,t)(x',y',t') = (x+x', y+y', t+t' + (x'y - y'x)/2) on (2k, l, m)
    return HLatticeIndex{a.k + b.k, a.l + b.l,
                         a.m + b.m + b.k * a.l - b.l * a.k};
}

HLatticeIndex group_inverse(const HLatticeIndex& a) {
    return HLatticeIndex{-a.k, -a.l, -a.m};
}

cplx HFunction::evaluate(double x, double y, double t) const {
    cplx acc = 0.0;
    for (const Term& term : terms) {
        const double ts = t - term.idx.m + term.idx.k * y -
                          0.5 * term.idx.l * x;
        acc += term.coeff * fx(x - 2.0 * term.idx.k) * fy(y - term.idx.l) * ft(ts);
    }
    return acc;
}

double HFunction::norm_sq() const { return inner_product_h(*this, *this).real(); }

HFunction example_factory(int id, std::optional<Factor1D> h) {
    HFunction f;
    f.x_axis = make_grid(8.0, 32, true);
    f.y_axis = make_grid(8.0, 32, true);
    f.t_axis = make_grid(4.0, 16, true);
    switch (id) {
        case 1:
            f.fx = Factor1D::indicator(0, 2);
            f.fy = Factor1D::indicator(0, 1);
            f.ft = h.value_or(Factor1D::gaussian(1.0));
            break;
        case 2:
            f.fx = Factor1D::indicator(0, 2);
            f.fy = Factor1D::indicator(0, 1);
            f.ft = Factor1D::gaussian(1.0);
            break;
        case 3:
            f.fx = Factor1D::indicator(0, 2);
            f.fy = Factor1D::indicator(0, 1);
            f.ft = Factor1D::abs_exp();
            break;
        case 4:
            f.fx = Factor1D::bump(0, 2);
            f.fy = Factor1D::bump(0, 1);
            f.ft = h.value_or(Factor1D::gaussian(1.0));
            break;
        case 5:
            f.fx = Factor1D::indicator(0, 3);
            f.fy = Factor1D::indicator(0, 1);
            f.ft = Factor1D::sinc_factor();
            break;
        case 6:
            // the step factor is cut where its support leaves the y box
            f.fx = Factor1D::abs_exp();
            f.fy = Factor1D::step_decay(3);
            f.ft = Factor1D::sinc_factor();
            break;
        default:
            throw std::invalid_argument("example_factory: id must be 1..6");
    }
    return f;
}

HFunction left_translate(const HFunction& phi, const HLatticeIndex& idx) {
    HFunction out = phi;
    for (auto& term : out.terms) {
        term.idx = group_product(idx, term.idx);
    }
    return out;
}

namespace {

Factor1D wrap_or_plain(const Factor1D& base, double shift, double modulation) {
    if (shift == 0.0 && modulation == 0.0) return base;
    return Factor1D::wrapped(base, shift, modulation);
}

Interval clipped_support(const Factor1D& f, const AxisGrid& axis) {
    Interval s = f.effective_support();
    if (!s.bounded) s = Interval{-axis.half_width(), axis.half_width(), true};
    return intersect(s, Interval{-axis.half_width(), axis.half_width(), true});
}

/// <L_g U, V> for separable bases U, V on common axes.
cplx pair_translate(const HFunction& u, const HFunction& v,
                    const HLatticeIndex& g) {
    const double hx = u.x_axis.spacing();
    const double hy = u.y_axis.spacing();
    Interval wx = intersect(clipped_support(u.fx, u.x_axis).shifted(2.0 * g.k),
                            clipped_support(v.fx, v.x_axis));
    Interval wy = intersect(clipped_support(u.fy, u.y_axis).shifted(g.l),
                            clipped_support(v.fy, v.y_axis));
    if (wx.empty() || wy.empty()) return 0.0;

    const long nx = std::max<long>(1, std::lround(wx.length() / hx));
    const long ny = std::max<long>(1, std::lround(wy.length() / hy));
    const double dx = wx.length() / static_cast<double>(nx);
    const double dy = wy.length() / static_cast<double>(ny);

    std::vector<cplx> ax(static_cast<std::size_t>(nx));
    std::vector<double> xs(static_cast<std::size_t>(nx));
    for (long i = 0; i < nx; ++i) {
        const double x = wx.lo + (static_cast<double>(i) + 0.5) * dx;
        xs[static_cast<std::size_t>(i)] = x;
        ax[static_cast<std::size_t>(i)] =
            u.fx(x - 2.0 * g.k) * std::conj(v.fx(x));
    }
    std::vector<cplx> ay(static_cast<std::size_t>(ny));
    std::vector<double> ys(static_cast<std::size_t>(ny));
    for (long j = 0; j < ny; ++j) {
        const double y = wy.lo + (static_cast<double>(j) + 0.5) * dy;
        ys[static_cast<std::size_t>(j)] = y;
        ay[static_cast<std::size_t>(j)] = u.fy(y - g.l) * std::conj(v.fy(y));
    }

    // t pairing at s = m - k y + (l/2) x, memoized per distinct argument
    std::map<double, cplx> tcorr;
    auto t_pair = [&](double s) {
        auto it = tcorr.find(s);
        if (it != tcorr.end()) return it->second;
        const cplx val =
            std::conj(cross_correlation(v.ft, u.ft, s, u.t_axis.spacing()));
        tcorr.emplace(s, val);
        return val;
    };

    cplx acc = 0.0;
    for (long i = 0; i < nx; ++i) {
        if (ax[static_cast<std::size_t>(i)] == 0.0) continue;
        cplx row = 0.0;
        for (long j = 0; j < ny; ++j) {
            const cplx ayv = ay[static_cast<std::size_t>(j)];
            if (ayv == 0.0) continue;
            const double s = g.m - g.k * ys[static_cast<std::size_t>(j)] +
                             0.5 * g.l * xs[static_cast<std::size_t>(i)];
            row += ayv * t_pair(s);
        }
        acc += row * ax[static_cast<std::size_t>(i)];
    }
    return acc * dx * dy;
}

}  // namespace

cplx inner_product_h(const HFunction& u, const HFunction& v) {
    cplx acc = 0.0;
    for (const auto& a : u.terms) {
        for (const auto& b : v.terms) {
            const HLatticeIndex g = group_product(group_inverse(b.idx), a.idx);
            acc += a.coeff * std::conj(b.coeff) * pair_translate(u, v, g);
        }
    }
    return acc;
}

cplx lattice_autocorrelation(const HFunction& phi, const HLatticeIndex& g) {
    return inner_product_h(phi, left_translate(phi, g));
}

SampledFunction partial_ft(const HFunction& phi, double lambda) {
    const GridSpec spec = phase_plane_spec(phi.x_axis, phi.y_axis);
    const cplx H = phi.ft.ft(-lambda);
    std::vector<cplx> values(spec.total_count(), 0.0);
    const int nx = phi.x_axis.count();
    const int ny = phi.y_axis.count();
    for (const auto& term : phi.terms) {
        const Factor1D wx =
            wrap_or_plain(phi.fx, 2.0 * term.idx.k, 0.5 * lambda * term.idx.l);
        const Factor1D wy =
            wrap_or_plain(phi.fy, term.idx.l, -lambda * term.idx.k);
        const cplx scale = term.coeff * H * phase_pi(2.0 * lambda * term.idx.m);
        std::vector<cplx> xv(static_cast<std::size_t>(nx));
        std::vector<cplx> yv(static_cast<std::size_t>(ny));
        for (int i = 0; i < nx; ++i) xv[i] = wx(phi.x_axis.point(i));
        for (int j = 0; j < ny; ++j) yv[j] = wy(phi.y_axis.point(j));
        for (int i = 0; i < nx; ++i) {
            if (xv[i] == 0.0) continue;
            const cplx sx = scale * xv[i];
            for (int j = 0; j < ny; ++j) {
                values[static_cast<std::size_t>(i) * ny + j] += sx * yv[j];
            }
        }
    }
    SampledFunction f(spec, std::move(values));
    if (phi.terms.size() == 1) {
        const auto& term = phi.terms[0];
        f.set_factors(
            {wrap_or_plain(phi.fx, 2.0 * term.idx.k, 0.5 * lambda * term.idx.l),
             wrap_or_plain(phi.fy, term.idx.l, -lambda * term.idx.k)});
        f.set_factor_scale(term.coeff * H * phase_pi(2.0 * lambda * term.idx.m));
    }
    return f;
}

weyl::KernelMatrix group_fourier_kernel(const HFunction& phi, double lambda) {
    if (lambda == 0.0) {
        throw std::invalid_argument("group_fourier_kernel: lambda must be nonzero");
    }
    return weyl::weyl_kernel(partial_ft(phi, lambda), lambda);
}

namespace {

double xi_window_for(const Factor1D& fx, double mu, double box_half) {
    const Factor1D* f = &fx;
    double w_target = 1024.0;
    switch (f->kind()) {
        case FactorKind::gaussian:
            w_target = 16.0;
            break;
        case FactorKind::bump:
            w_target = 32.0;
            break;
        case FactorKind::abs_exp:
            w_target = 128.0;
            break;
        default:
            w_target = 1024.0;
            break;
    }
    return std::max(box_half, std::ceil(w_target / std::abs(mu)));
}

}  // namespace

ScalingCertificate verify_scaling_plancherel(const HFunction& phi,
                                             std::vector<double> lambdas) {
    ScalingCertificate cert;
    cert.lambdas = lambdas;
    double worst = 0.0;
    for (double lambda : lambdas) {
        SampledFunction fiber = partial_ft(phi, lambda);
        // reference norm through the factor pairings, so both sides of the
        // identity live at the same (continuum) discretization level
        double n2;
        if (phi.terms.size() == 1) {
            const double h2 = std::norm(phi.ft.ft(-lambda)) *
                              std::norm(phi.terms[0].coeff);
            n2 = h2 *
                 cross_correlation(phi.fx, phi.fx, 0.0, phi.x_axis.spacing()).real() *
                 cross_correlation(phi.fy, phi.fy, 0.0, phi.y_axis.spacing()).real();
        } else {
            n2 = fiber.norm_sq();
        }
        if (n2 < 1e-30) continue;  // empty fiber carries no information
        auto model = weyl::kernel_model_for(fiber, lambda, weyl::FtMode::continuum);
        double hs;
        if (model) {
            const double half =
                xi_window_for(phi.fx, lambda, phi.y_axis.half_width());
            hs = weyl::hs_norm_sq_windowed(*model, half, phi.y_axis.spacing());
        } else {
            hs = weyl::weyl_kernel(fiber, lambda).hs_norm_sq();
        }
        worst = std::max(worst, std::abs(hs * std::abs(lambda) - n2) / n2);
    }
    cert.worst_rel_err = worst;
    cert.verified = worst <= 1e-4;
    return cert;
}

namespace {

/// <(L_a Phi)^mu, (L_b Phi)^mu> over the phase plane.
cplx fiber_pair(const HFunction& phi, const HFunction::Term& a,
                const HFunction::Term& b, double mu, double h2) {
    if (h2 == 0.0) return 0.0;
    const Factor1D wxa =
        wrap_or_plain(phi.fx, 2.0 * a.idx.k, 0.5 * mu * a.idx.l);
    const Factor1D wxb =
        wrap_or_plain(phi.fx, 2.0 * b.idx.k, 0.5 * mu * b.idx.l);
    const Factor1D wya = wrap_or_plain(phi.fy, a.idx.l, -mu * a.idx.k);
    const Factor1D wyb = wrap_or_plain(phi.fy, b.idx.l, -mu * b.idx.k);
    const cplx ix = cross_correlation(wxa, wxb, 0.0, phi.x_axis.spacing());
    if (ix == 0.0) return 0.0;
    const cplx iy = cross_correlation(wya, wyb, 0.0, phi.y_axis.spacing());
    if (iy == 0.0) return 0.0;
    return a.coeff * std::conj(b.coeff) * h2 *
           phase_pi(2.0 * mu * (a.idx.m - b.idx.m)) * ix * iy;
}

cplx bracket_term(const HFunction& phi, int k, int l, double mu) {
    const double h2 = std::norm(phi.ft.ft(-mu));
    if (h2 == 0.0) return 0.0;
    const HLatticeIndex g{k, l, 0};
    cplx acc = 0.0;
    for (const auto& a : phi.terms) {
        for (const auto& tb : phi.terms) {
            HFunction::Term b{group_product(g, tb.idx), tb.coeff};
            acc += fiber_pair(phi, a, b, mu, h2);
        }
    }
    return acc;
}

}  // namespace

double GSamples::min_real() const {
    double m = 1e300;
    for (const cplx& v : values) m = std::min(m, v.real());
    return m;
}

double GSamples::max_real() const {
    double m = -1e300;
    for (const cplx& v : values) m = std::max(m, v.real());
    return m;
}

double GSamples::integral_real() const {
    double acc = 0.0;
    for (const cplx& v : values) acc += v.real();
    return acc / static_cast<double>(values.size());
}

cplx G_value(const HFunction& phi, int k, int l, double lambda,
             const ScalingCertificate& cert, int r_radius) {
    if (!cert.verified) {
        throw std::invalid_argument(
            "G_value: fiber scaling identity unverified; reduced route refused");
    }
    cplx acc = bracket_term(phi, k, l, lambda);
    for (int r = 1; r <= r_radius; ++r) {
        acc += bracket_term(phi, k, l, lambda + r);
        acc += bracket_term(phi, k, l, lambda - r);
    }
    return acc;
}

GSamples G_function(const HFunction& phi, int k, int l,
                    const ScalingCertificate& cert, int n_lambda,
                    int r_radius) {
    if (!cert.verified) {
        throw std::invalid_argument(
            "G_function: fiber scaling identity unverified; reduced route refused");
    }
    GSamples g;
    g.k = k;
    g.l = l;
    g.r_radius = r_radius;
    g.route = GRoute::reduced;
    const double nxy =
        std::abs(cross_correlation(phi.fx, phi.fx, 0.0)) *
        std::abs(cross_correlation(phi.fy, phi.fy, 0.0));
    g.tail_bound = 2.0 * nxy *
                   phi.ft.ft_tail_sq(static_cast<double>(r_radius) - 1.0);
    g.lambda.resize(static_cast<std::size_t>(n_lambda));
    g.values.resize(static_cast<std::size_t>(n_lambda));
    for (int j = 0; j < n_lambda; ++j) {
        const double lambda = (static_cast<double>(j) + 0.5) / n_lambda;
        cplx acc = bracket_term(phi, k, l, lambda);
        for (int r = 1; r <= r_radius; ++r) {
            acc += bracket_term(phi, k, l, lambda + r);
            acc += bracket_term(phi, k, l, lambda - r);
        }
        g.lambda[static_cast<std::size_t>(j)] = lambda;
        g.values[static_cast<std::size_t>(j)] = acc;
    }
    return g;
}

cplx G_kernel_direct(const HFunction& phi, int k, int l, double lambda,
                     int r_radius) {
    if (phi.terms.size() != 1 || !phi.terms[0].idx.is_identity()) {
        throw std::invalid_argument(
            "G_kernel_direct: base generators only (single identity term)");
    }
    const HFunction trans = left_translate(phi, HLatticeIndex{k, l, 0});
    cplx acc = 0.0;
    for (int r = -r_radius; r <= r_radius; ++r) {
        const double mu = lambda + r;
        if (mu == 0.0) continue;
        if (std::norm(phi.ft.ft(-mu)) < 1e-12) continue;
        SampledFunction fa = partial_ft(phi, mu);
        SampledFunction fb = partial_ft(trans, mu);
        auto ma = weyl::kernel_model_for(fa, mu, weyl::FtMode::continuum);
        auto mb = weyl::kernel_model_for(fb, mu, weyl::FtMode::continuum);
        if (!ma || !mb) {
            throw std::runtime_error("G_kernel_direct: fiber models unavailable");
        }
        const double half = xi_window_for(phi.fx, mu, phi.y_axis.half_width());
        acc += weyl::hs_inner_windowed(*ma, *mb, half, phi.y_axis.spacing()) *
               std::abs(mu);
    }
    return acc;
}

GCoeffPair G_fourier_coeff(const HFunction& phi, const GSamples& g, int m) {
    GCoeffPair pair;
    cplx acc = 0.0;
    for (std::size_t j = 0; j < g.values.size(); ++j) {
        acc += g.values[j] * phase_pi(-2.0 * m * g.lambda[j]);
    }
    pair.fourier_route = acc / static_cast<double>(g.values.size());
    pair.inner_route =
        lattice_autocorrelation(phi, HLatticeIndex{g.k, g.l, m});
    pair.discrepancy = std::abs(pair.fourier_route - pair.inner_route);
    return pair;
}

HConditionReport condition_c_residual_h(const HFunction& phi, int k_max,
                                        int l_max, int m_max,
                                        double threshold) {
    HConditionReport rep;
    rep.threshold = threshold;
    for (int k = -k_max; k <= k_max; ++k) {
        for (int l = -l_max; l <= l_max; ++l) {
            if (k == 0 && l == 0) continue;
            for (int m = -m_max; m <= m_max; ++m) {
                const double r =
                    std::abs(lattice_autocorrelation(phi, HLatticeIndex{k, l, m}));
                if (r > rep.max_residual) {
                    rep.max_residual = r;
                    rep.argmax = HLatticeIndex{k, l, m};
                }
            }
        }
    }
    rep.satisfied = rep.max_residual <= rep.threshold;
    return rep;
}

HDualResult canonical_dual_h(const HFunction& phi,
                             const ScalingCertificate& cert, double eps) {
    HDualResult res;
    const HConditionReport cc = condition_c_residual_h(phi, 2, 2, 2);
    if (!cc.satisfied) {
        res.refused = true;
        res.diagnostic = "condition C violated (residual " +
                         std::to_string(cc.max_residual) + ")";
        return res;
    }
    res.g00 = G_function(phi, 0, 0, cert);
    spectral::WeightSamples adapter;
    adapter.grid.n = static_cast<int>(res.g00.values.size());
    adapter.values.reserve(res.g00.values.size());
    for (const cplx& v : res.g00.values) adapter.values.push_back(v.real());
    res.probe = spectral::reciprocal_probe(adapter);
    const double gmin = res.g00.min_real();
    if (gmin < eps) {
        res.refused = true;
        res.diagnostic = "G00 dips to " + std::to_string(gmin) +
                         " below the division threshold";
        return res;
    }
    if (!res.probe.finite) {
        res.refused = true;
        res.diagnostic = "1/G00 integrability probe diverges";
        return res;
    }
    HFunction dual = phi;
    dual.terms = {HFunction::Term{}};
    if (phi.terms.size() != 1 || !phi.terms[0].idx.is_identity()) {
        res.refused = true;
        res.diagnostic = "dual construction expects a base generator";
        return res;
    }
    std::vector<double> denom;
    denom.reserve(res.g00.values.size());
    for (const cplx& v : res.g00.values) denom.push_back(v.real());
    dual.ft = Factor1D::spectral_quotient(phi.ft, std::move(denom));
    res.dual = std::move(dual);
    return res;
}

HGramSection gram_h(const HFunction& phi, int radius, std::size_t dim_cap) {
    HGramSection g;
    g.radius = radius;
    for (int k = -radius; k <= radius; ++k) {
        for (int l = -radius; l <= radius; ++l) {
            for (int m = -radius; m <= radius; ++m) {
                g.labels.push_back(HLatticeIndex{k, l, m});
            }
        }
    }
    const std::size_t n = g.labels.size();
    if (n > dim_cap) throw std::invalid_argument("gram_h: window exceeds cap");
    g.matrix.assign(n * n, 0.0);
    std::map<std::tuple<int, int, int>, cplx> corr;
    auto corr_of = [&](const HLatticeIndex& d) {
        auto key = std::make_tuple(d.k, d.l, d.m);
        auto it = corr.find(key);
        if (it == corr.end()) {
            it = corr.emplace(key, lattice_autocorrelation(phi, d)).first;
        }
        return it->second;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            // <L_a phi, L_b phi> = conj(<phi, L_{b^-1 a} phi>)
            const HLatticeIndex d =
                group_product(group_inverse(g.labels[j]), g.labels[i]);
            const cplx v = std::conj(corr_of(d));
            g.matrix[i * n + j] = v;
            g.matrix[j * n + i] = std::conj(v);
        }
    }
    Eigen::MatrixXcd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                g.matrix[i * n + j];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    g.lambda_min = es.eigenvalues().minCoeff();
    g.lambda_max = es.eigenvalues().maxCoeff();
    g.sigma_min = std::sqrt(std::max(0.0, g.lambda_min));
    return g;
}

HNormIdentity h_norm_identity(const HFunction& phi,
                              const std::vector<HFunction::Term>& coeffs,
                              const GSamples& g00) {
    if (phi.terms.size() != 1 || !phi.terms[0].idx.is_identity()) {
        throw std::invalid_argument("h_norm_identity: base generator expected");
    }
    HFunction f = phi;
    f.terms = coeffs;
    HNormIdentity out;
    out.lhs = f.norm_sq();
    // rho_{k,l}(lambda) = sum_m c_{k,l,m} e^{2 pi i m lambda}
    std::map<std::pair<int, int>, std::vector<std::pair<int, cplx>>> by_kl;
    for (const auto& t : coeffs) {
        by_kl[{t.idx.k, t.idx.l}].push_back({t.idx.m, t.coeff});
    }
    double rhs = 0.0;
    for (const auto& [kl, ms] : by_kl) {
        double acc = 0.0;
        for (std::size_t j = 0; j < g00.lambda.size(); ++j) {
            cplx rho = 0.0;
            for (const auto& [m, c] : ms) {
                rho += c * phase_pi(2.0 * m * g00.lambda[j]);
            }
            acc += std::norm(rho) * g00.values[j].real();
        }
        rhs += acc / static_cast<double>(g00.lambda.size());
    }
    out.rhs = rhs;
    return out;
}

double h_membership_residual(const HFunction& phi,
                             const std::vector<HFunction::Term>& coeffs,
                             double lambda) {
    if (phi.terms.size() != 1 || !phi.terms[0].idx.is_identity()) {
        throw std::invalid_argument("h_membership_residual: base generator expected");
    }
    HFunction f = phi;
    f.terms = coeffs;
    SampledFunction fiber = partial_ft(f, lambda);
    weyl::KernelMatrix lhs = weyl::weyl_kernel(fiber, lambda, weyl::KernelRoute::direct);

    std::map<std::pair<int, int>, std::vector<std::pair<int, cplx>>> by_kl;
    for (const auto& t : coeffs) {
        by_kl[{t.idx.k, t.idx.l}].push_back({t.idx.m, t.coeff});
    }
    std::vector<cplx> rhs(lhs.values.size(), 0.0);
    for (const auto& [kl, ms] : by_kl) {
        cplx rho = 0.0;
        for (const auto& [m, c] : ms) rho += c * phase_pi(2.0 * m * lambda);
        HFunction shifted = left_translate(phi, HLatticeIndex{kl.first, kl.second, 0});
        // drop the e^{2 pi i lambda m} factor already absorbed into rho
        weyl::KernelMatrix kb =
            weyl::weyl_kernel(partial_ft(shifted, lambda), lambda);
        for (std::size_t i = 0; i < rhs.size(); ++i) {
            rhs[i] += rho * kb.values[i];
        }
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        num += std::norm(lhs.values[i] - rhs[i]);
        den += std::norm(lhs.values[i]);
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace twistframe::heisenberg
