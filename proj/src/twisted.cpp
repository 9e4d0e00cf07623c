#include "twistframe/twisted.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace twistframe::twisted {

namespace {

struct Bbox {
    int x0, x1, y0, y1;  // half-open index ranges of nonzero samples
    bool empty() const { return x0 >= x1 || y0 >= y1; }
};

Bbox nonzero_bbox(const SampledFunction& f) {
    const int nx = f.spec().axes[0].count();
    const int ny = f.spec().axes[1].count();
    Bbox b{nx, 0, ny, 0};
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            if (f.at(i, j) != 0.0) {
                b.x0 = std::min(b.x0, i);
                b.x1 = std::max(b.x1, i + 1);
                b.y0 = std::min(b.y0, j);
                b.y1 = std::max(b.y1, j + 1);
            }
        }
    }
    return b;
}

void require_phase_plane(const SampledFunction& f, const char* who) {
    if (f.spec().role != GridRole::phase_plane || f.spec().dimension() != 2) {
        throw std::invalid_argument(std::string(who) + ": phase-plane function required");
    }
}

}  // namespace

void CoefficientField::set(LatticeIndex idx, cplx value) {
    auto cmp = [](const std::pair<LatticeIndex, cplx>& a, LatticeIndex b) {
        return a.first.k < b.k || (a.first.k == b.k && a.first.l < b.l);
    };
    auto it = std::lower_bound(entries_.begin(), entries_.end(), idx, cmp);
    if (it != entries_.end() && it->first == idx) {
        it->second = value;
    } else {
        entries_.insert(it, {idx, value});
    }
}

cplx CoefficientField::get(LatticeIndex idx) const {
    for (const auto& [i, v] : entries_) {
        if (i == idx) return v;
    }
    return 0.0;
}

double CoefficientField::l2_norm_sq() const {
    double acc = 0.0;
    for (const auto& [i, v] : entries_) acc += std::norm(v);
    return acc;
}

SampledFunction twisted_translate(const SampledFunction& phi, LatticeIndex idx) {
    require_phase_plane(phi, "twisted_translate");
    const AxisGrid& gx = phi.spec().axes[0];
    const AxisGrid& gy = phi.spec().axes[1];
    const int nx = gx.count();
    const int ny = gy.count();
    const int sk = idx.k * gx.samples_per_unit();
    const int sl = idx.l * gy.samples_per_unit();

    std::vector<cplx> xphase(static_cast<std::size_t>(nx));
    std::vector<cplx> yphase(static_cast<std::size_t>(ny));
    for (int i = 0; i < nx; ++i) xphase[i] = phase_pi(gx.point(i) * idx.l);
    for (int j = 0; j < ny; ++j) yphase[j] = phase_pi(-gy.point(j) * idx.k);

    std::vector<cplx> out(phi.spec().total_count(), 0.0);
    for (int i = std::max(0, sk); i < std::min(nx, nx + sk); ++i) {
        const cplx xp = xphase[i];
        const std::size_t row = static_cast<std::size_t>(i) * ny;
        const std::size_t src_row = static_cast<std::size_t>(i - sk) * ny;
        for (int j = std::max(0, sl); j < std::min(ny, ny + sl); ++j) {
            const cplx v = phi.values()[src_row + (j - sl)];
            if (v != 0.0) out[row + j] = xp * yphase[j] * v;
        }
    }
    SampledFunction result(phi.spec(), std::move(out));
    if (phi.factors()) {
        const auto& f = *phi.factors();
        result.set_factors({Factor1D::wrapped(f[0], idx.k, 0.5 * idx.l),
                            Factor1D::wrapped(f[1], idx.l, -0.5 * idx.k)});
        result.set_factor_scale(phi.factor_scale());
    } else if (phi.combination()) {
        auto combo = std::make_shared<TwistedCombination>();
        combo->base = phi.combination()->base;
        for (const auto& [t, c] : phi.combination()->terms) {
            const double ph = static_cast<double>(idx.l) * t.k -
                              static_cast<double>(idx.k) * t.l;
            combo->terms.push_back(
                {LatticeIndex{idx.k + t.k, idx.l + t.l}, c * phase_pi(ph)});
        }
        result.set_combination(std::move(combo));
    }
    return result;
}

weyl::KernelMatrix kernel_of_translate(const weyl::KernelMatrix& k,
                                       LatticeIndex idx) {
    if (k.lambda != 1.0) {
        throw std::invalid_argument("kernel_of_translate: lambda = 1 required");
    }
    const int shift = idx.l * k.xi_grid.samples_per_unit();
    weyl::KernelMatrix out;
    out.xi_grid = k.xi_grid;
    out.eta_grid = k.eta_grid;
    out.lambda = 1.0;
    const int n_xi = k.xi_grid.count();
    const int n_eta = k.eta_grid.count();
    out.values.assign(static_cast<std::size_t>(n_xi) * n_eta, 0.0);
    for (int i = 0; i < n_xi; ++i) {
        const double xi = k.xi_grid.point(i);
        const cplx ph = phase_pi((2.0 * xi + idx.l) * static_cast<double>(idx.k));
        const int src = i + shift;
        if (src >= 0 && src < n_xi) {
            for (int j = 0; j < n_eta; ++j) {
                out.at(i, j) = ph * k.at(src, j);
            }
        } else if (k.model_grid) {
            const double s = xi + static_cast<double>(idx.l);
            for (int j = 0; j < n_eta; ++j) {
                out.at(i, j) = ph * k.model_grid->eval(s, k.eta_grid.point(j));
            }
        }
    }
    auto translate_model = [&](const std::shared_ptr<const weyl::KernelModel>& m)
        -> std::shared_ptr<const weyl::KernelModel> {
        if (!m) return nullptr;
        std::vector<weyl::KernelModel::Term> terms;
        for (const auto& t : m->terms()) {
            const double ph = static_cast<double>(idx.l) * t.idx.k -
                              static_cast<double>(idx.k) * t.idx.l;
            terms.push_back({LatticeIndex{idx.k + t.idx.k, idx.l + t.idx.l},
                             t.coeff * phase_pi(ph)});
        }
        return std::make_shared<weyl::KernelModel>(m->with_terms(std::move(terms)));
    };
    out.model = translate_model(k.model);
    out.model_grid = translate_model(k.model_grid);
    if (k.source) {
        out.source = std::make_shared<const SampledFunction>(
            twisted_translate(*k.source, idx));
    }
    return out;
}

namespace {

cplx translate_inner_impl(const SampledFunction& phi, LatticeIndex a,
                          const SampledFunction& psi, LatticeIndex b,
                          const Bbox& ba, const Bbox& bb) {
    const AxisGrid& gx = phi.spec().axes[0];
    const AxisGrid& gy = phi.spec().axes[1];
    const int q = gx.samples_per_unit();
    const int qy = gy.samples_per_unit();
    const int x0 = std::max({ba.x0 + a.k * q, bb.x0 + b.k * q, 0});
    const int x1 = std::min({ba.x1 + a.k * q, bb.x1 + b.k * q, gx.count()});
    const int y0 = std::max({ba.y0 + a.l * qy, bb.y0 + b.l * qy, 0});
    const int y1 = std::min({ba.y1 + a.l * qy, bb.y1 + b.l * qy, gy.count()});
    if (x0 >= x1 || y0 >= y1) return 0.0;

    // phase of T_a phi times conj(T_b psi): e^{pi i (x (la - lb) - y (ka - kb))}
    const int dl = a.l - b.l;
    const int dk = a.k - b.k;
    std::vector<cplx> xph(static_cast<std::size_t>(x1 - x0));
    std::vector<cplx> yph(static_cast<std::size_t>(y1 - y0));
    for (int i = x0; i < x1; ++i) xph[i - x0] = phase_pi(gx.point(i) * dl);
    for (int j = y0; j < y1; ++j) yph[j - y0] = phase_pi(-gy.point(j) * dk);

    cplx acc = 0.0;
    for (int i = x0; i < x1; ++i) {
        cplx row = 0.0;
        for (int j = y0; j < y1; ++j) {
            const cplx u = phi.at(i - a.k * q, j - a.l * qy);
            if (u == 0.0) continue;
            const cplx v = psi.at(i - b.k * q, j - b.l * qy);
            if (v == 0.0) continue;
            row += u * std::conj(v) * yph[j - y0];
        }
        acc += row * xph[i - x0];
    }
    return acc * phi.spec().cell_volume();
}

}  // namespace

cplx translate_inner(const SampledFunction& phi, LatticeIndex a,
                     const SampledFunction& psi, LatticeIndex b) {
    if (phi.spec() != psi.spec()) {
        throw std::invalid_argument("translate_inner: grid specs differ");
    }
    require_phase_plane(phi, "translate_inner");
    return translate_inner_impl(phi, a, psi, b, nonzero_bbox(phi),
                                nonzero_bbox(psi));
}

GramSection gram_matrix(const SampledFunction& phi, int window_radius,
                        GramBuild mode, std::size_t dim_cap) {
    require_phase_plane(phi, "gram_matrix");
    if (window_radius < 0) throw std::invalid_argument("gram_matrix: negative radius");
    GramSection g;
    g.radius = window_radius;
    for (int k = -window_radius; k <= window_radius; ++k) {
        for (int l = -window_radius; l <= window_radius; ++l) {
            g.labels.push_back(LatticeIndex{k, l});
        }
    }
    const std::size_t n = g.labels.size();
    if (n > dim_cap) throw std::invalid_argument("gram_matrix: window exceeds cap");
    g.matrix.assign(n * n, 0.0);

    const Bbox bb = nonzero_bbox(phi);
    if (mode == GramBuild::direct) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const cplx v =
                    translate_inner_impl(phi, g.labels[i], phi, g.labels[j], bb, bb);
                g.matrix[i * n + j] = v;
                g.matrix[j * n + i] = std::conj(v);
            }
        }
    } else {
        // correlation table C(d) = <T_d phi, phi>; entries follow from the
        // projective composition of twisted translates.
        std::map<std::pair<int, int>, cplx> corr;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const LatticeIndex a = g.labels[i];
                const LatticeIndex b = g.labels[j];
                const LatticeIndex d{a.k - b.k, a.l - b.l};
                auto it = corr.find({d.k, d.l});
                if (it == corr.end()) {
                    it = corr.emplace(
                                 std::pair<int, int>{d.k, d.l},
                                 translate_inner_impl(phi, d, phi,
                                                      LatticeIndex{0, 0}, bb, bb))
                             .first;
                }
                const cplx ph = phase_pi(static_cast<double>(b.k) * a.l -
                                         static_cast<double>(b.l) * a.k);
                const cplx v = ph * it->second;
                g.matrix[i * n + j] = v;
                g.matrix[j * n + i] = std::conj(v);
            }
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

cplx FiberSymbol::recompute(const Fiber& f, double xi) const {
    cplx acc = 0.0;
    for (const auto& [k, c] : f.coeffs) {
        acc += c * phase_pi(static_cast<double>(f.l) * k) *
               phase_pi(2.0 * k * xi);
    }
    return acc;
}

SampledFunction synthesize(const CoefficientField& c, const SampledFunction& phi) {
    if (c.empty()) throw std::invalid_argument("synthesize: empty coefficients");
    require_phase_plane(phi, "synthesize");
    std::vector<cplx> acc(phi.spec().total_count(), 0.0);
    for (const auto& [idx, coeff] : c.entries()) {
        SampledFunction t = twisted_translate(phi, idx);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            acc[i] += coeff * t.values()[i];
        }
    }
    SampledFunction f(phi.spec(), std::move(acc));
    if (phi.factors()) {
        auto combo = std::make_shared<TwistedCombination>();
        combo->base = std::make_shared<const SampledFunction>(phi);
        for (const auto& [idx, coeff] : c.entries()) combo->terms.push_back({idx, coeff});
        f.set_combination(std::move(combo));
    }
    return f;
}

SynthesisResult synthesize_and_norm(const CoefficientField& c,
                                    const SampledFunction& phi,
                                    const spectral::WeightSamples& w,
                                    bool condition_c_ok) {
    SynthesisResult res;
    res.f = synthesize(c, phi);

    // group coefficients by l
    std::map<int, std::vector<std::pair<int, cplx>>> by_l;
    for (const auto& [idx, coeff] : c.entries()) {
        by_l[idx.l].push_back({idx.k, coeff});
    }
    res.symbol.torus_count = w.grid.n;
    double rhs = 0.0;
    for (const auto& [l, ks] : by_l) {
        FiberSymbol::Fiber fib;
        fib.l = l;
        fib.coeffs = ks;
        fib.samples.resize(static_cast<std::size_t>(w.grid.n));
        double fib_int = 0.0;
        for (int j = 0; j < w.grid.n; ++j) {
            const cplx v = res.symbol.recompute(fib, w.grid.point(j));
            fib.samples[static_cast<std::size_t>(j)] = v;
            fib_int += std::norm(v) * w.values[static_cast<std::size_t>(j)];
        }
        rhs += fib_int * w.grid.spacing();
        res.symbol.fibers.push_back(std::move(fib));
    }
    res.rhs = rhs;
    res.identity_guaranteed = condition_c_ok;
    return res;
}

}  // namespace twistframe::twisted
