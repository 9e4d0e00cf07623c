#include "twistframe/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace twistframe::spectral {

double WeightSamples::integral() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * grid.spacing();
}

double WeightSamples::min_value() const {
    return *std::min_element(values.begin(), values.end());
}

double WeightSamples::max_value() const {
    return *std::max_element(values.begin(), values.end());
}

double WeightSamples::at_wrapped(double xi) const {
    const double frac = xi - std::floor(xi);
    const double pos = frac * grid.n;
    long j = std::lround(pos);
    if (std::abs(pos - static_cast<double>(j)) > 1e-9) {
        throw std::invalid_argument("WeightSamples: lookup off the torus grid");
    }
    j %= grid.n;
    return values[static_cast<std::size_t>(j)];
}

namespace {

/// Row pairing \int K(s1, eta) conj(K(s2, eta)) deta, from the analytic
/// model when present, else from the stored matrix (rows must be in the box).
class RowCross {
public:
    explicit RowCross(const weyl::KernelMatrix& k) : k_(&k) {
        if (k.lambda != 1.0) {
            throw std::invalid_argument("spectral: lambda = 1 kernels required");
        }
    }

    bool has_model() const { return k_->model != nullptr; }
    double max_row() const { return k_->xi_grid.half_width(); }

    cplx operator()(double s1, double s2) const {
        if (k_->model) return kernel_row_cross(*k_->model, *k_->model, s1, s2);
        const int i1 = k_->xi_grid.index_of(s1);
        const int i2 = k_->xi_grid.index_of(s2);
        cplx acc = 0.0;
        const int n = k_->eta_grid.count();
        for (int j = 0; j < n; ++j) {
            acc += k_->at(i1, j) * std::conj(k_->at(i2, j));
        }
        return acc * k_->eta_grid.spacing();
    }

    /// Bound on the dropped |m| > M part of the periodization.
    double tail_bound(int m_radius) const {
        if (k_->model) {
            return k_->model->xi_tail_sq(static_cast<double>(m_radius) - 1.0);
        }
        // no decay model: report the magnitude of the outermost ring kept
        const double s = static_cast<double>(m_radius);
        return std::abs((*this)(s, s)) + std::abs((*this)(-s, -s));
    }

private:
    const weyl::KernelMatrix* k_;
};

int usable_radius(const RowCross& rc, int requested, int l_max) {
    if (rc.has_model()) return requested;
    const int box = static_cast<int>(std::floor(rc.max_row())) - std::max(l_max, 0) - 1;
    if (box < 1) {
        throw std::invalid_argument(
            "spectral: kernel box too small for periodization without an analytic model");
    }
    return std::min(requested, box);
}

}  // namespace

WeightSamples weight_function(const weyl::KernelMatrix& k, int m_radius) {
    if (m_radius < 1) throw std::invalid_argument("weight_function: m_radius >= 1 required");
    RowCross rc(k);
    const int M = usable_radius(rc, m_radius, 0);
    WeightSamples w;
    w.grid.n = k.xi_grid.samples_per_unit();
    w.values.assign(static_cast<std::size_t>(w.grid.n), 0.0);
    w.m_radius = M;
    w.tail_bound = rc.tail_bound(M);
    w.source_norm_sq = k.source ? k.source->norm_sq() : 0.0;
    for (int j = 0; j < w.grid.n; ++j) {
        const double xi = w.grid.point(j);
        double acc = rc(xi, xi).real();
        for (int m = 1; m <= M; ++m) {
            acc += rc(xi + m, xi + m).real();
            acc += rc(xi - m, xi - m).real();
        }
        w.values[static_cast<std::size_t>(j)] = std::max(acc, 0.0);
    }
    return w;
}

ConditionCReport condition_c_residual(const weyl::KernelMatrix& k, int l_max,
                                      int m_radius) {
    if (l_max < 1) throw std::invalid_argument("condition_c_residual: l_max >= 1 required");
    RowCross rc(k);
    const int M = usable_radius(rc, m_radius, l_max);
    ConditionCReport rep;
    rep.m_radius = M;
    rep.tail_bound = rc.tail_bound(M);
    rep.threshold = std::max(10.0 * rep.tail_bound, 1e-8);
    const int n = k.xi_grid.samples_per_unit();
    for (int l = -l_max; l <= l_max; ++l) {
        if (l == 0) continue;
        double sup = 0.0;
        for (int j = 0; j < n; ++j) {
            const double xi = static_cast<double>(j) / n;
            cplx acc = rc(xi, xi + l);
            for (int m = 1; m <= M; ++m) {
                acc += rc(xi + m, xi + m + l);
                acc += rc(xi - m, xi - m + l);
            }
            sup = std::max(sup, std::abs(acc));
        }
        rep.rows.push_back({l, sup});
    }
    rep.satisfied = true;
    for (const auto& row : rep.rows) {
        if (row.sup_residual > rep.threshold) rep.satisfied = false;
    }
    return rep;
}

double ConditionCReport::max_residual() const {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.sup_residual);
    return m;
}

ReciprocalReport reciprocal_probe(const WeightSamples& w,
                                  std::vector<double> eps_schedule) {
    ReciprocalReport rep;
    std::sort(eps_schedule.begin(), eps_schedule.end(), std::greater<double>());
    for (double eps : eps_schedule) {
        double acc = 0.0;
        for (double v : w.values) acc += 1.0 / std::max(v, eps);
        rep.epsilons.push_back(eps);
        rep.estimates.push_back(acc * w.grid.spacing());
    }
    const std::size_t n = rep.estimates.size();
    if (n >= 2) {
        const double a = rep.estimates[n - 2];
        const double b = rep.estimates[n - 1];
        rep.finite = std::abs(b - a) < 1e-2 * std::max(1.0, std::abs(b));
    }
    return rep;
}

DualResult canonical_dual(const SampledFunction& phi, const WeightSamples& w,
                          double eps) {
    DualResult res;
    res.probe = reciprocal_probe(w);
    const double wmin = w.min_value();
    if (wmin < eps) {
        res.refused = true;
        res.diagnostic =
            "weight dips to " + std::to_string(wmin) +
            " below the division threshold; canonical dual not constructed";
        return res;
    }
    if (!res.probe.finite) {
        res.refused = true;
        res.diagnostic = "1/w integrability probe diverges";
        return res;
    }
    weyl::KernelMatrix k = weyl::weyl_kernel(phi, 1.0);
    weyl::KernelMatrix dual_k;
    dual_k.xi_grid = k.xi_grid;
    dual_k.eta_grid = k.eta_grid;
    dual_k.lambda = 1.0;
    dual_k.values = k.values;
    const int n_eta = k.eta_grid.count();
    for (int i = 0; i < k.xi_grid.count(); ++i) {
        const double wi = w.at_wrapped(k.xi_grid.point(i));
        for (int j = 0; j < n_eta; ++j) dual_k.at(i, j) /= wi;
    }
    if (k.model) {
        dual_k.model =
            std::make_shared<const weyl::KernelModel>(k.model->divided_by(w.values));
    }
    if (k.model_grid) {
        dual_k.model_grid =
            std::make_shared<const weyl::KernelModel>(k.model_grid->divided_by(w.values));
    }
    weyl::InversionOptions opts;
    opts.x_axis = phi.spec().axes[0];
    SampledFunction dual = weyl::kernel_to_function(dual_k, opts);
    dual_k.source = std::make_shared<const SampledFunction>(dual);
    res.dual = std::move(dual);
    res.dual_kernel = std::move(dual_k);
    return res;
}

}  // namespace twistframe::spectral
