#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "twistframe/grid.hpp"

namespace twistframe::weyl {

/// Which transform backs the separable fast path. `grid` reproduces the
/// Riemann sum of the sampled factor exactly (bit-level agreement with direct
/// quadrature); `continuum` is the analytic transform used by the lattice-sum
/// machinery, where decay in xi matters.
enum class FtMode { continuum, grid };

/// Analytic model of a kernel
///   K(xi, eta) = sum_j c_j e^{pi i (2 xi + l_j) k_j} K0(xi + l_j, eta),
///   K0(s, eta) = scale * f2(eta - s) * FT1(-lambda (s + eta) / 2),
/// optionally divided by a 1-periodic weight in xi. Covers kernels of
/// separable functions, of finite twisted-translate combinations (lambda = 1),
/// and of canonical duals. Evaluable at arbitrary (xi, eta), which is what the
/// periodization sums need.
class KernelModel {
public:
    struct Term {
        LatticeIndex idx;
        cplx coeff;
    };

    static KernelModel separable(Factor1D f1, Factor1D f2, double lambda,
                                 cplx scale, FtMode mode,
                                 std::optional<AxisGrid> x_grid);

    /// Finite combination sum_j c_j T^t_{(k_j,l_j)} base; lambda must be 1.
    KernelModel with_terms(std::vector<Term> terms) const;

    /// K(xi, eta) / w(frac(xi)); w sampled on [0,1) with uniform spacing,
    /// zero offset. Lookups must land on samples.
    KernelModel divided_by(std::vector<double> weight) const;

    cplx eval(double xi, double eta) const;
    double lambda() const { return lambda_; }
    cplx scale() const { return scale_; }
    const std::vector<Term>& terms() const { return terms_; }
    const Factor1D& x_factor() const { return f1_; }
    const Factor1D& y_factor() const { return f2_; }
    /// Transform of the x factor in the configured mode.
    cplx transform_at(double omega) const { return ft1(omega); }
    bool has_weight() const { return !weight_.empty(); }
    double weight_value(double xi) const { return weight_at(xi); }

    /// Hull of the eta-support of K(xi, .): bounded unless f2 is heavy-tailed.
    Interval eta_window(double xi) const;
    /// Quadrature spacing used by row integrals.
    double du() const { return du_; }
    /// Bound on \int_{|xi| > W} \int |K(xi,eta)|^2 deta dxi.
    double xi_tail_sq(double W) const;

    double weight_floor() const;

private:
    KernelModel() = default;

    Factor1D f1_ = Factor1D::indicator(0.0, 1.0);
    Factor1D f2_ = Factor1D::indicator(0.0, 1.0);
    double lambda_ = 1.0;
    cplx scale_ = 1.0;
    FtMode mode_ = FtMode::continuum;
    std::optional<AxisGrid> x_grid_;
    std::vector<Term> terms_;
    std::vector<double> weight_;
    double du_ = 1.0 / 32.0;

    cplx ft1(double omega) const;
    double weight_at(double xi) const;
};

/// \int K_a(xi_a, eta) conj(K_b(xi_b, eta)) deta, midpoint quadrature over the
/// joint eta window (exact when the windows are indicator-cut).
cplx kernel_row_cross(const KernelModel& a, const KernelModel& b, double xi_a,
                      double xi_b);

/// HS inner product over |xi| <= xi_halfwidth with the models' own eta
/// windows; xi runs on a zero-offset grid of the given spacing.
cplx hs_inner_windowed(const KernelModel& a, const KernelModel& b,
                       double xi_halfwidth, double xi_spacing);
double hs_norm_sq_windowed(const KernelModel& m, double xi_halfwidth,
                           double xi_spacing);

// ---------------------------------------------------------------------------

/// Discretized kernel K^lambda_f on a (xi, eta) grid. The eta grid is the
/// y-axis of the source; the xi grid is its zero-offset twin, so eta - xi
/// always lands on the y grid and xi shifts by integers stay on-grid.
struct KernelMatrix {
    AxisGrid xi_grid;
    AxisGrid eta_grid;
    double lambda = 1.0;
    std::vector<cplx> values;  // row-major (xi, eta)

    std::shared_ptr<const KernelModel> model;       // continuum form
    std::shared_ptr<const KernelModel> model_grid;  // grid-consistent form
    std::shared_ptr<const SampledFunction> source;

    cplx at(int i, int j) const {
        return values[static_cast<std::size_t>(i) * eta_grid.count() + j];
    }
    cplx& at(int i, int j) {
        return values[static_cast<std::size_t>(i) * eta_grid.count() + j];
    }
    double cell() const { return xi_grid.spacing() * eta_grid.spacing(); }
    double hs_norm_sq() const;
};

enum class KernelRoute { automatic, fast_path, direct };

/// Kernel of the Weyl-type transform of f at nonzero lambda. The fast path
/// (factor or combination metadata) and the direct x-quadrature agree to
/// 1e-8 for indicator/gaussian/step factors; `route` forces one side.
KernelMatrix weyl_kernel(const SampledFunction& f, double lambda,
                         KernelRoute route = KernelRoute::automatic);

/// Model of K^lambda_f from f's metadata; null if f carries none.
std::shared_ptr<const KernelModel> kernel_model_for(const SampledFunction& f,
                                                    double lambda, FtMode mode);

/// (f x g)(z) = \int f(z - w) g(w) e^{pi i (y u - x v)} dw for z = (x, y),
/// w = (u, v). Direct summation, restricted to the nonzero box of g.
SampledFunction twisted_convolution(const SampledFunction& f,
                                    const SampledFunction& g);

/// True when the supports of f and g keep f x g inside the common box.
bool supports_fit_after_convolution(const SampledFunction& f,
                                    const SampledFunction& g);

/// \int\int K1 conj(K2); equals the L2 pairing of the source functions.
cplx hs_inner(const KernelMatrix& k1, const KernelMatrix& k2);

/// Composition \int K1(xi, z) K2(z, eta) dz.
KernelMatrix compose(const KernelMatrix& k1, const KernelMatrix& k2);

struct InversionOptions {
    /// Half-width of the xi integration; defaults to the kernel's own box.
    std::optional<double> xi_halfwidth;
    /// Output x-axis; defaults to the source x-axis, else the eta axis
    /// without offset.
    std::optional<AxisGrid> x_axis;
};

/// Recovers f from K^lambda_f: for fixed y, K(xi, xi + y) is the x-transform
/// of f(., y) at -lambda(2 xi + y)/2, inverted here by quadrature in xi.
SampledFunction kernel_to_function(const KernelMatrix& k,
                                   const InversionOptions& opts = {});

}  // namespace twistframe::weyl
