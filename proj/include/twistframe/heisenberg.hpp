#pragma once

#include <optional>
#include <string>

#include "twistframe/spectral.hpp"
#include "twistframe/weyl.hpp"

namespace twistframe::heisenberg {

/// Lattice element (2k, l, m) of the standard discrete subgroup.
struct HLatticeIndex {
    int k = 0;
    int l = 0;
    int m = 0;
    bool operator==(const HLatticeIndex& o) const {
        return k == o.k && l == o.l && m == o.m;
    }
    bool is_identity() const { return k == 0 && l == 0 && m == 0; }
};

/// Group product (2k,l,m)(2k',l',m') = (2(k+k'), l+l', m+m' + k'l - l'k).
HLatticeIndex group_product(const HLatticeIndex& a, const HLatticeIndex& b);
HLatticeIndex group_inverse(const HLatticeIndex& a);

/// Function on the group held as a finite combination of lattice left
/// translates of a separable base fx ⊗ fy ⊗ ft. Left translation, partial
/// transforms and pairings all reduce to 1-D and 2-D quadratures on the
/// factors; nothing 3-D is materialized.
struct HFunction {
    AxisGrid x_axis, y_axis, t_axis;
    Factor1D fx = Factor1D::indicator(0, 1);
    Factor1D fy = Factor1D::indicator(0, 1);
    Factor1D ft = Factor1D::gaussian(1.0);

    struct Term {
        HLatticeIndex idx;
        cplx coeff = 1.0;
    };
    std::vector<Term> terms{Term{}};

    cplx evaluate(double x, double y, double t) const;
    double norm_sq() const;
    GridSpec spec() const { return group_spec(x_axis, y_axis, t_axis); }
};

/// The worked generators: ids 1..6 select the factor triple; id 1 accepts a
/// custom t factor (defaults to e^{-t^2}).
HFunction example_factory(int id, std::optional<Factor1D> h = std::nullopt);

/// L_{(2k,l,m)} phi (x,y,t) = phi(x-2k, y-l, t-m+ky-(l/2)x).
HFunction left_translate(const HFunction& phi, const HLatticeIndex& idx);

/// <u, v> over the group, by factor reduction: the t pairing collapses to a
/// cross-correlation evaluated at m - k y + (l/2) x.
cplx inner_product_h(const HFunction& u, const HFunction& v);

/// <phi, L_g phi> for a lattice element g.
cplx lattice_autocorrelation(const HFunction& phi, const HLatticeIndex& g);

/// phi^lambda(x, y) = \int phi(x,y,t) e^{2 pi i lambda t} dt on the phase
/// plane, via the analytic transform of the t factor.
SampledFunction partial_ft(const HFunction& phi, double lambda);

/// Kernel of the group transform fiber: weyl kernel of phi^lambda at lambda.
weyl::KernelMatrix group_fourier_kernel(const HFunction& phi, double lambda);

/// Numerical check of ||W_l(F)||_HS^2 |l| = ||F||^2 on the fibers of phi;
/// prerequisite for the reduced bracket route below.
struct ScalingCertificate {
    bool verified = false;
    double worst_rel_err = 0.0;
    std::vector<double> lambdas;
};
ScalingCertificate verify_scaling_plancherel(
    const HFunction& phi, std::vector<double> lambdas = {0.25, 0.5, 1.0});

enum class GRoute { reduced, kernel_direct };

/// G^phi_{k,l} on a midpoint grid over (0,1], truncated to |r| <= r_radius.
struct GSamples {
    int k = 0;
    int l = 0;
    std::vector<double> lambda;
    std::vector<cplx> values;
    int r_radius = 0;
    double tail_bound = 0.0;
    GRoute route = GRoute::reduced;

    double min_real() const;
    double max_real() const;
    double integral_real() const;
};

GSamples G_function(const HFunction& phi, int k, int l,
                    const ScalingCertificate& cert, int n_lambda = 64,
                    int r_radius = 8);

/// Single bracket value by the reduced route.
cplx G_value(const HFunction& phi, int k, int l, double lambda,
             const ScalingCertificate& cert, int r_radius = 8);

/// Independent cross-check of one bracket value through materailized fiber
/// kernels and windowed HS pairings.
cplx G_kernel_direct(const HFunction& phi, int k, int l, double lambda,
                     int r_radius = 8);

/// The two routes to the Fourier coefficients of G: the lambda integral of
/// the samples, and the lattice inner product <phi, L_{(2k,l,m)} phi>.
struct GCoeffPair {
    cplx fourier_route;
    cplx inner_route;
    double discrepancy = 0.0;
};
GCoeffPair G_fourier_coeff(const HFunction& phi, const GSamples& g, int m);

/// max |<phi, L_{(2k,l,m)} phi>| over (k,l) != (0,0).
struct HConditionReport {
    double max_residual = 0.0;
    HLatticeIndex argmax;
    double threshold = 1e-6;
    bool satisfied = false;
};
HConditionReport condition_c_residual_h(const HFunction& phi, int k_max,
                                        int l_max, int m_max,
                                        double threshold = 1e-6);

/// Canonical dual through the fiber quotient: dual^lambda = phi^lambda /
/// G00(lambda), realized as a spectral-quotient t factor.
struct HDualResult {
    bool refused = false;
    std::string diagnostic;
    std::optional<HFunction> dual;
    GSamples g00;
    spectral::ReciprocalReport probe;
};
HDualResult canonical_dual_h(const HFunction& phi,
                             const ScalingCertificate& cert, double eps = 1e-6);

/// Hermitian Gram over |k|,|l|,|m| <= radius (lexicographic), built from the
/// lattice autocorrelation through left invariance.
struct HGramSection {
    int radius = 0;
    std::vector<HLatticeIndex> labels;
    std::vector<cplx> matrix;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double sigma_min = 0.0;
    std::size_t dim() const { return labels.size(); }
    cplx at(std::size_t i, std::size_t j) const { return matrix[i * dim() + j]; }
};
HGramSection gram_h(const HFunction& phi, int radius, std::size_t dim_cap = 8192);

/// || sum c L phi ||^2 against sum_{k,l} \int |rho_{k,l}|^2 G00.
struct HNormIdentity {
    double lhs = 0.0;
    double rhs = 0.0;
};
HNormIdentity h_norm_identity(const HFunction& phi,
                              const std::vector<HFunction::Term>& coeffs,
                              const GSamples& g00);

/// Relative HS residual of the fiber expansion of a synthesized function at
/// one lambda: f-hat(l) vs sum rho_{k,l}(l) (L_{(2k,l,0)} phi)-hat(l).
double h_membership_residual(const HFunction& phi,
                             const std::vector<HFunction::Term>& coeffs,
                             double lambda);

}  // namespace twistframe::heisenberg
