#pragma once

#include <optional>
#include <string>

#include "twistframe/weyl.hpp"

namespace twistframe::spectral {

/// Uniform grid on the torus [0,1), zero offset.
struct TorusGrid {
    int n = 32;
    double point(int j) const { return static_cast<double>(j) / n; }
    double spacing() const { return 1.0 / n; }
};

/// w(xi) = sum_m \int |K(xi + m, eta)|^2 deta on the torus grid, truncated at
/// |m| <= m_radius with the tail bound recorded.
struct WeightSamples {
    TorusGrid grid;
    std::vector<double> values;
    int m_radius = 0;
    double tail_bound = 0.0;
    double source_norm_sq = 0.0;

    double integral() const;
    double min_value() const;
    double max_value() const;
    double at_wrapped(double xi) const;  // exact sample lookup, periodic
};

WeightSamples weight_function(const weyl::KernelMatrix& k, int m_radius);

/// Off-diagonal periodization residuals
///   R_l(xi) = sum_m \int K(xi+m, eta) conj(K(xi+m+l, eta)) deta,
/// reported as sup over the torus grid for each 1 <= |l| <= l_max.
struct ConditionCReport {
    struct Row {
        int l = 0;
        double sup_residual = 0.0;
    };
    std::vector<Row> rows;
    int m_radius = 0;
    double tail_bound = 0.0;
    double threshold = 0.0;
    bool satisfied = false;

    double max_residual() const;
};

ConditionCReport condition_c_residual(const weyl::KernelMatrix& k, int l_max,
                                      int m_radius);

/// Estimates \int 1/max(w, eps) along a decreasing eps schedule; the verdict
/// is "finite" when the estimates stabilize.
struct ReciprocalReport {
    std::vector<double> epsilons;
    std::vector<double> estimates;
    bool finite = false;
};

ReciprocalReport reciprocal_probe(
    const WeightSamples& w,
    std::vector<double> eps_schedule = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6});

/// Canonical dual via K_dual(xi, eta) = K(xi, eta) / w(xi), with w extended
/// periodically, inverted back to a function. Refuses when 1/w fails the
/// integrability probe or w dips below eps on the grid.
struct DualResult {
    bool refused = false;
    std::string diagnostic;
    std::optional<SampledFunction> dual;
    std::optional<weyl::KernelMatrix> dual_kernel;
    ReciprocalReport probe;
};

DualResult canonical_dual(const SampledFunction& phi, const WeightSamples& w,
                          double eps = 1e-6);

}  // namespace twistframe::spectral
