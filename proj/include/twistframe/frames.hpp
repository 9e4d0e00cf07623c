#pragma once

#include <functional>

#include "twistframe/twisted.hpp"

namespace twistframe::frames {

using twisted::GramBuild;
using twisted::GramSection;

/// Spectra of growing Gram sections against the weight range. Windows nest,
/// so lambda_max is nondecreasing and lambda_min nonincreasing in the radius.
struct ProbeReport {
    std::vector<int> radii;
    std::vector<double> lambda_min;
    std::vector<double> lambda_max;
    std::vector<double> sigma_min;
    double sup_w = 0.0;
    double inf_w = 0.0;
    std::string verdict;
};

/// Upper frame-bound probe: lambda_max per radius compared with sup w.
ProbeReport bessel_bound_estimate(const SampledFunction& phi,
                                  const std::vector<int>& radii,
                                  const spectral::WeightSamples& w,
                                  bool condition_c_ok,
                                  GramBuild mode = GramBuild::translated);

/// sigma_min per radius; flags a numerical null vector when the synthesis
/// residual drops below 1e-6.
ProbeReport independence_probe(const SampledFunction& phi,
                               const std::vector<int>& radii,
                               const spectral::WeightSamples& w,
                               GramBuild mode = GramBuild::translated);

/// max over |k|,|l| <= radius of |<T_{(k,l)} dual, phi> - delta|.
double biorthogonality_check(const SampledFunction& dual,
                             const SampledFunction& phi, int radius);

using CoefficientFamily = std::function<cplx(LatticeIndex)>;

/// Cauchy (Hilbertian) and dual-coefficient (Besselian) witness inequalities
/// along nested index cuts.
struct HilbertianReport {
    struct CauchyRow {
        int r_inner = 0;
        int r_outer = 0;
        double increment_norm_sq = 0.0;  // ||S_B - S_A||^2
        double bound = 0.0;              // sup w * sum_{B\A} |c|^2 * (1 + 1e-2)
        bool holds = false;
    };
    struct DualRow {
        int r = 0;
        double coeff_sq = 0.0;  // sum_{A} |c|^2
        double bound = 0.0;     // sup w * ||sum_A c T dual||^2 * (1 + 1e-2)
        bool holds = false;
    };
    std::vector<CauchyRow> cauchy;
    std::vector<DualRow> dual;
    double sup_w = 0.0;
    bool asserting = false;
    bool all_hold() const;
};

HilbertianReport hilbertian_probe(const SampledFunction& phi,
                                  const spectral::WeightSamples& w,
                                  const CoefficientFamily& coeffs,
                                  const std::vector<int>& cuts,
                                  bool condition_c_ok,
                                  const SampledFunction* dual = nullptr);

}  // namespace twistframe::frames
