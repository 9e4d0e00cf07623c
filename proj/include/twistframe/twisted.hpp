#pragma once

#include <map>
#include <string>

#include "twistframe/spectral.hpp"
#include "twistframe/weyl.hpp"

namespace twistframe::twisted {

/// Finitely supported coefficient field c_{k,l} with deterministic ordering.
class CoefficientField {
public:
    void set(LatticeIndex idx, cplx value);
    cplx get(LatticeIndex idx) const;
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    double l2_norm_sq() const;

    const std::vector<std::pair<LatticeIndex, cplx>>& entries() const {
        return entries_;
    }

private:
    std::vector<std::pair<LatticeIndex, cplx>> entries_;  // sorted (k, l)
};

/// T^t_{(k,l)} phi (x, y) = e^{pi i (x l - y k)} phi(x - k, y - l).
/// Exact index shift composed with exact phase samples; factor and
/// combination metadata are carried through.
SampledFunction twisted_translate(const SampledFunction& phi, LatticeIndex idx);

/// Kernel translation law: K'(xi, eta) = e^{pi i (2 xi + l) k} K(xi + l, eta),
/// implemented as reindex + phase. Rows shifted past the stored box come from
/// the kernel model when present, else are zero.
weyl::KernelMatrix kernel_of_translate(const weyl::KernelMatrix& k,
                                       LatticeIndex idx);

/// Hermitian section of the Gram matrix of twisted translates over the
/// window |k|, |l| <= radius, indexed lexicographically.
struct GramSection {
    int radius = 0;
    std::vector<LatticeIndex> labels;
    std::vector<cplx> matrix;  // row-major, dim x dim, Hermitian
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double sigma_min = 0.0;

    std::size_t dim() const { return labels.size(); }
    cplx at(std::size_t i, std::size_t j) const { return matrix[i * dim() + j]; }
};

enum class GramBuild {
    direct,      // every entry by space-domain quadrature
    translated   // correlation table + twist phases
};

GramSection gram_matrix(const SampledFunction& phi, int window_radius,
                        GramBuild mode = GramBuild::direct,
                        std::size_t dim_cap = 4096);

/// Fiber symbols rho_l(xi) = sum_k c_{k,l} e^{pi i l k} e^{2 pi i k xi},
/// sampled on the torus grid and recomputable from the coefficients.
struct FiberSymbol {
    struct Fiber {
        int l = 0;
        std::vector<std::pair<int, cplx>> coeffs;  // (k, c_{k,l})
        std::vector<cplx> samples;
    };
    std::vector<Fiber> fibers;
    int torus_count = 0;

    cplx recompute(const Fiber& f, double xi) const;
};

struct SynthesisResult {
    SampledFunction f;
    FiberSymbol symbol;
    double rhs = 0.0;          // sum_l \int |rho_l|^2 w
    bool identity_guaranteed = false;
};

/// f = sum c_{k,l} T^t_{(k,l)} phi, with combination metadata attached when
/// phi is separable.
SampledFunction synthesize(const CoefficientField& c, const SampledFunction& phi);

/// Synthesis together with its fiber symbols and the weighted-symbol norm.
/// The norm identity is only guaranteed when phi is known to pass condition
/// C; pass that verdict in.
SynthesisResult synthesize_and_norm(const CoefficientField& c,
                                    const SampledFunction& phi,
                                    const spectral::WeightSamples& w,
                                    bool condition_c_ok = false);

/// <T_a phi, T_b psi> by quadrature over the overlap window, without
/// materializing the translates.
cplx translate_inner(const SampledFunction& phi, LatticeIndex a,
                     const SampledFunction& psi, LatticeIndex b);

}  // namespace twistframe::twisted
