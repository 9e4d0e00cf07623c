#include "twistframe/frames.hpp"

#include <algorithm>
#include <cmath>

namespace twistframe::frames {

namespace {

void check_radii(const std::vector<int>& radii, const char* who) {
    if (radii.empty()) {
        throw std::invalid_argument(std::string(who) + ": empty radius list");
    }
    for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
        if (radii[i + 1] <= radii[i]) {
            throw std::invalid_argument(std::string(who) + ": radii must increase");
        }
    }
}

}  // namespace

ProbeReport bessel_bound_estimate(const SampledFunction& phi,
                                  const std::vector<int>& radii,
                                  const spectral::WeightSamples& w,
                                  bool condition_c_ok, GramBuild mode) {
    check_radii(radii, "bessel_bound_estimate");
    ProbeReport rep;
    rep.radii = radii;
    rep.sup_w = w.max_value();
    rep.inf_w = w.min_value();
    for (int r : radii) {
        GramSection g = twisted::gram_matrix(phi, r, mode);
        rep.lambda_min.push_back(g.lambda_min);
        rep.lambda_max.push_back(g.lambda_max);
        rep.sigma_min.push_back(g.sigma_min);
    }
    if (!condition_c_ok) {
        rep.verdict = "reported-only (condition C not established)";
    } else {
        bool ok = true;
        for (double lm : rep.lambda_max) {
            if (lm > rep.sup_w + 1e-2) ok = false;
        }
        rep.verdict = ok ? "bounded-by-sup-weight" : "bound-violated";
    }
    return rep;
}

ProbeReport independence_probe(const SampledFunction& phi,
                               const std::vector<int>& radii,
                               const spectral::WeightSamples& w,
                               GramBuild mode) {
    check_radii(radii, "independence_probe");
    ProbeReport rep;
    rep.radii = radii;
    rep.sup_w = w.max_value();
    rep.inf_w = w.min_value();
    if (phi.norm_sq() == 0.0) {
        rep.verdict = "dependent (zero generator)";
        return rep;
    }
    bool null_vector = false;
    for (int r : radii) {
        GramSection g = twisted::gram_matrix(phi, r, mode);
        rep.lambda_min.push_back(g.lambda_min);
        rep.lambda_max.push_back(g.lambda_max);
        rep.sigma_min.push_back(g.sigma_min);
        if (g.sigma_min < 1e-6) null_vector = true;
    }
    if (null_vector) {
        rep.verdict = "inconsistent (numerical null vector)";
    } else if (rep.inf_w > 0.0) {
        rep.verdict = "consistent with l2-independence";
    } else {
        rep.verdict = "trend reported (weight touches zero on the grid)";
    }
    return rep;
}

double biorthogonality_check(const SampledFunction& dual,
                             const SampledFunction& phi, int radius) {
    if (dual.spec() != phi.spec()) {
        throw std::invalid_argument("biorthogonality_check: grid specs differ");
    }
    double dev = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        for (int l = -radius; l <= radius; ++l) {
            const cplx ip = twisted::translate_inner(dual, {k, l}, phi, {0, 0});
            const cplx expect = (k == 0 && l == 0) ? 1.0 : 0.0;
            dev = std::max(dev, std::abs(ip - expect));
        }
    }
    return dev;
}

bool HilbertianReport::all_hold() const {
    for (const auto& row : cauchy) {
        if (!row.holds) return false;
    }
    for (const auto& row : dual) {
        if (!row.holds) return false;
    }
    return true;
}

HilbertianReport hilbertian_probe(const SampledFunction& phi,
                                  const spectral::WeightSamples& w,
                                  const CoefficientFamily& coeffs,
                                  const std::vector<int>& cuts,
                                  bool condition_c_ok,
                                  const SampledFunction* dual) {
    check_radii(cuts, "hilbertian_probe");
    HilbertianReport rep;
    rep.sup_w = w.max_value();
    rep.asserting = condition_c_ok;
    const double slack = 1.0 + 1e-2;

    auto ring_field = [&](int r_in, int r_out) {
        twisted::CoefficientField c;
        for (int k = -r_out; k <= r_out; ++k) {
            for (int l = -r_out; l <= r_out; ++l) {
                if (std::max(std::abs(k), std::abs(l)) <= r_in) continue;
                const cplx v = coeffs(LatticeIndex{k, l});
                if (v != 0.0) c.set({k, l}, v);
            }
        }
        return c;
    };

    int prev = -1;  // empty cut
    for (int r : cuts) {
        twisted::CoefficientField ring = ring_field(prev, r);
        if (!ring.empty()) {
            SampledFunction inc = twisted::synthesize(ring, phi);
            HilbertianReport::CauchyRow row;
            row.r_inner = prev;
            row.r_outer = r;
            row.increment_norm_sq = inc.norm_sq();
            row.bound = rep.sup_w * ring.l2_norm_sq() * slack;
            row.holds = row.increment_norm_sq <= row.bound;
            rep.cauchy.push_back(row);
        }
        prev = r;
    }

    if (dual != nullptr) {
        for (int r : cuts) {
            twisted::CoefficientField c = ring_field(-1, r);
            if (c.empty()) continue;
            SampledFunction s = twisted::synthesize(c, *dual);
            HilbertianReport::DualRow row;
            row.r = r;
            row.coeff_sq = c.l2_norm_sq();
            row.bound = rep.sup_w * s.norm_sq() * slack;
            row.holds = row.coeff_sq <= row.bound;
            rep.dual.push_back(row);
        }
    }
    return rep;
}

}  // namespace twistframe::frames
