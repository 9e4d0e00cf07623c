#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "twistframe/twisted.hpp"

using namespace twistframe;
using namespace twistframe::spectral;

namespace {

SampledFunction unit_square() {
    AxisGrid ax = make_grid(8.0, 32, true);
    return sample_separable(
        {Factor1D::indicator(0, 1), Factor1D::indicator(0, 1)},
        phase_plane_spec(ax, ax));
}

SampledFunction rect21() {
    AxisGrid ax = make_grid(8.0, 32, true);
    return sample_separable(
        {Factor1D::indicator(0, 2), Factor1D::indicator(0, 1)},
        phase_plane_spec(ax, ax));
}

SampledFunction gaussian_pp() {
    AxisGrid ax = make_grid(8.0, 32);
    return sample_separable(
        {Factor1D::gaussian(kPi), Factor1D::gaussian(kPi)},
        phase_plane_spec(ax, ax));
}

// psi = square + T_{(1,0)} square, the vanishing-weight example
SampledFunction make_psi() {
    auto sq = unit_square();
    twisted::CoefficientField c;
    c.set({0, 0}, 1.0);
    c.set({1, 0}, 1.0);
    return twisted::synthesize(c, sq);
}

}  // namespace

TEST_CASE("weight of the unit square is identically one") {
    auto k = weyl::weyl_kernel(unit_square(), 1.0);
    WeightSamples w = weight_function(k, 256);
    double sup = 0.0;
    for (double v : w.values) sup = std::max(sup, std::abs(v - 1.0));
    CHECK(sup <= 1e-2);
    CHECK(w.tail_bound < 1e-2);
    CHECK(std::abs(w.integral() - 1.0) <= w.tail_bound + 1e-2);
}

TEST_CASE("weight mass identity") {
    for (const SampledFunction& phi :
         {unit_square(), rect21(), gaussian_pp(), make_psi()}) {
        auto k = weyl::weyl_kernel(phi, 1.0);
        WeightSamples w = weight_function(k, 256);
        const double n2 = phi.norm_sq();
        CHECK(std::abs(w.integral() - n2) <= w.tail_bound + 1e-2 * n2);
        for (double v : w.values) CHECK(v >= 0.0);
    }
}

TEST_CASE("weight of rect generator integrates to two") {
    auto k = weyl::weyl_kernel(rect21(), 1.0);
    WeightSamples w = weight_function(k, 256);
    CHECK(std::abs(w.integral() - 2.0) <= 1e-2);
    // closed form w(xi) = 2 - (4/pi) sin(2 pi xi)
    for (int j = 0; j < w.grid.n; ++j) {
        const double expect = 2.0 - 4.0 / kPi * std::sin(2.0 * kPi * w.grid.point(j));
        CHECK(std::abs(w.values[j] - expect) < 2e-2);
    }
}

TEST_CASE("weight of the two-term comb vanishes like 4 cos^2") {
    auto k = weyl::weyl_kernel(make_psi(), 1.0);
    WeightSamples w = weight_function(k, 256);
    double sup = 0.0;
    for (int j = 0; j < w.grid.n; ++j) {
        const double c = std::cos(kPi * w.grid.point(j));
        sup = std::max(sup, std::abs(w.values[j] - 4.0 * c * c));
    }
    CHECK(sup <= 2e-2);
}

TEST_CASE("weight periodicity up to truncation") {
    auto k = weyl::weyl_kernel(rect21(), 1.0);
    const auto& model = *k.model;
    const int M = 128;
    for (double xi : {0.125, 0.4375, 0.78125}) {
        auto periodized = [&](double s) {
            double acc = kernel_row_cross(model, model, s, s).real();
            for (int m = 1; m <= M; ++m) {
                acc += kernel_row_cross(model, model, s + m, s + m).real();
                acc += kernel_row_cross(model, model, s - m, s - m).real();
            }
            return acc;
        };
        const double tail = model.xi_tail_sq(M - 1);
        CHECK(std::abs(periodized(xi) - periodized(xi + 1.0)) <= 2.0 * tail);
    }
}

TEST_CASE("weight is invariant under twisted translation of the generator") {
    auto phi = rect21();
    auto w0 = weight_function(weyl::weyl_kernel(phi, 1.0), 128);
    auto t = twisted::twisted_translate(phi, {2, 1});
    auto wt = weight_function(weyl::weyl_kernel(t, 1.0), 128);
    for (int j = 0; j < w0.grid.n; ++j) {
        CHECK(std::abs(w0.values[j] - wt.values[j]) <=
              2.0 * (w0.tail_bound + wt.tail_bound) + 1e-10);
    }
}

TEST_CASE("condition C classification") {
    SUBCASE("unit square satisfies with tiny residuals") {
        auto rep = condition_c_residual(weyl::weyl_kernel(unit_square(), 1.0), 4, 256);
        CHECK(rep.satisfied);
        CHECK(rep.max_residual() <= 1e-10);
    }
    SUBCASE("rect generator satisfies") {
        auto rep = condition_c_residual(weyl::weyl_kernel(rect21(), 1.0), 4, 256);
        CHECK(rep.satisfied);
        CHECK(rep.max_residual() <= 1e-10);
    }
    SUBCASE("gaussian fails at l = 1") {
        auto rep = condition_c_residual(weyl::weyl_kernel(gaussian_pp(), 1.0), 2, 64);
        CHECK_FALSE(rep.satisfied);
        double r1 = 0.0;
        for (const auto& row : rep.rows) {
            if (row.l == 1) r1 = row.sup_residual;
        }
        CHECK(r1 > 10.0 * rep.tail_bound);
        CHECK(r1 > 1e-3);
    }
    SUBCASE("comb inherits condition C from the square") {
        auto rep = condition_c_residual(weyl::weyl_kernel(make_psi(), 1.0), 3, 128);
        CHECK(rep.satisfied);
    }
}

TEST_CASE("reciprocal probe") {
    SUBCASE("unit square") {
        auto w = weight_function(weyl::weyl_kernel(unit_square(), 1.0), 256);
        auto rep = reciprocal_probe(w);
        CHECK(rep.finite);
        CHECK(std::abs(rep.estimates.back() - 1.0) < 3e-2);
    }
    SUBCASE("comb diverges") {
        auto w = weight_function(weyl::weyl_kernel(make_psi(), 1.0), 256);
        auto rep = reciprocal_probe(w);
        CHECK_FALSE(rep.finite);
        CHECK(rep.estimates.back() > rep.estimates.front());
    }
    SUBCASE("gaussian is finite") {
        auto w = weight_function(weyl::weyl_kernel(gaussian_pp(), 1.0), 64);
        auto rep = reciprocal_probe(w);
        CHECK(rep.finite);
    }
}

TEST_CASE("canonical dual of the unit square is itself") {
    auto sq = unit_square();
    auto w = weight_function(weyl::weyl_kernel(sq, 1.0), 256);
    auto res = canonical_dual(sq, w);
    REQUIRE_FALSE(res.refused);
    REQUIRE(res.dual.has_value());
    double num = 0.0;
    for (std::size_t i = 0; i < sq.values().size(); ++i) {
        num += std::norm(res.dual->values()[i] - sq.values()[i]);
    }
    num = std::sqrt(num * sq.spec().cell_volume());
    CHECK(num <= 1e-3);
}

TEST_CASE("canonical dual of the rect generator is biorthogonal") {
    auto phi = rect21();
    auto w = weight_function(weyl::weyl_kernel(phi, 1.0), 256);
    auto res = canonical_dual(phi, w);
    REQUIRE_FALSE(res.refused);
    double dev = 0.0;
    for (int k = -3; k <= 3; ++k) {
        for (int l = -3; l <= 3; ++l) {
            const cplx ip = twisted::translate_inner(*res.dual, {k, l}, phi, {0, 0});
            const cplx delta = (k == 0 && l == 0) ? 1.0 : 0.0;
            dev = std::max(dev, std::abs(ip - delta));
        }
    }
    CHECK(dev <= 1e-2);
}

TEST_CASE("dual weight is the reciprocal weight") {
    auto phi = rect21();
    auto w = weight_function(weyl::weyl_kernel(phi, 1.0), 256);
    REQUIRE(w.min_value() > 0.1);
    auto res = canonical_dual(phi, w);
    REQUIRE_FALSE(res.refused);
    auto wd = weight_function(*res.dual_kernel, 256);
    for (int j = 0; j < w.grid.n; ++j) {
        const double expect = 1.0 / w.values[j];
        CHECK(std::abs(wd.values[j] - expect) <= 5e-2 * expect);
    }
}

TEST_CASE("canonical dual refusal for the vanishing weight") {
    auto psi = make_psi();
    auto w = weight_function(weyl::weyl_kernel(psi, 1.0), 256);
    auto res = canonical_dual(psi, w);
    CHECK(res.refused);
    CHECK_FALSE(res.probe.finite);
    CHECK_FALSE(res.dual.has_value());
    CHECK(!res.diagnostic.empty());
}
