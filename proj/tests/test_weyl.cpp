#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "twistframe/weyl.hpp"

using namespace twistframe;
using namespace twistframe::weyl;

namespace {

SampledFunction unit_square(int q = 32, double L = 8.0) {
    AxisGrid ax = make_grid(L, q, true);
    return sample_separable(
        {Factor1D::indicator(0, 1), Factor1D::indicator(0, 1)},
        phase_plane_spec(ax, ax));
}

SampledFunction gaussian_pp(double ax_coef = kPi, double ay_coef = kPi,
                            int q = 32, double L = 8.0) {
    AxisGrid ax = make_grid(L, q);
    return sample_separable(
        {Factor1D::gaussian(ax_coef), Factor1D::gaussian(ay_coef)},
        phase_plane_spec(ax, ax));
}

}  // namespace

TEST_CASE("weyl_kernel rejects bad input") {
    auto f = unit_square();
    CHECK_THROWS_AS(weyl_kernel(f, 0.0), std::invalid_argument);
    AxisGrid ax = make_grid(4.0, 16);
    auto line = sample_separable({Factor1D::gaussian(1.0)}, line_spec(ax));
    CHECK_THROWS_AS(weyl_kernel(line, 1.0), std::invalid_argument);
}

TEST_CASE("unit square kernel values") {
    auto f = unit_square();
    KernelMatrix k = weyl_kernel(f, 1.0);
    const int i0 = k.xi_grid.index_of(0.0);

    // K(0, 0.5) = F(chi_[0,1))(-1/4) = (e^{i pi/2} - 1)/(i pi/2) = (2/pi)(1+i);
    // the midpoint eta grid does not contain 0.5, so evaluate the model there.
    const cplx v = k.model->eval(0.0, 0.5);
    const cplx expect = (2.0 / kPi) * cplx(1.0, 1.0);
    CHECK(std::abs(v - expect) < 1e-12);

    // grid-consistent matrix value is within the midpoint quadrature bound
    const cplx vg = k.model_grid->eval(0.0, 0.5);
    CHECK(std::abs(vg - expect) < 5e-4);

    // support factor kills eta - xi outside [0,1)
    CHECK(k.model->eval(0.0, 1.5) == cplx(0.0));
    const int j_out = k.eta_grid.index_of(1.5 + 0.5 * k.eta_grid.spacing());
    CHECK(k.at(i0, j_out) == cplx(0.0));

    // HS norm equals ||f||^2 = 1 up to the box tail of |F chi|^2
    CHECK(std::abs(k.hs_norm_sq() - 1.0) < 3e-2);
}

TEST_CASE("fast path matches direct quadrature") {
    SUBCASE("indicator factors") {
        auto f = unit_square();
        KernelMatrix kf = weyl_kernel(f, 1.0, KernelRoute::fast_path);
        KernelMatrix kd = weyl_kernel(f, 1.0, KernelRoute::direct);
        double sup = 0.0;
        for (std::size_t i = 0; i < kf.values.size(); ++i) {
            sup = std::max(sup, std::abs(kf.values[i] - kd.values[i]));
        }
        CHECK(sup < 1e-8);
    }
    SUBCASE("gaussian factors, lambda = 1/2") {
        auto f = gaussian_pp(kPi, 2.0, 16, 4.0);
        KernelMatrix kf = weyl_kernel(f, 0.5, KernelRoute::fast_path);
        KernelMatrix kd = weyl_kernel(f, 0.5, KernelRoute::direct);
        double sup = 0.0;
        for (std::size_t i = 0; i < kf.values.size(); ++i) {
            sup = std::max(sup, std::abs(kf.values[i] - kd.values[i]));
        }
        CHECK(sup < 1e-8);
    }
    SUBCASE("step_decay factor") {
        AxisGrid ax = make_grid(8.0, 16, true);
        auto f = sample_separable(
            {Factor1D::step_decay(3), Factor1D::indicator(0, 1)},
            phase_plane_spec(ax, ax));
        KernelMatrix kf = weyl_kernel(f, 1.0, KernelRoute::fast_path);
        KernelMatrix kd = weyl_kernel(f, 1.0, KernelRoute::direct);
        double sup = 0.0;
        for (std::size_t i = 0; i < kf.values.size(); ++i) {
            sup = std::max(sup, std::abs(kf.values[i] - kd.values[i]));
        }
        CHECK(sup < 1e-8);
    }
}

TEST_CASE("weyl Parseval for random gaussian pairs") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> coef(0.5 * kPi, 2.0 * kPi);
    std::uniform_real_distribution<double> center(-1.5, 1.5);
    std::uniform_real_distribution<double> mod(-1.0, 1.0);
    AxisGrid ax = make_grid(8.0, 32);
    GridSpec spec = phase_plane_spec(ax, ax);

    auto random_gaussian = [&]() {
        Factor1D fx = Factor1D::wrapped(Factor1D::gaussian(coef(rng)),
                                        center(rng), mod(rng));
        Factor1D fy = Factor1D::wrapped(Factor1D::gaussian(coef(rng)),
                                        center(rng), mod(rng));
        return sample_separable({fx, fy}, spec);
    };

    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_gaussian();
        auto g = random_gaussian();
        KernelMatrix kf = weyl_kernel(f, 1.0);
        KernelMatrix kg = weyl_kernel(g, 1.0);
        const cplx lhs = hs_inner(kf, kg);
        const cplx rhs = inner_product(f, g);
        CHECK(std::abs(lhs - rhs) <= 1e-6 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("hs_inner closed-form gaussian overlap") {
    AxisGrid ax = make_grid(8.0, 32);
    GridSpec spec = phase_plane_spec(ax, ax);
    auto f = sample_separable({Factor1D::gaussian(kPi), Factor1D::gaussian(kPi)}, spec);
    auto g = sample_separable(
        {Factor1D::wrapped(Factor1D::gaussian(kPi), 1.0, 0.0), Factor1D::gaussian(kPi)},
        spec);
    KernelMatrix kf = weyl_kernel(f, 1.0);
    KernelMatrix kg = weyl_kernel(g, 1.0);
    // <f,g> = e^{-pi/2}/2
    const double expect = std::exp(-kPi / 2.0) / 2.0;
    CHECK(std::abs(hs_inner(kf, kg) - cplx(expect)) < 1e-8);

    // positivity: hs_inner(K,K) >= 0 and vanishes only for the zero kernel
    CHECK(hs_inner(kf, kf).real() > 0.0);
    KernelMatrix kz = kf;
    std::fill(kz.values.begin(), kz.values.end(), cplx(0.0));
    CHECK(hs_inner(kz, kz) == cplx(0.0));
}

TEST_CASE("lambda scaling of the HS norm") {
    auto f = gaussian_pp(kPi, 1.5 * kPi);
    const double n2 = f.norm_sq();
    for (double lambda : {-0.5, 0.5, -1.0, 1.0, 2.0}) {
        KernelMatrix k = weyl_kernel(f, lambda);
        const double got = k.hs_norm_sq();
        const double expect = n2 / std::abs(lambda);
        CHECK(std::abs(got - expect) <= 1e-4 * expect);
    }
}

TEST_CASE("twisted convolution basics") {
    AxisGrid ax = make_grid(4.0, 16);
    GridSpec spec = phase_plane_spec(ax, ax);
    auto f = sample_separable({Factor1D::gaussian(4.0 * kPi), Factor1D::gaussian(4.0 * kPi)}, spec);
    SampledFunction zero(spec, std::vector<cplx>(spec.total_count(), 0.0));

    auto fz = twisted_convolution(f, zero);
    for (const cplx& v : fz.values()) CHECK(v == cplx(0.0));

    // non-commutativity witness with a shifted gaussian
    auto g = sample_separable(
        {Factor1D::wrapped(Factor1D::gaussian(3.0 * kPi), 0.5, 0.0),
         Factor1D::gaussian(3.0 * kPi)},
        spec);
    auto fg = twisted_convolution(f, g);
    auto gf = twisted_convolution(g, f);
    double diff = 0.0;
    for (std::size_t i = 0; i < fg.values().size(); ++i) {
        diff += std::norm(fg.values()[i] - gf.values()[i]);
    }
    diff = std::sqrt(diff * spec.cell_volume());
    CHECK(diff > 1e-3);
    CHECK(supports_fit_after_convolution(f, g));
}

TEST_CASE("twisted convolution is a kernel homomorphism") {
    AxisGrid ax = make_grid(4.0, 16);
    GridSpec spec = phase_plane_spec(ax, ax);
    auto f = sample_separable({Factor1D::gaussian(kPi), Factor1D::gaussian(kPi)}, spec);
    auto g = sample_separable({Factor1D::gaussian(1.5 * kPi), Factor1D::gaussian(2.0)}, spec);

    auto conv = twisted_convolution(f, g);
    KernelMatrix kconv = weyl_kernel(conv, 1.0, KernelRoute::direct);
    KernelMatrix kf = weyl_kernel(f, 1.0);
    KernelMatrix kg = weyl_kernel(g, 1.0);
    KernelMatrix kcomp = compose(kf, kg);

    double err2 = 0.0;
    for (std::size_t i = 0; i < kconv.values.size(); ++i) {
        err2 += std::norm(kconv.values[i] - kcomp.values[i]);
    }
    err2 *= kconv.cell();
    const double bound = 1e-4 * std::sqrt(kf.hs_norm_sq() * kg.hs_norm_sq());
    CHECK(std::sqrt(err2) <= bound);
}

TEST_CASE("kernel inversion round trips") {
    SUBCASE("gaussian") {
        auto f = gaussian_pp();
        KernelMatrix k = weyl_kernel(f, 1.0);
        SampledFunction back = kernel_to_function(k);
        REQUIRE(back.spec() == f.spec());
        double sup = 0.0;
        for (std::size_t i = 0; i < back.values().size(); ++i) {
            sup = std::max(sup, std::abs(back.values()[i] - f.values()[i]));
        }
        CHECK(sup < 1e-6);
    }
    SUBCASE("unit square") {
        auto f = unit_square();
        KernelMatrix k = weyl_kernel(f, 1.0);
        SampledFunction back = kernel_to_function(k);
        double sup = 0.0;
        for (std::size_t i = 0; i < back.values().size(); ++i) {
            sup = std::max(sup, std::abs(back.values()[i] - f.values()[i]));
        }
        CHECK(sup < 1e-2);
    }
    SUBCASE("zero kernel") {
        auto f = unit_square();
        KernelMatrix k = weyl_kernel(f, 1.0);
        std::fill(k.values.begin(), k.values.end(), cplx(0.0));
        k.model.reset();
        k.model_grid.reset();
        SampledFunction back = kernel_to_function(k);
        for (const cplx& v : back.values()) CHECK(std::abs(v) == 0.0);
    }
    SUBCASE("gaussian at lambda = 1/2") {
        auto f = gaussian_pp(kPi, kPi, 16, 4.0);
        KernelMatrix k = weyl_kernel(f, 0.5);
        SampledFunction back = kernel_to_function(k);
        double sup = 0.0;
        for (std::size_t i = 0; i < back.values().size(); ++i) {
            sup = std::max(sup, std::abs(back.values()[i] - f.values()[i]));
        }
        CHECK(sup < 1e-6);
    }
}

TEST_CASE("thread count does not change kernel values") {
    auto f = gaussian_pp(kPi, kPi, 16, 4.0);
    setenv("TWISTFRAME_THREADS", "1", 1);
    KernelMatrix k1 = weyl_kernel(f, 1.0);
    setenv("TWISTFRAME_THREADS", "3", 1);
    KernelMatrix k3 = weyl_kernel(f, 1.0);
    setenv("TWISTFRAME_THREADS", "1", 1);
    REQUIRE(k1.values.size() == k3.values.size());
    for (std::size_t i = 0; i < k1.values.size(); ++i) {
        CHECK(k1.values[i] == k3.values[i]);
    }
}

TEST_CASE("windowed HS pairing matches the boxed matrix for gaussians") {
    auto f = gaussian_pp();
    KernelMatrix k = weyl_kernel(f, 1.0);
    const double boxed = k.hs_norm_sq();
    const double windowed = hs_norm_sq_windowed(*k.model, 8.0, k.xi_grid.spacing());
    CHECK(std::abs(boxed - windowed) < 1e-8);
}
