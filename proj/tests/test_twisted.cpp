#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "twistframe/twisted.hpp"

using namespace twistframe;
using namespace twistframe::twisted;

namespace {

SampledFunction unit_square(bool midpoint = true) {
    AxisGrid ax = make_grid(8.0, 32, midpoint);
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

double sup_diff(const SampledFunction& a, const SampledFunction& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        s = std::max(s, std::abs(a.values()[i] - b.values()[i]));
    }
    return s;
}

}  // namespace

TEST_CASE("twisted translate basics") {
    auto sq = unit_square(false);
    auto same = twisted_translate(sq, {0, 0});
    CHECK(sup_diff(sq, same) == 0.0);

    // norm preservation
    for (LatticeIndex idx : {LatticeIndex{1, 0}, LatticeIndex{-2, 3}, LatticeIndex{0, -1}}) {
        auto t = twisted_translate(sq, idx);
        CHECK(t.norm_sq() == doctest::Approx(sq.norm_sq()).epsilon(1e-12));
    }

    // value at (1.5, 0.5) of T_{(1,0)} chi square: e^{-i pi / 2} = -i
    auto t = twisted_translate(sq, {1, 0});
    const auto& ax = sq.spec().axes[0];
    const cplx v = t.at(ax.index_of(1.5), ax.index_of(0.5));
    CHECK(std::abs(v - cplx(0.0, -1.0)) < 1e-15);
}

TEST_CASE("projective composition of twisted translates") {
    auto g = gaussian_pp();
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(-2, 2);
    for (int trial = 0; trial < 6; ++trial) {
        const LatticeIndex a{pick(rng), pick(rng)};
        const LatticeIndex b{pick(rng), pick(rng)};
        auto lhs = twisted_translate(twisted_translate(g, b), a);
        auto rhs = twisted_translate(g, {a.k + b.k, a.l + b.l});
        const cplx f = phase_pi(static_cast<double>(a.l) * b.k -
                                static_cast<double>(a.k) * b.l);
        for (auto& v : rhs.values()) v *= f;
        CHECK(sup_diff(lhs, rhs) < 1e-12);
    }
    // outer (1,0), inner (0,1): factor e^{pi i (0*0 - 1*1)} = -1
    auto lhs = twisted_translate(twisted_translate(g, {0, 1}), {1, 0});
    auto rhs = twisted_translate(g, {1, 1});
    for (auto& v : rhs.values()) v *= -1.0;
    CHECK(sup_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("kernel translation law") {
    SUBCASE("identity index") {
        auto sq = unit_square();
        auto k = weyl::weyl_kernel(sq, 1.0);
        auto moved = kernel_of_translate(k, {0, 0});
        double s = 0.0;
        for (std::size_t i = 0; i < k.values.size(); ++i) {
            s = std::max(s, std::abs(k.values[i] - moved.values[i]));
        }
        CHECK(s == 0.0);
    }
    SUBCASE("reindex+phase equals recomputed kernel") {
        for (const SampledFunction& phi : {unit_square(), gaussian_pp()}) {
            auto k = weyl::weyl_kernel(phi, 1.0);
            for (int kk = -3; kk <= 3; kk += 3) {
                for (int ll = -3; ll <= 3; ll += 2) {
                    auto a = kernel_of_translate(k, {kk, ll});
                    auto b = weyl::weyl_kernel(twisted_translate(phi, {kk, ll}), 1.0);
                    double s = 0.0;
                    for (std::size_t i = 0; i < a.values.size(); ++i) {
                        s = std::max(s, std::abs(a.values[i] - b.values[i]));
                    }
                    CHECK(s < 1e-12);
                }
            }
        }
    }
    SUBCASE("phase value at xi = 1/4 for idx (1,0)") {
        auto sq = unit_square();
        auto k = weyl::weyl_kernel(sq, 1.0);
        auto moved = kernel_of_translate(k, {1, 0});
        const int i = k.xi_grid.index_of(0.25);
        const int isrc = k.xi_grid.index_of(0.25);  // same row, l = 0 shift
        // e^{pi i (2 xi + 0) * 1} = e^{pi i / 2} = i
        for (int j = 0; j < k.eta_grid.count(); ++j) {
            CHECK(std::abs(moved.at(i, j) - cplx(0, 1) * k.at(isrc, j)) < 1e-15);
        }
    }
}

TEST_CASE("gram matrix of the unit square is the identity") {
    auto sq = unit_square();
    GramSection g = gram_matrix(sq, 2);
    REQUIRE(g.dim() == 25);
    for (std::size_t i = 0; i < g.dim(); ++i) {
        for (std::size_t j = 0; j < g.dim(); ++j) {
            const cplx expect = i == j ? 1.0 : 0.0;
            CHECK(std::abs(g.at(i, j) - expect) < 1e-3);
        }
    }
    CHECK(g.lambda_min == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g.lambda_max == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g.sigma_min == doctest::Approx(1.0).epsilon(1e-10));

    // Hermitian exactly
    for (std::size_t i = 0; i < g.dim(); ++i) {
        for (std::size_t j = 0; j < g.dim(); ++j) {
            CHECK(g.at(i, j) == std::conj(g.at(j, i)));
        }
    }
}

TEST_CASE("gram entries match HS pairings of translated kernels") {
    auto g = gaussian_pp();
    GramSection gram = gram_matrix(g, 1);
    auto k = weyl::weyl_kernel(g, 1.0);
    for (std::size_t i = 0; i < gram.dim(); ++i) {
        for (std::size_t j = 0; j < gram.dim(); ++j) {
            auto ka = kernel_of_translate(k, gram.labels[i]);
            auto kb = kernel_of_translate(k, gram.labels[j]);
            const cplx hs = weyl::hs_inner(ka, kb);
            CHECK(std::abs(hs - gram.at(i, j)) < 1e-6);
        }
    }
}

TEST_CASE("gram build modes agree and translation covariance holds") {
    auto r = rect21();
    GramSection d = gram_matrix(r, 2, GramBuild::direct);
    GramSection t = gram_matrix(r, 2, GramBuild::translated);
    double s = 0.0;
    for (std::size_t i = 0; i < d.matrix.size(); ++i) {
        s = std::max(s, std::abs(d.matrix[i] - t.matrix[i]));
    }
    CHECK(s < 1e-12);

    // |entries| invariant under simultaneous index translation
    GramSection big = gram_matrix(r, 3, GramBuild::direct);
    auto find = [&](LatticeIndex a) {
        for (std::size_t i = 0; i < big.labels.size(); ++i) {
            if (big.labels[i] == a) return i;
        }
        REQUIRE(false);
        return std::size_t{0};
    };
    for (int dk : {1, -1}) {
        for (int dl : {0, 1}) {
            const auto i0 = find({0, 0}), j0 = find({1, 0});
            const auto i1 = find({dk, dl}), j1 = find({1 + dk, dl});
            CHECK(std::abs(std::abs(big.at(i0, j0)) - std::abs(big.at(i1, j1))) < 1e-12);
        }
    }

    CHECK_THROWS_AS(gram_matrix(r, 40, GramBuild::direct, 100),
                    std::invalid_argument);
}

TEST_CASE("synthesis and the weighted-symbol norm identity") {
    auto r = rect21();
    auto k = weyl::weyl_kernel(r, 1.0);
    auto w = spectral::weight_function(k, 256);
    auto cc = spectral::condition_c_residual(k, 3, 64);
    REQUIRE(cc.satisfied);

    SUBCASE("single atom at the origin") {
        CoefficientField c;
        c.set({0, 0}, 1.0);
        auto res = synthesize_and_norm(c, r, w, cc.satisfied);
        CHECK(sup_diff(res.f, r) < 1e-14);
        REQUIRE(res.symbol.fibers.size() == 1);
        for (const cplx& v : res.symbol.fibers[0].samples) {
            CHECK(std::abs(v - cplx(1.0)) < 1e-14);
        }
        CHECK(res.rhs == doctest::Approx(w.integral()).epsilon(1e-12));
        CHECK(std::abs(res.rhs - r.norm_sq()) < 1e-2 * r.norm_sq());
        CHECK(res.identity_guaranteed);
    }
    SUBCASE("single shifted atom has a unimodular symbol") {
        CoefficientField c;
        c.set({1, 0}, 1.0);
        auto res = synthesize_and_norm(c, r, w, cc.satisfied);
        REQUIRE(res.symbol.fibers.size() == 1);
        for (int j = 0; j < w.grid.n; ++j) {
            const cplx expect = phase_pi(2.0 * w.grid.point(j));
            CHECK(std::abs(res.symbol.fibers[0].samples[j] - expect) < 1e-14);
        }
        CHECK(res.rhs == doctest::Approx(w.integral()).epsilon(1e-12));
    }
    SUBCASE("random fields satisfy the norm identity") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            CoefficientField c;
            for (int kk = -2; kk <= 2; ++kk) {
                for (int ll = -2; ll <= 2; ++ll) {
                    c.set({kk, ll}, cplx(u(rng), u(rng)));
                }
            }
            auto res = synthesize_and_norm(c, r, w, cc.satisfied);
            const double lhs = res.f.norm_sq();
            CHECK(std::abs(lhs - res.rhs) <= 1e-2 * lhs);
        }
    }
    SUBCASE("empty coefficients are rejected") {
        CoefficientField c;
        CHECK_THROWS_AS(synthesize_and_norm(c, r, w), std::invalid_argument);
    }
}

TEST_CASE("membership law for synthesized functions") {
    auto r = rect21();
    auto k = weyl::weyl_kernel(r, 1.0);
    auto w = spectral::weight_function(k, 256);

    CoefficientField c;
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int kk = -2; kk <= 2; ++kk) {
        for (int ll = -2; ll <= 2; ++ll) {
            c.set({kk, ll}, cplx(u(rng), u(rng)));
        }
    }
    auto res = synthesize_and_norm(c, r, w, true);

    // direct-quadrature kernel of the synthesized function
    auto kf = weyl::weyl_kernel(res.f, 1.0, weyl::KernelRoute::direct);
    // fiber expansion sum_l rho_l(xi) K_phi(xi + l, eta) via the grid model
    const auto& model = *k.model_grid;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < kf.xi_grid.count(); ++i) {
        const double xi = kf.xi_grid.point(i);
        for (int j = 0; j < kf.eta_grid.count(); ++j) {
            const double eta = kf.eta_grid.point(j);
            cplx rhs = 0.0;
            for (const auto& fib : res.symbol.fibers) {
                const cplx rho = res.symbol.recompute(fib, xi);
                rhs += rho * model.eval(xi + fib.l, eta);
            }
            num += std::norm(kf.at(i, j) - rhs);
            den += std::norm(kf.at(i, j));
        }
    }
    CHECK(std::sqrt(num) <= 1e-3 * std::sqrt(den));
}
