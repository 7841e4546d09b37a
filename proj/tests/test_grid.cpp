#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "aggrosim/grid.hpp"

using namespace aggrosim;

namespace {
GridSpec grid2(double L, int n) { return GridSpec{2, L, n}; }

ScalarField unit_gaussian(const GridSpec& g, double eps, double x0 = 0.0, double y0 = 0.0) {
    return gaussian_field(g, {GaussianSpec{1.0, {x0, y0, 0.0}, eps}});
}
}  // namespace

TEST_CASE("grid spec invariants") {
    CHECK_THROWS(GridSpec{2, 1.0, 10}.validate());   // not a power of two
    CHECK_THROWS(GridSpec{2, 1.0, 8}.validate());    // below 16
    CHECK_THROWS(GridSpec{4, 1.0, 32}.validate());   // dim
    CHECK_THROWS(GridSpec{2, -1.0, 32}.validate());  // L
    GridSpec g{2, 1.0, 16};
    g.validate();
    CHECK(g.spacing() == doctest::Approx(2.0 / 16));
    CHECK(g.center(0) == doctest::Approx(-1.0 + 0.5 * g.spacing()));
}

TEST_CASE("integrate: zero, constant box, unit gaussian") {
    GridSpec g = grid2(1.0, 16);
    ScalarField zero(g);
    CHECK(integrate(zero) == 0.0);

    ScalarField ones(g);
    std::fill(ones.values.begin(), ones.values.end(), 1.0);
    CHECK(integrate(ones) == doctest::Approx(4.0).epsilon(1e-14));

    GridSpec gg = grid2(8.0, 256);
    ScalarField u = unit_gaussian(gg, 4.0);
    CHECK(integrate(u) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("lp_norm: zero, indicator, gaussian peak, p validation") {
    GridSpec g = grid2(1.0, 16);
    ScalarField zero(g);
    CHECK(lp_norm(zero, 1.0) == 0.0);
    CHECK(lp_norm(zero, std::numeric_limits<double>::infinity()) == 0.0);
    CHECK_THROWS(lp_norm(zero, 0.5));

    // indicator of [0,1)^2 is grid-aligned at L=1, n=16
    ScalarField ind(g);
    for (int j = 0; j < 16; ++j)
        for (int i = 0; i < 16; ++i)
            if (g.center(i) > 0 && g.center(j) > 0) ind(i, j) = 1.0;
    CHECK(lp_norm(ind, 2.0) == doctest::Approx(1.0).epsilon(1e-14));

    GridSpec gg = grid2(8.0, 256);
    ScalarField u = unit_gaussian(gg, 4.0);
    CHECK(lp_norm(u, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(4.0 / M_PI).epsilon(0.01));
}

TEST_CASE("weak_lp_norm: zero, |grad N| closed form, bounded support bound") {
    GridSpec g = grid2(1.0, 256);
    ScalarField zero(g);
    CHECK(weak_lp_norm(zero, 2.0) == 0.0);
    CHECK_THROWS(weak_lp_norm(zero, 1.0));

    // |grad N| = 1/(2 pi |x|): level sets are discs, lambda |{...}|^{1/2} is
    // constant = 1/(2 sqrt(pi))
    ScalarField f = sample_field(g, [](const double* x) {
        double r = std::hypot(x[0], x[1]);
        return 1.0 / (2.0 * M_PI * r);
    });
    CHECK(weak_lp_norm(f, 2.0) == doctest::Approx(1.0 / (2.0 * std::sqrt(M_PI))).epsilon(0.05));

    // bounded compactly supported field: weak norm <= ||f||_inf * measure^{1/p}
    ScalarField b(g);
    double supp = 0.0;
    for (int j = 100; j < 140; ++j)
        for (int i = 90; i < 130; ++i) {
            b(i, j) = 2.5;
            supp += g.cell_volume();
        }
    CHECK(weak_lp_norm(b, 3.0) <= 2.5 * std::pow(supp, 1.0 / 3.0) + 1e-12);
}

TEST_CASE("weak lp is dominated by lp (Chebyshev) on assorted fields") {
    GridSpec g = grid2(2.0, 64);
    for (int trial = 0; trial < 5; ++trial) {
        ScalarField f = sample_field(g, [trial](const double* x) {
            return std::fabs(std::sin(3 * x[0] + trial) * std::cos(2 * x[1])) +
                   0.1 * trial * std::exp(-x[0] * x[0] - x[1] * x[1]);
        });
        for (double p : {1.5, 2.0, 4.0})
            CHECK(weak_lp_norm(f, p) <= lp_norm(f, p) * (1.0 + 1e-12));
    }
}

TEST_CASE("second_moment: zero, gaussian, parallel axis") {
    GridSpec g = grid2(8.0, 256);
    ScalarField zero(g);
    CHECK(second_moment(zero) == 0.0);

    // unit-mass gaussian, eps = 4, d = 2: M2 = d/(2 eps) = 0.25
    ScalarField u = unit_gaussian(g, 4.0);
    CHECK(second_moment(u) == doctest::Approx(0.25).epsilon(0.01));

    ScalarField ut = unit_gaussian(g, 4.0, 1.5, -0.5);
    double shift2 = 1.5 * 1.5 + 0.5 * 0.5;
    CHECK(second_moment(ut) == doctest::Approx(0.25 + shift2).epsilon(0.01));
}

TEST_CASE("tail_norm: empty tail, identity at k=0, constant field") {
    GridSpec g = grid2(1.0, 16);
    ScalarField c2(g);
    std::fill(c2.values.begin(), c2.values.end(), 2.0);
    CHECK(tail_norm(c2, 5.0, 2.0) == 0.0);                                    // k >= sup
    CHECK(tail_norm(c2, 0.0, 2.0) == doctest::Approx(lp_norm(c2, 2.0)));      // identity
    CHECK(tail_norm(c2, 1.0, 2.0) == doctest::Approx(2.0).epsilon(1e-14));    // ((2-1)^2*4)^{1/2}
}

TEST_CASE("tail_norm is non-increasing in k") {
    GridSpec g = grid2(4.0, 64);
    ScalarField u = unit_gaussian(g, 1.0);
    double prev = tail_norm(u, 0.0, 2.0);
    for (double k = 0.01; k < 0.4; k += 0.01) {
        double cur = tail_norm(u, k, 2.0);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("quadrature functionals converge at second order on a C0 tensor bump") {
    // f = (1-x^2)_+ (1-y^2)_+ with the support edges on grid faces (L = 2, n
    // a multiple of 4), so the curvature term of the midpoint rule is the
    // clean leading error. Exact values:
    //   integral (4/3)^2, squared integral (16/15)^2, M2 = 2*(4/15)*(4/3).
    auto bump = [](const double* x) {
        return std::max(0.0, 1.0 - x[0] * x[0]) * std::max(0.0, 1.0 - x[1] * x[1]);
    };
    const double exact_int = 16.0 / 9.0;
    const double exact_l2 = 16.0 / 15.0;  // sqrt of (16/15)^2
    const double exact_m2 = 32.0 / 45.0;
    double err_int[3], err_l2[3], err_m2[3];
    int idx = 0;
    for (int n : {64, 128, 256}) {
        GridSpec g = grid2(2.0, n);
        ScalarField f = sample_field(g, bump);
        err_int[idx] = std::fabs(integrate(f) - exact_int);
        err_l2[idx] = std::fabs(lp_norm(f, 2.0) - exact_l2);
        err_m2[idx] = std::fabs(second_moment(f) - exact_m2);
        ++idx;
    }
    for (int i = 0; i + 1 < 3; ++i) {
        CHECK(err_int[i] / err_int[i + 1] == doctest::Approx(4.0).epsilon(0.20));
        CHECK(err_l2[i] / err_l2[i + 1] == doctest::Approx(4.0).epsilon(0.20));
        CHECK(err_m2[i] / err_m2[i + 1] == doctest::Approx(4.0).epsilon(0.20));
    }
}

TEST_CASE("conservative rescale preserves mass and realizes lambda^{-d} f(x/lambda)") {
    GridSpec g = grid2(8.0, 128);
    ScalarField u = unit_gaussian(g, 1.0);
    const double h = g.spacing();
    for (double lam : {0.25, 0.5, 0.9, 1.0}) {
        ScalarField v = rescale_conservative(u, lam);
        CHECK(integrate(v) == doctest::Approx(integrate(u)).epsilon(1e-12));
        // the output is a cell AVERAGE of the rescaled gaussian (eps' = eps/lam^2);
        // the center-cell average has the closed form erf(sqrt(eps') h/2)^2 / h^2
        double epsp = 1.0 / (lam * lam);
        double expect_peak = std::pow(std::erf(std::sqrt(epsp) * h / 2.0), 2.0) / (h * h);
        CHECK(max_abs(v) == doctest::Approx(expect_peak).epsilon(0.02));
        // second moment scales by lambda^2
        CHECK(second_moment(v) == doctest::Approx(lam * lam * second_moment(u)).epsilon(0.02));
    }
}

TEST_CASE("snapshot round-trip is bitwise") {
    GridSpec g = grid2(2.0, 32);
    ScalarField u = unit_gaussian(g, 2.0, 0.3, -0.7);
    u.values[5] = 1.0e-301;  // denormal-ish corner
    const std::string path = "/tmp/aggs_test_snapshot.aggs";
    write_snapshot(u, path);
    ScalarField v = read_snapshot(path);
    REQUIRE(v.grid == u.grid);
    CHECK(std::memcmp(v.values.data(), u.values.data(), u.values.size() * sizeof(double)) == 0);
    std::remove(path.c_str());
}

TEST_CASE("snapshot header is the documented byte layout") {
    GridSpec g = grid2(1.0, 16);
    ScalarField u(g);
    u.values[0] = 1.0;
    const std::string path = "/tmp/aggs_test_header.aggs";
    write_snapshot(u, path);
    FILE* fp = std::fopen(path.c_str(), "rb");
    REQUIRE(fp);
    unsigned char head[20];
    REQUIRE(std::fread(head, 1, 20, fp) == 20);
    std::fclose(fp);
    CHECK(head[0] == 'A');
    CHECK(head[1] == 'G');
    CHECK(head[2] == 'G');
    CHECK(head[3] == 'S');
    CHECK(head[4] == 1);  // version u32 LE
    CHECK(head[8] == 2);  // dim
    CHECK(head[12] == 16);  // n
    std::remove(path.c_str());
}
