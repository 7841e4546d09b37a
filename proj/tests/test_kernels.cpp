#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aggrosim/kernels.hpp"
#include "aggrosim/quadrature.hpp"

using namespace aggrosim;

namespace {
Kernel bounded_smooth_kernel(int dim) {
    // non-increasing bounded profile 1/(1+r^2), tabulated
    std::vector<double> r, k;
    for (int i = 0; i <= 400; ++i) {
        double rv = 1e-7 * std::pow(10.0 / 1e-7, i / 400.0);
        r.push_back(rv);
        k.push_back(1.0 / (1.0 + rv * rv));
    }
    return Kernel::tabulated(std::move(r), std::move(k), dim);
}
}  // namespace

TEST_CASE("eval: newtonian values and singular-argument rejection") {
    Kernel n2 = Kernel::newtonian(2);
    CHECK(n2.eval(1.0) == doctest::Approx(0.0).epsilon(1e-15));  // log 1 = 0
    CHECK_THROWS(n2.eval(0.0));
    CHECK_THROWS(n2.eval(-1.0));

    Kernel n3 = Kernel::newtonian(3);
    CHECK(n3.eval(1.0) == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-14));
    CHECK(n3.eval(1.0) == doctest::Approx(0.0795775).epsilon(1e-6));

    Kernel p = Kernel::power_law(1.0, 3);
    CHECK(p.eval(2.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("grad_radial and radial laplacian") {
    // attractive sign convention: k non-increasing, so k'(1) = -1/(2 pi) in d=2
    Kernel n2 = Kernel::newtonian(2);
    CHECK(n2.grad_radial(1.0) == doctest::Approx(-1.0 / (2.0 * M_PI)).epsilon(1e-14));
    CHECK(std::fabs(n2.grad_radial(1.0)) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-14));

    for (double r : {0.03, 0.7, 1.0, 5.0}) {
        CHECK(Kernel::newtonian(2).lap(r) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(Kernel::newtonian(3).lap(r) == doctest::Approx(0.0).epsilon(1e-12));
    }

    Kernel lg = Kernel::logarithmic(1.0, 2);
    for (double r : {0.01, 0.5, 2.0, 100.0})
        CHECK(r * lg.grad_radial(r) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("critical exponent catalog") {
    auto n3 = Kernel::newtonian(3).critical_exponent();
    CHECK(n3.m_star == 4.0 / 3.0);  // exact: (p+1)/p with p = 3
    CHECK(n3.p == doctest::Approx(3.0));

    auto n2 = Kernel::newtonian(2).critical_exponent();
    CHECK(n2.m_star == 1.0);
    CHECK(n2.logarithmic);
    CHECK(n2.m_star == 2.0 - 2.0 / 2.0);  // the two formulas coincide in d = 2

    auto lg = Kernel::logarithmic(1.0, 2).critical_exponent();
    CHECK(lg.m_star == 1.0);
    CHECK(lg.logarithmic);

    auto p6 = Kernel::power_law(0.5, 3).critical_exponent();
    CHECK(p6.p == doctest::Approx(6.0));
    CHECK(p6.m_star == doctest::Approx(7.0 / 6.0));

    auto bounded = bounded_smooth_kernel(2).critical_exponent();
    CHECK(bounded.m_star == 1.0);
    CHECK(bounded.no_singularity);

    auto clamped = Kernel::power_law(2.0, 3).critical_exponent();  // s > d-2
    CHECK(clamped.clamped);
    CHECK(clamped.m_star == doctest::Approx(2.0 - 2.0 / 3.0));
}

TEST_CASE("monotonicity audit holds for every shipped kernel") {
    std::vector<Kernel> shipped = {Kernel::newtonian(2), Kernel::newtonian(3),
                                   Kernel::logarithmic(1.0, 2), Kernel::power_law(0.5, 3),
                                   bounded_smooth_kernel(2)};
    for (const auto& k : shipped) {
        auto a = k.audit();
        CHECK(a.monotone_ok);
        CHECK(a.second_derivative_bound_ok);
    }
}

TEST_CASE("tabulated singularity detector") {
    // power-law data r^{-1/2}
    std::vector<double> r, k;
    for (int i = 0; i <= 300; ++i) {
        double rv = 1e-7 * std::pow(10.0 / 1e-7, i / 300.0);
        r.push_back(rv);
        k.push_back(std::pow(rv, -0.5));
    }
    Kernel pk = Kernel::tabulated(r, k, 3);
    CHECK(pk.singularity_power() == doctest::Approx(0.5).epsilon(0.02));

    // logarithmic data -2.5 log r
    std::vector<double> kl;
    for (double rv : r) kl.push_back(-2.5 * std::log(rv));
    Kernel lk = Kernel::tabulated(r, kl, 2);
    CHECK(lk.singularity_power() == 0.0);
    CHECK(lk.log_strength() == doctest::Approx(2.5).epsilon(0.02));
}

TEST_CASE("mollify: consistency, finite origin, passthrough") {
    Kernel base = bounded_smooth_kernel(2);

    // sup-norm distance to the base kernel decreases monotonically with eps
    double prev = 1e300;
    for (double eps : {0.1, 0.05, 0.025}) {
        MollifiedKernel mk(base, eps);
        double sup = 0.0;
        for (double r = 0.0; r < 1.0; r += 1.0 / 257)
            sup = std::max(sup, std::fabs(mk.eval(r) - (r == 0.0 ? 1.0 : base.eval(r))));
        CHECK(sup < prev);
        prev = sup;
    }
    CHECK(prev < 5e-3);

    // averaged logarithmic singularity is finite at the origin
    MollifiedKernel mn(Kernel::newtonian(2), 0.1);
    CHECK(std::isfinite(mn.eval(0.0)));
    CHECK(mn.eval(0.0) > 0.0);  // -(1/2pi) log averaged near 0 is positive

    // exact passthrough outside the unit ball
    CHECK(mn.eval(1.5) == Kernel::newtonian(2).eval(1.5));
    CHECK_THROWS(MollifiedKernel(base, 0.0));
    CHECK_THROWS(MollifiedKernel(base, 0.3));

    // monotone on r >= eps (sampled)
    double last = mn.eval(0.1);
    for (double r = 0.11; r < 1.2; r += 0.01) {
        double cur = mn.eval(r);
        CHECK(cur <= last + 1e-9);
        last = cur;
    }
}

TEST_CASE("mollified kernel is C^1 across |x| = 1 within quadrature tolerance") {
    MollifiedKernel mn(Kernel::newtonian(2), 0.25);
    double d = 1e-4;
    double inner = (mn.eval(1.0 - d) - mn.eval(1.0 - 2 * d)) / d;
    double outer = (mn.eval(1.0 + 2 * d) - mn.eval(1.0 + d)) / d;
    CHECK(inner == doctest::Approx(outer).epsilon(0.01));
    CHECK(mn.eval(1.0 - 1e-9) == doctest::Approx(mn.base().eval(1.0)).epsilon(1e-6));
}

TEST_CASE("sample_on_grid: symmetry, point values, origin cell average") {
    GridSpec g{2, 1.0, 16};
    Kernel n2 = Kernel::newtonian(2);
    ScalarField t = sample_on_grid(n2, g);
    const int N = 32;
    REQUIRE(t.grid.cells_per_axis == N);

    // exact evenness under reflection (index i <-> (2n - i) mod 2n)
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            int ir = (N - i) % N, jr = (N - j) % N;
            CHECK(t(i, j) == t(ir, jr));
        }

    const double h = g.spacing();
    CHECK(t(1, 0) == n2.eval(h));  // direct evaluation at offset (h, 0)
    CHECK(t(3, 2) == n2.eval(h * std::hypot(3.0, 2.0)));

    // origin cell average against a refined independent quadrature
    double oracle = 0.0;
    {
        const int m = 400;  // midpoint refinement on the quarter cell
        double sum = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double x = (i + 0.5) * (h / 2) / m, y = (j + 0.5) * (h / 2) / m;
                sum += n2.eval(std::hypot(x, y));
            }
        oracle = sum / (m * m);
    }
    CHECK(t(0, 0) == doctest::Approx(oracle).epsilon(1e-3));
}

TEST_CASE("kernel spec grammar") {
    CHECK(parse_kernel_spec("newtonian", 2).family() == KernelFamily::Newtonian);
    CHECK(parse_kernel_spec("log:c=0.5", 2).log_strength() == doctest::Approx(0.5));
    CHECK(parse_kernel_spec("power:s=1.0", 3).singularity_power() == doctest::Approx(1.0));
    CHECK(parse_kernel_spec("log:c=0", 2).is_zero());
    CHECK_THROWS(parse_kernel_spec("bogus", 2));
}
