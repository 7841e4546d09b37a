#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aggrosim/diffusion.hpp"

using namespace aggrosim;

namespace {
DiffusionModel custom_from(const std::function<double(double)>& A,
                           const std::function<double(double)>& Ap) {
    std::vector<double> z, Av, Apv;
    for (int i = 0; i <= 600; ++i) {
        double zv = 1e-9 * std::pow(1e10 / 1e-9, i / 600.0);
        z.push_back(zv);
        Av.push_back(A(zv));
        Apv.push_back(Ap(zv));
    }
    return DiffusionModel::custom(std::move(z), std::move(Av), std::move(Apv));
}
}  // namespace

TEST_CASE("parabolic regularization sits mid-band") {
    DiffusionModel lin = DiffusionModel::linear();
    DiffusionModel reg = lin.regularized(0.1);
    CHECK(reg.A(1.0) == doctest::Approx(1.15));
    CHECK(reg.A(3.0) == doctest::Approx(1.15 * 3.0));
    CHECK_THROWS(lin.regularized(0.0));
    CHECK_THROWS(lin.regularized(-1.0));

    DiffusionModel pme = DiffusionModel::porous_medium(2.0);
    for (double eps : {0.01, 0.37}) {
        DiffusionModel r = pme.regularized(eps);
        for (double z : {0.0, 0.3, 1.0, 42.0, 1e6}) {
            double gap = r.A_prime(z) - pme.A_prime(z);
            CHECK(gap >= eps - 1e-15);
            CHECK(gap <= 2 * eps + 1e-15);
        }
    }
}

TEST_CASE("entropy density closed forms") {
    EntropyDensity lin = entropy_density(DiffusionModel::linear());
    CHECK(lin.phi(1.0) == doctest::Approx(-1.0));
    CHECK(lin.phi(0.0) == 0.0);

    EntropyDensity pme2 = entropy_density(DiffusionModel::porous_medium(2.0));
    CHECK(pme2.phi(2.0) == doctest::Approx(0.0));
    CHECK(pme2.phi(0.0) == 0.0);

    // Phi'(1) = 0 via finite differences
    for (const EntropyDensity* e : {&lin, &pme2}) {
        double d = 1e-6;
        double p1 = (e->phi(1.0 + d) - e->phi(1.0 - d)) / (2 * d);
        CHECK(p1 == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("entropy density convexity: finite-difference Phi'' matches A'(z)/z") {
    DiffusionModel lin = DiffusionModel::linear();
    DiffusionModel pme = DiffusionModel::porous_medium(3.0);
    for (const auto& model : {lin, pme}) {
        EntropyDensity e(model);
        for (double z = 0.01; z <= 100.0; z *= 3.7) {
            double d = 1e-4 * z;
            double num = (e.phi(z + d) - 2 * e.phi(z) + e.phi(z - d)) / (d * d);
            CHECK(num == doctest::Approx(model.A_prime(z) / z).epsilon(1e-6));
        }
    }
}

TEST_CASE("custom (quadrature-backed) entropy matches the linear closed form") {
    DiffusionModel lin_tab = custom_from([](double z) { return z; }, [](double) { return 1.0; });
    EntropyDensity e(lin_tab);
    for (double z : {0.01, 0.5, 1.0, 7.0, 1e3}) {
        double expect = z * std::log(z) - z;
        CHECK(e.phi(z) == doctest::Approx(expect).epsilon(1e-3));
        double d = 1e-4 * z;
        double num = (e.phi(z + d) - 2 * e.phi(z) + e.phi(z - d)) / (d * d);
        CHECK(num == doctest::Approx(1.0 / z).epsilon(1e-2));
    }
    double dphi = (e.phi(1.0 + 1e-6) - e.phi(1.0 - 1e-6)) / 2e-6;
    CHECK(dphi == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("criticality classifier on the canonical triples") {
    auto lin = DiffusionModel::linear();
    auto pme2 = DiffusionModel::porous_medium(2.0);
    Kernel log2 = Kernel::logarithmic(1.0, 2);
    Kernel newt3 = Kernel::newtonian(3);

    auto c1 = classify(lin, log2, 2);
    CHECK(c1.label == Criticality::Critical);
    CHECK(c1.liminf_estimate == doctest::Approx(1.0));

    auto c2 = classify(pme2, log2, 2);
    CHECK(c2.label == Criticality::Subcritical);

    auto c3 = classify(lin, newt3, 3);
    CHECK(c3.label == Criticality::Supercritical);
}

TEST_CASE("classifier scale behaviour: labels invariant, liminf scales") {
    Kernel log2 = Kernel::logarithmic(1.0, 2);
    auto lin5 = custom_from([](double z) { return 5.0 * z; }, [](double) { return 5.0; });
    auto c = classify(lin5, log2, 2);
    CHECK(c.label == Criticality::Critical);
    CHECK(c.liminf_estimate == doctest::Approx(5.0).epsilon(1e-6));

    auto pme_scaled = custom_from([](double z) { return 3.0 * z * z; },
                                  [](double z) { return 6.0 * z; });
    CHECK(classify(pme_scaled, log2, 2).label == Criticality::Subcritical);
}

TEST_CASE("critical mass formulas") {
    auto lin = DiffusionModel::linear();
    Kernel pks = Kernel::logarithmic(1.0 / (2.0 * M_PI), 2);  // -(1/2pi) log |x|
    auto mc = critical_mass(lin, pks, 2);
    REQUIRE(mc.mass.has_value());
    CHECK(*mc.mass == doctest::Approx(8.0 * M_PI).epsilon(1e-13));

    Kernel log1 = Kernel::logarithmic(1.0, 2);
    auto mc4 = critical_mass(lin, log1, 2);
    REQUIRE(mc4.mass.has_value());
    CHECK(*mc4.mass == doctest::Approx(4.0).epsilon(1e-13));

    // the 2d newtonian kernel IS -(1/2pi) log, so it must give 8 pi as well
    auto mcn = critical_mass(lin, Kernel::newtonian(2), 2);
    REQUIRE(mcn.mass.has_value());
    CHECK(*mcn.mass == doctest::Approx(8.0 * M_PI).epsilon(1e-13));

    // porous medium: limit diverges -> none with reason
    auto none = critical_mass(DiffusionModel::porous_medium(2.0), log1, 2);
    CHECK(!none.mass.has_value());
    CHECK(!none.reason.empty());

    // m* != 1 -> none, directed to the degenerate-diffusion regime
    auto none2 = critical_mass(lin, Kernel::newtonian(3), 3);
    CHECK(!none2.mass.has_value());
}

TEST_CASE("diffusion admissibility audit") {
    auto a = DiffusionModel::linear().audit();
    CHECK(a.positive_ok);
    CHECK(a.growth_c > 0);
    CHECK(a.bounded_CA == doctest::Approx(1.0));
    auto b = DiffusionModel::porous_medium(2.0).audit();
    CHECK(b.positive_ok);
    CHECK(b.bounded_CA <= 2.0 + 1e-12);
}

TEST_CASE("diffusion spec grammar") {
    CHECK(parse_diffusion_spec("linear").family() == DiffusionFamily::Linear);
    CHECK(parse_diffusion_spec("pme:m=2.5").exponent() == doctest::Approx(2.5));
    CHECK_THROWS(parse_diffusion_spec("pme:m=0.5"));
    CHECK_THROWS(parse_diffusion_spec("nope"));
}
