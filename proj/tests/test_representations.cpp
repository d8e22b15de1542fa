#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cpsdyn/representations.hpp"

using namespace cpsdyn;

namespace {

constexpr double kPi = std::numbers::pi;

double max_f_error(const FGenerator& solved, double (*exact)(double), double y_max)
{
    double worst = 0.0;
    const int n = 4900;
    for (int i = 0; i <= n; ++i) {
        const double y = y_max * i / n;
        worst = std::max(worst, std::abs(solved(y) - exact(y)));
    }
    return worst;
}

XiProfile make_profile(std::string name, ScalarFn value)
{
    XiProfile p;
    p.name = std::move(name);
    p.value = std::move(value);
    return p;
}

}  // namespace

TEST_CASE("f generators: frozen high-precision values")
{
    // u = 1 - 2y; references from 40-digit evaluation of the closed forms.
    struct Ref {
        double u, f1, f2;
    };
    const Ref refs[] = {
        {1e-10, 4.4999999709872022811, 4.1588830719146253218},
        {1e-6, 4.4998203969378926984, 4.1588100795805264385},
        {5e-5, 4.4933685237832410442, 4.1561133737037332617},
        {0.3, 1.1030460807332413566, 0.99602770109063423803},
    };
    for (const auto& r : refs) {
        const double y = 0.5 * (1.0 - r.u);
        INFO("u = " << r.u);
        CHECK(std::abs(f_case1(y) - r.f1) <= 1e-12);
        CHECK(std::abs(f_case2(y) - r.f2) <= 1e-12);
    }
    CHECK(std::abs(f_case1(0.1) - 0.5196640700886784693) <= 1e-13);
    CHECK(std::abs(f_case2(0.1) - 0.48003318186961753106) <= 1e-13);
    CHECK(std::abs(f_case1(0.25) - 0.93411878688883675185) <= 1e-13);
    CHECK(std::abs(f_case2(0.25) - 0.6333051895716868233536) <= 1e-13);
}

TEST_CASE("f generators: endpoints and non-negativity")
{
    CHECK(f_sqz(0.0) == 0.0);
    CHECK(f_sqz(0.5) == 1.5);
    CHECK(std::abs(f_sqz(0.25) - (2.0 - 1.0 / (2 * 0.75 * 0.75))) <= 1e-15);
    CHECK(std::abs(f_case1(0.0)) <= 1e-8);
    CHECK(std::abs(f_case2(0.0)) <= 1e-8);
    CHECK(std::abs(f_case1(0.5) - 4.5) <= 1e-12);
    CHECK(std::abs(f_case2(0.5) - 6.0 * std::log(2.0)) <= 1e-12);

    for (int i = 0; i < 1024; ++i) {
        const double y = 0.5 * i / 1023.0;
        CHECK(f_sqz(y) >= -1e-10);
        CHECK(f_case1(y) >= -1e-10);
        CHECK(f_case2(y) >= -1e-10);
        CHECK(std::isfinite(f_case1(y)));
        CHECK(std::isfinite(f_case2(y)));
    }
    CHECK_THROWS_AS(f_sqz(0.51), std::domain_error);
    CHECK_THROWS_AS(f_case1(-0.01), std::domain_error);
}

TEST_CASE("f generators are continuous across the asymptotic switch")
{
    for (auto f : {f_case1, f_case2}) {
        const double y = 0.5 * (1.0 - 1e-4);
        const double below = f(std::nextafter(y, 0.0));
        const double above = f(std::nextafter(y, 1.0));
        CHECK(std::abs(below - above) <= 1e-11);
    }
}

TEST_CASE("Xi profiles: frozen values and derivatives")
{
    struct Ref {
        double xi, v, d1, d2;
    };
    const Ref refs[] = {
        {0.01, 0.99161095074741385289, -0.82906139270761439191, 1.9532558116224542429},
        {0.3, 0.81836989878756759206, -0.40664094370950878456, 1.0934787950297845122},
        {1.0, 0.74360763850228047396, 0.15928966954745005112, 0.78528020702456783686},
        {1.55, 0.98277301404193749607, 0.80823808358436996998, 1.9045179797638553491},
    };
    for (const auto& r : refs) {
        INFO("xi = " << r.xi);
        CHECK(std::abs(xi_sqz(r.xi) - r.v) <= 1e-13);
        CHECK(std::abs(xi_sqz_d1(r.xi) - r.d1) <= 1e-11);
        CHECK(std::abs(xi_sqz_d2(r.xi) - r.d2) <= 1e-9);
    }
    CHECK(xi_sqz(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(xi_sqz(kPi / 2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(xi_case1(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(xi_case2(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(xi_sqz(kPi / 4) - (2.0 - 4.0 / kPi)) <= 1e-15);
    CHECK(std::abs(xi_case1(kPi / 4) - (1.25 - 2.0 / kPi)) <= 1e-15);
}

TEST_CASE("Xi profiles: analytic derivatives agree with finite differences")
{
    for (const auto& prof : {xi_profile_sqz(), xi_profile_case1(), xi_profile_case2()}) {
        const XiProfile fd = make_profile(prof.name, prof.value);
        for (int i = 1; i < 40; ++i) {
            const double x = kPi / 2 * i / 40.0;
            INFO(prof.name << " at " << x);
            CHECK(std::abs(prof.deriv1(x) - fd.deriv1(x)) <= 1e-9);
            // The difference quotient divides rounding error by h^2 = 1e-8.
            CHECK(std::abs(prof.deriv2(x) - fd.deriv2(x)) <= 1e-5);
        }
        CHECK(std::abs(fd.deriv2(0.0) - 2.0) <= 1e-4);
        CHECK(std::abs(prof.deriv2(0.0) - 2.0) <= 1e-10);
    }
}

TEST_CASE("validate_xi")
{
    for (const auto& prof : {xi_profile_sqz(), xi_profile_case1(), xi_profile_case2()}) {
        const auto rep = validate_xi(prof);
        INFO(prof.name << ": " << rep.summary());
        CHECK(rep.ok());
    }

    SUBCASE("constant one fails only the curvature condition")
    {
        const auto rep = validate_xi(xi_profile_constant_one());
        CHECK_FALSE(rep.ok());
        REQUIRE(rep.find("xi''(0)=2") != nullptr);
        CHECK_FALSE(rep.find("xi''(0)=2")->passed);
        CHECK(rep.find("xi''(0)=2")->measured == doctest::Approx(2.0));
        CHECK(rep.find("symmetry")->passed);
        CHECK(rep.find("xi(0)=1")->passed);
        CHECK(rep.find("finite")->passed);
        CHECK(rep.summary().find("xi''(0)=2 FAILED") != std::string::npos);
    }

    SUBCASE("asymmetric profile fails symmetry")
    {
        const auto rep = validate_xi(make_profile("1+sin", [](double x) { return 1.0 + std::sin(x); }));
        CHECK_FALSE(rep.find("symmetry")->passed);
        CHECK(rep.find("symmetry")->measured == doctest::Approx(1.0));
    }

    SUBCASE("curvature-correct but asymmetric profile fails symmetry alone")
    {
        const auto rep = validate_xi(make_profile("1+xi^2", [](double x) { return 1.0 + x * x; }));
        CHECK_FALSE(rep.ok());
        CHECK_FALSE(rep.find("symmetry")->passed);
        CHECK(rep.find("xi''(0)=2")->passed);
        CHECK(rep.find("xi(0)=1")->passed);
    }

    SUBCASE("non-finite and non-positive profiles")
    {
        const auto nan_rep = validate_xi(make_profile("nan", [](double x) {
            return std::abs(x - kPi / 4) < 0.01 ? NAN : 1.0;
        }));
        CHECK_FALSE(nan_rep.find("finite")->passed);
        CHECK_FALSE(nan_rep.ok());

        // Symmetric, Xi(0) = 1, Xi''(0) = 2, but dips below zero at pi/4.
        const auto neg = validate_xi(make_profile("dip", [](double x) {
            const double s = std::sin(2 * x);
            return 1.0 + 0.25 * s * s - 3.0 * std::pow(s, 4);
        }));
        CHECK(neg.find("symmetry")->passed);
        CHECK(neg.find("xi(0)=1")->passed);
        CHECK(neg.find("xi''(0)=2")->passed);
        CHECK_FALSE(neg.find("positive")->passed);
    }
}

TEST_CASE("weight")
{
    const auto sqz = squeezed_rep();
    for (double a : {-0.5, 0.5}) {
        for (double b : {-0.5, 0.5}) CHECK(weight(sqz, a, b) == 1.5);
    }
    CHECK(std::abs(weight(sqz, 0.5, 0.25) - 10.0 / 9.0) <= 1e-15);
    CHECK(weight(sqz, -0.25, 0.5) == weight(sqz, 0.5, 0.25));
    for (const auto& rep : {squeezed_rep(), case1_rep(), case2_rep()}) {
        CHECK(std::abs(weight(rep, 0.0, 0.37)) <= 1e-8);
        CHECK(weight(rep, 0.1, -0.3) == rep.f(0.1));
    }
    CHECK_THROWS_AS(weight(sqz, 0.6, 0.1), std::domain_error);
    CHECK_THROWS_AS(weight(sqz, 0.1, NAN), std::domain_error);
}

TEST_CASE("abel_B and its derivative")
{
    for (const auto& prof : {xi_profile_sqz(), xi_profile_case1(), xi_profile_case2()}) {
        CHECK(abel_B(prof, 0.0) == 0.0);
    }
    const auto one = xi_profile_constant_one();
    for (double z : {0.1, 0.5, 0.9, 0.999}) {
        CHECK(std::abs(abel_B(one, z) - 2 * z * z * std::sqrt(1 - z * z)) <= 1e-14);
    }
    // Xi'(pi/4) = 0 for case 1, so B = 2 z^2 sqrt(1 - z^2) Xi(pi/4).
    const double z = std::sqrt(0.5);
    CHECK(std::abs(abel_B(xi_profile_case1(), z) - (1.25 - 2.0 / kPi) / std::sqrt(2.0)) <= 1e-10);

    for (const auto& prof : {xi_profile_sqz(), xi_profile_case1(), xi_profile_case2()}) {
        for (double zz : {0.05, 0.3, 0.7, 0.95, 0.9999}) {
            INFO(prof.name << " z=" << zz);
            const double h = 1e-5 * (1 - zz);
            const double fd = (abel_B(prof, zz + h) - abel_B(prof, zz - h)) / (2 * h);
            CHECK(std::abs(abel_B_prime(prof, zz) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
            CHECK(std::abs(zz * abel_chi(prof, zz) - abel_B_prime(prof, zz)) <=
                  1e-10 * std::max(1.0, std::abs(fd)));
        }
    }
    CHECK_THROWS_AS(abel_B(one, 1.0), std::domain_error);
    CHECK_THROWS_AS(abel_B_prime(one, -0.1), std::domain_error);
}

TEST_CASE("Abel solver reproduces the analytic pairs")
{
    const struct {
        XiProfile xi;
        double (*f)(double);
    } pairs[] = {{xi_profile_sqz(), f_sqz}, {xi_profile_case1(), f_case1}, {xi_profile_case2(), f_case2}};
    for (const auto& p : pairs) {
        const auto solved = abel_solve_f(p.xi);
        INFO(p.xi.name);
        CHECK(solved.provenance == FProvenance::AbelSolved);
        REQUIRE(solved.table != nullptr);
        CHECK(solved.table->y().size() == 1024);
        CHECK(max_f_error(solved, p.f, 0.49) <= 1e-6);
        CHECK(std::abs(solved(0.0)) <= 1e-8);
        CHECK(std::abs(solved(0.5) - p.f(0.5)) <= 1e-6);
    }
}

TEST_CASE("Abel solver rejects inadmissible profiles")
{
    try {
        abel_solve_f(xi_profile_constant_one());
        FAIL("expected RepresentationError");
    } catch (const RepresentationError& e) {
        CHECK_FALSE(e.report().ok());
        CHECK(std::string(e.what()).find("xi''(0)=2") != std::string::npos);
    }
    CHECK_THROWS_AS(abel_solve_f(make_profile("1+sin", [](double x) { return 1 + std::sin(x); })),
                    RepresentationError);
}

TEST_CASE("Xi = 1 diverges at y = 1/2 under refinement")
{
    const auto one = xi_profile_constant_one();
    double previous = 0.0;
    for (int levels : {8, 16, 24, 32}) {
        const double v = abel_f_value(one, 0.5, 64, levels);
        CHECK(std::abs(v) > std::abs(previous) + 5.0);
        previous = v;
    }
    CHECK(std::abs(previous) > 50.0);

    AbelOptions opts;
    opts.bypass_validation = true;
    opts.check_convergence = false;
    opts.levels = 8;
    const double coarse = abel_solve_f(one, default_y_grid(64), opts)(0.5);
    opts.levels = 32;
    const double fine = abel_solve_f(one, default_y_grid(64), opts)(0.5);
    CHECK(std::abs(fine) > std::abs(coarse) + 20.0);

    // Admissible profiles converge instead.
    const auto sqz = xi_profile_sqz();
    CHECK(std::abs(abel_f_value(sqz, 0.5, 64, 24) - abel_f_value(sqz, 0.5, 64, 32)) <= 1e-9);
}

TEST_CASE("integral-equation residual")
{
    const auto sqz = squeezed_rep();
    CHECK(residual_integral_equation(sqz, kPi / 4) <= 1e-8);
    CHECK(std::abs(kPi * xi_sqz(kPi / 4) * 0.5 / 2 - (kPi - 2) / 2) <= 1e-15);
    for (const auto& rep : {squeezed_rep(), case1_rep(), case2_rep()}) {
        INFO(rep.name);
        CHECK(max_residual(rep) <= 1e-6);
        CHECK(residual_integral_equation(rep, 1e-6) <= 1e-10);
        for (double x : residual_xi_grid()) {
            CHECK(residual_integral_equation(rep, x) <= 1e-6);
            CHECK(residual_integral_equation(rep, kPi / 2 - x) <= 1e-6);
        }
    }
    const auto grid = residual_xi_grid();
    CHECK(grid.size() == 32);
    CHECK(grid.front() == doctest::Approx(0.5 * kPi / 64));

    // A mismatched pair does not satisfy the equation.
    IsomorphismRep wrong{"wrong", case1_rep().f, xi_profile_sqz()};
    CHECK(max_residual(wrong) > 1e-3);
}

TEST_CASE("tabulated f and Xi profiles")
{
    SUBCASE("f table")
    {
        const auto grid = default_y_grid();
        CHECK(grid.size() == 1024);
        CHECK(grid.front() == 0.0);
        CHECK(grid.back() == 0.5);
        std::vector<double> vals;
        for (double y : grid) vals.push_back(f_case2(y));
        const auto gen = f_generator_from_table(grid, vals);
        CHECK(gen.provenance == FProvenance::Tabulated);
        CHECK(max_f_error(gen, f_case2, 0.49) <= 1e-6);
        for (std::size_t i = 0; i < grid.size(); ++i) CHECK(gen(grid[i]) == vals[i]);
        CHECK_THROWS(f_generator_from_table({0.0, 0.1, 0.2}, {0.0, 0.1, 0.2}));
        CHECK_THROWS(f_generator_from_table({0.0, 0.1, 0.2, 0.4}, {0.0, 0.1, 0.2, 0.3}));
        CHECK_THROWS_AS(gen(0.7), std::domain_error);
    }

    SUBCASE("Xi table")
    {
        std::vector<double> xs;
        std::vector<double> vs;
        const int n = 1025;
        for (int i = 0; i < n; ++i) {
            xs.push_back(kPi / 2 * i / (n - 1));
            vs.push_back(xi_case1(xs.back()));
        }
        const auto prof = xi_profile_from_table(xs, vs, "case1-table");
        CHECK(prof.name == "case1-table");
        const auto report = validate_xi(prof);
        INFO(report.summary());
        CHECK(report.ok());
        for (int i = 0; i < 50; ++i) {
            const double x = kPi / 2 * (i + 0.3) / 50;
            CHECK(std::abs(prof(x) - xi_case1(x)) <= 1e-9);
        }
        xs[3] += 1e-3;
        CHECK_THROWS(xi_profile_from_table(xs, vs));
        CHECK_THROWS(xi_profile_from_table({0.0, 1.0}, {1.0, 1.0}));
    }
}

TEST_CASE("builtin lookup")
{
    CHECK(builtin_rep("sqz").name == squeezed_rep().name);
    CHECK(builtin_rep("case1").f.provenance == FProvenance::AnalyticCase1);
    CHECK(builtin_rep("case2").f.provenance == FProvenance::AnalyticCase2);
    CHECK(builtin_xi_profile("constant-one")(0.7) == 1.0);
    CHECK_THROWS(builtin_rep("nope"));
    CHECK_THROWS(builtin_xi_profile(""));
}
