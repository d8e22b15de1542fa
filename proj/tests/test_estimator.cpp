#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cpsdyn/estimator.hpp"
#include "cpsdyn/propagator.hpp"
#include "cpsdyn/representations.hpp"

using namespace cpsdyn;

namespace {

constexpr double kPi = std::numbers::pi;

EnsembleConfig small_config(std::vector<double> times, std::uint64_t n = 20000)
{
    EnsembleConfig cfg;
    cfg.n_traj = n;
    cfg.seed = 1234;
    cfg.times = std::move(times);
    cfg.threads = 1;
    return cfg;
}

void check_bit_identical(const PopulationSeries& a, const PopulationSeries& b)
{
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) {
        const auto& x = a.points[k].est;
        const auto& y = b.points[k].est;
        for (int n = 0; n < 2; ++n) {
            CHECK(x.cbar[n] == y.cbar[n]);
            for (int m = 0; m < 2; ++m) {
                CHECK(x.p[n][m] == y.p[n][m]);
                CHECK(x.pop[n][m] == y.pop[n][m]);
                CHECK(x.stderr[n][m] == y.stderr[n][m]);
            }
        }
    }
}

}  // namespace

TEST_CASE("ensemble configuration validation")
{
    auto cfg = small_config({0.0, 0.1});
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.n_traj = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.times = {0.2, 0.1};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.times = {};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.times = {0.0, NAN};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.initial_states = {3};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.gamma = -0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("time grids")
{
    const auto g = uniform_time_grid(1.0, 0.1);
    CHECK(g.size() == 11);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(1.0));
    CHECK_THROWS(uniform_time_grid(0.0, 0.1));
    CHECK_THROWS(uniform_time_grid(1.0, -0.1));

    const auto h = Hamiltonian2::model(10, 2, 2);
    const auto d = default_time_grid(h);
    const double period = 2 * kPi / std::sqrt(discriminant(h));
    CHECK(d.size() == 601);
    CHECK(d.back() == doctest::Approx(3 * period).epsilon(1e-12));
}

TEST_CASE("exact transition matrix is the transposed population matrix")
{
    const Hamiltonian2 h{10, 2, 3, -1.5};
    const auto p = exact_population_matrix(h, 0.37);
    const auto t = exact_transition_matrix(h, 0.37);
    CHECK(t[0][1] == p[1][0]);
    CHECK(t[1][0] == p[0][1]);
}

TEST_CASE("all methods give the identity at t = 0")
{
    const auto h = Hamiltonian2::model(10, 2, 2);
    const auto cfg = small_config({0.0});
    for (const auto& s : {run_novel(h, squeezed_rep(), cfg), run_novel(h, case1_rep(), cfg),
                          run_novel(h, case2_rep(), cfg), run_sqc_twf(h, cfg)}) {
        INFO(s.method);
        const auto& e = s.points[0].est;
        CHECK(e.pop[0][0] == 1.0);
        CHECK(e.pop[0][1] == 0.0);
        CHECK(e.pop[1][1] == 1.0);
        CHECK(e.pop[1][0] == 0.0);
    }
    const auto sqc = run_sqc_twf(h, cfg).points[0].est;
    CHECK(sqc.cbar[0] == 1.0);
    CHECK(sqc.cbar[1] == 1.0);

    // The covariant estimator is exact only on average.
    auto cov_cfg = small_config({0.0}, 200000);
    cov_cfg.gamma = 0.5;
    const auto cov = run_covariant(h, cov_cfg).points[0].est;
    for (int n = 0; n < 2; ++n) {
        for (int m = 0; m < 2; ++m) {
            const double exact = n == m ? 1.0 : 0.0;
            CHECK(std::abs(cov.pop[n][m] - exact) <= 3 * cov.stderr[n][m]);
        }
    }
}

TEST_CASE("novel normalization is one at t = 0 within statistics")
{
    const auto h = Hamiltonian2::model(10, 2, 2);
    const auto cfg = small_config({0.0}, 200000);
    for (const auto& rep : {squeezed_rep(), case1_rep(), case2_rep()}) {
        const auto e = run_novel(h, rep, cfg).points[0].est;
        INFO(rep.name);
        for (int n = 0; n < 2; ++n) CHECK(std::abs(e.cbar[n] - 1.0) <= 3 * e.cbar_stderr[n]);
    }
}

TEST_CASE("diagonal Hamiltonian keeps populations exactly")
{
    const auto h = Hamiltonian2::model(10, 2, 0);
    const auto cfg = small_config(uniform_time_grid(2.0, 0.25));
    for (const auto& s : {run_novel(h, case1_rep(), cfg), run_novel(h, squeezed_rep(), cfg),
                          run_sqc_twf(h, cfg)}) {
        INFO(s.method);
        for (const auto& pt : s.points) {
            CHECK(pt.xi == 0.0);
            CHECK(pt.est.pop[0][0] == 1.0);
            CHECK(pt.est.pop[1][1] == 1.0);
            CHECK(pt.est.p[0][1] == 0.0);
            CHECK(pt.est.p[1][0] == 0.0);
        }
    }
}

TEST_CASE("resonant half-period swap is exact")
{
    const double lambda = 2.0;
    const auto h = Hamiltonian2::model(5, 5, lambda);
    const auto cfg = small_config({kPi / (2 * lambda)});
    for (const auto& s : {run_novel(h, case1_rep(), cfg), run_novel(h, case2_rep(), cfg),
                          run_novel(h, squeezed_rep(), cfg), run_sqc_twf(h, cfg)}) {
        INFO(s.method);
        const auto& pt = s.points[0];
        CHECK(std::abs(pt.xi - kPi / 2) <= 1e-12);
        CHECK(pt.est.p[0][0] == 0.0);
        CHECK(pt.est.p[1][1] == 0.0);
        CHECK(pt.est.pop[0][1] == 1.0);
        CHECK(pt.est.pop[1][0] == 1.0);
    }
}

TEST_CASE("rows normalize and contributions are non-negative")
{
    const auto h = Hamiltonian2::model(10, 2, 2);
    const auto cfg = small_config(uniform_time_grid(1.5, 0.05));
    for (const auto& s : {run_novel(h, case1_rep(), cfg), run_novel(h, case2_rep(), cfg),
                          run_novel(h, squeezed_rep(), cfg), run_sqc_twf(h, cfg)}) {
        INFO(s.method);
        CHECK(s.min_contribution >= 0.0);
        for (const auto& pt : s.points) {
            for (int n = 0; n < 2; ++n) {
                CHECK(std::abs(pt.est.pop[n][0] + pt.est.pop[n][1] - 1.0) <= 1e-12);
                for (int m = 0; m < 2; ++m) {
                    CHECK(pt.est.p[n][m] >= 0.0);
                    CHECK(pt.est.pop[n][m] >= 0.0);
                    CHECK(pt.est.pop[n][m] <= 1.0);
                    CHECK(pt.est.stderr[n][m] >= 0.0);
                }
                CHECK(pt.est.cbar[n] > 0.0);
            }
        }
    }
}

TEST_CASE("results do not depend on the worker count")
{
    const auto h = Hamiltonian2::model(10, 2, 2);
    auto one = small_config(uniform_time_grid(1.0, 0.1), 30000);
    auto many = one;
    many.threads = 3;
    check_bit_identical(run_novel(h, case2_rep(), one), run_novel(h, case2_rep(), many));
    check_bit_identical(run_sqc_twf(h, one), run_sqc_twf(h, many));
    check_bit_identical(run_covariant(h, one), run_covariant(h, many));
}

TEST_CASE("novel and SQC estimates do not depend on gamma")
{
    const auto h = Hamiltonian2::model(10, 2, 0.2);
    auto a = small_config(uniform_time_grid(2.0, 0.1));
    auto b = a;
    a.gamma = 0.0;
    b.gamma = 0.5;
    check_bit_identical(run_novel(h, case1_rep(), a), run_novel(h, case1_rep(), b));
    check_bit_identical(run_sqc_twf(h, a), run_sqc_twf(h, b));
}

TEST_CASE("single initial state leaves the other row NaN")
{
    auto cfg = small_config({0.0, 0.3});
    cfg.initial_states = {2};
    const auto s = run_novel(Hamiltonian2::model(10, 2, 2), squeezed_rep(), cfg);
    CHECK(std::isnan(s.points[1].est.pop[0][0]));
    CHECK(std::isnan(s.points[1].est.cbar[0]));
    CHECK_FALSE(std::isnan(s.points[1].est.pop[1][1]));
}

TEST_CASE("degenerate representation aborts")
{
    const auto grid = default_y_grid(16);
    IsomorphismRep zero{"zero", f_generator_from_table(grid, std::vector<double>(grid.size(), 0.0)),
                        xi_profile_sqz()};
    CHECK_THROWS_AS(run_novel(Hamiltonian2::model(10, 2, 2), zero, small_config({0.0})), EstimatorError);
}

TEST_CASE("squeezed closed forms")
{
    const auto zero = sqz_closed_forms(0.0);
    CHECK(zero.p11 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(zero.p12) <= 1e-15);
    CHECK(zero.cbar == doctest::Approx(1.0).epsilon(1e-14));

    const auto mid = sqz_closed_forms(kPi / 4);
    CHECK(std::abs(mid.p11 - (1 - 2 / kPi)) <= 1e-14);
    CHECK(std::abs(mid.p12 - (1 - 2 / kPi)) <= 1e-14);
    CHECK(std::abs(mid.cbar - 0.72676045526483731) <= 1e-14);
    CHECK(std::abs(mid.p11 / mid.cbar - 0.5) <= 1e-14);

    const auto end = sqz_closed_forms(kPi / 2);
    CHECK(std::abs(end.p11) <= 1e-14);
    CHECK(end.p12 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(end.cbar == doctest::Approx(1.0).epsilon(1e-14));

    for (int i = 0; i <= 400; ++i) {
        const double xi = kPi / 2 * i / 400.0;
        const auto c = sqz_closed_forms(xi);
        INFO("xi = " << xi);
        CHECK(std::abs(c.cbar - xi_sqz(xi)) <= 1e-12);
        CHECK(std::abs(c.p11 + c.p12 - c.cbar) <= 1e-12);
        CHECK(std::abs(c.p11 - c.cbar * std::pow(std::cos(xi), 2)) <= 1e-12);
        CHECK(std::abs(c.p12 - c.cbar * std::pow(std::sin(xi), 2)) <= 1e-12);
    }
    CHECK_THROWS(sqz_closed_forms(-0.1));
    CHECK_THROWS(sqz_closed_forms(2.0));
}

TEST_CASE("quadrature oracle")
{
    const auto sqz = squeezed_rep();
    const auto q = quadrature_oracle_p(sqz, kPi / 4);
    const auto c = sqz_closed_forms(kPi / 4);
    CHECK(std::abs(q[0] - c.p11) <= 1e-8);
    CHECK(std::abs(q[1] - c.p12) <= 1e-8);

    for (const auto& rep : {squeezed_rep(), case1_rep(), case2_rep()}) {
        for (double xi : residual_xi_grid()) {
            INFO(rep.name << " xi = " << xi);
            const auto a = quadrature_oracle_p(rep, xi);
            const auto b = quadrature_oracle_p(rep, kPi / 2 - xi);
            CHECK(std::abs(a[0] - b[1]) <= 1e-12);
            CHECK(std::abs(a[0] / std::pow(std::cos(xi), 2) - rep.xi(xi)) <= 1e-6);
            CHECK(std::abs(a[1] / std::pow(std::sin(xi), 2) - rep.xi(xi)) <= 1e-6);
        }
    }
    CHECK_THROWS(quadrature_oracle_p(sqz, 0.0));
    CHECK_THROWS(quadrature_oracle_p(sqz, kPi / 2));
}

TEST_CASE("Monte Carlo raw estimates match the quadrature oracle and Xi")
{
    const auto h = Hamiltonian2::model(10, 2, 2);
    const double period = 2 * kPi / std::sqrt(discriminant(h));
    const std::vector<double> times{0.07 * period, 0.19 * period, 0.33 * period};
    auto cfg = small_config(times, 400000);
    cfg.initial_states = {1};
    for (const auto& rep : {case1_rep(), case2_rep(), squeezed_rep()}) {
        const auto s = run_novel(h, rep, cfg);
        for (const auto& pt : s.points) {
            INFO(rep.name << " t = " << pt.t);
            const auto q = quadrature_oracle_p(rep, pt.xi);
            CHECK(std::abs(pt.est.p[0][0] - q[0]) <= 3 * pt.est.p_stderr[0][0] + 1e-6);
            CHECK(std::abs(pt.est.p[0][1] - q[1]) <= 3 * pt.est.p_stderr[0][1] + 1e-6);
            CHECK(std::abs(pt.est.cbar[0] - rep.xi(pt.xi)) <= 3 * pt.est.cbar_stderr[0]);
        }
    }
}

TEST_CASE("symmetry checks")
{
    SUBCASE("diagonal h: off-diagonal entries vanish exactly")
    {
        const auto s = run_novel(Hamiltonian2::model(10, 2, 0), case1_rep(), small_config({0.0, 0.5, 1.0}));
        const auto rep = symmetry_checks(s);
        CHECK(rep.ok());
        for (const auto& pt : s.points) {
            CHECK(pt.est.p[0][1] == 0.0);
            CHECK(pt.est.p[1][0] == 0.0);
        }
    }

    SUBCASE("squeezed rep on the coupled model")
    {
        const auto h = Hamiltonian2::model(10, 2, 2);
        const auto s = run_novel(h, squeezed_rep(), small_config(uniform_time_grid(1.0, 0.1), 100000));
        const auto rep = symmetry_checks(s);
        for (const auto& c : rep.checks) {
            INFO(c.name << " worst ratio " << c.worst_ratio);
            CHECK(c.passed);
        }
        CHECK(rep.checks.size() == 3);
    }

    SUBCASE("requires both initial states")
    {
        auto cfg = small_config({0.0});
        cfg.initial_states = {1};
        const auto s = run_novel(Hamiltonian2::model(10, 2, 2), squeezed_rep(), cfg);
        CHECK_THROWS_AS(symmetry_checks(s), std::invalid_argument);
    }
}

TEST_CASE("estimators track the exact populations at a quarter period")
{
    const auto h = Hamiltonian2::model(10, 2, 2);
    const double t = kPi / (2 * std::sqrt(20.0));
    auto cfg = small_config({t}, 200000);
    cfg.initial_states = {1};
    for (const auto& s : {run_novel(h, squeezed_rep(), cfg), run_sqc_twf(h, cfg), run_covariant(h, cfg)}) {
        INFO(s.method);
        const auto& e = s.points[0].est;
        CHECK(std::abs(e.pop[0][0] - 0.8) <= 3 * e.stderr[0][0]);
    }
}
