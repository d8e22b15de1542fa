#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpsdyn/propagator.hpp"
#include "cpsdyn/representations.hpp"

namespace cpsdyn {

struct EnsembleConfig {
    std::uint64_t n_traj = 1'000'000;  // per initial state
    std::uint64_t seed = 42;
    double gamma = 0.5;
    std::vector<double> times;
    unsigned threads = 0;                   // 0: hardware concurrency
    std::vector<int> initial_states{1, 2};  // subset of {1, 2}

    /// Throws std::invalid_argument on an empty/non-monotone grid, n_traj = 0
    /// or a bad state list.
    void validate() const;
};

/// Matrices are indexed [n][m] = quantity for the transition n -> m (0-based).
/// Rows for initial states that were not run are NaN.
struct CorrelationEstimate {
    Matrix2 p{};         // raw p_{n->m}
    Matrix2 pop{};       // p_{n->m} / cbar_n (covariant: raw p)
    Matrix2 stderr{};    // standard error of pop
    Matrix2 p_stderr{};  // standard error of raw p
    std::array<double, 2> cbar{};
    std::array<double, 2> cbar_stderr{};
};

struct PopulationPoint {
    double t = 0.0;
    double xi = 0.0;
    CorrelationEstimate est;
};

struct PopulationSeries {
    std::string method;
    std::vector<int> initial_states;
    std::uint64_t n_traj = 0;
    /// Smallest single-trajectory contribution to any p_{n->m}.
    double min_contribution = 0.0;
    std::vector<PopulationPoint> points;
};

/// Raised when an estimated normalization factor falls below 1e-6.
class EstimatorError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// [n][m] = |U_mn(t)|^2, i.e. exact_population_matrix transposed.
Matrix2 exact_transition_matrix(const Hamiltonian2& h, double t);

/// 0, dt, 2 dt, ... up to t_max (inclusive within rounding).
std::vector<double> uniform_time_grid(double t_max, double dt);
/// Default grid: dt = (2 pi/sqrt(Delta))/200 over three Rabi periods.
/// Scalar Hamiltonians fall back to t_max = 3, dt = 0.015.
std::vector<double> default_time_grid(const Hamiltonian2& h);

PopulationSeries run_novel(const Hamiltonian2& h, const IsomorphismRep& rep, const EnsembleConfig& cfg);
PopulationSeries run_sqc_twf(const Hamiltonian2& h, const EnsembleConfig& cfg);
/// Uses cfg.gamma; both initial states share one uniform CPS ensemble.
PopulationSeries run_covariant(const Hamiltonian2& h, const EnsembleConfig& cfg);

struct SqzClosedForm {
    double p11 = 0.0;
    double p12 = 0.0;
    double cbar = 0.0;
};
SqzClosedForm sqz_closed_forms(double xi);

/// p11 = (2/pi) int_0^{pi/2} ds int_0^{pi/2 - xi} dtau sin s f(sin s sin tau / 2),
/// p12 the same with upper limit xi. Throws for sin(2 xi) = 0.
std::array<double, 2> quadrature_oracle_p(const IsomorphismRep& rep, double xi, std::size_t order = 64);

struct SymmetryCheck {
    std::string name;
    bool passed = true;
    std::size_t violations = 0;  // grid times outside 3 combined stderr
    double worst_ratio = 0.0;    // max |diff| / (3 stderr); 0 when diff = stderr = 0
    double worst_time = 0.0;
};

struct SymmetryReport {
    std::vector<SymmetryCheck> checks;
    bool ok() const;
};

/// p11 = p22, p12 = p21 and cbar_1 = cbar_2 within 3 combined stderr at
/// every time. Requires both initial states.
SymmetryReport symmetry_checks(const PopulationSeries& series);

}  // namespace cpsdyn
