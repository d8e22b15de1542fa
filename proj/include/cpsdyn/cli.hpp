#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpsdyn/estimator.hpp"
#include "cpsdyn/propagator.hpp"

namespace cpsdyn {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitIo = 3 };

/// Invalid flag combination or value.
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical acceptance check failed (sweep tolerance, validation suite).
class NumericalFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    double h11 = 10.0;
    double h22 = 2.0;
    std::optional<double> lambda;  // real coupling; default 2 when no h12 is given
    std::optional<double> h12_re;
    std::optional<double> h12_im;
    std::string method = "sqz";  // sqz, case1, case2, sqc-twf, covariant, custom
    double gamma = 0.5;
    std::uint64_t n_traj = 1'000'000;
    std::uint64_t seed = 42;
    double t_max = 0.0;  // 0: three Rabi periods
    double dt = 0.0;     // 0: Rabi period / 200
    std::string out;     // empty or "-": standard output
    std::string xi_table;
    std::string f_table;
    unsigned threads = 0;

    // solve-f
    std::string xi = "case1";
    std::size_t points = 1024;

    // sweep
    std::string lambdas = "0.02,0.2,2,20";
    std::string methods = "sqz,case1";
    std::string out_dir = "sweep";
    double tolerance = 0.01;

    /// Throws UsageError.
    void validate() const;
    Hamiltonian2 hamiltonian() const;
    std::vector<double> time_grid() const;
    /// Self-describing config line written into CSV headers. Excludes the
    /// thread count, which never changes results.
    std::string describe(const std::string& command) const;
};

/// Parse "a,b,c" into numbers; throws UsageError on junk or an empty list.
std::vector<double> parse_number_list(const std::string& s);
std::vector<std::string> parse_name_list(const std::string& s);

/// Each command writes CSV text to cfg.out (or `out` when it is empty or
/// "-") and returns an exit code. Exceptions map to exit codes in run_cli.
int cmd_exact(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_solve_f(const RunConfig& cfg, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, std::ostream& out);
int cmd_validate(const RunConfig& cfg, std::ostream& out);

/// Simulation series for cfg.method from initial state 1.
PopulationSeries simulate_series(const RunConfig& cfg);

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cpsdyn
