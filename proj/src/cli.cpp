#include "cpsdyn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "cpsdyn/io.hpp"
#include "cpsdyn/representations.hpp"
#include "cpsdyn/validation.hpp"

namespace cpsdyn {

namespace {

const std::vector<std::string> kMethods = {"sqz", "case1", "case2", "sqc-twf", "covariant", "custom"};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split_commas(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(trim(item));
    return out;
}

// Emit to cfg.out, or to `fallback` for "" / "-".
void emit(const RunConfig& cfg, std::ostream& fallback, const std::string& text)
{
    if (cfg.out.empty() || cfg.out == "-") {
        fallback << text;
        fallback.flush();
        return;
    }
    write_text_file(cfg.out, text);
}

IsomorphismRep custom_rep(const RunConfig& cfg)
{
    if (!cfg.f_table.empty()) {
        const TwoColumnTable t = read_two_column_csv(cfg.f_table);
        return {"custom", f_generator_from_table(t.a, t.b), {}};
    }
    const TwoColumnTable t = read_two_column_csv(cfg.xi_table);
    XiProfile xi = xi_profile_from_table(t.a, t.b, "custom");
    FGenerator f = abel_solve_f(xi);
    return {"custom", std::move(f), std::move(xi)};
}

double max_abs_dev(const Hamiltonian2& h, const PopulationSeries& s)
{
    double worst = 0.0;
    for (const auto& pt : s.points) {
        const Matrix2 ex = exact_transition_matrix(h, pt.t);
        const double d = std::abs((pt.est.pop[0][0] - pt.est.pop[0][1]) - (ex[0][0] - ex[0][1]));
        worst = std::max(worst, std::isfinite(d) ? d : INFINITY);
    }
    return worst;
}

std::string simulate_csv(const RunConfig& cfg, const PopulationSeries& s)
{
    const Hamiltonian2 h = cfg.hamiltonian();
    std::ostringstream os;
    CsvWriter w(os);
    w.comment(cfg.describe("simulate"));
    w.header({"t", "P1", "P2", "P1mP2", "P1_exact", "P2_exact", "stderr_P1", "cbar", "xi"});
    for (const auto& pt : s.points) {
        const Matrix2 ex = exact_transition_matrix(h, pt.t);
        const auto& e = pt.est;
        w.row({pt.t, e.pop[0][0], e.pop[0][1], e.pop[0][0] - e.pop[0][1], ex[0][0], ex[0][1], e.stderr[0][0],
               e.cbar[0], pt.xi});
    }
    return os.str();
}

}  // namespace

std::vector<double> parse_number_list(const std::string& s)
{
    std::vector<double> out;
    for (const auto& item : split_commas(s)) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || !std::isfinite(v))
            throw UsageError("not a number in list: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw UsageError("empty list");
    return out;
}

std::vector<std::string> parse_name_list(const std::string& s)
{
    auto out = split_commas(s);
    if (out.empty())
        throw UsageError("empty list");
    return out;
}

void RunConfig::validate() const
{
    if (!std::isfinite(h11) || !std::isfinite(h22))
        throw UsageError("h11 and h22 must be finite");
    if (lambda && (h12_re || h12_im))
        throw UsageError("give either --lambda or --h12-re/--h12-im, not both");
    if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end())
        throw UsageError("unknown method '" + method + "'");
    if (method == "custom" && xi_table.empty() == f_table.empty())
        throw UsageError("method custom needs exactly one of --xi-table or --f-table");
    if (!std::isfinite(gamma) || !(gamma > -0.5))
        throw UsageError("gamma must satisfy gamma > -1/2");
    if (n_traj < 1)
        throw UsageError("ntraj must be >= 1");
    if (t_max < 0.0 || !std::isfinite(t_max))
        throw UsageError("tmax must be > 0");
    if (dt < 0.0 || !std::isfinite(dt))
        throw UsageError("dt must be > 0");
    if (points < 4)
        throw UsageError("points must be >= 4");
    const Hamiltonian2 h = hamiltonian();
    if (!h.finite())
        throw UsageError("Hamiltonian entries must be finite");
}

Hamiltonian2 RunConfig::hamiltonian() const
{
    Hamiltonian2 h = Hamiltonian2::model(h11, h22, lambda.value_or(2.0));
    if (h12_re || h12_im) {
        h.h12_re = h12_re.value_or(0.0);
        h.h12_im = h12_im.value_or(0.0);
    }
    return h;
}

std::vector<double> RunConfig::time_grid() const
{
    const Hamiltonian2 h = hamiltonian();
    if (t_max == 0.0 && dt == 0.0)
        return default_time_grid(h);
    const double period = is_scalar(h) ? 1.0 : 2.0 * std::numbers::pi / std::sqrt(discriminant(h));
    return uniform_time_grid(t_max > 0.0 ? t_max : 3.0 * period, dt > 0.0 ? dt : period / 200.0);
}

std::string RunConfig::describe(const std::string& command) const
{
    const Hamiltonian2 h = hamiltonian();
    const std::vector<double> grid = time_grid();
    std::ostringstream os;
    os << "cpsdyn " << command << " h11=" << format_double(h.h11) << " h22=" << format_double(h.h22)
       << " h12_re=" << format_double(h.h12_re) << " h12_im=" << format_double(h.h12_im) << " method=" << method
       << " gamma=" << format_double(gamma) << " ntraj=" << n_traj << " seed=" << seed
       << " tmax=" << format_double(grid.back()) << " dt="
       << format_double(grid.size() > 1 ? grid[1] - grid[0] : 0.0) << " npoints=" << grid.size();
    if (!xi_table.empty())
        os << " xi_table=" << xi_table;
    if (!f_table.empty())
        os << " f_table=" << f_table;
    return os.str();
}

int cmd_exact(const RunConfig& cfg, std::ostream& out)
{
    cfg.validate();
    const Hamiltonian2 h = cfg.hamiltonian();
    std::ostringstream os;
    CsvWriter w(os);
    w.comment(cfg.describe("exact"));
    w.header({"t", "P11", "P12", "P21", "P22", "xi"});
    for (double t : cfg.time_grid()) {
        const Matrix2 p = exact_transition_matrix(h, t);
        w.row({t, p[0][0], p[0][1], p[1][0], p[1][1], propagator_angles(h, t).xi});
    }
    emit(cfg, out, os.str());
    return kExitOk;
}

PopulationSeries simulate_series(const RunConfig& cfg)
{
    cfg.validate();
    const Hamiltonian2 h = cfg.hamiltonian();
    EnsembleConfig ens;
    ens.n_traj = cfg.n_traj;
    ens.seed = cfg.seed;
    ens.gamma = cfg.gamma;
    ens.threads = cfg.threads;
    ens.times = cfg.time_grid();
    ens.initial_states = {1};
    if (cfg.method == "sqc-twf")
        return run_sqc_twf(h, ens);
    if (cfg.method == "covariant")
        return run_covariant(h, ens);
    if (cfg.method == "custom")
        return run_novel(h, custom_rep(cfg), ens);
    return run_novel(h, builtin_rep(cfg.method), ens);
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out)
{
    const PopulationSeries s = simulate_series(cfg);
    emit(cfg, out, simulate_csv(cfg, s));
    return kExitOk;
}

int cmd_solve_f(const RunConfig& cfg, std::ostream& out)
{
    cfg.validate();
    XiProfile xi;
    if (!cfg.xi_table.empty()) {
        const TwoColumnTable t = read_two_column_csv(cfg.xi_table);
        xi = xi_profile_from_table(t.a, t.b, "custom");
    } else {
        xi = builtin_xi_profile(cfg.xi);
    }
    const FGenerator f = abel_solve_f(xi, default_y_grid(cfg.points));
    const IsomorphismRep rep{xi.name, f, xi};
    const double residual = max_residual(rep);

    std::ostringstream os;
    CsvWriter w(os);
    w.comment("cpsdyn solve-f xi=" + (cfg.xi_table.empty() ? cfg.xi : "table:" + cfg.xi_table) +
              " points=" + std::to_string(cfg.points));
    w.comment("residual_max=" + format_double(residual) + " over 32 interior xi points");
    w.header({"y", "f"});
    for (std::size_t i = 0; i < f.table->y().size(); ++i)
        w.row({f.table->y()[i], f.table->f()[i]});
    emit(cfg, out, os.str());
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out)
{
    const std::vector<double> lambdas = parse_number_list(cfg.lambdas);
    const std::vector<std::string> methods = parse_name_list(cfg.methods);
    if (cfg.h12_re || cfg.h12_im)
        throw UsageError("sweep varies lambda; --h12-re/--h12-im are not allowed");
    for (const auto& m : methods)
        if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
            throw UsageError("unknown method '" + m + "'");

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec)
        throw IoError("cannot create directory '" + cfg.out_dir + "': " + ec.message());

    std::ostringstream summary;
    CsvWriter w(summary);
    RunConfig base = cfg;
    base.lambda.reset();
    w.comment(base.describe("sweep") + " lambdas=" + cfg.lambdas + " methods=" + cfg.methods +
              " tolerance=" + format_double(cfg.tolerance));
    w.header({"lambda", "method", "max_abs_dev", "status"});
    bool all_ok = true;
    for (double lam : lambdas) {
        for (const auto& m : methods) {
            RunConfig run = cfg;
            run.lambda = lam;
            run.method = m;
            run.out = (std::filesystem::path(cfg.out_dir) / ("simulate_" + m + "_lambda_" + format_double(lam) + ".csv"))
                          .string();
            std::string status;
            double dev = NAN;
            try {
                const PopulationSeries s = simulate_series(run);
                write_text_file(run.out, simulate_csv(run, s));
                dev = max_abs_dev(run.hamiltonian(), s);
                status = dev <= cfg.tolerance ? "pass" : "fail";
            } catch (const std::exception& e) {
                status = std::string("error: ") + e.what();
                for (char& c : status)
                    if (c == ',' || c == '\n')
                        c = ';';
            }
            all_ok = all_ok && status == "pass";
            summary << format_double(lam) << ',' << m << ',' << format_double(dev) << ',' << status << '\n';
        }
    }
    const std::string path = (std::filesystem::path(cfg.out_dir) / "summary.csv").string();
    write_text_file(path, summary.str());
    if (!cfg.out.empty() && cfg.out != "-")
        write_text_file(cfg.out, summary.str());
    else
        out << summary.str();
    return all_ok ? kExitOk : kExitNumerical;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out)
{
    const SuiteReport r = run_validation_suite();
    emit(cfg, out, r.to_csv());
    return r.ok() ? kExitOk : kExitNumerical;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Exact two-state population dynamics from phase-space trajectory ensembles", "cpsdyn"};
    app.set_config("--config", "", "Read key = value settings (flags of the same name override)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.fallthrough();
    app.require_subcommand(1, 1);

    RunConfig cfg;
    double lambda = 0.0, h12_re = 0.0, h12_im = 0.0;
    app.add_option("--h11", cfg.h11, "Diagonal element H11")->capture_default_str();
    app.add_option("--h22", cfg.h22, "Diagonal element H22")->capture_default_str();
    auto* lam_opt = app.add_option("--lambda", lambda, "Real coupling H12 (default 2)");
    auto* re_opt = app.add_option("--h12-re", h12_re, "Real part of H12");
    auto* im_opt = app.add_option("--h12-im", h12_im, "Imaginary part of H12");
    app.add_option("--method", cfg.method, "sqz, case1, case2, sqc-twf, covariant or custom")->capture_default_str();
    app.add_option("--gamma", cfg.gamma, "Zero-point parameter (covariant method)")->capture_default_str();
    app.add_option("--ntraj", cfg.n_traj, "Trajectories")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    app.add_option("--tmax", cfg.t_max, "Final time (default: three Rabi periods)");
    app.add_option("--dt", cfg.dt, "Grid spacing (default: Rabi period / 200)");
    app.add_option("--out", cfg.out, "Output CSV path (default: stdout)");
    app.add_option("--xi-table", cfg.xi_table, "Custom Xi profile, CSV (xi, value)");
    app.add_option("--f-table", cfg.f_table, "Custom weight generator, CSV (y, f)");
    app.add_option("--threads", cfg.threads, "Worker threads (0: all cores)")->capture_default_str();
    app.add_option("--xi", cfg.xi, "solve-f: built-in profile sqz, case1, case2 or constant-one")
        ->capture_default_str();
    app.add_option("--points", cfg.points, "solve-f: y grid size")->capture_default_str();
    app.add_option("--lambdas", cfg.lambdas, "sweep: comma-separated couplings")->capture_default_str();
    app.add_option("--methods", cfg.methods, "sweep: comma-separated methods")->capture_default_str();
    app.add_option("--out-dir", cfg.out_dir, "sweep: output directory")->capture_default_str();
    app.add_option("--tolerance", cfg.tolerance, "sweep: pass bound on max |P1-P2 - exact|")
        ->capture_default_str();

    auto* exact = app.add_subcommand("exact", "Exact populations on the time grid");
    auto* simulate = app.add_subcommand("simulate", "Trajectory-ensemble populations from state 1");
    auto* solve = app.add_subcommand("solve-f", "Tabulate f(y) from a Xi profile");
    auto* sweep = app.add_subcommand("sweep", "Simulate over couplings and methods");
    auto* validate = app.add_subcommand("validate", "Run the invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (lam_opt->count())
        cfg.lambda = lambda;
    if (re_opt->count())
        cfg.h12_re = h12_re;
    if (im_opt->count())
        cfg.h12_im = h12_im;

    try {
        if (exact->parsed())
            return cmd_exact(cfg, out);
        if (simulate->parsed())
            return cmd_simulate(cfg, out);
        if (solve->parsed())
            return cmd_solve_f(cfg, out);
        if (sweep->parsed())
            return cmd_sweep(cfg, out);
        if (validate->parsed())
            return cmd_validate(cfg, out);
    } catch (const IoError& e) {
        err << "cpsdyn: I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const RepresentationError& e) {
        err << "cpsdyn: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const EstimatorError& e) {
        err << "cpsdyn: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const NumericalFailure& e) {
        err << "cpsdyn: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "cpsdyn: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "cpsdyn: numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}

}  // namespace cpsdyn
