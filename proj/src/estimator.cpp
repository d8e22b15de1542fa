#include "cpsdyn/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

#include "cpsdyn/phase_space.hpp"
#include "cpsdyn/rng.hpp"
#include "cpsdyn/specfun.hpp"

namespace cpsdyn {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMinCbar = 1e-6;

// Trajectories per work unit. Partial sums over a chunk are converted to
// moments and merged in chunk order, so results do not depend on threads.
constexpr std::uint64_t kChunk = 4096;

// Points in the dense f lookup used inside the trajectory loop.
constexpr std::size_t kLookupPoints = (1u << 16) + 1;

// RNG stream ids; the initial state is added.
constexpr std::uint64_t kStreamNovel = 0x10;
constexpr std::uint64_t kStreamSqc = 0x20;
constexpr std::uint64_t kStreamCovariant = 0x30;

// Per-time mixing-angle data for the closed-form y_t.
struct TimeTable {
    std::vector<double> xi, c2, s2, ca, sa;
};

TimeTable make_time_table(const Hamiltonian2& h, const std::vector<double>& times)
{
    TimeTable tt;
    for (double t : times) {
        const PropagatorAngles ang = propagator_angles(h, t);
        const double rel = ang.varphi - ang.psi;
        tt.xi.push_back(ang.xi);
        tt.c2.push_back(std::cos(2.0 * ang.xi));
        tt.s2.push_back(std::sin(2.0 * ang.xi));
        tt.ca.push_back(std::cos(rel));
        tt.sa.push_back(std::sin(rel));
    }
    return tt;
}

// Raw sums (a, b, aa, bb, ab) per slot for one chunk.
struct ChunkSums {
    std::vector<double> s;
    double min_contribution = std::numeric_limits<double>::infinity();

    explicit ChunkSums(std::size_t slots) : s(5 * slots, 0.0) {}

    void add(std::size_t slot, double a, double b)
    {
        double* p = &s[5 * slot];
        p[0] += a;
        p[1] += b;
        p[2] += a * a;
        p[3] += b * b;
        p[4] += a * b;
    }
};

using ChunkFn = std::function<void(std::uint64_t begin, std::uint64_t end, ChunkSums& out)>;

struct EnsembleResult {
    std::vector<StreamingMoments2> moments;  // per slot
    double min_contribution = std::numeric_limits<double>::infinity();
};

EnsembleResult run_chunks(std::uint64_t n_traj, std::size_t slots, unsigned threads, const ChunkFn& fn)
{
    const std::uint64_t n_chunks = (n_traj + kChunk - 1) / kChunk;
    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, n_chunks)));

    EnsembleResult res;
    res.moments.resize(slots);

    std::mutex mtx;
    std::map<std::uint64_t, ChunkSums> pending;  // finished, not yet merged
    std::uint64_t next_merge = 0;
    std::atomic<std::uint64_t> next_chunk{0};
    std::exception_ptr failure;

    auto merge_ready = [&]() {
        // Caller holds mtx.
        for (auto it = pending.find(next_merge); it != pending.end(); it = pending.find(next_merge)) {
            const std::uint64_t begin = next_merge * kChunk;
            const std::uint64_t count = std::min(kChunk, n_traj - begin);
            const ChunkSums& cs = it->second;
            for (std::size_t k = 0; k < slots; ++k) {
                const double* p = &cs.s[5 * k];
                res.moments[k].merge(StreamingMoments2::from_sums(count, p[0], p[1], p[2], p[3], p[4]));
            }
            res.min_contribution = std::min(res.min_contribution, cs.min_contribution);
            pending.erase(it);
            ++next_merge;
        }
    };

    auto work = [&]() {
        try {
            for (std::uint64_t c = next_chunk++; c < n_chunks; c = next_chunk++) {
                ChunkSums cs(slots);
                const std::uint64_t begin = c * kChunk;
                fn(begin, std::min(begin + kChunk, n_traj), cs);
                std::lock_guard<std::mutex> lock(mtx);
                pending.emplace(c, std::move(cs));
                merge_ready();
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(mtx);
            if (!failure)
                failure = std::current_exception();
            next_chunk = n_chunks;
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto& th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return res;
}

// Dense linear lookup of f on [0, 1/2]. Near y = 1/2 the analytic generators
// carry a u ln u term (u = 1 - 2y) that linear interpolation resolves only to
// ~1e-4, so the last 1/128 of the interval calls f directly; elsewhere the
// lookup error is below 6e-8.
class FLookup {
  public:
    explicit FLookup(const FGenerator& f) : f_(f), v_(kLookupPoints)
    {
        const double n = static_cast<double>(kLookupPoints - 1);
        for (std::size_t i = 0; i < kLookupPoints; ++i)
            v_[i] = f(std::min(0.5, 0.5 * static_cast<double>(i) / n));
        scale_ = 2.0 * n;
    }

    double operator()(double y) const
    {
        if (y >= kTailStart)
            return f_(std::min(y, 0.5));
        const double x = y * scale_;
        const std::size_t i = std::min(static_cast<std::size_t>(x), kLookupPoints - 2);
        const double frac = x - static_cast<double>(i);
        return v_[i] + frac * (v_[i + 1] - v_[i]);
    }

  private:
    static constexpr double kTailStart = 0.5 - 1.0 / 128.0;
    FGenerator f_;
    std::vector<double> v_;
    double scale_ = 0.0;
};

double clamp_y(double y)
{
    return std::clamp(y, -0.5, 0.5);
}

// Ratio a/(a+b): first-order delta method with the per-trajectory covariance.
double ratio_stderr(const StreamingMoments2& m)
{
    const double total = m.mean_a() + m.mean_b();
    if (m.count() < 2 || total <= 0.0)
        return 0.0;
    const double r = m.mean_a() / total;
    const double va = m.var_a();
    const double cov_as = va + m.cov_ab();
    const double vs = va + m.var_b() + 2.0 * m.cov_ab();
    const double var = (va - 2.0 * r * cov_as + r * r * vs) / (total * total);
    return std::sqrt(std::max(0.0, var) / static_cast<double>(m.count()));
}

double mean_stderr(double var, std::uint64_t n)
{
    return n > 1 ? std::sqrt(std::max(0.0, var) / static_cast<double>(n)) : 0.0;
}

PopulationSeries empty_series(const std::string& method, const EnsembleConfig& cfg, const TimeTable& tt)
{
    PopulationSeries out;
    out.method = method;
    out.initial_states = cfg.initial_states;
    out.n_traj = cfg.n_traj;
    out.min_contribution = std::numeric_limits<double>::infinity();
    out.points.resize(cfg.times.size());
    for (std::size_t k = 0; k < cfg.times.size(); ++k) {
        PopulationPoint& pt = out.points[k];
        pt.t = cfg.times[k];
        pt.xi = tt.xi[k];
        for (auto* mat : {&pt.est.p, &pt.est.pop, &pt.est.stderr, &pt.est.p_stderr})
            for (auto& row : *mat)
                row.fill(kNaN);
        pt.est.cbar.fill(kNaN);
        pt.est.cbar_stderr.fill(kNaN);
    }
    return out;
}

// Store a normalized row from moments of (same-state, other-state) contributions.
void fill_ratio_row(PopulationSeries& out, int state, const std::vector<StreamingMoments2>& mom,
                    const std::string& method)
{
    const std::size_t n = static_cast<std::size_t>(state - 1);
    const std::size_t o = 1 - n;
    for (std::size_t k = 0; k < out.points.size(); ++k) {
        const StreamingMoments2& m = mom[k];
        CorrelationEstimate& e = out.points[k].est;
        const double cbar = m.mean_a() + m.mean_b();
        if (!(cbar >= kMinCbar))
            throw EstimatorError(method + ": normalization factor " + std::to_string(cbar) +
                                 " below 1e-6 at t = " + std::to_string(out.points[k].t) +
                                 " (degenerate representation)");
        e.p[n][n] = m.mean_a();
        e.p[n][o] = m.mean_b();
        e.pop[n][n] = m.mean_a() / cbar;
        e.pop[n][o] = m.mean_b() / cbar;
        const double se = ratio_stderr(m);
        e.stderr[n][n] = se;
        e.stderr[n][o] = se;
        e.p_stderr[n][n] = mean_stderr(m.var_a(), m.count());
        e.p_stderr[n][o] = mean_stderr(m.var_b(), m.count());
        e.cbar[n] = cbar;
        e.cbar_stderr[n] = mean_stderr(m.var_a() + m.var_b() + 2.0 * m.cov_ab(), m.count());
    }
}

}  // namespace

void EnsembleConfig::validate() const
{
    if (n_traj < 1)
        throw std::invalid_argument("ensemble: n_traj must be >= 1");
    if (times.empty())
        throw std::invalid_argument("ensemble: empty time grid");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!std::isfinite(times[k]))
            throw std::invalid_argument("ensemble: non-finite time");
        if (k > 0 && times[k] < times[k - 1])
            throw std::invalid_argument("ensemble: times must be non-decreasing");
    }
    if (initial_states.empty())
        throw std::invalid_argument("ensemble: no initial states");
    for (int s : initial_states)
        if (s != 1 && s != 2)
            throw std::invalid_argument("ensemble: initial states must be 1 or 2");
    if (!std::isfinite(gamma) || !(gamma > -0.5))
        throw std::invalid_argument("ensemble: gamma must satisfy gamma > -1/2");
}

Matrix2 exact_transition_matrix(const Hamiltonian2& h, double t)
{
    const Matrix2 e = exact_population_matrix(h, t);
    return {{{e[0][0], e[1][0]}, {e[0][1], e[1][1]}}};
}

std::vector<double> uniform_time_grid(double t_max, double dt)
{
    if (!(t_max > 0.0) || !std::isfinite(t_max))
        throw std::invalid_argument("time grid: t_max must be > 0");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("time grid: dt must be > 0");
    const auto steps = static_cast<std::uint64_t>(std::floor(t_max / dt * (1.0 + 1e-12)));
    if (steps > 10'000'000)
        throw std::invalid_argument("time grid: more than 1e7 points");
    std::vector<double> g(steps + 1);
    for (std::uint64_t k = 0; k <= steps; ++k)
        g[k] = static_cast<double>(k) * dt;
    return g;
}

std::vector<double> default_time_grid(const Hamiltonian2& h)
{
    if (is_scalar(h))
        return uniform_time_grid(3.0, 0.015);
    const double period = 2.0 * std::numbers::pi / std::sqrt(discriminant(h));
    return uniform_time_grid(3.0 * period, period / 200.0);
}

PopulationSeries run_novel(const Hamiltonian2& h, const IsomorphismRep& rep, const EnsembleConfig& cfg)
{
    cfg.validate();
    const TimeTable tt = make_time_table(h, cfg.times);
    const FLookup f(rep.f);
    PopulationSeries out = empty_series(rep.name, cfg, tt);
    const std::size_t nt = cfg.times.size();

    for (int state : cfg.initial_states) {
        // Window of the initial state is K_nn(y) = 1 on the sampled half.
        const bool one = state == 1;
        auto body = [&](std::uint64_t begin, std::uint64_t end, ChunkSums& cs) {
            for (std::uint64_t i = begin; i < end; ++i) {
                RandomStream rng(cfg.seed, kStreamNovel + static_cast<std::uint64_t>(state), i);
                const CpsCoords c = sample_half_space_coords(state, rng);
                const double y0 = c.y;
                const double ay0 = std::abs(y0);
                const double amp = std::sqrt(std::max(0.0, 0.25 - y0 * y0));
                const double ct = std::cos(c.theta_d);
                const double st = std::sin(c.theta_d);
                for (std::size_t k = 0; k < nt; ++k) {
                    const double yt = clamp_y(
                        y0 * tt.c2[k] + amp * tt.s2[k] * (tt.ca[k] * ct - tt.sa[k] * st));
                    const double w = f(std::min(ay0, std::abs(yt)));
                    const bool in_one = yt > 0.0;
                    const double a = (in_one == one) ? w : 0.0;
                    const double b = w - a;
                    cs.add(k, a, b);
                    cs.min_contribution = std::min(cs.min_contribution, w);
                }
            }
        };
        EnsembleResult r = run_chunks(cfg.n_traj, nt, cfg.threads, body);
        out.min_contribution = std::min(out.min_contribution, r.min_contribution);
        fill_ratio_row(out, state, r.moments, rep.name);
    }
    return out;
}

PopulationSeries run_sqc_twf(const Hamiltonian2& h, const EnsembleConfig& cfg)
{
    cfg.validate();
    const TimeTable tt = make_time_table(h, cfg.times);
    PopulationSeries out = empty_series("sqc-twf", cfg, tt);
    const std::size_t nt = cfg.times.size();

    for (int state : cfg.initial_states) {
        const int other = 3 - state;
        auto body = [&](std::uint64_t begin, std::uint64_t end, ChunkSums& cs) {
            for (std::uint64_t i = begin; i < end; ++i) {
                RandomStream rng(cfg.seed, kStreamSqc + static_cast<std::uint64_t>(state), i);
                const TriangleSample s = sample_sqc_triangle(state, rng);
                // The action sum is conserved; y evolves on the sphere of radius e1 + e2.
                const double total = s.e1 + s.e2;
                const double y0 = s.e1 / total - 0.5;
                const double amp = std::sqrt(std::max(0.0, 0.25 - y0 * y0));
                const double th_d = s.th2 - s.th1;
                const double ct = std::cos(th_d);
                const double st = std::sin(th_d);
                for (std::size_t k = 0; k < nt; ++k) {
                    const double yt = clamp_y(
                        y0 * tt.c2[k] + amp * tt.s2[k] * (tt.ca[k] * ct - tt.sa[k] * st));
                    const double e1 = total * (yt + 0.5);
                    const double e2 = total - e1;
                    cs.add(k, sqc_bin_window(state, e1, e2), sqc_bin_window(other, e1, e2));
                }
            }
            cs.min_contribution = 0.0;
        };
        EnsembleResult r = run_chunks(cfg.n_traj, nt, cfg.threads, body);
        out.min_contribution = std::min(out.min_contribution, r.min_contribution);
        fill_ratio_row(out, state, r.moments, "sqc-twf");
    }
    return out;
}

PopulationSeries run_covariant(const Hamiltonian2& h, const EnsembleConfig& cfg)
{
    cfg.validate();
    const TimeTable tt = make_time_table(h, cfg.times);
    PopulationSeries out = empty_series("covariant", cfg, tt);
    const std::size_t nt = cfg.times.size();
    const double gamma = cfg.gamma;
    const double radius = 1.0 + 2.0 * gamma;
    const double inv_a = 3.0 / (radius * radius);
    const double inv_b = (1.0 - gamma) / radius;

    // Slot k: state 1 at time k; slot nt + k: state 2.
    auto body = [&](std::uint64_t begin, std::uint64_t end, ChunkSums& cs) {
        for (std::uint64_t i = begin; i < end; ++i) {
            RandomStream rng(cfg.seed, kStreamCovariant, i);
            const CpsCoords c = sample_cps_coords(rng);
            const double y0 = c.y;
            const double amp = std::sqrt(std::max(0.0, 0.25 - y0 * y0));
            const double ct = std::cos(c.theta_d);
            const double st = std::sin(c.theta_d);
            // F K_nn(x0, p0) = 2 (e^(n) - gamma)
            const double k1 = 2.0 * (radius * (y0 + 0.5) - gamma);
            const double k2 = 2.0 * (radius * (0.5 - y0) - gamma);
            for (std::size_t k = 0; k < nt; ++k) {
                const double yt =
                    clamp_y(y0 * tt.c2[k] + amp * tt.s2[k] * (tt.ca[k] * ct - tt.sa[k] * st));
                const double inv1 = inv_a * radius * (yt + 0.5) - inv_b;
                const double inv2 = inv_a * radius * (0.5 - yt) - inv_b;
                cs.add(k, k1 * inv1, k1 * inv2);
                cs.add(nt + k, k2 * inv2, k2 * inv1);
                cs.min_contribution =
                    std::min({cs.min_contribution, k1 * inv1, k1 * inv2, k2 * inv1, k2 * inv2});
            }
        }
    };
    EnsembleResult r = run_chunks(cfg.n_traj, 2 * nt, cfg.threads, body);
    out.min_contribution = r.min_contribution;

    for (int state : cfg.initial_states) {
        const std::size_t n = static_cast<std::size_t>(state - 1);
        const std::size_t o = 1 - n;
        for (std::size_t k = 0; k < nt; ++k) {
            const StreamingMoments2& m = r.moments[n * nt + k];
            CorrelationEstimate& e = out.points[k].est;
            e.p[n][n] = m.mean_a();
            e.p[n][o] = m.mean_b();
            e.pop[n][n] = m.mean_a();
            e.pop[n][o] = m.mean_b();
            e.p_stderr[n][n] = mean_stderr(m.var_a(), m.count());
            e.p_stderr[n][o] = mean_stderr(m.var_b(), m.count());
            e.stderr[n][n] = e.p_stderr[n][n];
            e.stderr[n][o] = e.p_stderr[n][o];
            e.cbar[n] = m.mean_a() + m.mean_b();
            e.cbar_stderr[n] = mean_stderr(m.var_a() + m.var_b() + 2.0 * m.cov_ab(), m.count());
        }
    }
    return out;
}

SqzClosedForm sqz_closed_forms(double xi)
{
    if (!(xi >= 0.0 && xi <= kHalfPi))
        throw std::domain_error("sqz_closed_forms: xi must lie in [0, pi/2]");
    SqzClosedForm out;
    out.cbar = xi_sqz(xi);
    const double s = std::sin(xi);
    const double c = std::cos(xi);
    const double two = 2.0 * xi;
    const double pi = std::numbers::pi;
    if (two < 0.1) {
        // sin 2xi - 2xi cos 2xi = sin^2(2xi) g(2xi) with g = s/3 + 7 s^3/90 + ...
        const double x2 = two * two;
        const double g = two * (1.0 / 3.0 + x2 * (7.0 / 90.0 + x2 * (31.0 / 2520.0 + x2 * (127.0 / 75600.0 +
                                                                                    x2 * 73.0 / 342144.0))));
        out.p11 = 1.0 - (4.0 / pi) * g * c * c;
        out.p12 = s * s / (c * c) - (4.0 / pi) * g * s * s;
        return out;
    }
    const double num = std::sin(two) - two * std::cos(two);
    out.p11 = 1.0 - num / (pi * s * s);
    // tan^2 and the second term both diverge at pi/2; there the symmetric
    // normalization factor gives p12 = sin^2 xi cbar.
    out.p12 = (kHalfPi - xi >= 0.05) ? s * s / (c * c) - num / (pi * c * c) : s * s * out.cbar;
    return out;
}

std::array<double, 2> quadrature_oracle_p(const IsomorphismRep& rep, double xi, std::size_t order)
{
    if (!(xi > 0.0 && xi < kHalfPi))
        throw std::domain_error("quadrature_oracle_p: xi must lie strictly inside (0, pi/2)");
    const QuadratureRule& rule = gauss_legendre(order);
    auto integral = [&](double upper) {
        return rule.integrate(
            [&](double s) {
                const double ss = std::sin(s);
                return ss * rule.integrate([&](double tau) { return rep.f(0.5 * ss * std::sin(tau)); }, 0.0,
                                           upper);
            },
            0.0, kHalfPi);
    };
    const double scale = 2.0 / std::numbers::pi;
    return {scale * integral(kHalfPi - xi), scale * integral(xi)};
}

bool SymmetryReport::ok() const
{
    return std::all_of(checks.begin(), checks.end(), [](const SymmetryCheck& c) { return c.passed; });
}

SymmetryReport symmetry_checks(const PopulationSeries& series)
{
    const auto& st = series.initial_states;
    if (std::find(st.begin(), st.end(), 1) == st.end() || std::find(st.begin(), st.end(), 2) == st.end())
        throw std::invalid_argument("symmetry_checks: series must contain both initial states");

    SymmetryReport rep;
    auto check = [&](const std::string& name, auto value_pair) {
        SymmetryCheck c;
        c.name = name;
        for (const auto& pt : series.points) {
            const auto [a, sa, b, sb] = value_pair(pt.est);
            const double diff = std::abs(a - b);
            const double band = 3.0 * std::sqrt(sa * sa + sb * sb);
            const double ratio = diff == 0.0 ? 0.0 : (band > 0.0 ? diff / band : INFINITY);
            if (!(diff <= band))
                ++c.violations;
            if (ratio > c.worst_ratio) {
                c.worst_ratio = ratio;
                c.worst_time = pt.t;
            }
        }
        c.passed = c.violations == 0;
        rep.checks.push_back(c);
    };
    using Q = std::array<double, 4>;
    check("p11=p22", [](const CorrelationEstimate& e) {
        return Q{e.pop[0][0], e.stderr[0][0], e.pop[1][1], e.stderr[1][1]};
    });
    check("p12=p21", [](const CorrelationEstimate& e) {
        return Q{e.pop[0][1], e.stderr[0][1], e.pop[1][0], e.stderr[1][0]};
    });
    check("cbar1=cbar2", [](const CorrelationEstimate& e) {
        return Q{e.cbar[0], e.cbar_stderr[0], e.cbar[1], e.cbar_stderr[1]};
    });
    return rep;
}

}  // namespace cpsdyn
