#include "cpsdyn/representations.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/interpolators/cardinal_quintic_b_spline.hpp>
#include <boost/math/interpolators/cubic_hermite.hpp>

#include "cpsdyn/specfun.hpp"

namespace cpsdyn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;
constexpr double kFdStep = 1e-4;

// Cancellation-aware forms take over within this distance of y = 1/2.
constexpr double kEndpointSwitch = 1e-4;

// Squeezed profile: series in s = 2 xi below this, reflection within
// kSqzReflect of pi/2.
constexpr double kSqzSeries = 0.1;
constexpr double kSqzReflect = 0.05;

constexpr std::size_t kValidationGrid = 1024;

void require_y(double y, const char* who)
{
    if (!(y >= 0.0 && y <= 0.5))
        throw std::domain_error(std::string(who) + ": y must lie in [0, 1/2]");
}

void require_xi(double xi, const char* who)
{
    if (!(xi >= 0.0 && xi <= kHalfPi))
        throw std::domain_error(std::string(who) + ": xi must lie in [0, pi/2]");
}

double eval_series(const double* c, std::size_t n, double x2)
{
    double acc = 0.0;
    for (std::size_t k = n; k-- > 0;)
        acc = acc * x2 + c[k];
    return acc;
}

// g(s) = (sin s - s cos s)/sin^2 s and its derivatives. Odd/even series in s
// near 0; valid for s in [0, pi).
constexpr std::array<double, 8> kG0 = {1.0 / 3.0,
                                       7.0 / 90.0,
                                       31.0 / 2520.0,
                                       127.0 / 75600.0,
                                       73.0 / 342144.0,
                                       1414477.0 / 54486432000.0,
                                       8191.0 / 2668723200.0,
                                       16931177.0 / 47636709120000.0};
constexpr std::array<double, 8> kG1 = {1.0 / 3.0,
                                       7.0 / 30.0,
                                       31.0 / 504.0,
                                       127.0 / 10800.0,
                                       73.0 / 38016.0,
                                       1414477.0 / 4953312000.0,
                                       8191.0 / 205286400.0,
                                       16931177.0 / 3175780608000.0};
constexpr std::array<double, 7> kG2 = {7.0 / 15.0,
                                       31.0 / 126.0,
                                       127.0 / 1800.0,
                                       73.0 / 4752.0,
                                       1414477.0 / 495331200.0,
                                       8191.0 / 17107200.0,
                                       16931177.0 / 226841472000.0};

struct GValues {
    double g0, g1, g2;
};

GValues g_func(double s)
{
    if (s < kSqzSeries) {
        const double s2 = s * s;
        return {s * eval_series(kG0.data(), kG0.size(), s2), eval_series(kG1.data(), kG1.size(), s2),
                s * eval_series(kG2.data(), kG2.size(), s2)};
    }
    const double sn = std::sin(s);
    const double cs = std::cos(s);
    const double num = sn - s * cs;
    const double p = s * sn * sn - 2.0 * cs * num;
    const double sn2 = sn * sn;
    return {num / sn2, p / (sn2 * sn), (sn2 * sn + 2.0 * sn2 * num - 3.0 * cs * p) / (sn2 * sn2)};
}

// Direct evaluation, accurate for xi <= pi/2 - kSqzReflect.
std::array<double, 3> xi_sqz_core(double xi)
{
    const GValues g = g_func(2.0 * xi);
    const double c = std::cos(xi);
    const double sec2 = 1.0 / (c * c);
    const double t = std::tan(xi);
    return {sec2 - (4.0 / kPi) * g.g0, 2.0 * t * sec2 - (8.0 / kPi) * g.g1,
            2.0 * sec2 * sec2 + 4.0 * t * t * sec2 - (16.0 / kPi) * g.g2};
}

std::array<double, 3> xi_sqz_all(double xi)
{
    require_xi(xi, "xi_sqz");
    if (kHalfPi - xi >= kSqzReflect)
        return xi_sqz_core(xi);
    // Xi(xi) = Xi(pi/2 - xi) holds exactly; the reflected argument stays in the series range.
    const auto r = xi_sqz_core(kHalfPi - xi);
    return {r[0], -r[1], r[2]};
}

// 4th-order central differences, one-sided within 2h of an end.
double fd_first(const ScalarFn& f, double x)
{
    const double h = kFdStep;
    if (x - 2.0 * h >= 0.0 && x + 2.0 * h <= kHalfPi)
        return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
    const double dir = x - 2.0 * h < 0.0 ? 1.0 : -1.0;
    const double hh = dir * h;
    return (-25.0 * f(x) + 48.0 * f(x + hh) - 36.0 * f(x + 2 * hh) + 16.0 * f(x + 3 * hh) -
            3.0 * f(x + 4 * hh)) /
           (12.0 * hh);
}

double fd_second(const ScalarFn& f, double x)
{
    const double h = kFdStep;
    if (x - 2.0 * h >= 0.0 && x + 2.0 * h <= kHalfPi)
        return (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)) /
               (12.0 * h * h);
    const double hh = x - 2.0 * h < 0.0 ? h : -h;
    return (45.0 * f(x) - 154.0 * f(x + hh) + 214.0 * f(x + 2 * hh) - 156.0 * f(x + 3 * hh) +
            61.0 * f(x + 4 * hh) - 10.0 * f(x + 5 * hh)) /
           (12.0 * h * h);
}

// dB/dz at z = sin(xi), given c = cos(xi) > 0 computed without cancellation.
double bprime(const XiProfile& xi, double z, double c, double angle)
{
    const double x0 = xi.value(angle);
    const double x1 = xi.deriv1(angle);
    const double x2 = xi.deriv2(angle);
    const double z2 = z * z;
    return z * (((4.0 * c * c - 2.0 * z2) * x0 + z2 * x2) / c + 5.0 * z * x1);
}

}  // namespace

//---------------------------------------------------------------------------//
// XiProfile / FTable
//---------------------------------------------------------------------------//

double XiProfile::deriv1(double xi) const
{
    return d1 ? d1(xi) : fd_first(value, xi);
}

double XiProfile::deriv2(double xi) const
{
    return d2 ? d2(xi) : fd_second(value, xi);
}

struct FTable::Impl {
    boost::math::interpolators::cubic_hermite<std::vector<double>> interp;
};

namespace {

// Slope at x[i] of the cubic through four consecutive nodes containing i.
std::vector<double> lagrange_slopes(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j0 = std::min(i > 0 ? i - 1 : 0, n - 4);
        double acc = 0.0;
        for (std::size_t k = j0; k < j0 + 4; ++k) {
            if (k == i) {
                double s = 0.0;
                for (std::size_t m = j0; m < j0 + 4; ++m)
                    if (m != i)
                        s += 1.0 / (x[i] - x[m]);
                acc += y[k] * s;
                continue;
            }
            double num = 1.0;
            double den = 1.0;
            for (std::size_t m = j0; m < j0 + 4; ++m) {
                if (m == k)
                    continue;
                den *= x[k] - x[m];
                if (m != i)
                    num *= x[i] - x[m];
            }
            acc += y[k] * num / den;
        }
        d[i] = acc;
    }
    return d;
}

}  // namespace

FTable::FTable(std::vector<double> y, std::vector<double> f) : y_(std::move(y)), f_(std::move(f))
{
    if (y_.size() != f_.size())
        throw std::invalid_argument("FTable: column lengths differ");
    if (y_.size() < 4)
        throw std::invalid_argument("FTable: need at least 4 points");
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (!std::isfinite(y_[i]) || !std::isfinite(f_[i]))
            throw std::invalid_argument("FTable: non-finite entry");
        if (i > 0 && !(y_[i] > y_[i - 1]))
            throw std::invalid_argument("FTable: y must be strictly increasing");
    }
    if (y_.front() > 1e-12 || y_.back() < 0.5 - 1e-12 || y_.front() < -1e-12 ||
        y_.back() > 0.5 + 1e-12)
        throw std::invalid_argument("FTable: y must span [0, 1/2]");
    impl_ = std::make_unique<Impl>(Impl{boost::math::interpolators::cubic_hermite<std::vector<double>>(
        std::vector<double>(y_), std::vector<double>(f_), lagrange_slopes(y_, f_))});
}

FTable::~FTable() = default;

double FTable::operator()(double y) const
{
    return impl_->interp(std::clamp(y, y_.front(), y_.back()));
}

//---------------------------------------------------------------------------//
// Built-in f
//---------------------------------------------------------------------------//

double f_sqz(double y)
{
    require_y(y, "f_sqz");
    const double a = y + 0.5;
    return 2.0 - 0.5 / (a * a);
}

double f_case1(double y)
{
    require_y(y, "f_case1");
    const double y2 = y * y;
    const double y4 = y2 * y2;
    // The arctanh term carries the factor (1 - 2y) Q(y).
    const double q = -420.0 * y4 * y - 210.0 * y4 + 2.25 * y + 1.125;
    const double u = 1.0 - 2.0 * y;
    double t = 0.0;
    if (u >= kEndpointSwitch)
        t = u * arctanh(2.0 * y);
    else if (u > 0.0)
        t = 0.5 * u * (std::log(2.0 - u) - std::log(u));
    return 5.75 * y - 36.0 * y2 + 70.0 * y2 * y + 240.0 * y4 - 420.0 * y4 * y + q * t;
}

double f_case2(double y)
{
    require_y(y, "f_case2");
    const double y2 = y * y;
    const double poly = 2.0 * y + 18.0 * y2 + 128.0 * y2 * y - 120.0 * y2 * y2;
    const double a = 3.0 - 36.0 * y2;
    const double b = 2.0 - 64.0 * y2;
    const double c = 2.0 - 32.0 * y2;
    const double u = 1.0 - 2.0 * y;
    const double mc = u * (1.0 + 2.0 * y);

    if (u >= kEndpointSwitch)
        return poly + a * arctanh(2.0 * y) + b * ellipe_complement(mc) - c * ellipk_complement(mc);

    // Near-unit-parameter expansions of K and E, with ln(1/k') = -(ln u + ln(2 - u))/2;
    // the ln u pieces are collected so their coefficient vanishes at u = 0.
    constexpr std::array<double, 4> ka = {1.0, 0.25, 9.0 / 64.0, 25.0 / 256.0};
    constexpr std::array<double, 4> eb = {1.0, 0.375, 15.0 / 64.0, 175.0 / 1024.0};
    double sk = 0.0, skd = 0.0, se = 0.0, sed = 0.0;
    double d = 2.0 * std::numbers::ln2;
    double pw = 1.0;
    for (std::size_t n = 0; n < ka.size(); ++n) {
        const double nn = static_cast<double>(n);
        sk += ka[n] * pw;
        skd += ka[n] * pw * d;
        se += eb[n] * pw * mc;
        sed += eb[n] * pw * mc * (d - 1.0 / ((2.0 * nn + 1.0) * (2.0 * nn + 2.0)));
        d += 1.0 / (nn + 1.0) - 1.0 / (nn + 0.5);
        pw *= mc;
    }
    const double lm = std::log(2.0 - u);
    const double log_u_coeff = -0.5 * a - 0.25 * b * se + 0.5 * c * sk;
    double out = poly + 0.5 * a * lm + b * (1.0 + 0.5 * (sed - 0.5 * lm * se)) -
                 c * (skd - 0.5 * lm * sk);
    if (u > 0.0)
        out += log_u_coeff * std::log(u);
    return out;
}

//---------------------------------------------------------------------------//
// Built-in Xi
//---------------------------------------------------------------------------//

double xi_sqz(double xi)
{
    return xi_sqz_all(xi)[0];
}
double xi_sqz_d1(double xi)
{
    return xi_sqz_all(xi)[1];
}
double xi_sqz_d2(double xi)
{
    return xi_sqz_all(xi)[2];
}

double xi_case1(double xi)
{
    require_xi(xi, "xi_case1");
    const double s2 = std::sin(2.0 * xi);
    return 1.0 + 0.25 * s2 * s2 - 2.0 * s2 / kPi;
}
double xi_case1_d1(double xi)
{
    require_xi(xi, "xi_case1");
    return 0.5 * std::sin(4.0 * xi) - 4.0 * std::cos(2.0 * xi) / kPi;
}
double xi_case1_d2(double xi)
{
    require_xi(xi, "xi_case1");
    return 2.0 * std::cos(4.0 * xi) + 8.0 * std::sin(2.0 * xi) / kPi;
}

double xi_case2(double xi)
{
    require_xi(xi, "xi_case2");
    return 3.0 - 2.0 * std::cos(xi) - 2.0 * std::sin(xi) + std::sin(2.0 * xi) / kPi;
}
double xi_case2_d1(double xi)
{
    require_xi(xi, "xi_case2");
    return 2.0 * std::sin(xi) - 2.0 * std::cos(xi) + 2.0 * std::cos(2.0 * xi) / kPi;
}
double xi_case2_d2(double xi)
{
    require_xi(xi, "xi_case2");
    return 2.0 * std::cos(xi) + 2.0 * std::sin(xi) - 4.0 * std::sin(2.0 * xi) / kPi;
}

XiProfile xi_profile_sqz()
{
    return {"sqz", xi_sqz, xi_sqz_d1, xi_sqz_d2};
}
XiProfile xi_profile_case1()
{
    return {"case1", xi_case1, xi_case1_d1, xi_case1_d2};
}
XiProfile xi_profile_case2()
{
    return {"case2", xi_case2, xi_case2_d1, xi_case2_d2};
}
XiProfile xi_profile_constant_one()
{
    return {"constant-one", [](double) { return 1.0; }, [](double) { return 0.0; },
            [](double) { return 0.0; }};
}

IsomorphismRep squeezed_rep()
{
    return {"sqz", {FProvenance::AnalyticSqz, f_sqz, nullptr}, xi_profile_sqz()};
}
IsomorphismRep case1_rep()
{
    return {"case1", {FProvenance::AnalyticCase1, f_case1, nullptr}, xi_profile_case1()};
}
IsomorphismRep case2_rep()
{
    return {"case2", {FProvenance::AnalyticCase2, f_case2, nullptr}, xi_profile_case2()};
}

XiProfile builtin_xi_profile(const std::string& name)
{
    if (name == "sqz")
        return xi_profile_sqz();
    if (name == "case1")
        return xi_profile_case1();
    if (name == "case2")
        return xi_profile_case2();
    if (name == "constant-one")
        return xi_profile_constant_one();
    throw std::invalid_argument("unknown Xi profile '" + name + "'");
}

IsomorphismRep builtin_rep(const std::string& name)
{
    if (name == "sqz")
        return squeezed_rep();
    if (name == "case1")
        return case1_rep();
    if (name == "case2")
        return case2_rep();
    throw std::invalid_argument("unknown representation '" + name + "'");
}

XiProfile xi_profile_from_table(const std::vector<double>& xi, const std::vector<double>& value,
                                std::string name)
{
    if (xi.size() != value.size())
        throw std::invalid_argument("xi table: column lengths differ");
    if (xi.size() < 8)
        throw std::invalid_argument("xi table: need at least 8 points");
    const double step = (xi.back() - xi.front()) / static_cast<double>(xi.size() - 1);
    if (std::abs(xi.front()) > 1e-12 || std::abs(xi.back() - kHalfPi) > 1e-9)
        throw std::invalid_argument("xi table: grid must span [0, pi/2]");
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (!std::isfinite(value[i]))
            throw std::invalid_argument("xi table: non-finite value");
        if (std::abs(xi[i] - static_cast<double>(i) * step) > 1e-9 * kHalfPi)
            throw std::invalid_argument("xi table: grid must be uniformly spaced");
    }
    // Quintic spline: Xi'' stays C^2, which the Abel quadrature needs to
    // converge at modest table sizes. End derivatives are fourth-order
    // one-sided differences; Boost's default estimate leaves errors near the
    // ends large enough to break the symmetry check.
    const std::size_t n = value.size();
    const double* v = value.data();
    const double* w = value.data() + n - 1;  // w[-k] = value[n - 1 - k]
    const double h1 = 12.0 * step;
    const double h2 = 12.0 * step * step;
    const std::pair<double, double> left{
        (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / h1,
        (45.0 * v[0] - 154.0 * v[1] + 214.0 * v[2] - 156.0 * v[3] + 61.0 * v[4] - 10.0 * v[5]) / h2};
    const std::pair<double, double> right{
        (25.0 * w[0] - 48.0 * w[-1] + 36.0 * w[-2] - 16.0 * w[-3] + 3.0 * w[-4]) / h1,
        (45.0 * w[0] - 154.0 * w[-1] + 214.0 * w[-2] - 156.0 * w[-3] + 61.0 * w[-4] - 10.0 * w[-5]) / h2};
    using Spline = boost::math::interpolators::cardinal_quintic_b_spline<double>;
    auto spline = std::make_shared<const Spline>(v, n, 0.0, step, left, right);
    auto clamp = [](double x) { return std::clamp(x, 0.0, kHalfPi); };
    return {std::move(name), [spline, clamp](double x) { return (*spline)(clamp(x)); },
            [spline, clamp](double x) { return spline->prime(clamp(x)); },
            [spline, clamp](double x) { return spline->double_prime(clamp(x)); }};
}

FGenerator f_generator_from_table(std::vector<double> y, std::vector<double> f, FProvenance provenance)
{
    auto table = std::make_shared<const FTable>(std::move(y), std::move(f));
    FGenerator gen;
    gen.provenance = provenance;
    gen.table = table;
    gen.value = [table](double v) {
        require_y(v, "f(table)");
        return (*table)(v);
    };
    return gen;
}

//---------------------------------------------------------------------------//
// Operations
//---------------------------------------------------------------------------//

double weight(const IsomorphismRep& rep, double y0, double yt)
{
    const double a0 = std::abs(y0);
    const double at = std::abs(yt);
    if (!(a0 <= 0.5) || !(at <= 0.5))
        throw std::domain_error("weight: |y| must not exceed 1/2");
    return rep.f(a0 < at ? a0 : at);
}

bool XiValidationReport::ok() const
{
    return !checks.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

const ValidationCheck* XiValidationReport::find(const std::string& name) const
{
    for (const auto& c : checks)
        if (c.name == name)
            return &c;
    return nullptr;
}

std::string XiValidationReport::summary() const
{
    std::ostringstream os;
    os.precision(3);
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& c = checks[i];
        os << (i ? "; " : "") << c.name << (c.passed ? " ok" : " FAILED") << " (" << c.measured
           << " vs " << c.tolerance << ")";
    }
    return os.str();
}

XiValidationReport validate_xi(const XiProfile& xi)
{
    XiValidationReport rep;
    const std::size_t n = kValidationGrid;
    std::vector<double> vals(n);
    bool finite = true;
    double max_abs = 0.0;
    try {
        for (std::size_t k = 0; k < n; ++k) {
            vals[k] = xi.value(kHalfPi * static_cast<double>(k) / static_cast<double>(n - 1));
            finite = finite && std::isfinite(vals[k]);
            max_abs = std::max(max_abs, std::abs(vals[k]));
        }
    } catch (const std::exception&) {
        finite = false;
    }
    rep.checks.push_back({"finite", finite, finite ? max_abs : INFINITY, INFINITY});
    if (!finite) {
        rep.checks.push_back({"symmetry", false, NAN, 1e-10});
        rep.checks.push_back({"xi(0)=1", false, NAN, 1e-8});
        rep.checks.push_back({"xi''(0)=2", false, NAN, 1e-4});
        rep.checks.push_back({"positive", false, NAN, 1e-6});
        return rep;
    }

    double asym = 0.0;
    double min_val = vals[0];
    for (std::size_t k = 0; k < n; ++k) {
        asym = std::max(asym, std::abs(vals[n - 1 - k] - vals[k]));
        min_val = std::min(min_val, vals[k]);
    }
    rep.checks.push_back({"symmetry", asym <= 1e-10, asym, 1e-10});

    const double d0 = std::abs(vals[0] - 1.0);
    rep.checks.push_back({"xi(0)=1", d0 <= 1e-8, d0, 1e-8});

    double curv = NAN;
    try {
        curv = std::abs(xi.deriv2(0.0) - 2.0);
    } catch (const std::exception&) {
    }
    rep.checks.push_back({"xi''(0)=2", curv <= 1e-4, curv, 1e-4});
    rep.checks.push_back({"positive", min_val >= 1e-6, min_val, 1e-6});
    return rep;
}

double abel_B(const XiProfile& xi, double z)
{
    if (!(z >= 0.0 && z < 1.0))
        throw std::domain_error("abel_B: z must lie in [0, 1)");
    const double c = std::sqrt((1.0 - z) * (1.0 + z));
    const double angle = std::asin(z);
    return 2.0 * z * z * c * xi.value(angle) + z * z * z * xi.deriv1(angle);
}

double abel_B_prime(const XiProfile& xi, double z)
{
    if (!(z >= 0.0 && z < 1.0))
        throw std::domain_error("abel_B_prime: z must lie in [0, 1)");
    const double c = std::sqrt((1.0 - z) * (1.0 + z));
    return bprime(xi, z, c, std::atan2(z, c));
}

double abel_chi(const XiProfile& xi, double z)
{
    if (!(z >= 0.0 && z < 1.0))
        throw std::domain_error("abel_chi: z must lie in [0, 1)");
    const double r = std::sqrt((1.0 - z) * (1.0 + z));
    const double angle = std::asin(z);
    const double dz1 = xi.deriv1(angle) / r;
    const double dz2 = (z / (r * r) * xi.deriv1(angle) + xi.deriv2(angle) / r) / r;
    const double z2 = z * z;
    return (4.0 - 6.0 * z2) / r * xi.value(angle) + (5.0 * z * r - z2 * z / r) * dz1 + z2 * r * dz2;
}

double abel_f_value(const XiProfile& xi, double y, std::size_t order, int levels)
{
    require_y(y, "abel_f_value");
    if (levels < 1)
        throw std::invalid_argument("abel_f_value: levels must be >= 1");
    if (y == 0.0)
        return 0.0;
    const QuadratureRule& rule = gauss_legendre(order);
    const double gap = 1.0 - 2.0 * y;
    // In v = pi/2 - u: z = 2y cos v and 1 - z = (1 - 2y) + 4y sin^2(v/2).
    auto integrand = [&](double v) {
        const double sh = std::sin(0.5 * v);
        const double z = 2.0 * y * std::cos(v);
        const double c = std::sqrt((gap + 4.0 * y * sh * sh) * (1.0 + z));
        return bprime(xi, z, c, std::atan2(z, c));
    };
    // Panels [h/2^(k+1), h/2^k] graded toward v = 0, then the innermost [0, h/2^levels].
    double total = 0.0;
    double hi = kHalfPi;
    for (int k = 0; k < levels; ++k) {
        const double lo = 0.5 * hi;
        total += rule.integrate(integrand, lo, hi);
        hi = lo;
    }
    total += rule.integrate(integrand, 0.0, hi);
    return total;
}

std::vector<double> default_y_grid(std::size_t points)
{
    if (points < 4)
        throw std::invalid_argument("default_y_grid: need at least 4 points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = 0.5 * static_cast<double>(i) / static_cast<double>(points - 1);
    g.back() = 0.5;
    return g;
}

FGenerator abel_solve_f(const XiProfile& xi, const std::vector<double>& y_grid, const AbelOptions& opts)
{
    if (!opts.bypass_validation) {
        XiValidationReport report = validate_xi(xi);
        if (!report.ok()) {
            const std::string what = "Xi profile '" + xi.name + "' is not admissible: " + report.summary();
            throw RepresentationError(what, std::move(report));
        }
    }
    if (opts.quad_order < 2)
        throw std::invalid_argument("abel_solve_f: quadrature order must be >= 2");

    std::vector<double> f(y_grid.size());
    for (std::size_t i = 0; i < y_grid.size(); ++i) {
        const double y = y_grid[i];
        require_y(y, "abel_solve_f");
        // Grading depth only needs to resolve the near-singular width ~ sqrt(1 - 2y).
        const double gap = 1.0 - 2.0 * y;
        const int depth =
            gap > 0.0 ? std::clamp(static_cast<int>(std::ceil(-std::log2(gap))) + 4, 2, opts.levels)
                      : opts.levels;
        const double coarse = abel_f_value(xi, y, opts.quad_order, depth);
        const double fine = abel_f_value(xi, y, 2 * opts.quad_order, depth);
        if (opts.check_convergence && !(std::abs(fine - coarse) <= opts.convergence_tol)) {
            std::ostringstream os;
            os << "abel_solve_f: quadrature did not converge at y = " << y << " (orders "
               << opts.quad_order << " and " << 2 * opts.quad_order << " differ by "
               << std::abs(fine - coarse) << ")";
            throw RepresentationError(os.str());
        }
        f[i] = fine;
    }
    return f_generator_from_table(y_grid, std::move(f), FProvenance::AbelSolved);
}

FGenerator abel_solve_f(const XiProfile& xi, const AbelOptions& opts)
{
    return abel_solve_f(xi, default_y_grid(), opts);
}

double residual_integral_equation(const IsomorphismRep& rep, double xi, std::size_t order)
{
    require_xi(xi, "residual_integral_equation");
    const double sx = std::sin(xi);
    const double lhs = 0.5 * kPi * rep.xi.value(xi) * sx * sx;
    const QuadratureRule& rule = gauss_legendre(order);
    const double rhs = rule.integrate(
        [&](double s) {
            const double ss = std::sin(s);
            return ss * rule.integrate([&](double tau) { return rep.f(0.5 * ss * std::sin(tau)); },
                                       0.0, xi);
        },
        0.0, kHalfPi);
    return std::abs(lhs - rhs);
}

std::vector<double> residual_xi_grid(std::size_t points)
{
    std::vector<double> g(points);
    for (std::size_t k = 0; k < points; ++k)
        g[k] = (static_cast<double>(k) + 0.5) * kHalfPi / static_cast<double>(points);
    return g;
}

double max_residual(const IsomorphismRep& rep, std::size_t points, std::size_t order)
{
    double worst = 0.0;
    for (double xi : residual_xi_grid(points))
        worst = std::max(worst, residual_integral_equation(rep, xi, order));
    return worst;
}

}  // namespace cpsdyn
