#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpsdyn {

using ScalarFn = std::function<double(double)>;

/*!
 * Normalization profile Xi(xi) on [0, pi/2].
 *
 * An admissible profile is bounded, symmetric about pi/4, and satisfies
 * Xi(0) = 1 and Xi''(0) = 2. Derivatives fall back to fourth-order finite
 * differences (step 1e-4, one-sided near the ends) when d1/d2 are unset.
 */
struct XiProfile {
    std::string name;
    ScalarFn value;
    ScalarFn d1;
    ScalarFn d2;

    double operator()(double xi) const { return value(xi); }
    double deriv1(double xi) const;
    double deriv2(double xi) const;
};

enum class FProvenance { AnalyticSqz, AnalyticCase1, AnalyticCase2, AbelSolved, Tabulated };

/// Tabulated f(y): cubic Hermite interpolation with slopes from the local
/// four-point Lagrange cubic. Grid need not be uniform.
class FTable {
  public:
    FTable(std::vector<double> y, std::vector<double> f);
    ~FTable();
    FTable(const FTable&) = delete;
    FTable& operator=(const FTable&) = delete;

    double operator()(double y) const;
    const std::vector<double>& y() const { return y_; }
    const std::vector<double>& f() const { return f_; }

  private:
    struct Impl;
    std::vector<double> y_;
    std::vector<double> f_;
    std::unique_ptr<Impl> impl_;
};

/// Weight generator f(y) on [0, 1/2].
struct FGenerator {
    FProvenance provenance = FProvenance::Tabulated;
    ScalarFn value;
    std::shared_ptr<const FTable> table;  // set for AbelSolved and Tabulated

    double operator()(double y) const { return value(y); }
};

struct IsomorphismRep {
    std::string name;
    FGenerator f;
    XiProfile xi;
};

//---------------------------------------------------------------------------//
// Built-in pairs
//---------------------------------------------------------------------------//

/// Squeezed triangle-window weight: 2 - 1/(2 (y + 1/2)^2).
double f_sqz(double y);
double f_case1(double y);
/// Uses K(4y^2), E(4y^2) in the parameter convention.
double f_case2(double y);

/// sec^2 xi - 4 (1 - 2 xi cot 2xi) / (pi sin 2xi), with series near both ends.
double xi_sqz(double xi);
double xi_sqz_d1(double xi);
double xi_sqz_d2(double xi);

/// (3 - cos^4 xi - sin^4 xi - 4 sin(2 xi)/pi) / 2
double xi_case1(double xi);
double xi_case1_d1(double xi);
double xi_case1_d2(double xi);

/// 3 - 2 cos xi - 2 sin xi + sin(2 xi)/pi
double xi_case2(double xi);
double xi_case2_d1(double xi);
double xi_case2_d2(double xi);

XiProfile xi_profile_sqz();
XiProfile xi_profile_case1();
XiProfile xi_profile_case2();
/// Xi == 1. Fails the curvature condition; kept as a diagnostic.
XiProfile xi_profile_constant_one();

IsomorphismRep squeezed_rep();
IsomorphismRep case1_rep();
IsomorphismRep case2_rep();

/// Look up "sqz", "case1", "case2" or "constant-one". Throws on unknown names.
XiProfile builtin_xi_profile(const std::string& name);
IsomorphismRep builtin_rep(const std::string& name);

/// Uniformly spaced (xi, value) samples on [0, pi/2]; quintic B-spline with
/// analytic spline derivatives. Throws if spacing is not uniform.
XiProfile xi_profile_from_table(const std::vector<double>& xi, const std::vector<double>& value,
                                std::string name = "table");
FGenerator f_generator_from_table(std::vector<double> y, std::vector<double> f,
                                  FProvenance provenance = FProvenance::Tabulated);

//---------------------------------------------------------------------------//
// Operations
//---------------------------------------------------------------------------//

/// Two-time weight f(min(|y0|, |yt|)). Throws for |y| > 1/2.
double weight(const IsomorphismRep& rep, double y0, double yt);

struct ValidationCheck {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
};

struct XiValidationReport {
    std::vector<ValidationCheck> checks;

    bool ok() const;
    const ValidationCheck* find(const std::string& name) const;
    std::string summary() const;
};

/// Symmetry, Xi(0) = 1, Xi''(0) = 2, finiteness and positivity on a
/// 1024-point grid.
XiValidationReport validate_xi(const XiProfile& xi);

/// B(z) = z sqrt(1 - z^2) d/dz [z^2 Xi(arcsin z)], z in [0, 1).
double abel_B(const XiProfile& xi, double z);
/// dB/dz = z chi(z), evaluated through xi = arcsin z.
double abel_B_prime(const XiProfile& xi, double z);
/// chi(z) in its explicit form; diagnostic used to cross-check abel_B_prime.
double abel_chi(const XiProfile& xi, double z);

/// f(y) = int_0^{pi/2} B'(2y sin u) du on `levels` geometrically graded
/// panels toward u = pi/2, each with an order-`order` Gauss-Legendre rule.
/// No admissibility or convergence checks.
double abel_f_value(const XiProfile& xi, double y, std::size_t order, int levels = 24);

struct AbelOptions {
    std::size_t quad_order = 64;
    int levels = 24;
    double convergence_tol = 1e-6;
    bool bypass_validation = false;
    bool check_convergence = true;  // diagnostics only: lets divergent profiles tabulate
};

/// Thrown when the Xi profile is inadmissible or the quadrature does not
/// converge. Carries the validation report when available.
class RepresentationError : public std::runtime_error {
  public:
    RepresentationError(const std::string& what, XiValidationReport report = {})
        : std::runtime_error(what), report_(std::move(report))
    {
    }
    const XiValidationReport& report() const { return report_; }

  private:
    XiValidationReport report_;
};

/// 1024 equispaced points on [0, 1/2].
std::vector<double> default_y_grid(std::size_t points = 1024);

/// Solve for f on `y_grid` (sorted, on [0, 1/2]) and return a tabulated
/// generator. Throws RepresentationError when validate_xi fails (unless
/// bypassed) or when orders n and 2n disagree by more than the tolerance.
FGenerator abel_solve_f(const XiProfile& xi, const std::vector<double>& y_grid,
                        const AbelOptions& opts = {});
FGenerator abel_solve_f(const XiProfile& xi, const AbelOptions& opts = {});

/// |pi Xi(xi) sin^2(xi)/2 - int_0^{pi/2} ds int_0^xi dtau sin s f(sin s sin tau / 2)|
double residual_integral_equation(const IsomorphismRep& rep, double xi, std::size_t order = 64);

/// Interior grid xi_k = (k + 1/2) (pi/2) / points.
std::vector<double> residual_xi_grid(std::size_t points = 32);
double max_residual(const IsomorphismRep& rep, std::size_t points = 32, std::size_t order = 64);

}  // namespace cpsdyn
