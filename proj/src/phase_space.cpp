#include "cpsdyn/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cpsdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double a)
{
    double r = std::fmod(a, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    if (r >= kTwoPi)
        r = 0.0;
    return r;
}

void require_gamma(double gamma)
{
    if (!(gamma > -0.5) || !std::isfinite(gamma))
        throw std::invalid_argument("gamma must satisfy gamma > -1/2");
}

void require_state(int state)
{
    if (state != 1 && state != 2)
        throw std::invalid_argument("state index must be 1 or 2");
}

}  // namespace

double PhasePoint::constraint_residual() const
{
    return std::abs(action_sum() - (1.0 + 2.0 * gamma));
}

PhasePoint PhasePoint::from_coefficients(const Coefficients2& g, double gamma)
{
    return {g.g1.real(), g.g2.real(), g.g1.imag(), g.g2.imag(), gamma};
}

ActionAngle to_action_angle(const PhasePoint& pt)
{
    ActionAngle aa;
    aa.gamma = pt.gamma;
    aa.e1 = 0.5 * (pt.x1 * pt.x1 + pt.p1 * pt.p1);
    aa.e2 = 0.5 * (pt.x2 * pt.x2 + pt.p2 * pt.p2);
    aa.th1 = aa.e1 > 0.0 ? wrap_2pi(std::atan2(pt.p1, pt.x1)) : 0.0;
    aa.th2 = aa.e2 > 0.0 ? wrap_2pi(std::atan2(pt.p2, pt.x2)) : 0.0;
    return aa;
}

PhasePoint from_action_angle(const ActionAngle& aa)
{
    if (aa.e1 < 0.0 || aa.e2 < 0.0)
        throw std::invalid_argument("from_action_angle: actions must be non-negative");
    const double r1 = std::sqrt(2.0 * aa.e1);
    const double r2 = std::sqrt(2.0 * aa.e2);
    return {r1 * std::cos(aa.th1), r2 * std::cos(aa.th2), r1 * std::sin(aa.th1),
            r2 * std::sin(aa.th2), aa.gamma};
}

double scaled_action_difference(const PhasePoint& pt)
{
    const double e1 = 0.5 * (pt.x1 * pt.x1 + pt.p1 * pt.p1);
    return e1 / (1.0 + 2.0 * pt.gamma) - 0.5;
}

double angle_difference(const ActionAngle& aa)
{
    return wrap_2pi(aa.th2 - aa.th1);
}

double y_t_closed_form(double y0, double theta0_d, const PropagatorAngles& ang)
{
    const double amp = std::sqrt(std::max(0.0, 0.25 - y0 * y0));
    const double yt = y0 * std::cos(2.0 * ang.xi) +
                      amp * std::sin(2.0 * ang.xi) * std::cos(ang.varphi - ang.psi + theta0_d);
    return std::clamp(yt, -0.5, 0.5);
}

PhasePoint to_phase_point(const CpsCoords& c, double gamma)
{
    require_gamma(gamma);
    const double radius = 1.0 + 2.0 * gamma;
    ActionAngle aa;
    aa.gamma = gamma;
    aa.e1 = (c.y + 0.5) * radius;
    aa.e2 = radius - aa.e1;
    aa.th1 = c.theta1;
    aa.th2 = wrap_2pi(c.theta1 + c.theta_d);
    return from_action_angle(aa);
}

CpsCoords sample_cps_coords(RandomStream& rng)
{
    CpsCoords c;
    c.y = rng.uniform() - 0.5;
    c.theta_d = kTwoPi * rng.uniform();
    c.theta1 = kTwoPi * rng.uniform();
    return c;
}

CpsCoords sample_half_space_coords(int state, RandomStream& rng)
{
    require_state(state);
    CpsCoords c;
    // 1 - u lies in (0, 1], so y never lands on the partition boundary.
    const double mag = 0.5 * (1.0 - rng.uniform());
    c.y = state == 1 ? mag : -mag;
    c.theta_d = kTwoPi * rng.uniform();
    c.theta1 = kTwoPi * rng.uniform();
    return c;
}

PhasePoint sample_cps(double gamma, RandomStream& rng)
{
    require_gamma(gamma);
    return to_phase_point(sample_cps_coords(rng), gamma);
}

TriangleSample sample_sqc_triangle(int state, RandomStream& rng)
{
    require_state(state);
    TriangleSample s;
    double occ = 0.0;
    double other = 0.0;
    do {
        occ = 1.0 + rng.uniform();
        other = rng.uniform();
        ++s.draws;
    } while (occ + other > 2.0);
    s.e1 = state == 1 ? occ : other;
    s.e2 = state == 1 ? other : occ;
    s.th1 = kTwoPi * rng.uniform();
    s.th2 = kTwoPi * rng.uniform();
    return s;
}

PhasePoint sample_initial_window(int state, WindowKind kind, double gamma, RandomStream& rng)
{
    require_state(state);
    require_gamma(gamma);
    switch (kind) {
    case WindowKind::HalfSpace:
        return to_phase_point(sample_half_space_coords(state, rng), gamma);
    case WindowKind::SqcTriangle: {
        const TriangleSample s = sample_sqc_triangle(state, rng);
        return from_action_angle({s.e1, s.e2, s.th1, s.th2, gamma});
    }
    case WindowKind::SqcBin:
        break;
    }
    throw std::invalid_argument("sample_initial_window: bin windows are not sampling windows");
}

double sqc_triangle_window(int state, double e1, double e2)
{
    require_state(state);
    const double occ = state == 1 ? e1 : e2;
    const double other = state == 1 ? e2 : e1;
    return (occ >= 1.0 && occ <= 2.0 && occ + other <= 2.0 && other >= 0.0) ? 1.0 : 0.0;
}

double sqc_bin_window(int state, double e1, double e2)
{
    require_state(state);
    const double occ = state == 1 ? e1 : e2;
    const double other = state == 1 ? e2 : e1;
    return (occ >= 1.0 && other <= 1.0) ? 1.0 : 0.0;
}

double cps_surface_volume(double gamma, int f_states)
{
    if (f_states < 1)
        throw std::invalid_argument("cps_surface_volume: need at least one state");
    const double f = static_cast<double>(f_states);
    if (!(gamma > -1.0 / f))
        throw std::invalid_argument("cps_surface_volume: gamma must exceed -1/F");
    double factorial = 1.0;
    for (int k = 2; k < f_states; ++k)
        factorial *= static_cast<double>(k);
    return std::pow(kTwoPi, f) * std::pow(1.0 + f * gamma, f - 1.0) / factorial;
}

}  // namespace cpsdyn
