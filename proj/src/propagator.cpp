#include "cpsdyn/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

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

// Tolerated excess of the arcsin argument above 1 (rounding only).
constexpr double kArcsinSlack = 1e-12;

}  // namespace

double Hamiltonian2::norm() const
{
    return std::sqrt(h11 * h11 + h22 * h22 + 2.0 * coupling_sq());
}

bool Hamiltonian2::finite() const
{
    return std::isfinite(h11) && std::isfinite(h22) && std::isfinite(h12_re) &&
           std::isfinite(h12_im);
}

double Unitary2::unitarity_defect() const
{
    // U^dagger U
    const complex a11 = std::conj(u11) * u11 + std::conj(u21) * u21;
    const complex a12 = std::conj(u11) * u12 + std::conj(u21) * u22;
    const complex a21 = std::conj(u12) * u11 + std::conj(u22) * u21;
    const complex a22 = std::conj(u12) * u12 + std::conj(u22) * u22;
    return std::max({std::abs(a11 - 1.0), std::abs(a12), std::abs(a21), std::abs(a22 - 1.0)});
}

Unitary2 PropagatorAngles::to_unitary() const
{
    const complex phase = std::polar(1.0, -phi_total);
    const double c = std::cos(xi);
    const double s = std::sin(xi);
    Unitary2 u;
    u.u11 = phase * std::polar(c, psi);
    u.u12 = phase * std::polar(s, varphi);
    u.u21 = -phase * std::polar(s, -varphi);
    u.u22 = phase * std::polar(c, -psi);
    return u;
}

double discriminant(const Hamiltonian2& h)
{
    const double d = h.h22 - h.h11;
    return d * d + 4.0 * h.coupling_sq();
}

bool is_scalar(const Hamiltonian2& h)
{
    const double nrm = h.norm();
    return discriminant(h) < 1e-14 * std::max(1.0, nrm * nrm);
}

Unitary2 evolution_matrix(const Hamiltonian2& h, double t)
{
    const complex phase = std::polar(1.0, -0.5 * (h.h11 + h.h22) * t);
    if (is_scalar(h)) {
        Unitary2 u;
        u.u11 = phase;
        u.u22 = phase;
        return u;
    }
    const double root = std::sqrt(discriminant(h));
    const double s = std::sin(0.5 * root * t);
    const double c = std::cos(0.5 * root * t);
    const double detune = (h.h22 - h.h11) / root;
    Unitary2 u;
    u.u11 = phase * complex(c, s * detune);
    u.u22 = phase * complex(c, -s * detune);
    u.u12 = phase * (2.0 * s / root) * complex(h.h12_im, -h.h12_re);
    u.u21 = phase * (-2.0 * s / root) * complex(h.h12_im, h.h12_re);
    return u;
}

PropagatorAngles propagator_angles(const Hamiltonian2& h, double t)
{
    PropagatorAngles ang;
    ang.phi_total = 0.5 * (h.h11 + h.h22) * t;
    if (is_scalar(h)) {
        ang.delta = 0.0;
        return ang;
    }
    ang.delta = discriminant(h);
    const double root = std::sqrt(ang.delta);
    const double s = std::sin(0.5 * root * t);
    const double c = std::cos(0.5 * root * t);
    const double coupling = std::sqrt(h.coupling_sq());

    const double arg = 2.0 * std::abs(s) * coupling / root;
    if (arg > 1.0 + kArcsinSlack)
        throw std::domain_error("propagator_angles: arcsin argument exceeds 1 by " +
                                std::to_string(arg - 1.0));
    ang.xi = std::asin(std::min(arg, 1.0));

    // cos psi and sin psi share the positive factor 1/sqrt(Delta - 4|h12|^2 s^2).
    ang.psi = wrap_2pi(std::atan2(s * (h.h22 - h.h11), c * root));

    if (s != 0.0 && coupling > 0.0) {
        const double sgn = s > 0.0 ? 1.0 : -1.0;
        ang.varphi = wrap_2pi(std::atan2(-sgn * h.h12_re, sgn * h.h12_im));
    }
    return ang;
}

Matrix2 exact_population_matrix(const Hamiltonian2& h, double t)
{
    const Unitary2 u = evolution_matrix(h, t);
    return {{{std::norm(u.u11), std::norm(u.u12)}, {std::norm(u.u21), std::norm(u.u22)}}};
}

Coefficients2 propagate_coefficients(const Unitary2& u, const Coefficients2& g0)
{
    return {u.u11 * g0.g1 + u.u12 * g0.g2, u.u21 * g0.g1 + u.u22 * g0.g2};
}

namespace {

Coefficients2 rhs(const Hamiltonian2& h, const Coefficients2& g)
{
    const complex mi(0.0, -1.0);
    return {mi * (h.h11 * g.g1 + h.h12() * g.g2), mi * (std::conj(h.h12()) * g.g1 + h.h22 * g.g2)};
}

Coefficients2 axpy(const Coefficients2& g, double a, const Coefficients2& k)
{
    return {g.g1 + a * k.g1, g.g2 + a * k.g2};
}

}  // namespace

Coefficients2 ode_propagate(const Hamiltonian2& h, const Coefficients2& g0, double t, double dt)
{
    const bool finite_g = std::isfinite(g0.g1.real()) && std::isfinite(g0.g1.imag()) &&
                          std::isfinite(g0.g2.real()) && std::isfinite(g0.g2.imag());
    if (!h.finite() || !finite_g || !std::isfinite(t) || !std::isfinite(dt))
        throw std::invalid_argument("ode_propagate: non-finite input");
    if (!(dt > 0.0))
        throw std::invalid_argument("ode_propagate: dt must be > 0");
    if (t < 0.0)
        throw std::invalid_argument("ode_propagate: t must be >= 0");

    Coefficients2 g = g0;
    double now = 0.0;
    while (now < t) {
        const double step = std::min(dt, t - now);
        const Coefficients2 k1 = rhs(h, g);
        const Coefficients2 k2 = rhs(h, axpy(g, 0.5 * step, k1));
        const Coefficients2 k3 = rhs(h, axpy(g, 0.5 * step, k2));
        const Coefficients2 k4 = rhs(h, axpy(g, step, k3));
        g.g1 += (step / 6.0) * (k1.g1 + 2.0 * k2.g1 + 2.0 * k3.g1 + k4.g1);
        g.g2 += (step / 6.0) * (k1.g2 + 2.0 * k2.g2 + 2.0 * k3.g2 + k4.g2);
        // Snap to t when the remainder is pure rounding.
        now = (t - (now + step) < 1e-12 * std::max(1.0, t)) ? t : now + step;
    }
    return g;
}

}  // namespace cpsdyn
