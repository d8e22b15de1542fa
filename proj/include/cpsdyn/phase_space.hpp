#pragma once

#include <cstdint>

#include "cpsdyn/propagator.hpp"
#include "cpsdyn/rng.hpp"

namespace cpsdyn {

/// Mapping variables of a two-state system on the constraint sphere
/// sum_j (x_j^2 + p_j^2)/2 = 1 + 2 gamma.
struct PhasePoint {
    double x1 = 0.0;
    double x2 = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double gamma = 0.5;

    double action_sum() const { return 0.5 * (x1 * x1 + p1 * p1 + x2 * x2 + p2 * p2); }
    /// |action_sum - (1 + 2 gamma)|
    double constraint_residual() const;
    Coefficients2 coefficients() const { return {{x1, p1}, {x2, p2}}; }
    static PhasePoint from_coefficients(const Coefficients2& g, double gamma);
};

struct ActionAngle {
    double e1 = 0.0;
    double e2 = 0.0;
    double th1 = 0.0;
    double th2 = 0.0;
    double gamma = 0.5;

    /// Occupation-like variable N^(j) = e^(j) - gamma.
    double n1() const { return e1 - gamma; }
    double n2() const { return e2 - gamma; }
};

enum class WindowKind {
    HalfSpace,    // K11 = h(y), K22 = h(-y), with y = 0 assigned to state 2
    SqcTriangle,  // initial triangle windows 1 <= e_n <= 2, e_n + e_n' <= 2
    SqcBin,       // final bins e_m >= 1, e_m' <= 1
};

/// Sampling coordinates. gamma only enters when converting to (x, p), so
/// anything computed from these is independent of gamma bit for bit.
struct CpsCoords {
    double y = 0.0;        // scaled action difference, [-1/2, 1/2]
    double theta_d = 0.0;  // theta2 - theta1 mod 2 pi
    double theta1 = 0.0;
};

ActionAngle to_action_angle(const PhasePoint& pt);
/// Throws std::invalid_argument for a negative action.
PhasePoint from_action_angle(const ActionAngle& aa);

/// y = e1/(1 + 2 gamma) - 1/2
double scaled_action_difference(const PhasePoint& pt);
/// theta2 - theta1 wrapped into [0, 2 pi)
double angle_difference(const ActionAngle& aa);

/// y at time t from (y0, theta0_d) through the mixing angles.
double y_t_closed_form(double y0, double theta0_d, const PropagatorAngles& ang);

PhasePoint to_phase_point(const CpsCoords& c, double gamma);

/// Uniform over the whole constraint sphere.
CpsCoords sample_cps_coords(RandomStream& rng);
/// Uniform over the half sphere occupied by `state` (1: y > 0, 2: y < 0).
CpsCoords sample_half_space_coords(int state, RandomStream& rng);

/// Throws std::invalid_argument for gamma <= -1/2.
PhasePoint sample_cps(double gamma, RandomStream& rng);

struct TriangleSample {
    double e1 = 0.0;
    double e2 = 0.0;
    double th1 = 0.0;
    double th2 = 0.0;
    std::uint32_t draws = 0;  // rejection-loop iterations used
};

/// Uniform on the triangle window of `state` by rejection from [1,2]x[0,1].
TriangleSample sample_sqc_triangle(int state, RandomStream& rng);

/// HalfSpace or SqcTriangle initial conditions for `state` in {1, 2}.
/// SqcTriangle points carry gamma as a label only: the triangle does not
/// lie on a single constraint sphere.
PhasePoint sample_initial_window(int state, WindowKind kind, double gamma, RandomStream& rng);

/// Half-space window K_mm(y).
inline double half_space_window(int state, double y)
{
    return state == 1 ? (y > 0.0 ? 1.0 : 0.0) : (y <= 0.0 ? 1.0 : 0.0);
}

/// Triangle window K^SQC_nn(e).
double sqc_triangle_window(int state, double e1, double e2);
/// Bin window K^bin_mm(e).
double sqc_bin_window(int state, double e1, double e2);

/// (2 pi)^F (1 + F gamma)^(F - 1) / (F - 1)!
double cps_surface_volume(double gamma, int f_states);

}  // namespace cpsdyn
