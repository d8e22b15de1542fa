#pragma once

#include <array>
#include <complex>

namespace cpsdyn {

using complex = std::complex<double>;

/// 2x2 Hermitian generator [[h11, h12], [conj(h12), h22]], h12 = h12_re + i h12_im.
struct Hamiltonian2 {
    double h11 = 0.0;
    double h22 = 0.0;
    double h12_re = 0.0;
    double h12_im = 0.0;

    /// Two-state model with real coupling: h12 = coupling.
    static Hamiltonian2 model(double h11, double h22, double coupling)
    {
        return {h11, h22, coupling, 0.0};
    }

    complex h12() const { return {h12_re, h12_im}; }
    double coupling_sq() const { return h12_re * h12_re + h12_im * h12_im; }
    /// Frobenius norm.
    double norm() const;
    bool finite() const;
};

struct Unitary2 {
    complex u11{1.0, 0.0};
    complex u12{0.0, 0.0};
    complex u21{0.0, 0.0};
    complex u22{1.0, 0.0};

    static Unitary2 identity() { return {}; }

    /// max_ij |(U^dagger U - 1)_ij|
    double unitarity_defect() const;
    complex det() const { return u11 * u22 - u12 * u21; }
};

/// U = e^{-i Phi} [[e^{i psi} cos xi, e^{i varphi} sin xi],
///                 [-e^{-i varphi} sin xi, e^{-i psi} cos xi]]
struct PropagatorAngles {
    double xi = 0.0;         // [0, pi/2]
    double phi_total = 0.0;  // global phase Phi
    double varphi = 0.0;     // [0, 2 pi)
    double psi = 0.0;        // [0, 2 pi)
    double delta = 0.0;      // discriminant, >= 0

    Unitary2 to_unitary() const;
};

/// Mapping amplitudes g = x + i p.
struct Coefficients2 {
    complex g1{0.0, 0.0};
    complex g2{0.0, 0.0};

    double norm_sq() const { return std::norm(g1) + std::norm(g2); }
};

/// Row-major 2x2 real matrix.
using Matrix2 = std::array<std::array<double, 2>, 2>;

/// (h22 - h11)^2 + 4 |h12|^2
double discriminant(const Hamiltonian2& h);

/// True when h is proportional to the identity to working precision.
bool is_scalar(const Hamiltonian2& h);

/// exp(-i H t), closed form.
Unitary2 evolution_matrix(const Hamiltonian2& h, double t);

/// Angle parameterization of evolution_matrix(h, t).
PropagatorAngles propagator_angles(const Hamiltonian2& h, double t);

/// Entry (m, n) = |U_mn(t)|^2, i.e. the probability of ending in m from n.
Matrix2 exact_population_matrix(const Hamiltonian2& h, double t);

Coefficients2 propagate_coefficients(const Unitary2& u, const Coefficients2& g0);

/// Fixed-step RK4 integration of dg/dt = -i H g; the last step is shortened
/// so the integration lands exactly on t. Throws std::invalid_argument on
/// dt <= 0, t < 0 or non-finite input.
Coefficients2 ode_propagate(const Hamiltonian2& h, const Coefficients2& g0, double t, double dt);

}  // namespace cpsdyn
