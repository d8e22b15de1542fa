#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cpsdyn {

// Complete elliptic integrals use the *parameter* convention m = k^2:
//
//     K(m) = int_0^{pi/2} dtheta / sqrt(1 - m sin^2 theta)
//     E(m) = int_0^{pi/2} sqrt(1 - m sin^2 theta) dtheta
//
// so ellipk(4y^2) is K evaluated at parameter 4y^2, NOT at modulus 4y^2.
// Mixing the modulus and parameter conventions is a silent error; the
// validation suite has a fault-injection check for it.

/// K(m) for m in [0, 1) via the arithmetic-geometric mean.
double ellipk(double m);
/// E(m) for m in [0, 1].
double ellipe(double m);

/// K and E given the complementary parameter mc = 1 - m, so callers that
/// know mc exactly do not lose digits forming 1 - m near m = 1.
double ellipk_complement(double mc);
double ellipe_complement(double mc);

/// Throws std::domain_error for |x| >= 1.
double arctanh(double x);

/// 1 for y > 0, else 0. h(0) = 0 is pinned.
inline double heaviside(double y) { return y > 0.0 ? 1.0 : 0.0; }
inline double positive_part(double a) { return a > 0.0 ? a : 0.0; }

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t order() const { return nodes.size(); }

    /// Integrate over [a, b].
    template <class F>
    double integrate(F&& f, double a, double b) const
    {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (b + a);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += weights[i] * f(mid + half * nodes[i]);
        return acc * half;
    }
};

/// Nodes by Newton iteration on P_n; cached per order.
const QuadratureRule& gauss_legendre(std::size_t order);

/// Single-variable running mean/variance (Welford), mergeable (Chan et al.).
class StreamingMoments {
  public:
    void push(double x);
    void merge(const StreamingMoments& other);

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    /// Unbiased sample variance; 0 for fewer than two samples.
    double variance() const;
    /// Standard error of the mean.
    double stderr_mean() const;
    double m2() const { return m2_; }

  private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// Two correlated variables sampled together: means, variances and the
/// cross moment. Used for ratio estimators a / (a + b).
class StreamingMoments2 {
  public:
    void push(double a, double b);
    void merge(const StreamingMoments2& other);

    /// Build from raw sums over a short block; callers keep blocks small
    /// enough that the sums stay well conditioned.
    static StreamingMoments2 from_sums(std::uint64_t n, double sa, double sb,
                                       double saa, double sbb, double sab);

    std::uint64_t count() const { return n_; }
    double mean_a() const { return mean_a_; }
    double mean_b() const { return mean_b_; }
    double var_a() const;
    double var_b() const;
    double cov_ab() const;

  private:
    std::uint64_t n_ = 0;
    double mean_a_ = 0.0;
    double mean_b_ = 0.0;
    double m2a_ = 0.0;
    double m2b_ = 0.0;
    double cab_ = 0.0;
};

}  // namespace cpsdyn
