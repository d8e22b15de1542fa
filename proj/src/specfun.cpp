#include "cpsdyn/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cpsdyn {

namespace {

constexpr double kAgmTol = 4e-16;
constexpr int kAgmMaxIter = 64;

}  // namespace

double ellipk_complement(double mc)
{
    if (!(mc > 0.0) || mc > 1.0)
        throw std::domain_error("ellipk: complementary parameter must lie in (0, 1], got " +
                                std::to_string(mc));
    double a = 1.0;
    double b = std::sqrt(mc);
    for (int it = 0; it < kAgmMaxIter && std::abs(a - b) > kAgmTol * a; ++it) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return std::numbers::pi / (a + b);
}

double ellipk(double m)
{
    if (!(m >= 0.0) || m >= 1.0)
        throw std::domain_error("ellipk: parameter m must lie in [0, 1), got " + std::to_string(m));
    return ellipk_complement(1.0 - m);
}

double ellipe_complement(double mc)
{
    if (!(mc >= 0.0) || mc > 1.0)
        throw std::domain_error("ellipe: complementary parameter must lie in [0, 1], got " +
                                std::to_string(mc));
    if (mc == 0.0)
        return 1.0;
    // E = K * (1 - sum_n 2^{n-1} c_n^2), c_0^2 = m.
    double a = 1.0;
    double b = std::sqrt(mc);
    double sum = 0.5 * (1.0 - mc);
    double pow2 = 0.5;
    for (int it = 0; it < kAgmMaxIter && std::abs(a - b) > kAgmTol * a; ++it) {
        const double c = 0.5 * (a - b);
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    const double k = std::numbers::pi / (2.0 * a);
    return k * (1.0 - sum);
}

double ellipe(double m)
{
    if (!(m >= 0.0) || m > 1.0)
        throw std::domain_error("ellipe: parameter m must lie in [0, 1], got " + std::to_string(m));
    return ellipe_complement(1.0 - m);
}

double arctanh(double x)
{
    if (!(std::abs(x) < 1.0))
        throw std::domain_error("arctanh: |x| must be < 1, got " + std::to_string(x));
    // log1p keeps full relative precision near 0 and is exactly odd.
    const double ax = std::abs(x);
    const double r = 0.5 * std::log1p(2.0 * ax / (1.0 - ax));
    return x < 0.0 ? -r : r;
}

namespace {

QuadratureRule build_gauss_legendre(std::size_t n)
{
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // Recompute derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double kk = static_cast<double>(k);
            const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
            p0 = p1;
            p1 = p2;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(std::size_t order)
{
    if (order == 0)
        throw std::invalid_argument("gauss_legendre: order must be >= 1");
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[order];
    if (!slot) {
        if (order == 1)
            slot = std::make_unique<QuadratureRule>(QuadratureRule{{0.0}, {2.0}});
        else
            slot = std::make_unique<QuadratureRule>(build_gauss_legendre(order));
    }
    return *slot;
}

//---------------------------------------------------------------------------//

void StreamingMoments::push(double x)
{
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void StreamingMoments::merge(const StreamingMoments& other)
{
    if (other.n_ == 0)
        return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const double d = other.mean_ - mean_;
    mean_ += d * nb / n;
    m2_ += other.m2_ + d * d * na * nb / n;
    n_ += other.n_;
}

double StreamingMoments::variance() const
{
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double StreamingMoments::stderr_mean() const
{
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

void StreamingMoments2::push(double a, double b)
{
    ++n_;
    const double n = static_cast<double>(n_);
    const double da = a - mean_a_;
    const double db = b - mean_b_;
    mean_a_ += da / n;
    mean_b_ += db / n;
    m2a_ += da * (a - mean_a_);
    m2b_ += db * (b - mean_b_);
    cab_ += da * (b - mean_b_);
}

void StreamingMoments2::merge(const StreamingMoments2& other)
{
    if (other.n_ == 0)
        return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const double da = other.mean_a_ - mean_a_;
    const double db = other.mean_b_ - mean_b_;
    const double f = na * nb / n;
    mean_a_ += da * nb / n;
    mean_b_ += db * nb / n;
    m2a_ += other.m2a_ + da * da * f;
    m2b_ += other.m2b_ + db * db * f;
    cab_ += other.cab_ + da * db * f;
    n_ += other.n_;
}

StreamingMoments2 StreamingMoments2::from_sums(std::uint64_t n, double sa, double sb, double saa,
                                               double sbb, double sab)
{
    StreamingMoments2 m;
    if (n == 0)
        return m;
    const double nn = static_cast<double>(n);
    m.n_ = n;
    m.mean_a_ = sa / nn;
    m.mean_b_ = sb / nn;
    m.m2a_ = std::max(0.0, saa - sa * m.mean_a_);
    m.m2b_ = std::max(0.0, sbb - sb * m.mean_b_);
    m.cab_ = sab - sa * m.mean_b_;
    return m;
}

double StreamingMoments2::var_a() const
{
    return n_ > 1 ? m2a_ / static_cast<double>(n_ - 1) : 0.0;
}

double StreamingMoments2::var_b() const
{
    return n_ > 1 ? m2b_ / static_cast<double>(n_ - 1) : 0.0;
}

double StreamingMoments2::cov_ab() const
{
    return n_ > 1 ? cab_ / static_cast<double>(n_ - 1) : 0.0;
}

}  // namespace cpsdyn
