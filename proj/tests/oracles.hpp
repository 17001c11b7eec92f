#pragma once

// Test-only reference computations. Nothing here calls into the library's
// transform, channel or estimator code paths.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

/// Direct O(N^2) DFT with 1/sqrt(N) scaling; sign = -1 forward, +1 inverse.
inline std::vector<cd> direct_dft(const std::vector<cd>& x, int sign) {
    const std::size_t n = x.size();
    std::vector<cd> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cd acc = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ang = sign * 2.0 * pi * static_cast<double>((k * i) % n) / static_cast<double>(n);
            acc += x[i] * cd(std::cos(ang), std::sin(ang));
        }
        out[k] = acc / std::sqrt(static_cast<double>(n));
    }
    return out;
}

/// J0 from its power series sum_m (-1)^m (x/2)^(2m) / (m!)^2.
inline double bessel_j0_series(double x) {
    double term = 1.0;
    double sum = 1.0;
    const double h = x * x / 4.0;
    for (int m = 1; m < 60; ++m) {
        term *= -h / (static_cast<double>(m) * m);
        sum += term;
    }
    return sum;
}

/// Block-l, tone-k phase of the closed-form received model (attenuation ignored).
inline double block_phase(double eps, double eta, int k, int l, int n, int n_g) {
    const double theta = eps + eta * k;
    const double nb = n + n_g;
    return pi * theta * (n - 1.0) / n + 2.0 * pi * ((l * nb + n_g) / n) * theta;
}

/// Mirror-pair phase (2 eps + eta N_q) [2 pi l (1+g) + 2 pi g + pi (N-1)/N].
inline double pair_phase(double eps, double eta, int n_q, int l, int n, int n_g) {
    const double g = static_cast<double>(n_g) / n;
    return (2.0 * eps + eta * n_q) * (2.0 * pi * l * (1.0 + g) + 2.0 * pi * g + pi * (n - 1.0) / n);
}

/// Wraps to (-pi, pi].
inline double wrap(double a) {
    double w = std::remainder(a, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

inline double sample_variance(const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace oracle
