#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rcfo {

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using CVector = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Row l holds block l, column k holds subcarrier k.
template <typename Scalar>
using CMatrix = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// M x N matrix of transmitted frequency-domain symbols X_{l,k}.
template <typename Scalar>
using FreqBlocks = CMatrix<Scalar>;

/// M x N matrix of post-DFT received values R_{l,k}.
template <typename Scalar>
using BlockGrid = CMatrix<Scalar>;

/// M * (N + N_g) time samples at the nominal rate.
template <typename Scalar>
using TimeFrame = CVector<Scalar>;

enum class Role : std::uint8_t { Pilot, Data, Null };

struct Constellation {
    enum class Kind : std::uint8_t { Psk, Qam };

    Kind kind = Kind::Psk;
    int order = 16;

    static Constellation psk(int order) { return {Kind::Psk, order}; }
    static Constellation qam(int order) { return {Kind::Qam, order}; }

    bool constant_modulus() const { return kind == Kind::Psk; }

    friend bool operator==(const Constellation&, const Constellation&) = default;
};

/// Static OFDM dimensions shared by every module.
struct SystemConfig {
    int n = 512;        ///< subcarriers (power of two)
    int n_g = 64;       ///< guard samples
    int m = 10;         ///< OFDM blocks per estimate
    int q = 4;          ///< subcarrier regions
    double t_s = 100e-9;
    double f_c = 5e9;
    Constellation constellation = Constellation::psk(16);
    std::vector<Role> roles;  ///< size n; empty means every tone is a pilot

    int n_b() const { return n + n_g; }
    double g() const { return static_cast<double>(n_g) / n; }

    Role role(int k) const { return roles.empty() ? Role::Pilot : roles[static_cast<std::size_t>(k)]; }
    bool is_null(int k) const { return role(k) == Role::Null; }

    /// Throws std::invalid_argument when the dimensions are inconsistent.
    void validate() const {
        if (n < 2 || (n & (n - 1)) != 0) throw std::invalid_argument("n must be a power of two >= 2");
        if (n_g < 0) throw std::invalid_argument("n_g must be non-negative");
        if (m < 1) throw std::invalid_argument("m must be positive");
        if (q < 2 || q % 2 != 0) throw std::invalid_argument("q must be even and >= 2");
        if (n % q != 0) throw std::invalid_argument("n must be divisible by q");
        if (!(t_s > 0.0)) throw std::invalid_argument("t_s must be positive");
        if (!roles.empty() && roles.size() != static_cast<std::size_t>(n))
            throw std::invalid_argument("roles must list every subcarrier");
    }
};

/// The evaluation setup used throughout: N=512, N_g=64, M=10, Q=4, 5 GHz, 100 ns, 16-PSK, all pilots.
inline SystemConfig standard_config() { return SystemConfig{}; }

inline SystemConfig make_config(int n, int n_g, int m, int q) {
    SystemConfig cfg;
    cfg.n = n;
    cfg.n_g = n_g;
    cfg.m = m;
    cfg.q = q;
    cfg.validate();
    return cfg;
}

}  // namespace rcfo
