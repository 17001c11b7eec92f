#pragma once

// Closed-form variance predictors for the estimator.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "rcfo/estimator.hpp"
#include "rcfo/types.hpp"

namespace rcfo {

/// SNR-like ratios of one tone pair: phi_x = P1 P2 / sigma^4, phi_plus = (P1 + P2) / sigma^2, P = |X|^2 |H|^2.
template <typename Scalar = double>
struct ToneSnr {
    Scalar phi_x = 0;
    Scalar phi_plus = 0;
};

/// tones[l][q] lists the pairs of region q in block l.
template <typename Scalar = double>
using ToneTable = std::vector<std::vector<std::vector<ToneSnr<Scalar>>>>;

enum class Assumptions : std::uint8_t { General, A1A2A3 };

template <typename Scalar = double>
struct VariancePrediction {
    Scalar var_eta = 0;
    Scalar var_eps = 0;
    WeightMode mode = WeightMode::Weighted;
    Assumptions assumptions = Assumptions::General;
    Stage1Basis basis = Stage1Basis::Slope;
};

template <typename Scalar>
ToneSnr<Scalar> tone_snr(Scalar p1, Scalar p2, Scalar noise_var) {
    return {p1 * p2 / (noise_var * noise_var), (p1 + p2) / noise_var};
}

/// Per-(block, region) effective SNR. Weighted: sum phi_x / (phi_plus + 1).
/// Simplified: (sum phi_x)^2 / sum phi_x (phi_plus + 1).
template <typename Scalar>
Scalar f_lq(std::span<const ToneSnr<Scalar>> tones, WeightMode mode) {
    if (tones.empty()) throw std::invalid_argument("F_lq needs at least one pair");
    if (mode == WeightMode::Weighted) {
        Scalar s = 0;
        for (const auto& t : tones) s += t.phi_x / (t.phi_plus + 1);
        return s;
    }
    Scalar num = 0;
    Scalar den = 0;
    for (const auto& t : tones) {
        num += t.phi_x;
        den += t.phi_x * (t.phi_plus + 1);
    }
    if (!(den > 0)) throw std::invalid_argument("F_lq denominator must be positive");
    return num * num / den;
}

template <typename Scalar>
Scalar f_lq(const std::vector<ToneSnr<Scalar>>& tones, WeightMode mode) {
    return f_lq<Scalar>(std::span<const ToneSnr<Scalar>>(tones), mode);
}

/// Builds the pair table from true symbols, true CTF and the noise power.
template <typename Scalar>
ToneTable<Scalar> tone_table(const FreqBlocks<Scalar>& x, const CMatrix<Scalar>& ctf, Scalar noise_var,
                             const RegionPlan& plan) {
    if (!(noise_var > 0)) throw std::invalid_argument("tone table needs a positive noise variance");
    ToneTable<Scalar> table(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index l = 0; l < x.rows(); ++l) {
        auto& row = table[static_cast<std::size_t>(l)];
        row.resize(plan.pair_sets.size());
        for (std::size_t q = 0; q < plan.pair_sets.size(); ++q) {
            for (const auto& [k1, k2] : plan.pair_sets[q]) {
                const Scalar p1 = std::norm(x(l, k1)) * std::norm(ctf(l, k1));
                const Scalar p2 = std::norm(x(l, k2)) * std::norm(ctf(l, k2));
                row[q].push_back(tone_snr(p1, p2, noise_var));
            }
        }
    }
    return table;
}

/// General variances from the per-cell F_{l,q}:
///   Var = 81 sum_q W_q [sum_l (2l - M + 1)^2 / F_lq] / (32 N^4 (Q^2-1)^2 pi^2 (1+g)^2 M^2 (M^2-1)^2)
/// with W_q = 16 N^2 (2q - Q - 1)^2 for eta and 4 N^4 (2q - 1 - (4Q^2 - 1) / (3Q))^2 for eps.
template <typename Scalar>
VariancePrediction<Scalar> var_general(const ToneTable<Scalar>& tones, const SystemConfig& cfg, WeightMode mode) {
    const int m = cfg.m;
    const int qn = cfg.q;
    if (m < 2 || qn < 2) throw std::invalid_argument("variance needs M >= 2 and Q >= 2");
    if (tones.size() != static_cast<std::size_t>(m)) throw std::invalid_argument("tone table must have M rows");

    const Scalar n = Scalar(cfg.n);
    const Scalar Q = Scalar(qn);
    const Scalar M = Scalar(m);
    const Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar one_g = Scalar(1) + Scalar(cfg.g());

    Scalar sum_eta = 0;
    Scalar sum_eps = 0;
    for (int q = 1; q <= qn; ++q) {
        Scalar inner = 0;
        for (int l = 0; l < m; ++l) {
            const auto& cell = tones[static_cast<std::size_t>(l)];
            if (cell.size() != static_cast<std::size_t>(qn)) throw std::invalid_argument("tone table must have Q regions");
            const Scalar w = Scalar(2 * l - m + 1);
            inner += w * w / f_lq<Scalar>(cell[static_cast<std::size_t>(q - 1)], mode);
        }
        const Scalar u = 16 * n * n * std::pow(Scalar(2 * q - qn - 1), 2);
        const Scalar y = 4 * std::pow(n, 4) * std::pow(Scalar(2 * q - 1) - (4 * Q * Q - 1) / (3 * Q), 2);
        sum_eta += u * inner;
        sum_eps += y * inner;
    }
    const Scalar denom = 32 * std::pow(n, 4) * std::pow(Q * Q - 1, 2) * pi * pi * one_g * one_g * M * M *
                         std::pow(M * M - 1, 2);
    return {81 * sum_eta / denom, 81 * sum_eps / denom, mode, Assumptions::General, Stage1Basis::Slope};
}

/// Flat fading, constant modulus and N/(2Q) pairs per region. snr is the linear per-tone SNR.
template <typename Scalar = double>
VariancePrediction<Scalar> var_a1a2a3(const SystemConfig& cfg, Scalar snr, WeightMode mode = WeightMode::Weighted) {
    if (!(snr > 0)) throw std::invalid_argument("SNR must be positive");
    if (cfg.m < 2 || cfg.q < 2) throw std::invalid_argument("variance needs M >= 2 and Q >= 2");
    const Scalar n = Scalar(cfg.n);
    const Scalar Q = Scalar(cfg.q);
    const Scalar M = Scalar(cfg.m);
    const Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar one_g = Scalar(1) + Scalar(cfg.g());
    const Scalar common = pi * pi * one_g * one_g * M * (M + 1) * (M - 1) * (Q * Q - 1) * snr;
    const Scalar var_eta = 18 * Q * Q / (common * n * n * n);
    const Scalar var_eps = 6 * (4 * Q * Q - 1) / (4 * common * n);
    return {var_eta, var_eps, mode, Assumptions::A1A2A3, Stage1Basis::Slope};
}

/// Variance inflation when c_q is taken from the stage-1 intercept instead of the slope,
/// as published: (8M - 4)(M - 1)(1 + g)^2 / (1 + 2g)^2.
inline double intercept_factor(int m, double g) {
    return (8.0 * m - 4.0) * (m - 1.0) * (1.0 + g) * (1.0 + g) / ((1.0 + 2.0 * g) * (1.0 + 2.0 * g));
}

/// Ratio Var{c_intercept} / Var{c_slope} of the two stage-1 coefficients under
/// i.i.d. phase noise, from the ordinary least-squares covariance of the fit.
inline double intercept_factor_ols(const SystemConfig& cfg) {
    const double m = cfg.m;
    const double s = stage1_slope_coef(cfg);
    const double i = stage1_intercept_coef(cfg);
    const double var_slope = 12.0 / (m * (m * m - 1.0)) / (s * s);
    const double var_icpt = (4.0 * m - 2.0) / (m * (m + 1.0)) / (i * i);
    return var_icpt / var_slope;
}

template <typename Scalar>
VariancePrediction<Scalar> var_intercept(const SystemConfig& cfg, VariancePrediction<Scalar> base) {
    const Scalar f = Scalar(intercept_factor(cfg.m, cfg.g()));
    base.var_eta *= f;
    base.var_eps *= f;
    base.basis = Stage1Basis::Intercept;
    return base;
}

template <typename Scalar = double>
struct CsOrdering {
    Scalar f_weighted = 0;
    Scalar f_simplified = 0;
    Scalar gap = 0;              ///< f_weighted - f_simplified
    bool phi_plus_constant = false;
};

/// Cauchy-Schwarz ordering of the two combining rules; the gap is zero iff phi_plus is constant.
template <typename Scalar>
CsOrdering<Scalar> check_cs_ordering(std::span<const ToneSnr<Scalar>> tones, Scalar tol = Scalar(1e-12)) {
    if (tones.empty()) throw std::invalid_argument("ordering check needs at least one pair");
    CsOrdering<Scalar> out;
    out.f_weighted = f_lq<Scalar>(tones, WeightMode::Weighted);
    out.f_simplified = f_lq<Scalar>(tones, WeightMode::Simplified);
    out.gap = out.f_weighted - out.f_simplified;
    Scalar lo = tones[0].phi_plus;
    Scalar hi = tones[0].phi_plus;
    for (const auto& t : tones) {
        lo = std::min(lo, t.phi_plus);
        hi = std::max(hi, t.phi_plus);
    }
    out.phi_plus_constant = (hi - lo) <= tol * std::max(Scalar(1), std::abs(hi));
    return out;
}

template <typename Scalar>
CsOrdering<Scalar> check_cs_ordering(const std::vector<ToneSnr<Scalar>>& tones, Scalar tol = Scalar(1e-12)) {
    return check_cs_ordering<Scalar>(std::span<const ToneSnr<Scalar>>(tones), tol);
}

}  // namespace rcfo
