#pragma once

// Joint residual CFO/SFO estimator.
//
// The subcarriers are split into Q contiguous regions. Inside region q every
// tone pair (k1, k2) mirrored about N_q / 2 is multiplied (no conjugation), so
// the tone-dependent phase cancels and only
//
//     theta_l^q = c_q [2 pi l (1 + g) + 2 pi g + pi (N - 1) / N],   c_q = 2 eps + eta N_q
//
// survives. Weighted pair products are stacked per (block, region), their
// arguments unwrapped along the block axis, and two least-squares fits follow:
// one per region for c_q, then one across regions for (eta, eps).

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rcfo/types.hpp"

namespace rcfo {

enum class WeightMode : std::uint8_t { Weighted, Simplified };

/// Which stage-1 coefficient feeds stage 2.
enum class Stage1Basis : std::uint8_t { Slope, Intercept };

struct RegionPlan {
    int q_count = 0;
    std::vector<std::pair<int, int>> regions;                ///< [begin, end) per region
    std::vector<std::vector<std::pair<int, int>>> pair_sets;  ///< (k1, k2) per region
    std::vector<int> n_q;                                     ///< k1 + k2 target per region
};

/// Builds regions, mirror targets and pair sets. Pairs touching a null tone are
/// dropped; an empty pair set is a configuration error.
inline RegionPlan plan_regions(const SystemConfig& cfg) {
    cfg.validate();
    RegionPlan plan;
    plan.q_count = cfg.q;
    const int width = cfg.n / cfg.q;
    for (int q = 1; q <= cfg.q; ++q) {
        const int begin = (q - 1) * width;
        const int end = q * width;
        const int mid = begin + width / 2;  // left half [begin, mid), right half [mid, end)
        const int target = (cfg.n + 2 * cfg.n * (q - 1)) / cfg.q;
        std::vector<std::pair<int, int>> pairs;
        for (int k1 = begin; k1 < mid; ++k1) {
            const int k2 = target - k1;
            if (k2 < mid || k2 >= end) continue;
            if (cfg.is_null(k1) || cfg.is_null(k2)) continue;
            pairs.emplace_back(k1, k2);
        }
        if (pairs.empty()) throw std::invalid_argument("region " + std::to_string(q) + " has no usable tone pair");
        plan.regions.emplace_back(begin, end);
        plan.n_q.push_back(target);
        plan.pair_sets.push_back(std::move(pairs));
    }
    return plan;
}

/// Plain product; mirrored phases add and the k-dependence cancels.
template <typename Scalar>
Complex<Scalar> pair_correlation(Complex<Scalar> r1, Complex<Scalar> r2) {
    return r1 * r2;
}

/// Combining weight for one pair. x*_pow and h*_pow are |X|^2 and |H|^2 of the two tones.
template <typename Scalar>
Scalar weight(WeightMode mode, Scalar x1_pow, Scalar h1_pow, Scalar x2_pow, Scalar h2_pow, Scalar noise_var) {
    if (mode == WeightMode::Simplified) return Scalar(1);
    if (!(noise_var > 0)) throw std::invalid_argument("weighted combining needs a positive noise variance");
    const Scalar signal = x1_pow * h1_pow + x2_pow * h2_pow;
    return Scalar(1) / (noise_var * (signal + noise_var));
}

/// Reference symbols fed back into the correlation: pilots are known, data tones take
/// externally decided values (zero when none are supplied), null tones are zero.
template <typename Scalar>
FreqBlocks<Scalar> reference_symbols(const FreqBlocks<Scalar>& pilots, const SystemConfig& cfg,
                                     const FreqBlocks<Scalar>* decided = nullptr) {
    FreqBlocks<Scalar> ref = pilots;
    for (int k = 0; k < cfg.n; ++k) {
        switch (cfg.role(k)) {
            case Role::Pilot:
                break;
            case Role::Data:
                if (decided)
                    ref.col(k) = decided->col(k);
                else
                    ref.col(k).setZero();
                break;
            case Role::Null:
                ref.col(k).setZero();
                break;
        }
    }
    return ref;
}

/// Coherent stack Z_l^q = sum_pairs V Gamma conj(lambda_hat) for block l, region q (0-based).
/// ctf is the CSI available to the receiver; ref holds the reference symbols.
template <typename Scalar>
Complex<Scalar> stack_region(const BlockGrid<Scalar>& grid, const CMatrix<Scalar>& ctf, const FreqBlocks<Scalar>& ref,
                             const RegionPlan& plan, WeightMode mode, Scalar noise_var, int l, int q) {
    Complex<Scalar> z(0);
    for (const auto& [k1, k2] : plan.pair_sets[static_cast<std::size_t>(q)]) {
        const Complex<Scalar> a1 = ref(l, k1) * ctf(l, k1);
        const Complex<Scalar> a2 = ref(l, k2) * ctf(l, k2);
        const Complex<Scalar> lambda = a1 * a2;
        if (lambda == Complex<Scalar>(0)) continue;
        const Scalar gamma = weight<Scalar>(mode, std::norm(ref(l, k1)), std::norm(ctf(l, k1)), std::norm(ref(l, k2)),
                                            std::norm(ctf(l, k2)), noise_var);
        z += pair_correlation(grid(l, k1), grid(l, k2)) * gamma * std::conj(lambda);
    }
    return z;
}

template <typename Scalar>
struct PhaseTrack {
    RMatrix<Scalar> theta;            ///< M x Q unwrapped phases
    Eigen::MatrixXi unwrap_shifts;    ///< M x Q multiples of 2 pi added to the principal value
};

/// Principal arguments of z, unwrapped down each column so successive differences lie in (-pi, pi].
template <typename Scalar>
PhaseTrack<Scalar> extract_phases(const CMatrix<Scalar>& z) {
    constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
    PhaseTrack<Scalar> out{RMatrix<Scalar>(z.rows(), z.cols()), Eigen::MatrixXi::Zero(z.rows(), z.cols())};
    for (Eigen::Index q = 0; q < z.cols(); ++q) {
        for (Eigen::Index l = 0; l < z.rows(); ++l) {
            const Scalar principal = std::arg(z(l, q));
            if (l == 0) {
                out.theta(l, q) = principal;
                continue;
            }
            const Scalar prev = out.theta(l - 1, q);
            // Smallest shift s with principal + 2 pi s - prev in (-pi, pi].
            int shift = static_cast<int>(std::ceil((prev - principal) / two_pi - Scalar(0.5)));
            if (principal + two_pi * shift - prev <= -std::numbers::pi_v<Scalar>) ++shift;
            out.theta(l, q) = principal + two_pi * shift;
            out.unwrap_shifts(l, q) = shift;
        }
    }
    return out;
}

/// Phase-model coefficients: theta_l = c (slope_coef * l + intercept_coef).
inline double stage1_slope_coef(const SystemConfig& cfg) { return 2.0 * std::numbers::pi * (1.0 + cfg.g()); }
inline double stage1_intercept_coef(const SystemConfig& cfg) {
    return 2.0 * std::numbers::pi * cfg.g() + std::numbers::pi * (cfg.n - 1.0) / cfg.n;
}

template <typename Scalar>
struct Stage1Fit {
    Scalar c_slope;      ///< c from the block-slope coefficient (primary)
    Scalar c_intercept;  ///< c from the intercept coefficient
};

/// Least squares of one region's phase track against the observation matrix
/// A = [slope_coef * l, intercept_coef], whose two solution entries both estimate c.
template <typename Scalar>
Stage1Fit<Scalar> ls_stage1(const RVector<Scalar>& theta, const SystemConfig& cfg) {
    const Eigen::Index m = theta.size();
    if (m < 2) throw std::invalid_argument("stage-1 fit needs at least two blocks");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 2> a(m, 2);
    for (Eigen::Index l = 0; l < m; ++l) {
        a(l, 0) = Scalar(stage1_slope_coef(cfg)) * Scalar(l);
        a(l, 1) = Scalar(stage1_intercept_coef(cfg));
    }
    const Eigen::Matrix<Scalar, 2, 1> b = (a.transpose() * a).ldlt().solve(a.transpose() * theta);
    return {b(0), b(1)};
}

template <typename Scalar>
struct OffsetEstimate {
    Scalar eta;
    Scalar eps;
};

/// Least squares of c_q against rows (N_q, 2); the solution is (eta, eps).
template <typename Scalar>
OffsetEstimate<Scalar> ls_stage2(const RVector<Scalar>& c_hat, const RegionPlan& plan) {
    const Eigen::Index q = c_hat.size();
    if (q < 2) throw std::invalid_argument("stage-2 fit needs at least two regions");
    if (static_cast<std::size_t>(q) != plan.n_q.size()) throw std::invalid_argument("c_hat does not match the plan");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 2> b(q, 2);
    for (Eigen::Index i = 0; i < q; ++i) {
        b(i, 0) = Scalar(plan.n_q[static_cast<std::size_t>(i)]);
        b(i, 1) = Scalar(2);
    }
    const Eigen::Matrix<Scalar, 2, 1> mu = (b.transpose() * b).ldlt().solve(b.transpose() * c_hat);
    return {mu(0), mu(1)};
}

template <typename Scalar>
struct EstimateReport {
    Scalar eps_hat = 0;
    Scalar eta_hat = 0;
    RVector<Scalar> c_hat;              ///< per region, from the basis actually used
    RVector<Scalar> c_hat_alt;          ///< per region, from the other stage-1 coefficient
    RMatrix<Scalar> theta_hat;          ///< M x Q unwrapped phases
    Eigen::MatrixXi unwrap_shifts;      ///< M x Q
    WeightMode mode = WeightMode::Weighted;
    bool used_intercept = false;
};

struct EstimatorOptions {
    WeightMode mode = WeightMode::Weighted;
    Stage1Basis basis = Stage1Basis::Slope;
};

/// Full pipeline: plan, stack every (block, region) cell, unwrap, Q stage-1 fits, one stage-2 fit.
template <typename Scalar>
EstimateReport<Scalar> estimate(const BlockGrid<Scalar>& grid, const CMatrix<Scalar>& ctf, const FreqBlocks<Scalar>& ref,
                                const SystemConfig& cfg, EstimatorOptions opts, Scalar noise_var) {
    if (grid.rows() != cfg.m || grid.cols() != cfg.n) throw std::invalid_argument("grid must be m x n");
    if (ctf.rows() != cfg.m || ctf.cols() != cfg.n) throw std::invalid_argument("CSI must be m x n");
    if (ref.rows() != cfg.m || ref.cols() != cfg.n) throw std::invalid_argument("reference symbols must be m x n");
    const RegionPlan plan = plan_regions(cfg);

    CMatrix<Scalar> z(cfg.m, cfg.q);
    for (int l = 0; l < cfg.m; ++l)
        for (int q = 0; q < cfg.q; ++q) z(l, q) = stack_region(grid, ctf, ref, plan, opts.mode, noise_var, l, q);

    PhaseTrack<Scalar> track = extract_phases(z);

    EstimateReport<Scalar> rep;
    rep.c_hat.resize(cfg.q);
    rep.c_hat_alt.resize(cfg.q);
    const bool intercept = opts.basis == Stage1Basis::Intercept;
    for (int q = 0; q < cfg.q; ++q) {
        const Stage1Fit<Scalar> fit = ls_stage1<Scalar>(track.theta.col(q), cfg);
        rep.c_hat[q] = intercept ? fit.c_intercept : fit.c_slope;
        rep.c_hat_alt[q] = intercept ? fit.c_slope : fit.c_intercept;
    }
    const OffsetEstimate<Scalar> mu = ls_stage2<Scalar>(rep.c_hat, plan);
    rep.eta_hat = mu.eta;
    rep.eps_hat = mu.eps;
    rep.theta_hat = std::move(track.theta);
    rep.unwrap_shifts = std::move(track.unwrap_shifts);
    rep.mode = opts.mode;
    rep.used_intercept = intercept;
    return rep;
}

/// Same as above with the slope basis.
template <typename Scalar>
EstimateReport<Scalar> estimate(const BlockGrid<Scalar>& grid, const CMatrix<Scalar>& ctf, const FreqBlocks<Scalar>& ref,
                                const SystemConfig& cfg, WeightMode mode, Scalar noise_var) {
    return estimate(grid, ctf, ref, cfg, EstimatorOptions{mode, Stage1Basis::Slope}, noise_var);
}

}  // namespace rcfo
