#pragma once

// Rayleigh multipath generation and CFO/SFO/AWGN impairment models.
//
// Two fidelity levels are provided. apply_impairments_freq() synthesizes the
// post-DFT grid from the closed-form block model (no ICI, unit attenuation).
// apply_impairments_time() resamples the continuous transmit waveform at the
// drifted receiver instants, so ICI and the small inter-block leakage caused
// by timing drift appear physically.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rcfo/modem.hpp"
#include "rcfo/random.hpp"
#include "rcfo/types.hpp"

namespace rcfo {

inline constexpr double kSpeedOfLight = 2.998e8;

struct ImpairmentParams {
    double epsilon = 0.0;    ///< CFO normalized to the subcarrier spacing
    double eta = 0.0;        ///< relative SFO, (T_s' - T_s) / T_s
    double noise_var = 0.0;  ///< per-sample (and per-tone) complex noise power
    std::uint64_t seed = 0;  ///< noise stream
};

template <typename Scalar>
struct ChannelRealization {
    CMatrix<Scalar> taps;  ///< M x L, tap gains per block
    CMatrix<Scalar> ctf;   ///< M x N, unnormalized DFT of each zero-padded tap row

    int l_taps() const { return static_cast<int>(taps.cols()); }
    int blocks() const { return static_cast<int>(taps.rows()); }
};

/// Per-tap mean power exp(-l/L) / sum_l exp(-2l/L). The denominator squares the
/// terms, so the total is not one (about 1.44 for L = 32).
inline std::vector<double> exponential_profile(int l_taps) {
    if (l_taps < 1) throw std::invalid_argument("tap count must be positive");
    double denom = 0.0;
    for (int l = 0; l < l_taps; ++l) denom += std::exp(-2.0 * l / l_taps);
    std::vector<double> p(static_cast<std::size_t>(l_taps));
    for (int l = 0; l < l_taps; ++l) p[static_cast<std::size_t>(l)] = std::exp(-static_cast<double>(l) / l_taps) / denom;
    return p;
}

/// Sum of the exponential profile, i.e. the ensemble per-tone CTF power.
inline double profile_power(int l_taps) {
    double s = 0.0;
    for (double v : exponential_profile(l_taps)) s += v;
    return s;
}

/// Maximum Doppler shift v f_c / c for a terminal speed in km/h.
inline double doppler_from_speed(double speed_kmh, double f_c) { return speed_kmh / 3.6 * f_c / kSpeedOfLight; }

template <typename Scalar>
CMatrix<Scalar> taps_to_ctf(const CMatrix<Scalar>& taps, int n) {
    if (taps.cols() > n) throw std::invalid_argument("more taps than subcarriers");
    CMatrix<Scalar> ctf(taps.rows(), n);
    CVector<Scalar> padded(n);
    CVector<Scalar> spectrum(n);
    for (Eigen::Index l = 0; l < taps.rows(); ++l) {
        padded.setZero();
        padded.head(taps.cols()) = taps.row(l).transpose();
        detail::fft_engine<Scalar>().fwd(spectrum.data(), padded.data(), n);
        ctf.row(l) = spectrum.transpose();
    }
    return ctf;
}

/// Single unit tap on every block: H == 1.
template <typename Scalar = double>
ChannelRealization<Scalar> flat_channel(const SystemConfig& cfg) {
    ChannelRealization<Scalar> ch;
    ch.taps = CMatrix<Scalar>::Ones(cfg.m, 1);
    ch.ctf = CMatrix<Scalar>::Ones(cfg.m, cfg.n);
    return ch;
}

/// Independent Rayleigh taps with the exponential profile. With doppler_hz > 0
/// each tap follows a first-order Gauss-Markov process whose block-lag-1
/// correlation is J0(2 pi f_d N_B T_s); with doppler_hz == 0 taps are static.
template <typename Scalar = double>
ChannelRealization<Scalar> generate_taps(const SystemConfig& cfg, int l_taps, double doppler_hz, std::uint64_t seed) {
    if (l_taps < 1) throw std::invalid_argument("tap count must be positive");
    if (l_taps > cfg.n_g) throw std::invalid_argument("tap count exceeds the guard interval");
    if (doppler_hz < 0.0) throw std::invalid_argument("Doppler frequency must be non-negative");

    const auto profile = exponential_profile(l_taps);
    Rng init(split_seed(seed, 0));
    Rng innov(split_seed(seed, 1));

    ChannelRealization<Scalar> ch;
    ch.taps.resize(cfg.m, l_taps);
    for (int t = 0; t < l_taps; ++t) ch.taps(0, t) = complex_gaussian<Scalar>(init, Scalar(profile[static_cast<std::size_t>(t)]));

    const double block_time = cfg.n_b() * cfg.t_s;
    const Scalar rho = doppler_hz > 0.0
                           ? Scalar(std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * doppler_hz * block_time))
                           : Scalar(1);
    const Scalar drive = std::sqrt(std::max(Scalar(0), Scalar(1) - rho * rho));
    for (int l = 1; l < cfg.m; ++l) {
        if (doppler_hz > 0.0) {
            for (int t = 0; t < l_taps; ++t)
                ch.taps(l, t) = rho * ch.taps(l - 1, t) +
                                drive * complex_gaussian<Scalar>(innov, Scalar(profile[static_cast<std::size_t>(t)]));
        } else {
            ch.taps.row(l) = ch.taps.row(0);
        }
    }
    ch.ctf = taps_to_ctf<Scalar>(ch.taps, cfg.n);
    return ch;
}

/// Adds i.i.d. circular complex Gaussian noise of total power noise_var to every element.
template <typename Mat>
Mat add_awgn(Mat samples, double noise_var, std::uint64_t seed) {
    using Scalar = typename Mat::Scalar::value_type;
    if (noise_var < 0.0) throw std::invalid_argument("noise variance must be non-negative");
    if (noise_var == 0.0) return samples;
    Rng rng(seed);
    Complex<Scalar>* data = samples.data();
    for (Eigen::Index i = 0; i < samples.size(); ++i) data[i] += complex_gaussian<Scalar>(rng, Scalar(noise_var));
    return samples;
}

/// Imperfect CSI: sqrt(1 - kappa^2) H + kappa J with J ~ CN(0, 1). Taps are left untouched.
template <typename Scalar>
ChannelRealization<Scalar> perturb_csi(const ChannelRealization<Scalar>& chan, double kappa, std::uint64_t seed) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in [0, 1]");
    ChannelRealization<Scalar> out = chan;
    Rng rng(seed);
    const Scalar keep = std::sqrt(Scalar(1) - Scalar(kappa) * Scalar(kappa));
    const Scalar mix = Scalar(kappa);
    for (Eigen::Index l = 0; l < out.ctf.rows(); ++l)
        for (Eigen::Index k = 0; k < out.ctf.cols(); ++k)
            out.ctf(l, k) = keep * chan.ctf(l, k) + mix * complex_gaussian<Scalar>(rng, Scalar(1));
    return out;
}

/// Closed-form post-DFT grid: R = X H exp(j pi Theta (N-1)/N) exp(j 2 pi (l N_B + N_g) Theta / N) + W,
/// Theta_k = epsilon + eta k.
template <typename Scalar>
BlockGrid<Scalar> apply_impairments_freq(const FreqBlocks<Scalar>& x, const ChannelRealization<Scalar>& chan,
                                         const ImpairmentParams& imp, const SystemConfig& cfg) {
    if (x.rows() != cfg.m || x.cols() != cfg.n) throw std::invalid_argument("symbol grid must be m x n");
    if (chan.ctf.rows() != cfg.m || chan.ctf.cols() != cfg.n) throw std::invalid_argument("CTF must be m x n");

    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar n = Scalar(cfg.n);
    BlockGrid<Scalar> r(cfg.m, cfg.n);
    for (int l = 0; l < cfg.m; ++l) {
        const Scalar offset = Scalar(static_cast<double>(l) * cfg.n_b() + cfg.n_g) / n;
        for (int k = 0; k < cfg.n; ++k) {
            const Scalar theta = Scalar(imp.epsilon) + Scalar(imp.eta) * Scalar(k);
            const Scalar phase = pi * theta * (n - 1) / n + 2 * pi * offset * theta;
            r(l, k) = x(l, k) * chan.ctf(l, k) * std::polar(Scalar(1), phase);
        }
    }
    return add_awgn(std::move(r), imp.noise_var, imp.seed);
}

namespace detail {

/// sum_k coeff[k] exp(j 2 pi k u / N) by Horner's rule.
template <typename Scalar, typename Row>
Complex<Scalar> tone_sum(const Row& coeff, Scalar u) {
    const Eigen::Index n = coeff.size();
    const Complex<Scalar> w = std::polar(Scalar(1), 2 * std::numbers::pi_v<Scalar> * u / Scalar(n));
    Complex<Scalar> acc = coeff(n - 1);
    for (Eigen::Index k = n - 2; k >= 0; --k) acc = acc * w + coeff(k);
    return acc;
}

}  // namespace detail

/// Physical channel: the received sample p is the channel-convolved transmit waveform
/// evaluated at t = p T_s (1 + eta), rotated by exp(j 2 pi epsilon t / (N T_s)). Each
/// block's waveform is the band-limited tone sum defined by its body samples, so
/// fractional instants are evaluated exactly. Noise is not added here.
template <typename Scalar>
TimeFrame<Scalar> apply_impairments_time(const TimeFrame<Scalar>& frame, const ChannelRealization<Scalar>& chan,
                                         const ImpairmentParams& imp, const SystemConfig& cfg) {
    const Eigen::Index total = static_cast<Eigen::Index>(cfg.m) * cfg.n_b();
    if (frame.size() != total) throw std::invalid_argument("frame length must equal m * (n + n_g)");
    if (chan.blocks() != cfg.m || chan.ctf.cols() != cfg.n) throw std::invalid_argument("channel does not match config");

    const int nb = cfg.n_b();
    const int taps = chan.l_taps();
    TimeFrame<Scalar> out(total);

    if (imp.eta == 0.0) {
        for (Eigen::Index p = 0; p < total; ++p) {
            const Eigen::Index blk = p / nb;
            Complex<Scalar> acc(0);
            for (int t = 0; t < taps && t <= p; ++t) acc += chan.taps(blk, t) * frame[p - t];
            out[p] = acc;
        }
    } else {
        // Per-block tone coefficients: s_b(tau) = sum_k spec(b,k) exp(j 2 pi k (tau - N_g - b N_B) / N).
        CMatrix<Scalar> spec(cfg.m, cfg.n);
        for (int b = 0; b < cfg.m; ++b) {
            const CVector<Scalar> body = frame.segment(static_cast<Eigen::Index>(b) * nb + cfg.n_g, cfg.n);
            spec.row(b) = (unitary_dft<Scalar>(body) / std::sqrt(Scalar(cfg.n))).transpose();
        }
        const CMatrix<Scalar> shaped = spec.cwiseProduct(chan.ctf);

        auto block_of = [nb](Scalar tau) { return static_cast<Eigen::Index>(std::floor(tau / Scalar(nb))); };
        for (Eigen::Index p = 0; p < total; ++p) {
            const Scalar t = Scalar(p) * (Scalar(1) + Scalar(imp.eta));
            const Eigen::Index blk = block_of(t);
            if (blk < cfg.m && block_of(t - Scalar(taps - 1)) == blk) {
                out[p] = detail::tone_sum<Scalar>(shaped.row(blk), t - Scalar(cfg.n_g) - Scalar(blk * nb));
                continue;
            }
            // Channel memory straddles a block boundary (or the end of the frame).
            const Eigen::Index tap_blk = std::min<Eigen::Index>(blk, cfg.m - 1);
            Complex<Scalar> acc(0);
            for (int d = 0; d < taps; ++d) {
                const Scalar tau = t - Scalar(d);
                if (tau < 0) break;
                const Eigen::Index src = block_of(tau);
                if (src >= cfg.m) continue;
                acc += chan.taps(tap_blk, d) *
                       detail::tone_sum<Scalar>(spec.row(src), tau - Scalar(cfg.n_g) - Scalar(src * nb));
            }
            out[p] = acc;
        }
    }

    if (imp.epsilon != 0.0) {
        const Scalar rate = 2 * std::numbers::pi_v<Scalar> * Scalar(imp.epsilon) / Scalar(cfg.n);
        for (Eigen::Index p = 0; p < total; ++p)
            out[p] *= std::polar(Scalar(1), rate * Scalar(p) * (Scalar(1) + Scalar(imp.eta)));
    }
    return out;
}

}  // namespace rcfo
