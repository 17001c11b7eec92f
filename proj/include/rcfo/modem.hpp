#pragma once

// Constellation mapping, unitary DFT pair and cyclic-prefix framing.

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "rcfo/random.hpp"
#include "rcfo/types.hpp"

namespace rcfo {

namespace detail {

inline bool is_square_qam(int order) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    return order >= 4 && side * side == order;
}

template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
    thread_local Eigen::FFT<Scalar> engine = [] {
        Eigen::FFT<Scalar> f;
        f.SetFlag(Eigen::FFT<Scalar>::Unscaled);
        return f;
    }();
    return engine;
}

}  // namespace detail

/// Maps constellation indices to unit-average-power points. PSK index i lands at exp(j 2 pi i / order);
/// square QAM uses row-major order over the I/Q grid.
template <typename Scalar = double>
CVector<Scalar> map_symbols(std::span<const int> indices, const Constellation& c) {
    if (c.kind == Constellation::Kind::Psk && c.order < 2) throw std::invalid_argument("PSK order must be >= 2");
    if (c.kind == Constellation::Kind::Qam && !detail::is_square_qam(c.order))
        throw std::invalid_argument("QAM order must be a square >= 4");

    CVector<Scalar> out(static_cast<Eigen::Index>(indices.size()));
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(c.order))));
    // Mean of |a|^2 over the I/Q grid {-(side-1), ..., side-1} step 2, both axes.
    const Scalar qam_scale = std::sqrt(Scalar(3) / (Scalar(2) * Scalar(c.order - 1)));
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const int idx = indices[i];
        if (idx < 0 || idx >= c.order) throw std::invalid_argument("symbol index out of range");
        if (c.kind == Constellation::Kind::Psk) {
            // Quarter-turn points are set exactly so that index order/4 maps to 0+1j.
            const int quarter = 4 * idx;
            if (quarter % c.order == 0) {
                static constexpr Scalar re[] = {1, 0, -1, 0};
                static constexpr Scalar im[] = {0, 1, 0, -1};
                const int turn = quarter / c.order;
                out[static_cast<Eigen::Index>(i)] = {re[turn], im[turn]};
            } else {
                out[static_cast<Eigen::Index>(i)] =
                    std::polar(Scalar(1), Scalar(2) * std::numbers::pi_v<Scalar> * idx / c.order);
            }
        } else {
            const int row = idx / side;
            const int col = idx % side;
            out[static_cast<Eigen::Index>(i)] = {qam_scale * Scalar(2 * col - side + 1),
                                                 qam_scale * Scalar(2 * row - side + 1)};
        }
    }
    return out;
}

/// Draws an M x N grid of uniformly random constellation points; null tones are zero.
template <typename Scalar = double>
FreqBlocks<Scalar> random_blocks(const SystemConfig& cfg, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, cfg.constellation.order - 1);
    std::vector<int> idx(static_cast<std::size_t>(cfg.n));
    FreqBlocks<Scalar> x(cfg.m, cfg.n);
    for (int l = 0; l < cfg.m; ++l) {
        for (auto& v : idx) v = pick(rng);
        x.row(l) = map_symbols<Scalar>(idx, cfg.constellation).transpose();
        for (int k = 0; k < cfg.n; ++k)
            if (cfg.is_null(k)) x(l, k) = Complex<Scalar>(0);
    }
    return x;
}

/// Forward DFT scaled by 1/sqrt(N).
template <typename Scalar>
CVector<Scalar> unitary_dft(const CVector<Scalar>& in) {
    CVector<Scalar> out(in.size());
    detail::fft_engine<Scalar>().fwd(out.data(), in.data(), static_cast<int>(in.size()));
    return out / std::sqrt(static_cast<Scalar>(in.size()));
}

/// Inverse DFT scaled by 1/sqrt(N).
template <typename Scalar>
CVector<Scalar> unitary_idft(const CVector<Scalar>& in) {
    CVector<Scalar> out(in.size());
    detail::fft_engine<Scalar>().inv(out.data(), in.data(), static_cast<int>(in.size()));
    return out / std::sqrt(static_cast<Scalar>(in.size()));
}

/// IDFT of one block followed by a cyclic prefix of n_g samples. Returns n + n_g samples.
template <typename Scalar>
CVector<Scalar> modulate_block(const CVector<Scalar>& freq, const SystemConfig& cfg) {
    if (freq.size() != cfg.n) throw std::invalid_argument("block length must equal n");
    for (int k = 0; k < cfg.n; ++k)
        if (cfg.is_null(k) && freq[k] != Complex<Scalar>(0))
            throw std::invalid_argument("null subcarrier carries a nonzero value");

    const CVector<Scalar> body = unitary_idft<Scalar>(freq);
    CVector<Scalar> out(cfg.n_b());
    out.head(cfg.n_g) = body.tail(cfg.n_g);
    out.tail(cfg.n) = body;
    return out;
}

/// Drops the cyclic prefix and applies the unitary forward DFT.
template <typename Scalar>
CVector<Scalar> demodulate_block(const CVector<Scalar>& samples, const SystemConfig& cfg) {
    if (samples.size() != cfg.n_b()) throw std::invalid_argument("block length must equal n + n_g");
    return unitary_dft<Scalar>(samples.tail(cfg.n));
}

template <typename Scalar>
TimeFrame<Scalar> modulate_frame(const FreqBlocks<Scalar>& blocks, const SystemConfig& cfg) {
    if (blocks.rows() != cfg.m || blocks.cols() != cfg.n) throw std::invalid_argument("frame must be m x n");
    TimeFrame<Scalar> frame(static_cast<Eigen::Index>(cfg.m) * cfg.n_b());
    for (int l = 0; l < cfg.m; ++l)
        frame.segment(static_cast<Eigen::Index>(l) * cfg.n_b(), cfg.n_b()) =
            modulate_block<Scalar>(blocks.row(l).transpose(), cfg);
    return frame;
}

template <typename Scalar>
BlockGrid<Scalar> demodulate_frame(const TimeFrame<Scalar>& frame, const SystemConfig& cfg) {
    if (frame.size() != static_cast<Eigen::Index>(cfg.m) * cfg.n_b())
        throw std::invalid_argument("frame length must equal m * (n + n_g)");
    BlockGrid<Scalar> grid(cfg.m, cfg.n);
    for (int l = 0; l < cfg.m; ++l)
        grid.row(l) =
            demodulate_block<Scalar>(frame.segment(static_cast<Eigen::Index>(l) * cfg.n_b(), cfg.n_b()), cfg)
                .transpose();
    return grid;
}

}  // namespace rcfo
