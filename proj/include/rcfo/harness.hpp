#pragma once

// Seeded Monte-Carlo runs of the estimator over SNR, offset, CSI-quality and
// mobility sweeps, plus CSV emission.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rcfo/estimator.hpp"
#include "rcfo/types.hpp"

namespace rcfo {

enum class ChannelKind : std::uint8_t { Flat, Multipath, Mobility };
enum class CsiKind : std::uint8_t { Genie, Perturbed, Stale };
enum class ChannelModel : std::uint8_t { TimeDomain, FreqDomain };

struct Scenario {
    SystemConfig cfg = standard_config();
    double epsilon = 0.02;
    double eta = 5e-5;
    std::vector<double> snr_db{20.0};  ///< +inf means noiseless
    int trials = 2000;
    ChannelKind channel = ChannelKind::Multipath;
    int l_taps = 32;
    double speed_kmh = 0.0;
    CsiKind csi = CsiKind::Genie;
    double kappa = 0.0;
    WeightMode mode = WeightMode::Weighted;
    ChannelModel model = ChannelModel::FreqDomain;
    std::uint64_t seed = 1;

    void validate() const;
    /// Ensemble per-tone CTF power of the configured channel.
    double channel_power() const;
    /// Noise power that realizes the given SNR (dB); zero for +inf.
    double noise_var(double snr_db) const;
};

struct MseRow {
    double snr_db = 0;
    double mse_eta = 0;
    double mse_eps = 0;
    double bias_eta = 0;
    double bias_eps = 0;
    double var_eta_pred = 0;
    double var_eps_pred = 0;
    int trials = 0;    ///< accepted trials
    int rejected = 0;  ///< trials the estimator rejected; excluded from the statistics
    WeightMode mode = WeightMode::Weighted;
};

struct SweepRow {
    double key = 0;
    MseRow row;
};

struct TrialResult {
    bool ok = false;
    double err_eta = 0;
    double err_eps = 0;
    double var_eta_pred = 0;
    double var_eps_pred = 0;
};

struct RunOptions {
    int threads = 0;  ///< 0 picks the hardware concurrency
};

/// One seeded trial at one SNR point. Trial seeds depend only on (master seed, trial index).
TrialResult run_trial(const Scenario& s, double snr_db, int trial);

std::vector<MseRow> run_scenario(const Scenario& s, RunOptions opts = {});

std::vector<SweepRow> sweep_eta(const Scenario& s, const std::vector<double>& etas, RunOptions opts = {});
std::vector<SweepRow> sweep_eps(const Scenario& s, const std::vector<double>& epsilons, RunOptions opts = {});
std::vector<SweepRow> sweep_kappa(const Scenario& s, const std::vector<double>& kappas, RunOptions opts = {});
std::vector<SweepRow> sweep_mobility(const Scenario& s, const std::vector<double>& speeds_kmh, RunOptions opts = {});

inline constexpr std::string_view kCsvHeader =
    "snr_db,mse_eta,mse_eps,bias_eta,bias_eps,var_eta_pred,var_eps_pred,trials,mode";

std::string to_string(WeightMode mode);
WeightMode parse_mode(std::string_view text);

std::string format_csv(const std::vector<MseRow>& rows);
std::string format_sweep_csv(std::string_view key_name, const std::vector<SweepRow>& rows);

/// Throws std::runtime_error when the file cannot be written.
void emit_csv(const std::vector<MseRow>& rows, const std::filesystem::path& path);
void emit_sweep_csv(std::string_view key_name, const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// Parses a file produced by emit_csv / emit_sweep_csv. For plain CSVs every key is NaN.
std::vector<SweepRow> read_csv(const std::filesystem::path& path);

}  // namespace rcfo
