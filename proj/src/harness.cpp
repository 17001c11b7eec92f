#include "rcfo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rcfo/channel.hpp"
#include "rcfo/modem.hpp"
#include "rcfo/random.hpp"
#include "rcfo/variance.hpp"

namespace rcfo {

namespace {

enum Stream : std::uint64_t { kData = 1, kChannel = 2, kNoise = 3, kCsi = 4 };

ChannelRealization<double> draw_channel(const Scenario& s, std::uint64_t seed) {
    switch (s.channel) {
        case ChannelKind::Flat:
            return flat_channel<double>(s.cfg);
        case ChannelKind::Multipath:
            return generate_taps<double>(s.cfg, s.l_taps, 0.0, seed);
        case ChannelKind::Mobility:
            return generate_taps<double>(s.cfg, s.l_taps, doppler_from_speed(s.speed_kmh, s.cfg.f_c), seed);
    }
    throw std::logic_error("unknown channel kind");
}

CMatrix<double> receiver_csi(const Scenario& s, const ChannelRealization<double>& chan, std::uint64_t seed) {
    switch (s.csi) {
        case CsiKind::Genie:
            return chan.ctf;
        case CsiKind::Perturbed:
            return perturb_csi(chan, s.kappa, seed).ctf;
        case CsiKind::Stale:
            return chan.ctf.row(0).replicate(chan.ctf.rows(), 1);
    }
    throw std::logic_error("unknown CSI kind");
}

MseRow reduce(double snr_db, WeightMode mode, const std::vector<TrialResult>& results) {
    MseRow row;
    row.snr_db = snr_db;
    row.mode = mode;
    // Accumulate in trial order so the sums are reproducible.
    for (const auto& r : results) {
        if (!r.ok) {
            ++row.rejected;
            continue;
        }
        ++row.trials;
        row.mse_eta += r.err_eta * r.err_eta;
        row.mse_eps += r.err_eps * r.err_eps;
        row.bias_eta += r.err_eta;
        row.bias_eps += r.err_eps;
        row.var_eta_pred += r.var_eta_pred;
        row.var_eps_pred += r.var_eps_pred;
    }
    if (row.trials > 0) {
        const double n = row.trials;
        row.mse_eta /= n;
        row.mse_eps /= n;
        row.bias_eta /= n;
        row.bias_eps /= n;
        row.var_eta_pred /= n;
        row.var_eps_pred /= n;
    }
    return row;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

void append_row(std::ostringstream& os, const MseRow& r) {
    os << format_double(r.snr_db) << ',' << format_double(r.mse_eta) << ',' << format_double(r.mse_eps) << ','
       << format_double(r.bias_eta) << ',' << format_double(r.bias_eps) << ',' << format_double(r.var_eta_pred) << ','
       << format_double(r.var_eps_pred) << ',' << r.trials << ',' << to_string(r.mode) << '\n';
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

template <typename Mutate>
std::vector<SweepRow> sweep(const Scenario& base, const std::vector<double>& keys, RunOptions opts, Mutate mutate) {
    if (keys.empty()) throw std::invalid_argument("sweep range is empty");
    std::vector<SweepRow> rows;
    for (double key : keys) {
        Scenario s = base;
        mutate(s, key);
        for (const MseRow& r : run_scenario(s, opts)) rows.push_back({key, r});
    }
    return rows;
}

}  // namespace

void Scenario::validate() const {
    cfg.validate();
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (snr_db.empty()) throw std::invalid_argument("SNR list is empty");
    if (!std::is_sorted(snr_db.begin(), snr_db.end())) throw std::invalid_argument("SNR list must be sorted");
    if (channel != ChannelKind::Flat && (l_taps < 1 || l_taps > cfg.n_g))
        throw std::invalid_argument("tap count must lie in [1, n_g]");
    if (speed_kmh < 0.0) throw std::invalid_argument("speed must be non-negative");
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in [0, 1]");
}

double Scenario::channel_power() const { return channel == ChannelKind::Flat ? 1.0 : profile_power(l_taps); }

double Scenario::noise_var(double snr_db) const {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    // Unit-power constellations: sigma_S^2 = 1.
    return channel_power() / std::pow(10.0, snr_db / 10.0);
}

TrialResult run_trial(const Scenario& s, double snr_db, int trial) {
    const std::uint64_t seed = split_seed(s.seed, static_cast<std::uint64_t>(trial));
    const double noise = s.noise_var(snr_db);

    Rng data_rng(split_seed(seed, kData));
    const FreqBlocks<double> x = random_blocks<double>(s.cfg, data_rng);
    const ChannelRealization<double> chan = draw_channel(s, split_seed(seed, kChannel));
    const ImpairmentParams imp{s.epsilon, s.eta, noise, split_seed(seed, kNoise)};

    BlockGrid<double> grid;
    if (s.model == ChannelModel::FreqDomain) {
        grid = apply_impairments_freq(x, chan, imp, s.cfg);
    } else {
        TimeFrame<double> rx = apply_impairments_time(modulate_frame(x, s.cfg), chan, imp, s.cfg);
        grid = demodulate_frame(add_awgn(std::move(rx), noise, imp.seed), s.cfg);
    }

    const CMatrix<double> csi = receiver_csi(s, chan, split_seed(seed, kCsi));
    const FreqBlocks<double> ref = reference_symbols(x, s.cfg);

    TrialResult out;
    try {
        const auto rep = estimate<double>(grid, csi, ref, s.cfg, s.mode, noise);
        if (!std::isfinite(rep.eta_hat) || !std::isfinite(rep.eps_hat)) return out;
        out.err_eta = rep.eta_hat - s.eta;
        out.err_eps = rep.eps_hat - s.epsilon;
        out.ok = true;
    } catch (const std::exception&) {
        return out;
    }

    if (noise > 0.0) {
        if (s.channel == ChannelKind::Flat && s.cfg.constellation.constant_modulus()) {
            const auto v = var_a1a2a3<double>(s.cfg, std::pow(10.0, snr_db / 10.0), s.mode);
            out.var_eta_pred = v.var_eta;
            out.var_eps_pred = v.var_eps;
        } else {
            const auto v = var_general<double>(tone_table<double>(x, chan.ctf, noise, plan_regions(s.cfg)), s.cfg, s.mode);
            out.var_eta_pred = v.var_eta;
            out.var_eps_pred = v.var_eps;
        }
    }
    return out;
}

std::vector<MseRow> run_scenario(const Scenario& s, RunOptions opts) {
    s.validate();
    const int threads = std::max(
        1, std::min(opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency()), s.trials));

    std::vector<MseRow> rows;
    std::vector<TrialResult> results(static_cast<std::size_t>(s.trials));
    for (double snr : s.snr_db) {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int t = next++; t < s.trials; t = next++) results[static_cast<std::size_t>(t)] = run_trial(s, snr, t);
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        }
        rows.push_back(reduce(snr, s.mode, results));
    }
    return rows;
}

std::vector<SweepRow> sweep_eta(const Scenario& s, const std::vector<double>& etas, RunOptions opts) {
    return sweep(s, etas, opts, [](Scenario& sc, double v) { sc.eta = v; });
}

std::vector<SweepRow> sweep_eps(const Scenario& s, const std::vector<double>& epsilons, RunOptions opts) {
    return sweep(s, epsilons, opts, [](Scenario& sc, double v) { sc.epsilon = v; });
}

std::vector<SweepRow> sweep_kappa(const Scenario& s, const std::vector<double>& kappas, RunOptions opts) {
    return sweep(s, kappas, opts, [](Scenario& sc, double v) {
        sc.csi = CsiKind::Perturbed;
        sc.kappa = v;
    });
}

std::vector<SweepRow> sweep_mobility(const Scenario& s, const std::vector<double>& speeds_kmh, RunOptions opts) {
    return sweep(s, speeds_kmh, opts, [](Scenario& sc, double v) {
        sc.channel = ChannelKind::Mobility;
        sc.speed_kmh = v;
    });
}

std::string to_string(WeightMode mode) { return mode == WeightMode::Weighted ? "weighted" : "simplified"; }

WeightMode parse_mode(std::string_view text) {
    if (text == "weighted") return WeightMode::Weighted;
    if (text == "simplified") return WeightMode::Simplified;
    throw std::invalid_argument("mode must be weighted or simplified, got '" + std::string(text) + "'");
}

std::string format_csv(const std::vector<MseRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("no rows to emit");
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : rows) append_row(os, r);
    return os.str();
}

std::string format_sweep_csv(std::string_view key_name, const std::vector<SweepRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("no rows to emit");
    std::ostringstream os;
    os << key_name << ',' << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << format_double(r.key) << ',';
        append_row(os, r.row);
    }
    return os.str();
}

void emit_csv(const std::vector<MseRow>& rows, const std::filesystem::path& path) {
    write_file(path, format_csv(rows));
}

void emit_sweep_csv(std::string_view key_name, const std::vector<SweepRow>& rows, const std::filesystem::path& path) {
    write_file(path, format_sweep_csv(key_name, rows));
}

std::vector<SweepRow> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
    const auto header = split(line, ',');
    const std::size_t plain = split(std::string(kCsvHeader), ',').size();
    const bool keyed = header.size() == plain + 1;
    if (!keyed && header.size() != plain) throw std::runtime_error("unexpected CSV header in " + path.string());

    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != header.size()) throw std::runtime_error("malformed CSV row: " + line);
        const std::size_t o = keyed ? 1 : 0;
        SweepRow r;
        r.key = keyed ? parse_double(f[0]) : std::numeric_limits<double>::quiet_NaN();
        r.row.snr_db = parse_double(f[o + 0]);
        r.row.mse_eta = parse_double(f[o + 1]);
        r.row.mse_eps = parse_double(f[o + 2]);
        r.row.bias_eta = parse_double(f[o + 3]);
        r.row.bias_eps = parse_double(f[o + 4]);
        r.row.var_eta_pred = parse_double(f[o + 5]);
        r.row.var_eps_pred = parse_double(f[o + 6]);
        r.row.trials = std::stoi(f[o + 7]);
        r.row.mode = parse_mode(f[o + 8]);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace rcfo
