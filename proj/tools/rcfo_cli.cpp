// Command-line front end for the Monte-Carlo harness.
//
//   rcfo run --scenario s.txt --out mse.csv [--trials N] [--seed S] [--mode weighted|simplified] [--model time|freq]
//   rcfo sweep-eta --scenario s.txt --out eta.csv --from -1e-4 --to 1e-4 --step 2e-5
//   rcfo sweep-kappa --scenario s.txt --out kappa.csv --values 0,0.1,0.2,0.3,0.4,0.5
//   rcfo predict --config s.txt

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rcfo/harness.hpp"
#include "rcfo/scenario_io.hpp"
#include "rcfo/variance.hpp"

namespace {

struct Overrides {
    std::string scenario;
    std::string out;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> model;
    int threads = 0;
};

struct Range {
    std::vector<double> values;
    std::optional<double> from, to, step;

    std::vector<double> expand() const {
        if (!values.empty()) return values;
        if (!from || !to || !step) throw std::invalid_argument("give --values or all of --from/--to/--step");
        if (!(*step > 0)) throw std::invalid_argument("--step must be positive");
        std::vector<double> out;
        const auto count = static_cast<long>(std::floor((*to - *from) / *step + 1e-9));
        for (long i = 0; i <= count; ++i) out.push_back(*from + static_cast<double>(i) * *step);
        return out;
    }
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--scenario", o.scenario, "scenario file (key = value)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output CSV path")->required();
    cmd->add_option("--trials", o.trials, "trials per point");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--mode", o.mode, "weighted | simplified");
    cmd->add_option("--model", o.model, "time | freq");
    cmd->add_option("--threads", o.threads, "worker threads (0 = hardware)");
}

void add_range(CLI::App* cmd, Range& r) {
    cmd->add_option("--values", r.values, "explicit sweep values")->delimiter(',');
    cmd->add_option("--from", r.from, "first sweep value");
    cmd->add_option("--to", r.to, "last sweep value (inclusive)");
    cmd->add_option("--step", r.step, "sweep increment");
}

rcfo::Scenario resolve(const Overrides& o) {
    rcfo::Scenario s = rcfo::load_scenario(o.scenario);
    if (o.trials) s.trials = *o.trials;
    if (o.seed) s.seed = *o.seed;
    if (o.mode) s.mode = rcfo::parse_mode(*o.mode);
    if (o.model) {
        if (*o.model == "time") s.model = rcfo::ChannelModel::TimeDomain;
        else if (*o.model == "freq") s.model = rcfo::ChannelModel::FreqDomain;
        else throw std::invalid_argument("--model must be time or freq");
    }
    s.validate();
    return s;
}

// Sidecar with run metadata; the CSV itself stays in the fixed column layout.
void write_meta(const std::string& csv, const rcfo::Scenario& s, const std::string& command,
                const std::vector<rcfo::SweepRow>& rows) {
    nlohmann::json meta;
    meta["command"] = command;
    meta["scenario"] = rcfo::format_scenario(s);
    meta["trials_requested"] = s.trials;
    int rejected = 0;
    for (const auto& r : rows) rejected += r.row.rejected;
    meta["trials_rejected"] = rejected;
    std::ofstream out(csv + ".meta.json");
    if (!out) throw std::runtime_error("cannot write metadata next to " + csv);
    out << meta.dump(2) << '\n';
}

int run_sweep(const std::string& name, const std::string& key, const Overrides& o, const Range& r) {
    const rcfo::Scenario s = resolve(o);
    const std::vector<double> keys = r.expand();
    const rcfo::RunOptions opts{o.threads};
    std::vector<rcfo::SweepRow> rows;
    if (name == "sweep-eta") rows = rcfo::sweep_eta(s, keys, opts);
    else if (name == "sweep-eps") rows = rcfo::sweep_eps(s, keys, opts);
    else if (name == "sweep-kappa") rows = rcfo::sweep_kappa(s, keys, opts);
    else rows = rcfo::sweep_mobility(s, keys, opts);
    rcfo::emit_sweep_csv(key, rows, o.out);
    write_meta(o.out, s, name, rows);
    std::cout << "wrote " << rows.size() << " rows to " << o.out << '\n';
    return 0;
}

int predict(const std::string& path) {
    const rcfo::Scenario s = rcfo::load_scenario(path);
    const double factor = rcfo::intercept_factor(s.cfg.m, s.cfg.g());
    std::printf("# N=%d N_g=%d M=%d Q=%d g=%.6g\n", s.cfg.n, s.cfg.n_g, s.cfg.m, s.cfg.q, s.cfg.g());
    std::printf("# intercept_factor=%.12g intercept_factor_ols=%.12g\n", factor, rcfo::intercept_factor_ols(s.cfg));
    std::printf("snr_db,var_eta,var_eps,var_eta_intercept,var_eps_intercept\n");
    for (double snr_db : s.snr_db) {
        if (std::isinf(snr_db)) continue;
        const auto base = rcfo::var_a1a2a3<double>(s.cfg, std::pow(10.0, snr_db / 10.0));
        const auto alt = rcfo::var_intercept(s.cfg, base);
        std::printf("%.17g,%.12e,%.12e,%.12e,%.12e\n", snr_db, base.var_eta, base.var_eps, alt.var_eta, alt.var_eps);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Residual CFO/SFO estimator: Monte-Carlo runs and variance predictions"};
    app.require_subcommand(1);

    Overrides run_o;
    auto* run = app.add_subcommand("run", "MSE versus SNR for one scenario");
    add_common(run, run_o);

    struct SweepCmd {
        const char* name;
        const char* key;
        const char* help;
        Overrides o;
        Range r;
        CLI::App* cmd = nullptr;
    };
    std::vector<SweepCmd> sweeps{{"sweep-eta", "eta", "MSE versus SFO", {}, {}},
                                 {"sweep-eps", "epsilon", "MSE versus CFO", {}, {}},
                                 {"sweep-kappa", "kappa", "MSE versus CSI error kappa", {}, {}},
                                 {"sweep-mobility", "speed_kmh", "MSE versus terminal speed (km/h)", {}, {}}};
    for (auto& sw : sweeps) {
        sw.cmd = app.add_subcommand(sw.name, sw.help);
        add_common(sw.cmd, sw.o);
        add_range(sw.cmd, sw.r);
    }

    std::string config;
    auto* pred = app.add_subcommand("predict", "closed-form variances under flat fading and constant modulus");
    pred->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const rcfo::Scenario s = resolve(run_o);
            const auto rows = rcfo::run_scenario(s, {run_o.threads});
            rcfo::emit_csv(rows, run_o.out);
            std::vector<rcfo::SweepRow> keyed;
            for (const auto& r : rows) keyed.push_back({0.0, r});
            write_meta(run_o.out, s, "run", keyed);
            std::cout << "wrote " << rows.size() << " rows to " << run_o.out << '\n';
            return 0;
        }
        for (const auto& sw : sweeps)
            if (*sw.cmd) return run_sweep(sw.name, sw.key, sw.o, sw.r);
        if (*pred) return predict(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
