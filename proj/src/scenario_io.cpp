#include "rcfo/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rcfo {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& v) {
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("not a number: '" + v + "'");
    return d;
}

long long to_int(const std::string& v) {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("not an integer: '" + v + "'");
    return i;
}

std::vector<int> to_indices(const std::string& v) {
    std::vector<int> out;
    for (const auto& item : split_list(v)) {
        const auto dash = item.find('-', 1);
        if (dash == std::string::npos) {
            out.push_back(static_cast<int>(to_int(item)));
        } else {
            const int lo = static_cast<int>(to_int(trim(item.substr(0, dash))));
            const int hi = static_cast<int>(to_int(trim(item.substr(dash + 1))));
            if (hi < lo) throw std::invalid_argument("empty index range '" + item + "'");
            for (int k = lo; k <= hi; ++k) out.push_back(k);
        }
    }
    return out;
}

Constellation to_constellation(const std::string& v) {
    if (v.rfind("psk", 0) == 0) return Constellation::psk(static_cast<int>(to_int(v.substr(3))));
    if (v.rfind("qam", 0) == 0) return Constellation::qam(static_cast<int>(to_int(v.substr(3))));
    throw std::invalid_argument("constellation must be psk<order> or qam<order>");
}

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string index_list(const SystemConfig& cfg, Role role) {
    std::string out;
    for (int k = 0; k < cfg.n; ++k) {
        if (cfg.role(k) != role) continue;
        if (!out.empty()) out += ',';
        out += std::to_string(k);
    }
    return out;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    Scenario s;
    std::vector<int> nulls;
    std::vector<int> data;

    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter, std::less<>> setters{
        {"n", [&](const std::string& v) { s.cfg.n = static_cast<int>(to_int(v)); }},
        {"n_g", [&](const std::string& v) { s.cfg.n_g = static_cast<int>(to_int(v)); }},
        {"m", [&](const std::string& v) { s.cfg.m = static_cast<int>(to_int(v)); }},
        {"q", [&](const std::string& v) { s.cfg.q = static_cast<int>(to_int(v)); }},
        {"t_s", [&](const std::string& v) { s.cfg.t_s = to_double(v); }},
        {"f_c", [&](const std::string& v) { s.cfg.f_c = to_double(v); }},
        {"constellation", [&](const std::string& v) { s.cfg.constellation = to_constellation(v); }},
        {"nulls", [&](const std::string& v) { nulls = to_indices(v); }},
        {"data", [&](const std::string& v) { data = to_indices(v); }},
        {"epsilon", [&](const std::string& v) { s.epsilon = to_double(v); }},
        {"eta", [&](const std::string& v) { s.eta = to_double(v); }},
        {"snr_db",
         [&](const std::string& v) {
             s.snr_db.clear();
             for (const auto& item : split_list(v)) s.snr_db.push_back(to_double(item));
         }},
        {"trials", [&](const std::string& v) { s.trials = static_cast<int>(to_int(v)); }},
        {"channel",
         [&](const std::string& v) {
             if (v == "flat") s.channel = ChannelKind::Flat;
             else if (v == "multipath") s.channel = ChannelKind::Multipath;
             else if (v == "mobility") s.channel = ChannelKind::Mobility;
             else throw std::invalid_argument("channel must be flat, multipath or mobility");
         }},
        {"taps", [&](const std::string& v) { s.l_taps = static_cast<int>(to_int(v)); }},
        {"speed_kmh", [&](const std::string& v) { s.speed_kmh = to_double(v); }},
        {"csi",
         [&](const std::string& v) {
             if (v == "genie") s.csi = CsiKind::Genie;
             else if (v == "perturbed") s.csi = CsiKind::Perturbed;
             else if (v == "stale") s.csi = CsiKind::Stale;
             else throw std::invalid_argument("csi must be genie, perturbed or stale");
         }},
        {"kappa", [&](const std::string& v) { s.kappa = to_double(v); }},
        {"mode", [&](const std::string& v) { s.mode = parse_mode(v); }},
        {"model",
         [&](const std::string& v) {
             if (v == "freq") s.model = ChannelModel::FreqDomain;
             else if (v == "time") s.model = ChannelModel::TimeDomain;
             else throw std::invalid_argument("model must be freq or time");
         }},
        {"seed", [&](const std::string& v) { s.seed = static_cast<std::uint64_t>(std::stoull(v)); }},
    };

    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw std::invalid_argument(where + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument(where + "unknown key '" + key + "'");
        if (!seen.insert(key).second) throw std::invalid_argument(where + "repeated key '" + key + "'");
        try {
            it->second(value);
        } catch (const std::exception& e) {
            throw std::invalid_argument(where + key + ": " + e.what());
        }
    }

    if (!nulls.empty() || !data.empty()) {
        s.cfg.roles.assign(static_cast<std::size_t>(s.cfg.n), Role::Pilot);
        auto assign = [&](const std::vector<int>& idx, Role role) {
            for (int k : idx) {
                if (k < 0 || k >= s.cfg.n) throw std::invalid_argument("subcarrier index out of range");
                auto& slot = s.cfg.roles[static_cast<std::size_t>(k)];
                if (slot != Role::Pilot) throw std::invalid_argument("subcarrier listed twice in data/nulls");
                slot = role;
            }
        };
        assign(nulls, Role::Null);
        assign(data, Role::Data);
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string format_scenario(const Scenario& s) {
    std::ostringstream os;
    const auto& c = s.cfg;
    os << "n = " << c.n << "\nn_g = " << c.n_g << "\nm = " << c.m << "\nq = " << c.q << "\nt_s = " << fmt(c.t_s)
       << "\nf_c = " << fmt(c.f_c) << "\nconstellation = "
       << (c.constellation.kind == Constellation::Kind::Psk ? "psk" : "qam") << c.constellation.order << '\n';
    if (!c.roles.empty()) {
        const std::string nulls = index_list(c, Role::Null);
        const std::string data = index_list(c, Role::Data);
        if (!nulls.empty()) os << "nulls = " << nulls << '\n';
        if (!data.empty()) os << "data = " << data << '\n';
    }
    os << "epsilon = " << fmt(s.epsilon) << "\neta = " << fmt(s.eta) << "\nsnr_db = ";
    for (std::size_t i = 0; i < s.snr_db.size(); ++i) os << (i ? "," : "") << fmt(s.snr_db[i]);
    os << "\ntrials = " << s.trials << "\nchannel = "
       << (s.channel == ChannelKind::Flat ? "flat" : s.channel == ChannelKind::Multipath ? "multipath" : "mobility")
       << "\ntaps = " << s.l_taps << "\nspeed_kmh = " << fmt(s.speed_kmh) << "\ncsi = "
       << (s.csi == CsiKind::Genie ? "genie" : s.csi == CsiKind::Perturbed ? "perturbed" : "stale")
       << "\nkappa = " << fmt(s.kappa) << "\nmode = " << to_string(s.mode)
       << "\nmodel = " << (s.model == ChannelModel::FreqDomain ? "freq" : "time") << "\nseed = " << s.seed << '\n';
    return os.str();
}

}  // namespace rcfo
