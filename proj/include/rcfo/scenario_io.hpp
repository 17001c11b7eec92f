#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "rcfo/harness.hpp"

namespace rcfo {

/// Parses flat `key = value` text ('#' starts a comment). Unknown or repeated keys throw
/// std::invalid_argument naming the offending line.
///
/// Keys: n, n_g, m, q, t_s, f_c, constellation (psk<order> | qam<order>), data, nulls
/// (index lists such as `0-3,200`), epsilon, eta, snr_db (list; `inf` = noiseless),
/// trials, channel (flat | multipath | mobility), taps, speed_kmh, csi (genie |
/// perturbed | stale), kappa, mode (weighted | simplified), model (freq | time), seed.
Scenario parse_scenario(std::string_view text);

Scenario load_scenario(const std::filesystem::path& path);

/// Inverse of parse_scenario; the output parses back to an equal scenario.
std::string format_scenario(const Scenario& s);

}  // namespace rcfo
