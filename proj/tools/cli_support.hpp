// Configuration loading and deterministic file output for the jumpspec CLI.
#pragma once

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "jumpspec/error.hpp"
#include "jumpspec/pricer.hpp"

namespace jumpspec::cli {

namespace fs = std::filesystem;

enum ExitCode : int { ok = 0, config_error = 2, numerical_failure = 3, window_violation = 4 };

inline int exit_code_for(Errc code) {
    switch (code) {
    case Errc::strike_outside_window:
    case Errc::flatness_violation: return window_violation;
    case Errc::config:
    case Errc::invalid_argument:
    case Errc::dimension_mismatch:
    case Errc::not_power_of_two:
    case Errc::unreachable_constraint:
    case Errc::degenerate_support:
    case Errc::not_normalized: return config_error;
    default: return numerical_failure;
    }
}

/// Shortest representation that parses back to the same double.
inline std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        const std::string token = item.substr(first, last - first + 1);
        double v = 0.0;
        auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec != std::errc() || res.ptr != token.data() + token.size())
            throw Error(Errc::config, "cannot parse number '" + token + "'");
        out.push_back(v);
    }
    return out;
}

inline std::vector<std::string> parse_words(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        out.push_back(item.substr(first, last - first + 1));
    }
    return out;
}

struct StrikeSpec {
    std::vector<double> moneyness;  // K / S0
    bool is_default = true;
};

/// Strike grid from "lo:hi:count" or a comma list of K/S0 values.
inline StrikeSpec parse_strikes(const std::string& text) {
    StrikeSpec s;
    s.is_default = false;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) {
            auto v = parse_list(item);
            if (v.size() != 1) throw Error(Errc::config, "strike range must be lo:hi:count");
            parts.push_back(v[0]);
        }
        if (parts.size() != 3 || parts[2] < 2 || parts[2] != static_cast<int>(parts[2]) || !(parts[0] < parts[1]))
            throw Error(Errc::config, "strike range must be lo:hi:count with lo < hi and count >= 2");
        const int count = static_cast<int>(parts[2]);
        for (int i = 0; i < count; ++i) s.moneyness.push_back(parts[0] + (parts[1] - parts[0]) * i / (count - 1));
    } else {
        s.moneyness = parse_list(text);
    }
    if (s.moneyness.empty()) throw Error(Errc::config, "empty strike list");
    for (double k : s.moneyness)
        if (!(k > 0.0)) throw Error(Errc::config, "strikes must be > 0");
    return s;
}

inline StrikeSpec default_strikes() {
    StrikeSpec s;
    for (int i = 0; i < 61; ++i) s.moneyness.push_back(0.5 + 1.5 * i / 60.0);
    return s;
}

struct ConvergenceSpec {
    std::vector<int> levels{512, 1024, 2048, 4096};
    double sigma = 0.2;
    double tau = 0.5;
    double band_lo = 0.8;
    double band_hi = 1.25;
    int band_points = 10;
};

struct TiltSpec {
    std::vector<double> probabilities{0.5, 0.0, 0.5};
    double h = 0.1;
    int perturbations = 100;
};

struct TransitionSpec {
    std::vector<double> spectrum{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    double dt = 1.0;
    double hbar = 1.0;
};

struct ValidateSpec {
    std::size_t paths = 100000;
    double tau = 0.5;
    double strike = 1.0;
    int per_strike_checks = 20;
};

struct RunConfig {
    PricingConfig pricing;
    std::vector<KernelSpec::Family> families{KernelSpec::Family::near_field_exp, KernelSpec::Family::heavy_tail_skew};
    StrikeSpec strikes = default_strikes();
    ConvergenceSpec convergence;
    TiltSpec tilt;
    TransitionSpec transition;
    ValidateSpec validate;
    std::uint64_t seed = 20240611;
    std::string output_dir;
};

namespace detail {

// The defaulted ptree::get swallows malformed values, so presence is checked first.
template <class T>
T get(const boost::property_tree::ptree& tree, const std::string& path, T fallback) {
    if (!tree.get_optional<std::string>(path)) return fallback;
    try {
        return tree.get<T>(path);
    } catch (const boost::property_tree::ptree_error& e) {
        throw Error(Errc::config, "bad value for '" + path + "': " + e.what());
    }
}

inline std::optional<std::string> get_text(const boost::property_tree::ptree& tree, const std::string& path) {
    if (auto v = tree.get_optional<std::string>(path)) return *v;
    return std::nullopt;
}

}  // namespace detail

/// Reads a sectioned key = value file; keys absent from the file keep their defaults.
inline RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error(Errc::config, std::string("cannot read config: ") + e.what());
    }
    using detail::get;
    auto& p = cfg.pricing;
    p.s0 = get(tree, "pricing.s0", p.s0);
    p.r = get(tree, "pricing.r", p.r);
    p.q = get(tree, "pricing.q", p.q);
    p.eta = get(tree, "pricing.eta", p.eta);
    const auto n = get<std::size_t>(tree, "pricing.n", p.grid.size());
    const double half_width = get(tree, "pricing.L", p.grid.half_width());
    try {
        p.grid = LogGrid(half_width, n);
    } catch (const Error& e) {
        throw Error(Errc::config, e.what());
    }
    if (auto m = detail::get_text(tree, "pricing.maturities")) p.maturities = parse_list(*m);
    p.flatness_tolerance = get(tree, "pricing.flatness_tolerance", p.flatness_tolerance);
    p.enforce_flatness = get(tree, "pricing.enforce_flatness", p.enforce_flatness);

    auto& k = p.kernel;
    k.xi = get(tree, "kernel.xi", k.xi);
    k.tail_p = get(tree, "kernel.tail_p", k.tail_p);
    k.skew = get(tree, "kernel.skew", k.skew);
    k.sigma = get(tree, "kernel.sigma", k.sigma);
    k.support = get(tree, "kernel.support", k.support);
    if (auto f = detail::get_text(tree, "kernel.families")) {
        cfg.families.clear();
        for (const auto& name : parse_words(*f)) cfg.families.push_back(parse_family(name));
    }

    if (auto s = detail::get_text(tree, "strikes.range")) cfg.strikes = parse_strikes(*s);
    if (auto s = detail::get_text(tree, "strikes.list")) cfg.strikes = parse_strikes(*s);

    auto& c = cfg.convergence;
    if (auto lv = detail::get_text(tree, "convergence.levels")) {
        c.levels.clear();
        for (double v : parse_list(*lv)) c.levels.push_back(static_cast<int>(v));
    }
    c.sigma = get(tree, "convergence.sigma", c.sigma);
    c.tau = get(tree, "convergence.tau", c.tau);
    c.band_lo = get(tree, "convergence.band_lo", c.band_lo);
    c.band_hi = get(tree, "convergence.band_hi", c.band_hi);
    c.band_points = get(tree, "convergence.band_points", c.band_points);

    auto& t = cfg.tilt;
    if (auto pr = detail::get_text(tree, "tilt.probabilities")) t.probabilities = parse_list(*pr);
    t.h = get(tree, "tilt.h", t.h);
    t.perturbations = get(tree, "tilt.perturbations", t.perturbations);

    auto& tr = cfg.transition;
    if (auto sp = detail::get_text(tree, "transition.spectrum")) tr.spectrum = parse_list(*sp);
    tr.dt = get(tree, "transition.dt", tr.dt);
    tr.hbar = get(tree, "transition.hbar", tr.hbar);

    auto& v = cfg.validate;
    v.paths = get(tree, "validate.paths", v.paths);
    v.tau = get(tree, "validate.tau", v.tau);
    v.strike = get(tree, "validate.strike", v.strike);

    cfg.seed = get<std::uint64_t>(tree, "run.seed", cfg.seed);
    cfg.output_dir = get<std::string>(tree, "output.dir", "");
    return cfg;
}

/// A run directory: files are written via temp + rename, and a COMPLETE marker seals it.
class RunDirectory {
public:
    explicit RunDirectory(fs::path dir) : dir_(std::move(dir)) {
        if (fs::exists(dir_ / "COMPLETE"))
            throw Error(Errc::config, "run directory " + dir_.string() + " is complete and will not be modified");
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw Error(Errc::config, "cannot create " + dir_.string() + ": " + ec.message());
    }

    const fs::path& path() const noexcept { return dir_; }

    void write(const std::string& name, const std::string& content) const {
        const fs::path target = dir_ / name;
        const fs::path temp = dir_ / (name + ".tmp");
        {
            std::ofstream out(temp, std::ios::binary | std::ios::trunc);
            out << content;
            out.flush();
            if (!out) throw Error(Errc::config, "cannot write " + temp.string());
        }
        fs::rename(temp, target);
    }

    void seal() const { write("COMPLETE", ""); }

private:
    fs::path dir_;
};

/// Output directory: flag, then config, then runs/<command>; relative paths sit under $JUMPSPEC_OUTPUT_ROOT.
inline fs::path resolve_output(const std::string& flag, const RunConfig& cfg, const std::string& command) {
    fs::path out = !flag.empty() ? fs::path(flag) : !cfg.output_dir.empty() ? fs::path(cfg.output_dir) : fs::path("runs") / command;
    if (out.is_relative()) {
        if (const char* root = std::getenv("JUMPSPEC_OUTPUT_ROOT"); root && *root) out = fs::path(root) / out;
    }
    return out;
}

}  // namespace jumpspec::cli
