/**
 * @file error.hpp
 * @brief Error type shared by every jumpspec module.
 *
 * Every precondition failure throws jumpspec::Error carrying an Errc code, so
 * callers (the CLI in particular) can map failures onto exit statuses without
 * parsing messages.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jumpspec {

enum class Errc {
    invalid_argument,
    out_of_range,
    nonpositive_price,
    dimension_mismatch,
    not_power_of_two,
    unreachable_constraint,  // risk-neutral scaling impossible with nonnegative rates
    not_risk_neutral,
    degenerate_support,      // Esscher tilt has no root
    not_normalized,
    below_intrinsic,         // IV target at or below the sigma -> 0 bound
    above_spot_bound,        // IV target at or above S0
    strike_outside_window,
    flatness_violation,
    step_size,
    config,
};

constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::out_of_range: return "index-out-of-range";
    case Errc::nonpositive_price: return "nonpositive-price";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::not_power_of_two: return "not-power-of-two";
    case Errc::unreachable_constraint: return "unreachable-risk-neutral-constraint";
    case Errc::not_risk_neutral: return "kernel-not-risk-neutral";
    case Errc::degenerate_support: return "degenerate-support";
    case Errc::not_normalized: return "not-normalized";
    case Errc::below_intrinsic: return "below-or-at-deterministic-bound";
    case Errc::above_spot_bound: return "price-exceeds-spot-bound";
    case Errc::strike_outside_window: return "strike-outside-window";
    case Errc::flatness_violation: return "boundary-flatness-violation";
    case Errc::step_size: return "step-size-condition";
    case Errc::config: return "config-error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

namespace detail {

inline void require(bool condition, Errc code, const char* message) {
    if (!condition) throw Error(code, message);
}

}  // namespace detail
}  // namespace jumpspec
