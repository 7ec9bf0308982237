#include "metactl/nav_design.hpp"

#include <algorithm>
#include <cmath>

#include "metactl/numeric_format.hpp"

namespace metactl {

std::string nav_design_name(const NavDesignParams& p) {
    return "f_nav_v" + format_number(p.max_vel) + "_a" + format_number(p.accel_lim) + "_r" +
           format_number(p.inflation_radius);
}

std::optional<NavDesignParams> decode_nav_design(std::string_view name) {
    constexpr std::string_view prefix = "f_nav_v";
    if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
    name.remove_prefix(prefix.size());
    const auto a_pos = name.find("_a");
    if (a_pos == std::string_view::npos) return std::nullopt;
    const auto r_pos = name.find("_r", a_pos + 2);
    if (r_pos == std::string_view::npos) return std::nullopt;

    auto v = parse_number(name.substr(0, a_pos));
    auto a = parse_number(name.substr(a_pos + 2, r_pos - a_pos - 2));
    auto r = parse_number(name.substr(r_pos + 2));
    if (!v || !a || !r) return std::nullopt;
    if (!(*v > 0 && *a > 0 && *r >= 0)) return std::nullopt;
    NavDesignParams p{*v, *a, *r};
    // Reject spellings that would not be produced by nav_design_name ("0.30").
    if (nav_design_name(p) != std::string(prefix) + std::string(name)) return std::nullopt;
    return p;
}

double PowerModel::power_load(double speed, double accel, double controller_frequency,
                              double power_increase) const {
    return (p_idle + c_v * std::abs(speed) + c_a * std::abs(accel) + c_f * controller_frequency) *
           (1.0 + power_increase);
}

double PowerModel::normalized(double load) const { return std::min(1.0, load / p_max); }

}  // namespace metactl
