#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace metactl {

/// The three navigation parameters that distinguish generated designs.
struct NavDesignParams {
    double max_vel = 0.0;           // m/s
    double accel_lim = 0.0;         // m/s^2
    double inflation_radius = 0.0;  // m

    bool operator==(const NavDesignParams&) const = default;
};

/// `f_nav_v{max_vel}_a{accel_lim}_r{inflation_radius}` with shortest numbers,
/// e.g. `f_nav_v0.3_a3.6_r0.8`.
std::string nav_design_name(const NavDesignParams& p);

/// Inverse of `nav_design_name`; nullopt when `name` does not follow the scheme.
std::optional<NavDesignParams> decode_nav_design(std::string_view name);

/// Instantaneous electrical load model of the mobile base.
struct PowerModel {
    double p_idle = 20.0;  // W
    double c_v = 30.0;     // W per m/s
    double c_a = 5.0;      // W per m/s^2
    double c_f = 0.2;      // W per Hz of controller frequency
    double p_max = 80.0;   // W

    /// (p_idle + c_v|v| + c_a|a| + c_f f) (1 + power_increase)
    double power_load(double speed, double accel, double controller_frequency,
                      double power_increase) const;

    /// Load at constant speed, no acceleration.
    double cruise_power(double speed, double controller_frequency, double power_increase) const {
        return power_load(speed, 0.0, controller_frequency, power_increase);
    }

    /// min(1, load / p_max)
    double normalized(double load) const;
};

}  // namespace metactl
