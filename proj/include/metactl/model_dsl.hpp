#pragma once

// Textual architecture models (`.archmodel`).
//
//   system NAME {
//     (qa_type ID (higher_better|lower_better);)*
//     (component ID;)*
//     (function ID;)*
//     (design ID realizes ID { requires ID(, ID)*; (qa ID = NUMBER;)* utility = NUMBER; })*
//     (objective ID : ID { (require ID (>=|<=) NUMBER;)* })*
//   }
//
// `//` starts a line comment. Identifiers may contain dots after the first
// character so generated design names such as `f_nav_v0.3_a3.6_r0.8` are legal.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metactl/nav_design.hpp"
#include "metactl/tomasys.hpp"

namespace metactl {

enum class Severity { error, warning };

struct ParseDiagnostic {
    Severity severity = Severity::error;
    int line = 0;
    int column = 0;
    std::string message;
};

/// `LINE:COL SEVERITY MESSAGE`
std::string to_string(const ParseDiagnostic& d);

struct ParseResult {
    std::optional<ArchitectureModel> model;  // present iff no error diagnostics
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return model.has_value(); }
};

ParseResult parse_model(std::string_view source);
ParseResult parse_model_file(const std::string& path);

/// Canonical text; `parse_model(print_model(m))` is structurally equal to `m`.
std::string print_model(const ArchitectureModel& model);

/// Semantic checks. Errors for broken invariants, warnings for objectives that
/// no design can satisfy even with every component healthy.
std::vector<ParseDiagnostic> validate(const ArchitectureModel& model);

bool has_errors(const std::vector<ParseDiagnostic>& diagnostics);

/// Frequencies of the navigation stack that stay at their middle value.
struct FixedNavParameters {
    double controller_frequency = 20.0;  // Hz
    double planner_frequency = 4.0;      // Hz
    double update_frequency_global = 4.0;
    double update_frequency_local = 10.0;
};

struct NavParameterSpace {
    std::vector<double> max_vel;
    std::vector<double> accel_lim;
    std::vector<double> inflation_radius;
    FixedNavParameters fixed;

    /// The 3x3x3 move_base parameter space used by the experiments.
    static NavParameterSpace standard();
};

/// Non-empty, positive and strictly increasing lists.
bool is_valid(const NavParameterSpace& space);

/// Design-time quality estimates of one navigation configuration.
struct NavEstimates {
    double safety = 0.0;
    double energy = 0.0;
    double performance = 0.0;
};

NavEstimates estimate_nav_design(const NavDesignParams& p, const FixedNavParameters& fixed = {},
                                 const PowerModel& power = {});

/// One design per element of the Cartesian product, function `f_navigate`,
/// objective `o_nav` requiring safety >= 0.4 and energy <= 0.7.
/// Throws `INVALID_ARGUMENT` for an invalid space.
ArchitectureModel generate_nav_model(const NavParameterSpace& space, const PowerModel& power = {});

}  // namespace metactl
