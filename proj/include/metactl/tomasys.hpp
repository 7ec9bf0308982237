#pragma once

// TOMASys meta-model: design-time architecture entities and the negative facts
// asserted about them at runtime.

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace metactl {

/// Position of a declaration in a `.archmodel` source. Never participates in
/// structural equality, so a parsed model compares equal to a generated one.
struct SourceLoc {
    int line = 0;
    int column = 0;

    friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

enum class Polarity { higher_better, lower_better };
enum class Comparator { ge, le };

std::string_view to_string(Polarity p);
std::string_view to_string(Comparator c);

/// Comparator a QA of the given polarity must use in an NFR.
constexpr Comparator comparator_for(Polarity p) {
    return p == Polarity::higher_better ? Comparator::ge : Comparator::le;
}

/// True when `value cmp threshold` holds.
constexpr bool satisfies(double value, Comparator cmp, double threshold) {
    return cmp == Comparator::ge ? value >= threshold : value <= threshold;
}

struct QAType {
    std::string name;
    Polarity polarity = Polarity::higher_better;
    SourceLoc loc;

    bool operator==(const QAType&) const = default;
};

/// A normalized quality-attribute measurement in [0,1].
struct QAValue {
    std::string qa_type;
    double value = 0.0;
    double timestamp = 0.0;

    bool operator==(const QAValue&) const = default;
};

enum class ComponentState { ok, error, unknown };

struct Component {
    std::string name;
    SourceLoc loc;

    bool operator==(const Component&) const = default;
};

struct Function {
    std::string name;
    SourceLoc loc;

    bool operator==(const Function&) const = default;
};

struct QAEstimate {
    std::string qa_type;
    double value = 0.0;
    SourceLoc loc;

    bool operator==(const QAEstimate&) const = default;
};

/// A concrete variant realizing a function, with the components it needs and
/// its design-time quality estimates.
struct FunctionDesign {
    std::string name;
    std::string realizes;
    std::vector<std::string> required_components;
    std::vector<QAEstimate> qa_estimates;  // declaration order
    double utility = 0.0;
    SourceLoc loc;

    std::optional<double> estimate(std::string_view qa_type) const;
    bool requires_component(std::string_view component) const;

    bool operator==(const FunctionDesign&) const = default;
};

struct NFR {
    std::string qa_type;
    Comparator comparator = Comparator::ge;
    double threshold = 0.0;
    SourceLoc loc;

    bool operator==(const NFR&) const = default;
};

enum class ObjectiveStatus { ok, in_error, unresolvable };
std::string_view to_string(ObjectiveStatus s);

struct Objective {
    std::string id;
    std::string function;
    std::vector<NFR> nfrs;
    SourceLoc loc;

    bool operator==(const Objective&) const = default;
};

/// Design-time description of a managed system.
struct ArchitectureModel {
    std::string name;
    std::vector<QAType> qa_types;
    std::vector<Component> components;
    std::vector<Function> functions;
    std::vector<FunctionDesign> designs;
    std::vector<Objective> objectives;

    const QAType* find_qa_type(std::string_view name) const;
    const Component* find_component(std::string_view name) const;
    const Function* find_function(std::string_view name) const;
    const FunctionDesign* find_design(std::string_view name) const;
    const Objective* find_objective(std::string_view id) const;
    Objective* find_objective(std::string_view id);

    /// Designs realizing `function`, in declaration order.
    std::vector<const FunctionDesign*> designs_for(std::string_view function) const;

    bool operator==(const ArchitectureModel&) const = default;
};

// ---------------------------------------------------------------------------
// Negative facts. The knowledge base is closed-world: only errors are stored.

enum class FactKind {
    component_error,
    design_unrealisable,
    grounding_in_error,  // subject is the grounded objective's id
    objective_in_error,
};

std::string_view to_string(FactKind k);
std::optional<FactKind> fact_kind_from_string(std::string_view s);

struct Fact {
    FactKind kind;
    std::string subject;

    auto operator<=>(const Fact&) const = default;
    bool operator==(const Fact&) const = default;
};

/// `kind(subject)`, e.g. `component_error(arm_left)`.
std::string to_string(const Fact& f);

inline Fact component_error(std::string c) { return {FactKind::component_error, std::move(c)}; }
inline Fact design_unrealisable(std::string d) { return {FactKind::design_unrealisable, std::move(d)}; }
inline Fact grounding_in_error(std::string o) { return {FactKind::grounding_in_error, std::move(o)}; }
inline Fact objective_in_error(std::string o) { return {FactKind::objective_in_error, std::move(o)}; }

}  // namespace metactl
