#include "metactl/tomasys.hpp"

#include <algorithm>

#include "metactl/error.hpp"

namespace metactl {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::grounding_mismatch: return "GROUNDING_MISMATCH";
        case ErrorCode::unknown_entity: return "UNKNOWN_ENTITY";
        case ErrorCode::stale_kb: return "STALE_KB";
        case ErrorCode::invalid_command: return "INVALID_COMMAND";
        case ErrorCode::unknown_design: return "UNKNOWN_DESIGN";
        case ErrorCode::malformed_csv: return "MALFORMED_CSV";
        case ErrorCode::malformed_record: return "MALFORMED_RECORD";
        case ErrorCode::invalid_argument: return "INVALID_ARGUMENT";
    }
    return "UNKNOWN";
}

std::string_view to_string(Polarity p) {
    return p == Polarity::higher_better ? "higher_better" : "lower_better";
}

std::string_view to_string(Comparator c) { return c == Comparator::ge ? ">=" : "<="; }

std::string_view to_string(ObjectiveStatus s) {
    switch (s) {
        case ObjectiveStatus::ok: return "ok";
        case ObjectiveStatus::in_error: return "in_error";
        case ObjectiveStatus::unresolvable: return "unresolvable";
    }
    return "?";
}

std::string_view to_string(FactKind k) {
    switch (k) {
        case FactKind::component_error: return "component_error";
        case FactKind::design_unrealisable: return "design_unrealisable";
        case FactKind::grounding_in_error: return "grounding_in_error";
        case FactKind::objective_in_error: return "objective_in_error";
    }
    return "?";
}

std::optional<FactKind> fact_kind_from_string(std::string_view s) {
    for (auto k : {FactKind::component_error, FactKind::design_unrealisable,
                   FactKind::grounding_in_error, FactKind::objective_in_error}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::string to_string(const Fact& f) {
    return std::string(to_string(f.kind)) + "(" + f.subject + ")";
}

std::optional<double> FunctionDesign::estimate(std::string_view qa_type) const {
    for (const auto& e : qa_estimates) {
        if (e.qa_type == qa_type) return e.value;
    }
    return std::nullopt;
}

bool FunctionDesign::requires_component(std::string_view component) const {
    return std::find(required_components.begin(), required_components.end(), component) !=
           required_components.end();
}

namespace {

template <typename Range, typename Proj>
auto find_named(Range& items, std::string_view name, Proj proj) {
    auto it = std::find_if(items.begin(), items.end(),
                           [&](const auto& item) { return proj(item) == name; });
    return it == items.end() ? nullptr : &*it;
}

}  // namespace

const QAType* ArchitectureModel::find_qa_type(std::string_view n) const {
    return find_named(qa_types, n, [](const QAType& q) -> const std::string& { return q.name; });
}

const Component* ArchitectureModel::find_component(std::string_view n) const {
    return find_named(components, n, [](const Component& c) -> const std::string& { return c.name; });
}

const Function* ArchitectureModel::find_function(std::string_view n) const {
    return find_named(functions, n, [](const Function& f) -> const std::string& { return f.name; });
}

const FunctionDesign* ArchitectureModel::find_design(std::string_view n) const {
    return find_named(designs, n, [](const FunctionDesign& d) -> const std::string& { return d.name; });
}

const Objective* ArchitectureModel::find_objective(std::string_view id) const {
    return find_named(objectives, id, [](const Objective& o) -> const std::string& { return o.id; });
}

Objective* ArchitectureModel::find_objective(std::string_view id) {
    return find_named(objectives, id, [](const Objective& o) -> const std::string& { return o.id; });
}

std::vector<const FunctionDesign*> ArchitectureModel::designs_for(std::string_view function) const {
    std::vector<const FunctionDesign*> out;
    for (const auto& d : designs) {
        if (d.realizes == function) out.push_back(&d);
    }
    return out;
}

}  // namespace metactl
