#include "metactl/knowledge_base.hpp"

#include <algorithm>

#include "metactl/error.hpp"

namespace metactl {

KnowledgeBase::KnowledgeBase(ArchitectureModel model,
                             const std::map<std::string, std::string>& initial_groundings,
                             double now)
    : model_(std::move(model)) {
    for (const auto& [objective, design] : initial_groundings) {
        check_grounding(objective, design);
        groundings_.emplace(objective, FunctionGrounding{objective, design, now});
    }
}

void KnowledgeBase::check_subject(const Fact& fact) const {
    bool known = false;
    switch (fact.kind) {
        case FactKind::component_error:
            known = model_.find_component(fact.subject) != nullptr;
            break;
        case FactKind::design_unrealisable:
            known = model_.find_design(fact.subject) != nullptr;
            break;
        case FactKind::grounding_in_error:
        case FactKind::objective_in_error:
            known = model_.find_objective(fact.subject) != nullptr;
            break;
    }
    if (!known) throw Error(ErrorCode::unknown_entity, to_string(fact));
}

void KnowledgeBase::check_grounding(std::string_view objective, std::string_view design) const {
    const Objective* o = model_.find_objective(objective);
    if (o == nullptr) throw Error(ErrorCode::unknown_entity, "objective " + std::string(objective));
    const FunctionDesign* d = model_.find_design(design);
    if (d == nullptr) throw Error(ErrorCode::unknown_entity, "design " + std::string(design));
    if (d->realizes != o->function) {
        throw Error(ErrorCode::grounding_mismatch,
                    "design " + d->name + " realizes " + d->realizes + ", objective " + o->id +
                        " needs " + o->function);
    }
}

void KnowledgeBase::assert_fact(const Fact& fact) {
    check_subject(fact);
    if (asserted_.insert(fact).second) stale_ = true;
}

void KnowledgeBase::assert_measurement(const QAValue& value) {
    if (model_.find_qa_type(value.qa_type) == nullptr) {
        throw Error(ErrorCode::unknown_entity, "qa_type " + value.qa_type);
    }
    if (!(value.value >= 0.0 && value.value <= 1.0)) {
        throw Error(ErrorCode::invalid_argument,
                    "qa value for " + value.qa_type + " outside [0,1]: " + std::to_string(value.value));
    }
    auto it = measurements_.find(value.qa_type);
    if (it == measurements_.end()) {
        measurements_.emplace(value.qa_type, value);
    } else if (value.timestamp >= it->second.timestamp) {
        it->second = value;
    } else {
        return;
    }
    stale_ = true;
}

void KnowledgeBase::retract(const Fact& fact) {
    const bool removed = asserted_.erase(fact) + derived_.erase(fact) > 0;
    if (removed) stale_ = true;
}

void KnowledgeBase::record_component_status(std::string_view component, bool ok) {
    const Fact f = metactl::component_error(std::string(component));
    check_subject(f);
    reported_components_.emplace(component);
    if (ok) {
        retract(f);
    } else {
        assert_fact(f);
    }
}

std::vector<Fact> KnowledgeBase::query(const FactPattern& pattern) const {
    std::vector<Fact> out;
    auto collect = [&](const std::set<Fact>& facts) {
        for (const auto& f : facts) {
            if (f.kind != pattern.kind) continue;
            if (pattern.subject && f.subject != *pattern.subject) continue;
            out.push_back(f);
        }
    };
    collect(asserted_);
    collect(derived_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool KnowledgeBase::holds(const Fact& fact) const {
    return asserted_.count(fact) > 0 || derived_.count(fact) > 0;
}

std::set<Fact> KnowledgeBase::negative_facts() const {
    std::set<Fact> all = asserted_;
    all.insert(derived_.begin(), derived_.end());
    return all;
}

ComponentState KnowledgeBase::component_state(std::string_view component) const {
    if (holds(metactl::component_error(std::string(component)))) return ComponentState::error;
    if (reported_components_.count(component) == 0) return ComponentState::unknown;
    return ComponentState::ok;
}

bool KnowledgeBase::design_realisable(std::string_view design) const {
    return !holds(design_unrealisable(std::string(design)));
}

bool KnowledgeBase::objective_fulfilled(std::string_view objective) const {
    return !holds(objective_in_error(std::string(objective)));
}

std::optional<QAValue> KnowledgeBase::measurement(std::string_view qa_type) const {
    auto it = measurements_.find(qa_type);
    if (it == measurements_.end()) return std::nullopt;
    return it->second;
}

const FunctionGrounding* KnowledgeBase::grounding(std::string_view objective) const {
    auto it = groundings_.find(objective);
    return it == groundings_.end() ? nullptr : &it->second;
}

GroundingStatus KnowledgeBase::grounding_status(std::string_view objective) const {
    return holds(grounding_in_error(std::string(objective))) ? GroundingStatus::in_error
                                                             : GroundingStatus::ok;
}

void KnowledgeBase::set_grounding(std::string_view objective, std::string_view design, double now) {
    check_grounding(objective, design);
    auto& g = groundings_[std::string(objective)];
    g = FunctionGrounding{std::string(objective), std::string(design), now};
    stale_ = true;
}

void KnowledgeBase::set_nfrs(std::string_view objective, std::vector<NFR> nfrs) {
    Objective* o = model_.find_objective(objective);
    if (o == nullptr) throw Error(ErrorCode::unknown_entity, "objective " + std::string(objective));
    for (const auto& nfr : nfrs) {
        const QAType* q = model_.find_qa_type(nfr.qa_type);
        if (q == nullptr) throw Error(ErrorCode::unknown_entity, "qa_type " + nfr.qa_type);
        if (nfr.comparator != comparator_for(q->polarity)) {
            throw Error(ErrorCode::invalid_argument,
                        "comparator for " + q->name + " must be " +
                            std::string(to_string(comparator_for(q->polarity))));
        }
    }
    o->nfrs = std::move(nfrs);
    stale_ = true;
}

void KnowledgeBase::set_unresolvable(std::string_view objective, bool unresolvable) {
    if (unresolvable) {
        unresolvable_.emplace(objective);
    } else if (auto it = unresolvable_.find(objective); it != unresolvable_.end()) {
        unresolvable_.erase(it);
    }
}

bool KnowledgeBase::unresolvable(std::string_view objective) const {
    return unresolvable_.count(objective) > 0;
}

void KnowledgeBase::install_derived(std::set<Fact> derived) {
    derived_ = std::move(derived);
    stale_ = false;
}

}  // namespace metactl
