#include "metactl/reasoner.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "metactl/error.hpp"
#include "metactl/numeric_format.hpp"

namespace metactl {

std::string_view to_string(RuleId r) {
    switch (r) {
        case RuleId::R1: return "R1";
        case RuleId::R2: return "R2";
        case RuleId::R3: return "R3";
        case RuleId::R4: return "R4";
    }
    return "?";
}

namespace {

class FixpointRun {
public:
    FixpointRun(const KnowledgeBase& kb, const InferenceOptions& options)
        : kb_(kb), model_(kb.model()), options_(options), known_(kb.asserted_facts()) {
        if (options.shuffle_seed) rng_.seed(*options.shuffle_seed);
    }

    InferenceReport run() {
        InferenceReport report;
        bool changed = true;
        while (changed) {
            changed = false;
            ++report.iterations;
            for (RuleId rule : options_.rule_order) {
                auto candidates = instantiate(rule);
                if (options_.shuffle_seed) std::shuffle(candidates.begin(), candidates.end(), rng_);
                for (auto& firing : candidates) {
                    if (!known_.insert(firing.derived).second) continue;
                    report.derived.insert(firing.derived);
                    report.firings.push_back(std::move(firing));
                    changed = true;
                }
            }
        }
        return report;
    }

private:
    bool known(FactKind kind, const std::string& subject) const {
        return known_.count(Fact{kind, subject}) > 0;
    }

    std::vector<RuleFiring> instantiate(RuleId rule) const {
        std::vector<RuleFiring> out;
        switch (rule) {
            case RuleId::R1:
                for (const auto& f : known_) {
                    if (f.kind != FactKind::component_error) continue;
                    for (const auto& d : model_.designs) {
                        if (!d.requires_component(f.subject)) continue;
                        out.push_back({rule, {{"c", f.subject}, {"d", d.name}}, design_unrealisable(d.name)});
                    }
                }
                break;
            case RuleId::R2:
                for (const auto& [objective, g] : kb_.groundings()) {
                    if (!known(FactKind::design_unrealisable, g.design)) continue;
                    out.push_back({rule, {{"o", objective}, {"d", g.design}}, grounding_in_error(objective)});
                }
                break;
            case RuleId::R3:
                for (const auto& [objective, g] : kb_.groundings()) {
                    const Objective* o = model_.find_objective(objective);
                    for (const auto& nfr : o->nfrs) {
                        auto m = kb_.measurement(nfr.qa_type);
                        if (!m || satisfies(m->value, nfr.comparator, nfr.threshold)) continue;
                        std::vector<std::pair<std::string, std::string>> bindings{
                            {"o", objective}, {"q", nfr.qa_type}, {"m", format_number(m->value)}};
                        out.push_back({rule, bindings, grounding_in_error(objective)});
                        out.push_back({rule, bindings, objective_in_error(objective)});
                    }
                }
                break;
            case RuleId::R4:
                for (const auto& f : known_) {
                    if (f.kind != FactKind::grounding_in_error) continue;
                    out.push_back({rule, {{"o", f.subject}}, objective_in_error(f.subject)});
                }
                break;
        }
        return out;
    }

    const KnowledgeBase& kb_;
    const ArchitectureModel& model_;
    const InferenceOptions& options_;
    std::set<Fact> known_;
    std::mt19937_64 rng_;
};

}  // namespace

InferenceReport infer(KnowledgeBase& kb, const InferenceOptions& options) {
    InferenceReport report = FixpointRun(kb, options).run();
    kb.install_derived(report.derived);
    return report;
}

ObjectiveStatus objective_status(const KnowledgeBase& kb, std::string_view objective) {
    if (kb.model().find_objective(objective) == nullptr) {
        throw Error(ErrorCode::unknown_entity, "objective " + std::string(objective));
    }
    if (kb.stale()) {
        throw Error(ErrorCode::stale_kb, "facts changed since the last inference");
    }
    if (kb.objective_fulfilled(objective)) return ObjectiveStatus::ok;
    return kb.unresolvable(objective) ? ObjectiveStatus::unresolvable : ObjectiveStatus::in_error;
}

std::string format_trace(const InferenceReport& report) {
    std::ostringstream os;
    for (const auto& f : report.firings) {
        os << to_string(f.rule);
        for (const auto& [var, value] : f.bindings) os << ' ' << var << '=' << value;
        os << " ⇒ " << to_string(f.derived) << '\n';
    }
    return os.str();
}

}  // namespace metactl
