#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "metactl/knowledge_base.hpp"

namespace metactl {

/// Built-in adaptation rules.
///   R1: component_error(c), c required by design d      => design_unrealisable(d)
///   R2: objective o grounded on d, design_unrealisable(d) => grounding_in_error(o)
///   R3: objective o grounded, NFR on q violated by the latest measurement of q
///                                                       => grounding_in_error(o), objective_in_error(o)
///   R4: grounding_in_error(o)                           => objective_in_error(o)
enum class RuleId { R1, R2, R3, R4 };

std::string_view to_string(RuleId r);

struct RuleFiring {
    RuleId rule;
    std::vector<std::pair<std::string, std::string>> bindings;  // variable -> entity
    Fact derived;

    bool operator==(const RuleFiring&) const = default;
};

struct InferenceReport {
    std::vector<RuleFiring> firings;
    int iterations = 0;
    std::set<Fact> derived;
};

struct InferenceOptions {
    /// Order in which rules are applied within one pass.
    std::array<RuleId, 4> rule_order{RuleId::R1, RuleId::R2, RuleId::R3, RuleId::R4};
    /// When set, rule instantiations are visited in a seeded random order.
    std::optional<std::uint64_t> shuffle_seed;
};

/// Forward-chains the rules to a fixpoint over the asserted facts and
/// measurements, replacing the knowledge base's derived set. Facts derived on
/// an earlier run are discarded first, so a retraction takes effect here.
InferenceReport infer(KnowledgeBase& kb, const InferenceOptions& options = {});

/// Throws `STALE_KB` when the knowledge base changed after the last `infer`.
ObjectiveStatus objective_status(const KnowledgeBase& kb, std::string_view objective);

/// One line per firing: `R1 c=arm_left d=dual_arm ⇒ design_unrealisable(dual_arm)`.
std::string format_trace(const InferenceReport& report);

}  // namespace metactl
