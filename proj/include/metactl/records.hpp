#pragma once

// Line-delimited JSON records shared by the loop, the harness logs and the
// `reason` command:
//
//   {"t": 2.0, "kind": "component_status", "name": "arm_right", "status": "error"}
//   {"t": 2.1, "kind": "qa_value", "type": "safety", "value": 0.37}
//   {"t": 3.0, "objective": "o_build", "from": "dual_arm", "to": "single_arm_with_move"}

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "metactl/knowledge_base.hpp"
#include "metactl/mapek.hpp"

namespace metactl {

std::string to_record(const Diagnostic& d);
std::string to_record(const ReconfigurationCommand& c);

/// Throws `MALFORMED_RECORD`.
Diagnostic parse_diagnostic_record(std::string_view line);
ReconfigurationCommand parse_command_record(std::string_view line);

/// Serialized knowledge base: a header line naming the model file and the
/// groundings, followed by diagnostic records that rebuild the asserted state.
///
///   {"kind": "snapshot", "model": "pyramid.archmodel", "groundings": {"o_build": "dual_arm"}}
struct KbSnapshot {
    std::string model_path;  // relative paths resolve against the snapshot's directory
    std::map<std::string, std::string> groundings;
    std::vector<Diagnostic> diagnostics;
};

KbSnapshot read_snapshot(std::istream& in);
std::string write_snapshot(const KnowledgeBase& kb, std::string_view model_path, double timestamp);

}  // namespace metactl
