#include "metactl/records.hpp"

#include <istream>
#include <json.hpp>

#include "metactl/error.hpp"

namespace metactl {

using ordered_json = nlohmann::ordered_json;

std::string to_record(const Diagnostic& d) {
    ordered_json j;
    j["t"] = d.timestamp;
    if (const auto* c = std::get_if<ComponentStatusReport>(&d.payload)) {
        j["kind"] = "component_status";
        j["name"] = c->name;
        j["status"] = c->ok ? "ok" : "error";
    } else {
        const auto& q = std::get<QAReading>(d.payload);
        j["kind"] = "qa_value";
        j["type"] = q.qa_type;
        j["value"] = q.value;
    }
    return j.dump();
}

std::string to_record(const ReconfigurationCommand& c) {
    ordered_json j;
    j["t"] = c.timestamp();
    j["objective"] = c.objective();
    j["from"] = c.from_design();
    j["to"] = c.to_design();
    return j.dump();
}

namespace {

ordered_json parse_object(std::string_view line) {
    ordered_json j = ordered_json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::malformed_record, "not a JSON object: " + std::string(line));
    }
    return j;
}

template <typename T>
T field(const ordered_json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::malformed_record, std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::malformed_record, std::string("bad type for field '") + key + "'");
    }
}

}  // namespace

Diagnostic parse_diagnostic_record(std::string_view line) {
    const ordered_json j = parse_object(line);
    const double t = field<double>(j, "t");
    const auto kind = field<std::string>(j, "kind");
    if (kind == "component_status") {
        const auto status = field<std::string>(j, "status");
        if (status != "ok" && status != "error") {
            throw Error(ErrorCode::malformed_record, "status must be ok or error");
        }
        return component_status(t, field<std::string>(j, "name"), status == "ok");
    }
    if (kind == "qa_value") return qa_reading(t, field<std::string>(j, "type"), field<double>(j, "value"));
    throw Error(ErrorCode::malformed_record, "unknown kind '" + kind + "'");
}

ReconfigurationCommand parse_command_record(std::string_view line) {
    const ordered_json j = parse_object(line);
    try {
        return ReconfigurationCommand(field<double>(j, "t"), field<std::string>(j, "objective"),
                                      field<std::string>(j, "from"), field<std::string>(j, "to"));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::malformed_record) throw;
        throw Error(ErrorCode::malformed_record, e.what());
    }
}

KbSnapshot read_snapshot(std::istream& in) {
    KbSnapshot snap;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (!header) {
            const ordered_json j = parse_object(line);
            if (field<std::string>(j, "kind") != "snapshot") {
                throw Error(ErrorCode::malformed_record, "first record must be the snapshot header");
            }
            snap.model_path = field<std::string>(j, "model");
            if (auto it = j.find("groundings"); it != j.end()) {
                if (!it->is_object()) throw Error(ErrorCode::malformed_record, "groundings must be an object");
                for (const auto& [objective, design] : it->items()) {
                    if (!design.is_string()) {
                        throw Error(ErrorCode::malformed_record, "grounding of " + objective + " must be a string");
                    }
                    snap.groundings[objective] = design.get<std::string>();
                }
            }
            header = true;
            continue;
        }
        snap.diagnostics.push_back(parse_diagnostic_record(line));
    }
    if (!header) throw Error(ErrorCode::malformed_record, "empty snapshot");
    return snap;
}

std::string write_snapshot(const KnowledgeBase& kb, std::string_view model_path, double timestamp) {
    ordered_json header;
    header["kind"] = "snapshot";
    header["model"] = std::string(model_path);
    header["groundings"] = ordered_json::object();
    for (const auto& [objective, g] : kb.groundings()) header["groundings"][objective] = g.design;

    std::string out = header.dump() + "\n";
    for (const auto& f : kb.asserted_facts()) {
        if (f.kind == FactKind::component_error) {
            out += to_record(component_status(timestamp, f.subject, false)) + "\n";
        }
    }
    for (const auto& [type, m] : kb.measurements()) {
        out += to_record(qa_reading(m.timestamp, type, m.value)) + "\n";
    }
    return out;
}

}  // namespace metactl
