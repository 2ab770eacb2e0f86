#include "maavi/run_report.hpp"

#include <ostream>

using nlohmann::json;

namespace maavi {

std::string to_string(InitMode mode) {
    switch (mode) {
    case InitMode::Validate: return "validate";
    case InitMode::AutoShift: return "auto-shift";
    case InitMode::Unchecked: return "unchecked";
    }
    return "?";
}

std::string to_string(Termination t) {
    return t == Termination::PolicyStableAndConverged ? "policy_stable_and_converged" : "max_iters";
}

std::string to_string(StepKind s) {
    switch (s) {
    case StepKind::Greedy: return "greedy";
    case StepKind::Improve: return "improve";
    case StepKind::Evaluate: return "evaluate";
    case StepKind::EvaluateRestricted: return "evaluate_restricted";
    }
    return "?";
}

InitMode parse_init_mode(const std::string& s) {
    if (s == "validate")
        return InitMode::Validate;
    if (s == "auto-shift" || s == "auto_shift")
        return InitMode::AutoShift;
    if (s == "unchecked")
        return InitMode::Unchecked;
    throw ValidationError("unknown initial-condition mode '" + s + "'");
}

json event_to_json(const ProcessorEvent& e) {
    return {{"time", e.time}, {"processor", e.processor}, {"action", to_string(e.action)}, {"states", e.states}};
}

void write_event_log(const std::vector<ProcessorEvent>& events, std::ostream& out) {
    for (const auto& e : events)
        out << event_to_json(e).dump() << '\n';
}

json report_to_json(const Model& model, const RunReport& report) {
    json iters = json::array();
    for (const auto& r : report.iterations) {
        json j = {{"k", r.k},
                  {"step", to_string(r.step)},
                  {"residual", r.residual},
                  {"policy_changed", r.policy_changed},
                  {"h_evals", r.h_evals},
                  {"h_evals_total", r.h_evals_total}};
        if (r.block)
            j["block"] = *r.block;
        iters.push_back(std::move(j));
    }
    json controls = json::array();
    for (StateId x = 0; x < report.final_policy.size(); ++x)
        controls.push_back(model.control(x, report.final_policy[x]));
    json doc = {{"algorithm", report.algorithm},
                {"agent_order", report.agent_order},
                {"termination", to_string(report.termination)},
                {"initial_shift", report.initial_shift},
                {"iterations", std::move(iters)},
                {"final_policy", report.final_policy.choice},
                {"final_controls", std::move(controls)},
                {"final_value", report.final_value},
                {"h_evals_total", report.h_evals_total()},
                {"warnings", report.warnings}};
    doc["stabilization_index"] = report.stabilization_index ? json(*report.stabilization_index) : json(nullptr);
    return doc;
}

} // namespace maavi
