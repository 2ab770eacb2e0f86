#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "maavi/problem_models.hpp"

namespace maavi {

/// Parse failure with the offending line or JSON field path in the message.
class ProblemFileError : public Error {
public:
    using Error::Error;
};

/// A parsed model that failed validate_model.
class ModelValidationError : public Error {
public:
    explicit ModelValidationError(PropertyReport report);
    const PropertyReport& report() const { return report_; }

private:
    PropertyReport report_;
};

struct LoadOptions {
    /// Rescale probability rows that do not sum to one instead of rejecting them.
    bool renormalize = false;
    std::uint64_t policy_cap = kDefaultPolicyCap;
};

/**
Reads the JSON problem format:

    { "kind": "discounted" | "ssp", "num_states": n, "num_agents": m,
      "discount": a, "destination": d,
      "controls":    [ per state: [ [c1, ..., cm], ... ] ],
      "transitions": [ per state: [ per control: [ [y, p], ... ] ] ],
      "costs":       [ per state: [ per control: [ [y, g], ... ] ] ] }

Missing (y, g) cost entries are zero. The returned model has passed
validate_model; SSP models carry their computed weights.
*/
TabularMdp load_problem(const std::filesystem::path& path, const LoadOptions& opts = {});
TabularMdp parse_problem(const std::string& text, const LoadOptions& opts = {});
TabularMdp problem_from_json(const nlohmann::json& doc, const LoadOptions& opts = {});

nlohmann::json problem_to_json(const TabularMdp& model);
void save_problem(const TabularMdp& model, const std::filesystem::path& path);

/// Policy file: {"policy": [control index per state]} or {"controls": [[c1..cm] per state]}.
Policy policy_from_json(const Model& model, const nlohmann::json& doc);
Policy load_policy(const Model& model, const std::filesystem::path& path);
nlohmann::json policy_to_json(const Model& model, const Policy& mu);

} // namespace maavi
