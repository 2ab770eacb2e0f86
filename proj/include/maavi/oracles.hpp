#pragma once

#include <vector>

#include "json.hpp"

#include "maavi/abstract_dp.hpp"
#include "maavi/problem_models.hpp"

namespace maavi {

/// Tolerance for optimality and cost-distinctness comparisons in the oracles.
inline constexpr double kOracleTol = 1e-9;

/// A single agent's improving deviation at one state, evaluated at J_mu.
struct OptimalityWitness {
    StateId state = 0;
    std::size_t agent = 0;
    int deviating_component = 0;
    /// Index in U(state) of the tuple with the deviation applied.
    std::size_t control = 0;
    /// H(x, mu(x), J_mu) - H(x, deviation, J_mu) > kOracleTol.
    double improvement = 0.0;
};

struct AbaCheck {
    bool optimal = true;
    std::vector<OptimalityWitness> witnesses;
    ValueFunction policy_value;
};

struct OracleReport {
    ValueFunction optimal_value;
    std::vector<Policy> optimal_policies;
    std::vector<Policy> aba_optimal_policies;
    bool uniqueness_holds = true;
    std::uint64_t policy_count = 0;
    /// ||T J* - J*|| in the model's weighted norm.
    double bellman_residual = 0.0;
};

/**
J_mu, the fixed point of T_mu. Models with an affine T_mu are solved directly;
others iterate T_mu to a residual of 1e-12 (1 - alpha) / alpha.
*/
ValueFunction policy_cost(const Model& model, const Policy& mu);

/**
Enumerates every policy, takes J* as the componentwise minimum of the J_mu and
collects the optimal and agent-by-agent optimal policies in canonical order.
Throws PolicyCapError above the cap and Error if T J* = J* fails at kOracleTol.
*/
OracleReport brute_force_optimal(const Model& model, std::uint64_t policy_cap = kDefaultPolicyCap);

/// Checks that no single agent can lower H(x, ., J_mu) by changing only its component.
AbaCheck is_agent_by_agent_optimal(const Model& model, const Policy& mu);

/// True iff no single-slot substitution within U(x) lowers H(x, u, J) by more than kOracleTol.
bool is_component_wise_minimum(const Model& model, StateId x, const ControlTuple& u, std::span<const double> J);

std::vector<Policy> enumerate_aba_optimal_policies(const Model& model, std::uint64_t policy_cap = kDefaultPolicyCap);

/**
Exhaustive test of the hypothesis that, for every policy mu and state x, each
component-by-component minimum of H at (x, J_mu) also minimizes H(x, ., J_mu)
over U(x). When it holds, every agent-by-agent optimal policy is optimal.
*/
bool component_minima_are_global(const Model& model, std::uint64_t policy_cap = kDefaultPolicyCap);

nlohmann::json oracle_report_to_json(const OracleReport& report);

} // namespace maavi
