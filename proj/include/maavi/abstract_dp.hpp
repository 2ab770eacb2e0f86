#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "maavi/model.hpp"

namespace maavi {

struct Violation {
    StateId state = 0;
    std::string detail;
    double measured = 0.0;
};

/// Evidence from a property check; passed iff no violations were recorded.
struct PropertyReport {
    bool passed = true;
    std::vector<Violation> violations;
    std::uint64_t samples_checked = 0;
    std::vector<std::string> notes;
    /// Largest ||T_mu J - T_mu J'|| / ||J - J'|| seen (contraction checks only).
    double worst_ratio = 0.0;

    void add(Violation v) {
        violations.push_back(std::move(v));
        passed = false;
    }
};

struct GreedyResult {
    ValueFunction value;
    Policy policy;
    std::uint64_t h_evals = 0;
};

/// (T_mu J)(x) = H(x, mu(x), J). Exactly n H-evaluations.
ValueFunction apply_T_mu(const Model& model, const Policy& mu, std::span<const double> J);

/**
(TJ)(x) = min over U(x) of H(x, u, J), together with the greedy policy. The
value is the exact minimum; the policy picks the smallest index within
kCompareTol of it.
*/
GreedyResult apply_T(const Model& model, std::span<const double> J);

/// H(x, u, J) for every u in U(x), in feasible-list order.
std::vector<std::pair<ControlTuple, double>> compute_q_factors(const Model& model, StateId x,
                                                               std::span<const double> J);

/// max_x |J(x)| / v(x).
double weighted_sup_norm(std::span<const double> J, const WeightVector& v);

/// Norm of J - J'.
double weighted_sup_distance(std::span<const double> J, std::span<const double> Jp,
                             const WeightVector& v);

/// J <= J' componentwise within tol.
bool leq(std::span<const double> J, std::span<const double> Jp, double tol = kCompareTol);

/// Samples J <= J' and checks H(x,u,J) <= H(x,u,J') + 1e-12 for every (x,u).
PropertyReport check_monotonicity(const Model& model, std::uint64_t trials, std::uint64_t seed);

struct ContractionCheckOptions {
    std::uint64_t trials = 100;
    std::uint64_t seed = 0;
    /// Run the trials for every policy instead of a random policy per trial.
    bool exhaustive_policies = false;
    /// States whose value is pinned and therefore sampled as 0 in J and J'.
    std::vector<StateId> pinned_states;
    std::uint64_t policy_cap = kDefaultPolicyCap;
};

/// Samples (mu, J, J') and checks ||T_mu J - T_mu J'|| <= alpha ||J - J'|| + 1e-12.
PropertyReport check_contraction(const Model& model, const ContractionCheckOptions& opts);
PropertyReport check_contraction(const Model& model, std::uint64_t trials, std::uint64_t seed);

} // namespace maavi
