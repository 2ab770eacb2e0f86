#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maavi/abstract_dp.hpp"
#include "maavi/model.hpp"

namespace maavi {

enum class ProblemKind { Discounted, Ssp };

std::string to_string(ProblemKind kind);

/**
Finite MDP with explicit per-state control lists, covering both the
alpha-discounted case and stochastic shortest path problems.

H(x,u,J) = sum_y p_xy(u) (g(x,u,y) + alpha J(y)) for discounted models. For
SSP models alpha = 1, the destination's value is pinned at zero (H at the
destination is 0 and J(destination) is never read), and the weights and
modulus come from attach_ssp_weights().

The constructor only checks shapes and index ranges. Probability rows and SSP
properness are checked by validate_model() so that corrupted instances can be
built and diagnosed.
*/
class TabularMdp final : public Model {
public:
    struct Entry {
        StateId next = 0;
        double prob = 0.0;
        double cost = 0.0;
    };

    struct Data {
        ProblemKind kind = ProblemKind::Discounted;
        std::size_t num_agents = 1;
        double discount = 0.9;
        std::optional<StateId> destination;
        /// controls[x] is U(x).
        std::vector<std::vector<ControlTuple>> controls;
        /// rows[x][c] is the transition row of (x, controls[x][c]) with stage costs.
        std::vector<std::vector<std::vector<Entry>>> rows;
    };

    explicit TabularMdp(Data data);

    std::size_t num_states() const override { return data_.controls.size(); }
    std::size_t num_agents() const override { return data_.num_agents; }
    std::span<const ControlTuple> controls(StateId x) const override { return data_.controls[x]; }
    double eval_h(StateId x, std::size_t control, std::span<const double> J) const override;
    double contraction_modulus() const override { return modulus_; }
    const WeightVector& weights() const override { return weights_; }
    std::optional<double> discount() const override;
    std::optional<AffinePolicySystem> policy_system(const Policy& mu) const override;
    using Model::eval_h;

    ProblemKind kind() const { return data_.kind; }
    const Data& data() const { return data_; }
    std::optional<StateId> destination() const { return data_.destination; }

    /// Expected one-stage cost of (x, controls[x][c]).
    double expected_cost(StateId x, std::size_t control) const;

    /// Records SSP weights and modulus; only valid for SSP models.
    void attach_ssp_weights(WeightVector v, double modulus);

private:
    Data data_;
    WeightVector weights_;
    double modulus_;
};

/// H(x, u, J) of a tabular model, looked up by tuple.
double mdp_eval_H(const TabularMdp& model, StateId x, const ControlTuple& u, std::span<const double> J);

/// U_{l,u}(x): values of slot `agent` that keep `reference` feasible when substituted.
struct ComponentConstraintSet {
    std::size_t agent = 0;
    StateId state = 0;
    std::vector<int> admissible;
    /// Index in controls(state) of the tuple obtained by each substitution.
    std::vector<std::size_t> control_indices;
};

/**
Constraint set for one control component (agent index is zero-based). Values
appear in the order their substituted tuples appear in U(x). Throws
FeasibilityError when the reference tuple is not in U(x).
*/
ComponentConstraintSet component_constraint_set(const Model& model, StateId x, std::size_t agent,
                                                const ControlTuple& reference);

/// Same set keyed by the control index of the reference tuple.
ComponentConstraintSet component_constraint_set(const Model& model, StateId x, std::size_t agent,
                                                std::size_t reference_index);

/// Structural and stochastic checks; SSP models also run validate_ssp.
PropertyReport validate_model(const TabularMdp& model, std::uint64_t policy_cap = kDefaultPolicyCap);

/// Checks that every deterministic policy reaches the destination w.p. 1 from every state.
PropertyReport validate_ssp(const TabularMdp& model, std::uint64_t policy_cap = kDefaultPolicyCap);

struct SspWeights {
    WeightVector weights;
    double modulus = 0.0;
};

/**
v(x) = max over policies of the expected number of stages to reach the
destination from x (v(destination) = 1), and modulus = max_x (v(x) - 1) / v(x)
over non-destination states.
*/
SspWeights ssp_weights(const TabularMdp& model, std::uint64_t policy_cap = kDefaultPolicyCap);

} // namespace maavi
