#pragma once

#include <optional>
#include <span>

#include <Eigen/Dense>

#include "maavi/types.hpp"

namespace maavi {

/// Affine form of T_mu: (T_mu J) = cost + transition * J.
struct AffinePolicySystem {
    Eigen::MatrixXd transition;
    Eigen::VectorXd cost;
};

/**
Abstract DP model: a finite state set, feasible control tuples U(x) and the
mapping H(x, u, J). Implementations must satisfy monotonicity and be a
contraction of every T_mu with respect to the weighted sup-norm given by
weights() with modulus contraction_modulus(). Models are immutable after
construction and may be shared across threads.
*/
class Model {
public:
    virtual ~Model() = default;

    virtual std::size_t num_states() const = 0;
    virtual std::size_t num_agents() const = 0;

    /// U(x) as an explicit list; never empty for a valid model.
    virtual std::span<const ControlTuple> controls(StateId x) const = 0;

    /// H(x, u, J) for u = controls(x)[control].
    virtual double eval_h(StateId x, std::size_t control, std::span<const double> J) const = 0;

    virtual double contraction_modulus() const = 0;
    virtual const WeightVector& weights() const = 0;

    /// Discount factor when H(x,u,J+c) = H(x,u,J) + discount*c holds for constants c.
    virtual std::optional<double> discount() const { return std::nullopt; }

    /// Exact affine representation of T_mu, when the model has one.
    virtual std::optional<AffinePolicySystem> policy_system(const Policy&) const { return std::nullopt; }

    /// Position of u in controls(x), if feasible.
    std::optional<std::size_t> find_control(StateId x, const ControlTuple& u) const;

    /// H(x, u, J) looked up by tuple; throws FeasibilityError when u is not in U(x).
    double eval_h(StateId x, const ControlTuple& u, std::span<const double> J) const;

    /// Throws FeasibilityError naming the first state where mu is out of range.
    void require_feasible(const Policy& mu) const;

    const ControlTuple& control(StateId x, std::size_t index) const { return controls(x)[index]; }
};

/// Policy choosing the first feasible tuple at every state.
Policy first_control_policy(const Model& model);

/// Number of policies, saturating at UINT64_MAX.
std::uint64_t policy_count(const Model& model);

/**
Odometer over all policies in lexicographic order of control indices. The
first state varies slowest, so the enumeration order is canonical.
*/
class PolicyEnumerator {
public:
    explicit PolicyEnumerator(const Model& model);

    const Policy& current() const { return current_; }
    bool done() const { return done_; }
    void next();

private:
    std::vector<std::size_t> sizes_;
    Policy current_;
    bool done_ = false;
};

} // namespace maavi
