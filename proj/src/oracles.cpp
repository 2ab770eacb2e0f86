#include "maavi/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using nlohmann::json;

namespace maavi {

namespace {

double sup_distance(const ValueFunction& a, const ValueFunction& b) {
    double d = 0.0;
    for (std::size_t x = 0; x < a.size(); ++x)
        d = std::max(d, std::abs(a[x] - b[x]));
    return d;
}

void require_cap(const Model& model, std::uint64_t cap) {
    const std::uint64_t count = policy_count(model);
    if (count > cap)
        throw PolicyCapError(count, cap);
}

// Definition check against a precomputed J_mu.
AbaCheck aba_check_with(const Model& model, const Policy& mu, ValueFunction Jmu) {
    AbaCheck out;
    for (StateId x = 0; x < model.num_states(); ++x) {
        const double base = model.eval_h(x, mu[x], Jmu);
        for (std::size_t agent = 0; agent < model.num_agents(); ++agent) {
            const auto set = component_constraint_set(model, x, agent, mu[x]);
            double best = base;
            std::size_t best_i = set.control_indices.size();
            for (std::size_t i = 0; i < set.control_indices.size(); ++i) {
                if (set.control_indices[i] == mu[x])
                    continue;
                const double h = model.eval_h(x, set.control_indices[i], Jmu);
                if (h < best) {
                    best = h;
                    best_i = i;
                }
            }
            if (best_i < set.control_indices.size() && base - best > kOracleTol) {
                out.witnesses.push_back(
                    {x, agent, set.admissible[best_i], set.control_indices[best_i], base - best});
            }
        }
    }
    out.optimal = out.witnesses.empty();
    out.policy_value = std::move(Jmu);
    return out;
}

} // namespace

ValueFunction policy_cost(const Model& model, const Policy& mu) {
    model.require_feasible(mu);
    const std::size_t n = model.num_states();
    if (auto sys = model.policy_system(mu)) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - sys->transition;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible())
            throw Error("policy evaluation system is singular");
        Eigen::VectorXd J = lu.solve(sys->cost);
        // One refinement step keeps the fixed-point residual near machine precision.
        J += lu.solve(sys->cost - A * J);
        return ValueFunction(J.data(), J.data() + n);
    }
    const double alpha = model.contraction_modulus();
    const double tol = alpha > 0.0 ? 1e-12 * (1.0 - alpha) / alpha : std::numeric_limits<double>::infinity();
    ValueFunction J(n, 0.0);
    for (std::size_t it = 0; it < 10'000'000; ++it) {
        ValueFunction next = apply_T_mu(model, mu, J);
        const double r = weighted_sup_distance(next, J, model.weights());
        J = std::move(next);
        if (r <= tol)
            return J;
    }
    throw Error("policy evaluation did not converge");
}

AbaCheck is_agent_by_agent_optimal(const Model& model, const Policy& mu) {
    return aba_check_with(model, mu, policy_cost(model, mu));
}

bool is_component_wise_minimum(const Model& model, StateId x, const ControlTuple& u, std::span<const double> J) {
    auto idx = model.find_control(x, u);
    if (!idx)
        throw FeasibilityError(x, "control " + to_string(u) + " is not in U(x)");
    const double base = model.eval_h(x, *idx, J);
    for (std::size_t agent = 0; agent < model.num_agents(); ++agent) {
        for (std::size_t c : component_constraint_set(model, x, agent, *idx).control_indices) {
            if (model.eval_h(x, c, J) < base - kOracleTol)
                return false;
        }
    }
    return true;
}

OracleReport brute_force_optimal(const Model& model, std::uint64_t policy_cap) {
    require_cap(model, policy_cap);
    const std::size_t n = model.num_states();
    OracleReport report;
    std::vector<Policy> policies;
    std::vector<ValueFunction> costs;
    for (PolicyEnumerator it(model); !it.done(); it.next()) {
        policies.push_back(it.current());
        costs.push_back(policy_cost(model, it.current()));
    }
    report.policy_count = policies.size();

    report.optimal_value.assign(n, std::numeric_limits<double>::infinity());
    for (const auto& J : costs) {
        for (StateId x = 0; x < n; ++x)
            report.optimal_value[x] = std::min(report.optimal_value[x], J[x]);
    }
    for (std::size_t i = 0; i < policies.size(); ++i) {
        if (sup_distance(costs[i], report.optimal_value) <= kOracleTol)
            report.optimal_policies.push_back(policies[i]);
        AbaCheck aba = aba_check_with(model, policies[i], costs[i]);
        if (aba.optimal)
            report.aba_optimal_policies.push_back(policies[i]);
    }

    // Near-equal cost vectors agree in their first entry, so only neighbors in that order need comparing.
    std::vector<std::size_t> idx(costs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return costs[a][0] < costs[b][0]; });
    for (std::size_t i = 0; i < idx.size() && report.uniqueness_holds; ++i) {
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
            if (costs[idx[j]][0] - costs[idx[i]][0] > kOracleTol)
                break;
            if (sup_distance(costs[idx[i]], costs[idx[j]]) <= kOracleTol) {
                report.uniqueness_holds = false;
                break;
            }
        }
    }

    const GreedyResult t = apply_T(model, report.optimal_value);
    report.bellman_residual = weighted_sup_distance(t.value, report.optimal_value, model.weights());
    if (report.bellman_residual > kOracleTol)
        throw Error("brute-force optimum fails Bellman's equation (residual " +
                    std::to_string(report.bellman_residual) + ")");
    return report;
}

std::vector<Policy> enumerate_aba_optimal_policies(const Model& model, std::uint64_t policy_cap) {
    require_cap(model, policy_cap);
    std::vector<Policy> out;
    for (PolicyEnumerator it(model); !it.done(); it.next()) {
        if (is_agent_by_agent_optimal(model, it.current()).optimal)
            out.push_back(it.current());
    }
    return out;
}

bool component_minima_are_global(const Model& model, std::uint64_t policy_cap) {
    require_cap(model, policy_cap);
    for (PolicyEnumerator it(model); !it.done(); it.next()) {
        const ValueFunction J = policy_cost(model, it.current());
        for (StateId x = 0; x < model.num_states(); ++x) {
            const auto list = model.controls(x);
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < list.size(); ++c)
                best = std::min(best, model.eval_h(x, c, J));
            for (std::size_t c = 0; c < list.size(); ++c) {
                if (is_component_wise_minimum(model, x, list[c], J) && model.eval_h(x, c, J) > best + kOracleTol)
                    return false;
            }
        }
    }
    return true;
}

json oracle_report_to_json(const OracleReport& report) {
    auto encode = [](const std::vector<Policy>& ps) {
        json out = json::array();
        for (const auto& p : ps)
            out.push_back(p.choice);
        return out;
    };
    return {{"optimal_value", report.optimal_value},
            {"optimal_policies", encode(report.optimal_policies)},
            {"aba_optimal_policies", encode(report.aba_optimal_policies)},
            {"uniqueness_holds", report.uniqueness_holds},
            {"policy_count", report.policy_count},
            {"bellman_residual", report.bellman_residual}};
}

} // namespace maavi
