#include "maavi/problem_models.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace maavi {

namespace {

std::string policy_encoding(const Policy& mu) {
    std::ostringstream out;
    out << '[';
    for (std::size_t x = 0; x < mu.size(); ++x)
        out << (x ? "," : "") << mu[x];
    out << ']';
    return out.str();
}

// Successor sets with positive probability, per (x, control).
std::vector<std::vector<std::vector<StateId>>> successors(const TabularMdp& model) {
    const auto& rows = model.data().rows;
    std::vector<std::vector<std::vector<StateId>>> succ(rows.size());
    for (StateId x = 0; x < rows.size(); ++x) {
        succ[x].resize(rows[x].size());
        for (std::size_t c = 0; c < rows[x].size(); ++c) {
            for (const auto& e : rows[x][c]) {
                if (e.prob > 0.0)
                    succ[x][c].push_back(e.next);
            }
        }
    }
    return succ;
}

// First state that cannot reach the destination under mu, if any.
std::optional<StateId> first_improper_state(const std::vector<std::vector<std::vector<StateId>>>& succ,
                                            const Policy& mu, StateId dest) {
    const std::size_t n = succ.size();
    std::vector<std::vector<StateId>> pred(n);
    for (StateId x = 0; x < n; ++x) {
        if (x == dest)
            continue;
        for (StateId y : succ[x][mu[x]])
            pred[y].push_back(x);
    }
    std::vector<bool> reaches(n, false);
    std::vector<StateId> stack{dest};
    reaches[dest] = true;
    while (!stack.empty()) {
        StateId y = stack.back();
        stack.pop_back();
        for (StateId x : pred[y]) {
            if (!reaches[x]) {
                reaches[x] = true;
                stack.push_back(x);
            }
        }
    }
    for (StateId x = 0; x < n; ++x) {
        if (!reaches[x])
            return x;
    }
    return std::nullopt;
}

StateId require_destination(const TabularMdp& model) {
    if (model.kind() != ProblemKind::Ssp || !model.destination())
        throw ValidationError("model is not a stochastic shortest path problem with a destination");
    return *model.destination();
}

} // namespace

std::string to_string(ProblemKind kind) {
    return kind == ProblemKind::Discounted ? "discounted" : "ssp";
}

TabularMdp::TabularMdp(Data data) : data_(std::move(data)), modulus_(1.0) {
    const std::size_t n = data_.controls.size();
    if (n == 0)
        throw ValidationError("model must have at least one state");
    if (data_.rows.size() != n)
        throw ValidationError("transition table has " + std::to_string(data_.rows.size()) + " states, expected " +
                              std::to_string(n));
    for (StateId x = 0; x < n; ++x) {
        if (data_.rows[x].size() != data_.controls[x].size())
            throw ValidationError("state " + std::to_string(x) + ": " + std::to_string(data_.rows[x].size()) +
                                  " transition rows for " + std::to_string(data_.controls[x].size()) + " controls");
        for (const auto& row : data_.rows[x]) {
            for (const auto& e : row) {
                if (e.next >= n)
                    throw ValidationError("state " + std::to_string(x) + ": successor " + std::to_string(e.next) +
                                          " out of range");
            }
        }
    }
    if (data_.kind == ProblemKind::Ssp) {
        if (!data_.destination)
            throw ValidationError("ssp model requires a destination state");
        if (*data_.destination >= n)
            throw ValidationError("destination " + std::to_string(*data_.destination) + " out of range");
        data_.discount = 1.0;
    } else {
        data_.destination.reset();
        modulus_ = data_.discount;
    }
    weights_ = WeightVector::ones(n);
}

double TabularMdp::eval_h(StateId x, std::size_t control, std::span<const double> J) const {
    const auto& row = data_.rows[x][control];
    double h = 0.0;
    if (data_.kind == ProblemKind::Discounted) {
        const double alpha = data_.discount;
        for (const auto& e : row)
            h += e.prob * (e.cost + alpha * J[e.next]);
        return h;
    }
    const StateId dest = *data_.destination;
    if (x == dest)
        return 0.0;
    for (const auto& e : row)
        h += e.prob * (e.cost + (e.next == dest ? 0.0 : J[e.next]));
    return h;
}

std::optional<double> TabularMdp::discount() const {
    if (data_.kind == ProblemKind::Discounted)
        return data_.discount;
    return std::nullopt;
}

double TabularMdp::expected_cost(StateId x, std::size_t control) const {
    if (data_.destination && x == *data_.destination)
        return 0.0;
    double g = 0.0;
    for (const auto& e : data_.rows[x][control])
        g += e.prob * e.cost;
    return g;
}

std::optional<AffinePolicySystem> TabularMdp::policy_system(const Policy& mu) const {
    require_feasible(mu);
    const std::size_t n = num_states();
    AffinePolicySystem sys{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
    for (StateId x = 0; x < n; ++x) {
        if (data_.destination && x == *data_.destination)
            continue;
        sys.cost(x) = expected_cost(x, mu[x]);
        for (const auto& e : data_.rows[x][mu[x]]) {
            if (data_.destination && e.next == *data_.destination)
                continue;
            sys.transition(x, e.next) += data_.discount * e.prob;
        }
    }
    return sys;
}

void TabularMdp::attach_ssp_weights(WeightVector v, double modulus) {
    if (data_.kind != ProblemKind::Ssp)
        throw ValidationError("ssp weights can only be attached to ssp models");
    if (v.size() != num_states())
        throw ValidationError("ssp weights have the wrong length");
    if (!(modulus >= 0.0 && modulus < 1.0))
        throw ValidationError("ssp modulus must lie in [0, 1)");
    weights_ = std::move(v);
    modulus_ = modulus;
}

double mdp_eval_H(const TabularMdp& model, StateId x, const ControlTuple& u, std::span<const double> J) {
    return model.eval_h(x, u, J);
}

ComponentConstraintSet component_constraint_set(const Model& model, StateId x, std::size_t agent,
                                                std::size_t reference_index) {
    if (x >= model.num_states())
        throw ValidationError("state " + std::to_string(x) + " out of range");
    if (agent >= model.num_agents())
        throw ValidationError("agent index " + std::to_string(agent) + " out of range");
    auto list = model.controls(x);
    if (reference_index >= list.size())
        throw FeasibilityError(x, "reference control index out of range");
    const ControlTuple& ref = list[reference_index];
    ComponentConstraintSet set;
    set.agent = agent;
    set.state = x;
    for (std::size_t c = 0; c < list.size(); ++c) {
        const ControlTuple& u = list[c];
        if (u.size() != ref.size())
            continue;
        bool same_elsewhere = true;
        for (std::size_t i = 0; i < u.size() && same_elsewhere; ++i)
            same_elsewhere = (i == agent) || u[i] == ref[i];
        if (same_elsewhere) {
            set.admissible.push_back(u[agent]);
            set.control_indices.push_back(c);
        }
    }
    return set;
}

ComponentConstraintSet component_constraint_set(const Model& model, StateId x, std::size_t agent,
                                                const ControlTuple& reference) {
    if (x >= model.num_states())
        throw ValidationError("state " + std::to_string(x) + " out of range");
    auto idx = model.find_control(x, reference);
    if (!idx)
        throw FeasibilityError(x, "reference control " + to_string(reference) + " is not in U(x)");
    return component_constraint_set(model, x, agent, *idx);
}

PropertyReport validate_model(const TabularMdp& model, std::uint64_t policy_cap) {
    PropertyReport report;
    const auto& d = model.data();
    const std::size_t n = model.num_states();
    const std::size_t m = model.num_agents();
    if (m == 0)
        report.add({0, "num_agents must be at least 1", 0.0});
    if (model.kind() == ProblemKind::Discounted && !(d.discount > 0.0 && d.discount < 1.0))
        report.add({0, "discount must lie in (0, 1)", d.discount});

    for (StateId x = 0; x < n; ++x) {
        const auto& list = d.controls[x];
        ++report.samples_checked;
        if (list.empty())
            report.add({x, "U(x) is empty", 0.0});
        std::set<ControlTuple> seen;
        for (std::size_t c = 0; c < list.size(); ++c) {
            const std::string where = "control " + std::to_string(c) + " " + to_string(list[c]);
            if (list[c].size() != m)
                report.add({x, where + " has " + std::to_string(list[c].size()) + " components, expected " +
                                   std::to_string(m),
                            static_cast<double>(list[c].size())});
            if (std::any_of(list[c].begin(), list[c].end(), [](int v) { return v < 0; }))
                report.add({x, where + " has a negative component code", 0.0});
            if (!seen.insert(list[c]).second)
                report.add({x, where + " is listed twice", 0.0});

            double sum = 0.0;
            for (const auto& e : d.rows[x][c]) {
                ++report.samples_checked;
                if (!std::isfinite(e.prob) || e.prob < 0.0)
                    report.add({x, where + ": transition to " + std::to_string(e.next) +
                                       " has invalid probability",
                                e.prob});
                if (!std::isfinite(e.cost))
                    report.add({x, where + ": non-finite cost", e.cost});
                sum += e.prob;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                report.add({x, where + ": probability row sums to " + std::to_string(sum), sum});
        }
    }

    if (model.kind() == ProblemKind::Ssp && report.passed) {
        const StateId dest = *model.destination();
        for (std::size_t c = 0; c < d.rows[dest].size(); ++c) {
            bool absorbing = true;
            for (const auto& e : d.rows[dest][c]) {
                if (e.prob > 0.0 && (e.next != dest || e.cost != 0.0))
                    absorbing = false;
            }
            if (!absorbing)
                report.add({dest, "destination control " + std::to_string(c) + " is not a cost-free self-loop", 0.0});
        }
        if (report.passed) {
            PropertyReport ssp = validate_ssp(model, policy_cap);
            for (auto& v : ssp.violations)
                report.add(std::move(v));
            for (auto& note : ssp.notes)
                report.notes.push_back(std::move(note));
            report.samples_checked += ssp.samples_checked;
        }
    }
    return report;
}

PropertyReport validate_ssp(const TabularMdp& model, std::uint64_t policy_cap) {
    const StateId dest = require_destination(model);
    const std::uint64_t count = policy_count(model);
    if (count > policy_cap)
        throw PolicyCapError(count, policy_cap);
    const auto succ = successors(model);
    constexpr std::size_t kMaxListed = 10;
    PropertyReport report;
    std::uint64_t improper = 0;
    for (PolicyEnumerator it(model); !it.done(); it.next()) {
        ++report.samples_checked;
        if (auto x = first_improper_state(succ, it.current(), dest)) {
            ++improper;
            if (report.violations.size() < kMaxListed)
                report.add({*x, "improper policy " + policy_encoding(it.current()) +
                                    " never reaches the destination from this state",
                            0.0});
            report.passed = false;
        }
    }
    if (improper > 0)
        report.notes.push_back(std::to_string(improper) + " improper policies found");
    return report;
}

SspWeights ssp_weights(const TabularMdp& model, std::uint64_t policy_cap) {
    const StateId dest = require_destination(model);
    const std::uint64_t count = policy_count(model);
    if (count > policy_cap)
        throw PolicyCapError(count, policy_cap);
    const std::size_t n = model.num_states();
    const auto succ = successors(model);

    std::vector<StateId> live;
    for (StateId x = 0; x < n; ++x) {
        if (x != dest)
            live.push_back(x);
    }
    std::vector<std::size_t> pos(n, 0);
    for (std::size_t i = 0; i < live.size(); ++i)
        pos[live[i]] = i;

    std::vector<double> v(n, 1.0);
    const std::size_t k = live.size();
    for (PolicyEnumerator it(model); !it.done(); it.next()) {
        const Policy& mu = it.current();
        if (auto x = first_improper_state(succ, mu, dest))
            throw Error("improper policy " + policy_encoding(mu) + " at state " + std::to_string(*x));
        if (k == 0)
            continue;
        // Expected hitting times: t = 1 + P_live t.
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(k, k);
        for (std::size_t i = 0; i < k; ++i) {
            for (const auto& e : model.data().rows[live[i]][mu[live[i]]]) {
                if (e.next != dest)
                    A(i, pos[e.next]) -= e.prob;
            }
        }
        Eigen::VectorXd t = A.partialPivLu().solve(Eigen::VectorXd::Ones(k));
        for (std::size_t i = 0; i < k; ++i)
            v[live[i]] = std::max(v[live[i]], t(i));
    }
    double modulus = 0.0;
    for (StateId x : live)
        modulus = std::max(modulus, (v[x] - 1.0) / v[x]);
    return {WeightVector(std::move(v)), modulus};
}

} // namespace maavi
