#include "maavi/model.hpp"

#include <algorithm>
#include <limits>

namespace maavi {

std::optional<std::size_t> Model::find_control(StateId x, const ControlTuple& u) const {
    auto list = controls(x);
    auto it = std::find(list.begin(), list.end(), u);
    if (it == list.end())
        return std::nullopt;
    return static_cast<std::size_t>(it - list.begin());
}

double Model::eval_h(StateId x, const ControlTuple& u, std::span<const double> J) const {
    auto idx = find_control(x, u);
    if (!idx)
        throw FeasibilityError(x, "control " + to_string(u) + " is not in U(x)");
    return eval_h(x, *idx, J);
}

void Model::require_feasible(const Policy& mu) const {
    if (mu.size() != num_states())
        throw ValidationError("policy has " + std::to_string(mu.size()) + " entries, model has " +
                              std::to_string(num_states()) + " states");
    for (StateId x = 0; x < num_states(); ++x) {
        if (mu[x] >= controls(x).size())
            throw FeasibilityError(x, "policy control index " + std::to_string(mu[x]) +
                                          " is outside U(x) of size " + std::to_string(controls(x).size()));
    }
}

Policy first_control_policy(const Model& model) {
    return Policy(std::vector<std::size_t>(model.num_states(), 0));
}

std::uint64_t policy_count(const Model& model) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t count = 1;
    for (StateId x = 0; x < model.num_states(); ++x) {
        std::uint64_t s = model.controls(x).size();
        if (s == 0)
            return 0;
        if (count > kMax / s)
            return kMax;
        count *= s;
    }
    return count;
}

PolicyEnumerator::PolicyEnumerator(const Model& model)
    : current_(std::vector<std::size_t>(model.num_states(), 0)) {
    for (StateId x = 0; x < model.num_states(); ++x) {
        sizes_.push_back(model.controls(x).size());
        if (sizes_.back() == 0)
            done_ = true;
    }
}

void PolicyEnumerator::next() {
    for (std::size_t i = sizes_.size(); i-- > 0;) {
        if (++current_.choice[i] < sizes_[i])
            return;
        current_.choice[i] = 0;
    }
    done_ = true;
}

} // namespace maavi
