#include "maavi/types.hpp"

#include <cstdlib>
#include <sstream>

namespace maavi {

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
    for (std::size_t x = 0; x < w_.size(); ++x) {
        if (!(w_[x] > 0.0))
            throw ValidationError("weight v(" + std::to_string(x) + ") = " + std::to_string(w_[x]) +
                                  " is not strictly positive");
    }
}

FeasibilityError::FeasibilityError(StateId x, const std::string& what)
    : Error("state " + std::to_string(x) + ": " + what), state_(x) {}

InitialConditionError::InitialConditionError(StateId x, double excess)
    : Error("initial condition T_mu J <= J violated at state " + std::to_string(x) + " by " +
            std::to_string(excess)),
      state_(x), excess_(excess) {}

PolicyCapError::PolicyCapError(std::uint64_t count, std::uint64_t cap)
    : Error("policy count " + std::to_string(count) + " exceeds enumeration cap " + std::to_string(cap)),
      count_(count) {}

std::uint64_t policy_cap_from_env() {
    const char* s = std::getenv("MAAVI_POLICY_CAP");
    if (s == nullptr || *s == '\0')
        return kDefaultPolicyCap;
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0' || v == 0)
        throw ValidationError(std::string("MAAVI_POLICY_CAP must be a positive integer, got '") + s + "'");
    return v;
}

std::string to_string(const ControlTuple& u) {
    std::ostringstream out;
    out << '(';
    for (std::size_t i = 0; i < u.size(); ++i)
        out << (i ? "," : "") << u[i];
    out << ')';
    return out.str();
}

} // namespace maavi
