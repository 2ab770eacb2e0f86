#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace maavi {

using StateId = std::size_t;

/// Component codes of one control u = (u_1, ..., u_m).
using ControlTuple = std::vector<int>;

/// Real-valued function over the states, J(0..n-1).
using ValueFunction = std::vector<double>;

/// Absolute tolerance used for argmin ties and componentwise comparisons.
inline constexpr double kCompareTol = 1e-12;

/// Default convergence tolerance of the iterative solvers.
inline constexpr double kDefaultEpsilon = 1e-9;

/// Default cap on the number of enumerated policies.
inline constexpr std::uint64_t kDefaultPolicyCap = 1'000'000;

/**
Stationary policy stored as one control index per state. The index refers to
the position of the chosen tuple in the model's feasible control list at that
state, which is also the canonical encoding used in reports.
*/
struct Policy {
    std::vector<std::size_t> choice;

    Policy() = default;
    explicit Policy(std::vector<std::size_t> c) : choice(std::move(c)) {}

    std::size_t size() const { return choice.size(); }
    std::size_t operator[](StateId x) const { return choice[x]; }
    std::size_t& operator[](StateId x) { return choice[x]; }

    friend bool operator==(const Policy&, const Policy&) = default;
    friend auto operator<=>(const Policy&, const Policy&) = default;
};

/// Positive weights v(x) defining the norm max_x |J(x)| / v(x).
class WeightVector {
public:
    WeightVector() = default;
    explicit WeightVector(std::vector<double> w);
    static WeightVector ones(std::size_t n) { return WeightVector(std::vector<double>(n, 1.0)); }

    std::size_t size() const { return w_.size(); }
    double operator[](StateId x) const { return w_[x]; }
    const std::vector<double>& values() const { return w_; }

private:
    std::vector<double> w_;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A control tuple or policy that is not in U(x).
class FeasibilityError : public Error {
public:
    FeasibilityError(StateId x, const std::string& what);
    StateId state() const { return state_; }

private:
    StateId state_;
};

/// Malformed input: bad weights, lengths, options or schedules.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Initial pair violating T_mu J <= J in validate mode.
class InitialConditionError : public Error {
public:
    InitialConditionError(StateId x, double excess);
    StateId state() const { return state_; }
    double excess() const { return excess_; }

private:
    StateId state_;
    double excess_;
};

class UnsupportedModeError : public Error {
public:
    using Error::Error;
};

/// Policy enumeration refused because the count exceeds the cap.
class PolicyCapError : public Error {
public:
    PolicyCapError(std::uint64_t count, std::uint64_t cap);
    std::uint64_t count() const { return count_; }

private:
    std::uint64_t count_;
};

/// Policy cap from the MAAVI_POLICY_CAP environment variable, or the default.
std::uint64_t policy_cap_from_env();

std::string to_string(const ControlTuple& u);

} // namespace maavi
