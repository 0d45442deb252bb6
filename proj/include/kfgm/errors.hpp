#pragma once

#include <stdexcept>
#include <string>

namespace kfgm {

/// A boundary-condition parameter set landed on the separated (m1 = 0)
/// branch; callers must switch to separated_branch_analysis().
struct SeparatedBranchError : std::runtime_error {
    explicit SeparatedBranchError(const std::string& what) : std::runtime_error(what) {}
};

/// Time step rejected by the CFL stability bound.
struct CflViolationError : std::runtime_error {
    explicit CflViolationError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative diagonalisation failed to reach the off-diagonal target.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Two independent evaluation routes of the same quantity disagreed
/// beyond tolerance; indicates a transcription bug, not bad input.
struct InternalConsistencyError : std::logic_error {
    explicit InternalConsistencyError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace kfgm
