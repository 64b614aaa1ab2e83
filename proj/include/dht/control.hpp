#ifndef DHT_CONTROL_HPP
#define DHT_CONTROL_HPP

#include <optional>

#include "dht/normalize.hpp"
#include "dht/system.hpp"

namespace dht {

/// Discrete optimal control problem: maximize sum of beta^k F(q_t, u_t)
/// subject to (q[+1]-q[0])/h = f^i(q_t, u_t). F and f carry no costate
/// and no shifted symbols.
struct OptimalControlProblem {
    Expr F;
    std::vector<Expr> f; // n entries
    MeshContext ctx;
    std::vector<double> q0; // optional boundary data

    void validate() const;
};

/// u^j = g^j(q[0], p[+1]) solving the stationarity conditions.
struct ControlSolution {
    std::vector<Expr> g; // m entries
};

/// beta^[t] F + sum_i lambda_i[+1] f^i (the beta^[t] factor is dropped
/// when beta = 1).
Expr present_value_hamiltonian(const OptimalControlProblem& ocp);

/// Present-value maximum-principle system with stationarity residuals
/// dH/du^j attached.
DifferenceSystem pontryagin_system(const OptimalControlProblem& ocp);

/// F + beta sum_i p_i[+1] f^i. Rejects beta = 1, where the current-value
/// Hamiltonian does not exist; use the present-value formulation there.
Expr current_value_hamiltonian(const OptimalControlProblem& ocp);

/// Current-value maximum-principle system: state residual uses
/// d/d(beta p[+1]) = (1/beta) d/dp[+1]; costate residual carries
/// Gamma^i = (1-beta) p_i[+1]/h.
DifferenceSystem current_value_system(const OptimalControlProblem& ocp);

/// Solves each stationarity residual for its control (affine or c/u - d
/// form) and substitutes the controls out of the system and Hamiltonian.
/// A numeric second-order check d2H/du2 < 0 over sampled points is
/// recorded in soc_note (violations warn, they do not fail).
DifferenceSystem eliminate_control(const DifferenceSystem& sys,
                                   const std::optional<ControlSolution>& sol = std::nullopt,
                                   std::uint64_t seed = kDefaultSeed);

/// The affine / reciprocal-form auto-solver used by eliminate_control.
ControlSolution auto_control_solution(const DifferenceSystem& sys, std::uint64_t seed = kDefaultSeed);

} // namespace dht

#endif
