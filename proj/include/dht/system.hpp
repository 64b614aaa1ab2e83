#ifndef DHT_SYSTEM_HPP
#define DHT_SYSTEM_HPP

#include <optional>
#include <string>
#include <vector>

#include "dht/context.hpp"
#include "dht/expr.hpp"

namespace dht {

enum class SystemKind { Canonical, PresentValue, CurrentValue };

const char* system_kind_name(SystemKind k);

/// Explicit one-step map: q_i[+1] and p_i[+1] as expressions in offset-0
/// symbols and t. Derivable when the costate residuals are affine in the
/// p[+1] block.
struct StepMap {
    std::vector<Expr> q_next;
    std::vector<Expr> p_next;
};

/// A derived difference system in residual form: a point solves the
/// system iff all residuals vanish. State residuals contain q[+1],
/// costate residuals contain the costate at [+1].
struct DifferenceSystem {
    SystemKind kind = SystemKind::Canonical;
    MeshContext ctx;
    Expr hamiltonian; // canonical/current: H(q[0], p[+1], t); present: uses lambda[+1]
    std::vector<Expr> state_residuals;   // n entries
    std::vector<Expr> costate_residuals; // n entries
    std::vector<Expr> stationarity;      // m entries; empty once control is eliminated
    std::vector<Expr> gamma;             // n entries; zero for canonical/present systems
    std::optional<Expr> time_residual;   // diagnostic only, never used to advance
    VarBase costate_base = VarBase::Costate;
    std::string soc_note; // second-order-condition check outcome, if any

    bool control_free() const;

    /// Cached explicit step map; derive_step_map fills it on first use.
    mutable std::optional<StepMap> step_map_cache;
    mutable bool step_map_attempted = false;
};

/// Tries to solve the residuals for (q[+1], p[+1]) in closed form.
/// Returns nullopt when the costate block is not affine in p[+1].
const std::optional<StepMap>& derive_step_map(const DifferenceSystem& sys);

/// Solves residuals that are affine in the given variables, with
/// coefficients free of them (small symbolic Cramer solve). Returns
/// nullopt when the block is not affine or is singular.
std::optional<std::vector<Expr>> solve_affine_system(const std::vector<Expr>& residuals,
                                                     const std::vector<SymRef>& vars);

} // namespace dht

#endif
