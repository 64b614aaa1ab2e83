#include "dht/system.hpp"

#include <functional>

#include "dht/normalize.hpp"

namespace dht {

const char* system_kind_name(SystemKind k) {
    switch (k) {
        case SystemKind::Canonical: return "canonical";
        case SystemKind::PresentValue: return "present-value";
        case SystemKind::CurrentValue: return "current-value";
    }
    return "?";
}

bool DifferenceSystem::control_free() const {
    if (!stationarity.empty()) return false;
    for (const auto& r : state_residuals)
        if (contains_base(r, VarBase::Control)) return false;
    for (const auto& r : costate_residuals)
        if (contains_base(r, VarBase::Control)) return false;
    return true;
}

// Solves an affine block: residuals r_i linear in the variables v_j with
// coefficients free of every v_j. Returns expressions for v, or nullopt.
std::optional<std::vector<Expr>> solve_affine_system(const std::vector<Expr>& residuals,
                                                     const std::vector<SymRef>& vars) {
    const std::size_t n = vars.size();
    std::vector<std::vector<Expr>> A(n, std::vector<Expr>(n));
    std::vector<Expr> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        Expr rest = residuals[i];
        for (std::size_t j = 0; j < n; ++j) {
            Expr c = normalize(diff(residuals[i], vars[j]));
            for (const auto& v : vars)
                if (contains_symbol(c, v)) return std::nullopt;
            A[i][j] = c;
            rest = sub(rest, mul(c, seq(vars[j].seq.base, vars[j].seq.index, vars[j].seq.offset)));
        }
        b[i] = normalize(rest);
        for (const auto& v : vars)
            if (contains_symbol(b[i], v)) return std::nullopt;
    }

    // Cramer's rule on the (small) symbolic matrix
    std::function<Expr(const std::vector<std::vector<Expr>>&)> det =
        [&](const std::vector<std::vector<Expr>>& M) -> Expr {
        std::size_t k = M.size();
        if (k == 1) return M[0][0];
        if (k == 2) return normalize(sub(mul(M[0][0], M[1][1]), mul(M[0][1], M[1][0])));
        Expr acc = rational(0);
        for (std::size_t c = 0; c < k; ++c) {
            std::vector<std::vector<Expr>> minor;
            for (std::size_t i = 1; i < k; ++i) {
                std::vector<Expr> row;
                for (std::size_t j = 0; j < k; ++j)
                    if (j != c) row.push_back(M[i][j]);
                minor.push_back(std::move(row));
            }
            Expr term = mul(M[0][c], det(minor));
            acc = (c % 2 == 0) ? add(acc, term) : sub(acc, term);
        }
        return normalize(acc);
    };

    Expr D = det(A);
    if (is_symbolically_zero(D)) return std::nullopt;

    std::vector<Expr> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto Aj = A;
        for (std::size_t i = 0; i < n; ++i) Aj[i][j] = normalize(neg(b[i]));
        out[j] = normalize(div(det(Aj), D));
    }
    return out;
}

const std::optional<StepMap>& derive_step_map(const DifferenceSystem& sys) {
    if (sys.step_map_attempted) return sys.step_map_cache;
    sys.step_map_attempted = true;
    if (!sys.control_free()) return sys.step_map_cache;

    const int n = sys.ctx.n;
    std::vector<SymRef> pvars, qvars;
    for (int i = 1; i <= n; ++i) {
        pvars.push_back(SymRef::of(sys.costate_base, i, +1));
        qvars.push_back(SymRef::of(VarBase::State, i, +1));
    }
    // costate residuals involve the costate block only; solve it first
    for (const auto& r : sys.costate_residuals)
        for (const auto& v : qvars)
            if (contains_symbol(r, v)) return sys.step_map_cache;

    auto psol = solve_affine_system(sys.costate_residuals, pvars);
    if (!psol) return sys.step_map_cache;

    std::map<SymRef, Expr> pbind;
    for (int i = 0; i < n; ++i) pbind[pvars[i]] = (*psol)[i];
    std::vector<Expr> state_sub;
    for (const auto& r : sys.state_residuals) state_sub.push_back(substitute(r, pbind));

    auto qsol = solve_affine_system(state_sub, qvars);
    if (!qsol) return sys.step_map_cache;

    // on-shell forms must be pure offset-<=0 expressions
    for (const auto& e : *psol)
        if (max_offset(e) > 0) return sys.step_map_cache;
    for (const auto& e : *qsol)
        if (max_offset(e) > 0) return sys.step_map_cache;

    StepMap m;
    m.q_next = *qsol;
    m.p_next = *psol;
    sys.step_map_cache = std::move(m);
    return sys.step_map_cache;
}

} // namespace dht
