#include "dht/control.hpp"

#include <random>

namespace dht {

void OptimalControlProblem::validate() const {
    ctx.validate();
    if (static_cast<int>(f.size()) != ctx.n)
        throw ValidationError("expected " + std::to_string(ctx.n) + " dynamics expressions, got " +
                              std::to_string(f.size()));
    auto check = [&](const Expr& e, const std::string& what) {
        for (const auto& s : symbols_of(e)) {
            if (s.is_time)
                throw ValidationError(what + " must not depend on t explicitly");
            if (s.seq.base == VarBase::Costate || s.seq.base == VarBase::PresentCostate)
                throw ValidationError(what + " must not contain costate symbols (" + s.str() + ")");
            if (s.seq.offset != 0)
                throw ValidationError(what + " must use offset-0 symbols only (" + s.str() + ")");
            int dim = s.seq.base == VarBase::Control ? ctx.m : ctx.n;
            if (s.seq.index > dim)
                throw ValidationError(what + " uses " + s.str() + " beyond dimension " +
                                      std::to_string(dim));
        }
    };
    check(F, "objective F");
    for (std::size_t i = 0; i < f.size(); ++i) check(f[i], "dynamics f" + std::to_string(i + 1));
}

namespace {

Expr discount_factor(const MeshContext& ctx) {
    return ctx.beta == 1.0 ? rational(1) : geom(param("beta"));
}

} // namespace

Expr present_value_hamiltonian(const OptimalControlProblem& ocp) {
    ocp.validate();
    std::vector<Expr> terms{mul(discount_factor(ocp.ctx), ocp.F)};
    for (int i = 1; i <= ocp.ctx.n; ++i) terms.push_back(mul(lam(i, +1), ocp.f[i - 1]));
    return normalize(sum(std::move(terms)));
}

DifferenceSystem pontryagin_system(const OptimalControlProblem& ocp) {
    Expr H = present_value_hamiltonian(ocp);
    DifferenceSystem sys;
    sys.kind = SystemKind::PresentValue;
    sys.ctx = ocp.ctx;
    sys.hamiltonian = H;
    sys.costate_base = VarBase::PresentCostate;
    Expr hsym = param("h");
    for (int i = 1; i <= ocp.ctx.n; ++i) {
        Expr dq = div(sub(q(i, +1), q(i, 0)), hsym);
        Expr dl = div(sub(lam(i, +1), lam(i, 0)), hsym);
        sys.state_residuals.push_back(
            normalize(sub(dq, diff(H, SymRef::of(VarBase::PresentCostate, i, +1)))));
        sys.costate_residuals.push_back(
            normalize(add(dl, diff(H, SymRef::of(VarBase::State, i, 0)))));
        sys.gamma.push_back(rational(0));
    }
    for (int j = 1; j <= ocp.ctx.m; ++j)
        sys.stationarity.push_back(normalize(diff(H, SymRef::of(VarBase::Control, j, 0))));
    return sys;
}

Expr current_value_hamiltonian(const OptimalControlProblem& ocp) {
    ocp.validate();
    if (ocp.ctx.beta >= 1.0)
        throw ValidationError(
            "the current-value Hamiltonian does not exist for beta = 1; "
            "use the present-value formulation");
    std::vector<Expr> terms{ocp.F};
    for (int i = 1; i <= ocp.ctx.n; ++i)
        terms.push_back(prod({param("beta"), p(i, +1), ocp.f[i - 1]}));
    return normalize(sum(std::move(terms)));
}

DifferenceSystem current_value_system(const OptimalControlProblem& ocp) {
    Expr Hc = current_value_hamiltonian(ocp);
    DifferenceSystem sys;
    sys.kind = SystemKind::CurrentValue;
    sys.ctx = ocp.ctx;
    sys.hamiltonian = Hc;
    sys.costate_base = VarBase::Costate;
    Expr hsym = param("h");
    Expr betasym = param("beta");
    Expr one_minus_beta = sub(rational(1), betasym);
    for (int i = 1; i <= ocp.ctx.n; ++i) {
        Expr dq = div(sub(q(i, +1), q(i, 0)), hsym);
        Expr dp = div(sub(p(i, +1), p(i, 0)), hsym);
        // d/d(beta p[+1]) realized as (1/beta) d/dp[+1]
        Expr dH_dbp = div(diff(Hc, SymRef::of(VarBase::Costate, i, +1)), betasym);
        Expr gamma_i = normalize(div(mul(one_minus_beta, p(i, +1)), hsym));
        sys.state_residuals.push_back(normalize(sub(dq, dH_dbp)));
        sys.costate_residuals.push_back(normalize(
            sub(add(dp, diff(Hc, SymRef::of(VarBase::State, i, 0))), gamma_i)));
        sys.gamma.push_back(gamma_i);
    }
    for (int j = 1; j <= ocp.ctx.m; ++j)
        sys.stationarity.push_back(normalize(diff(Hc, SymRef::of(VarBase::Control, j, 0))));
    return sys;
}

ControlSolution auto_control_solution(const DifferenceSystem& sys, std::uint64_t seed) {
    const int m = static_cast<int>(sys.stationarity.size());
    if (m == 0) throw ValidationError("system has no stationarity conditions to solve");

    std::vector<SymRef> uvars;
    for (int j = 1; j <= m; ++j) uvars.push_back(SymRef::of(VarBase::Control, j, 0));

    ControlSolution sol;
    sol.g.resize(m);
    std::vector<bool> done(m, false);

    // per-control solves first: affine in u_j, or the reciprocal form c/u_j - d
    for (int j = 0; j < m; ++j) {
        const Expr& r = sys.stationarity[j];
        bool touches_other = false;
        for (int k = 0; k < m; ++k)
            if (k != j && contains_symbol(r, uvars[k])) touches_other = true;
        if (touches_other) continue;

        Expr c1 = normalize(diff(r, uvars[j]));
        if (!contains_symbol(c1, uvars[j]) && !is_symbolically_zero(c1)) {
            Expr c0 = normalize(sub(r, mul(c1, u(j + 1, 0))));
            if (!contains_symbol(c0, uvars[j])) {
                sol.g[j] = normalize(div(neg(c0), c1));
                done[j] = true;
                continue;
            }
        }
        // c/u - d = 0  =>  u = c/d
        Expr w = normalize(mul(r, u(j + 1, 0)));
        Expr wc1 = normalize(diff(w, uvars[j]));
        if (!contains_symbol(wc1, uvars[j]) && !is_symbolically_zero(wc1)) {
            Expr wc0 = normalize(sub(w, mul(wc1, u(j + 1, 0))));
            if (!contains_symbol(wc0, uvars[j])) {
                sol.g[j] = normalize(div(neg(wc0), wc1));
                done[j] = true;
                continue;
            }
        }
    }

    bool all = true;
    for (bool d : done) all = all && d;
    if (!all) {
        // coupled affine system across all controls
        auto joint = solve_affine_system(sys.stationarity, uvars);
        if (!joint)
            throw ValidationError(
                "auto control elimination unsupported: stationarity conditions are neither "
                "affine in the controls nor of the form c/u - d");
        sol.g = *joint;
    }
    for (int j = 0; j < m; ++j)
        if (contains_base(sol.g[j], VarBase::Control))
            throw ValidationError("auto control elimination produced a control-dependent solution");

    // verify against the stationarity residuals
    std::map<SymRef, Expr> ubind;
    for (int j = 0; j < m; ++j) ubind[uvars[j]] = sol.g[j];
    for (int j = 0; j < m; ++j) {
        Expr resid = substitute(sys.stationarity[j], ubind);
        if (!equivalent(resid, rational(0), 50, 1e-9, seed))
            throw ValidationError("control solution fails stationarity residual " +
                                  std::to_string(j + 1));
    }
    return sol;
}

DifferenceSystem eliminate_control(const DifferenceSystem& sys,
                                   const std::optional<ControlSolution>& supplied,
                                   std::uint64_t seed) {
    const int m = static_cast<int>(sys.stationarity.size());
    if (m == 0) return sys;

    ControlSolution sol = supplied ? *supplied : auto_control_solution(sys, seed);
    if (static_cast<int>(sol.g.size()) != m)
        throw ValidationError("control solution must provide " + std::to_string(m) + " expressions");

    std::map<SymRef, Expr> ubind;
    for (int j = 0; j < m; ++j) ubind[SymRef::of(VarBase::Control, j + 1, 0)] = sol.g[j];

    if (supplied) {
        for (int j = 0; j < m; ++j) {
            Expr resid = substitute(sys.stationarity[j], ubind);
            if (!equivalent(resid, rational(0), 50, 1e-9, seed))
                throw ValidationError("supplied control solution fails stationarity residual " +
                                      std::to_string(j + 1));
        }
    }

    // second-order condition d2H/du2 < 0, sampled numerically
    std::string soc;
    {
        std::mt19937_64 rng(seed);
        int violations = 0, checked = 0;
        for (int j = 0; j < m; ++j) {
            Expr d2 = normalize(diff(sys.stationarity[j], SymRef::of(VarBase::Control, j + 1, 0)));
            std::vector<SymRef> syms = symbols_of(d2);
            std::map<std::string, bool> pm;
            collect_params(d2, pm);
            std::vector<std::string> free_params;
            Point base = sys.ctx.base_point();
            for (const auto& [name, _] : pm)
                if (!base.has(name)) free_params.push_back(name);
            int got = 0, tries = 0;
            while (got < 100 && tries < 2000) {
                ++tries;
                Point pt = random_point(syms, free_params, rng);
                for (const auto& [k, v] : base.vals) pt.set(k, v);
                try {
                    double v = eval(d2, pt);
                    ++got;
                    ++checked;
                    if (!(v < 0)) ++violations;
                } catch (const EvalDomainError&) {
                }
            }
        }
        if (violations > 0)
            soc = "warning: d2H/du2 < 0 violated at " + std::to_string(violations) + " of " +
                  std::to_string(checked) + " sample points";
        else
            soc = "d2H/du2 < 0 held at all " + std::to_string(checked) + " sample points";
    }

    DifferenceSystem out = sys;
    out.stationarity.clear();
    out.soc_note = soc;
    out.hamiltonian = substitute(sys.hamiltonian, ubind);
    for (auto& r : out.state_residuals) r = substitute(r, ubind);
    for (auto& r : out.costate_residuals) r = substitute(r, ubind);
    if (out.time_residual) out.time_residual = substitute(*out.time_residual, ubind);
    out.step_map_cache.reset();
    out.step_map_attempted = false;

    for (const auto& r : out.state_residuals)
        if (contains_base(r, VarBase::Control))
            throw ValidationError("control elimination left a control symbol in the system");
    for (const auto& r : out.costate_residuals)
        if (contains_base(r, VarBase::Control))
            throw ValidationError("control elimination left a control symbol in the system");
    return out;
}

} // namespace dht
