#include "dht/mesh_ops.hpp"

namespace dht {

Expr shift_plus(const Expr& e) { return shift_plus_raw(e); }
Expr shift_minus(const Expr& e) { return shift_minus_raw(e); }

Expr d_plus(const Expr& e) {
    return normalize(div(sub(shift_plus_raw(e), e), param("h")));
}

Expr d_minus(const Expr& e) {
    return normalize(div(sub(e, shift_minus_raw(e)), param("h")));
}

Expr leibniz_residual(const Expr& F, const Expr& G, Direction dir) {
    Expr fg = mul(F, G);
    if (dir == Direction::Plus) {
        Expr lhs = d_plus(fg);
        Expr rhs = add(add(mul(d_plus(F), G), mul(F, d_plus(G))),
                       prod({param("h"), d_plus(F), d_plus(G)}));
        return normalize(sub(lhs, rhs));
    }
    Expr lhs = d_minus(fg);
    Expr rhs = sub(add(mul(d_minus(F), G), mul(F, d_minus(G))),
                   prod({param("h"), d_minus(F), d_minus(G)}));
    return normalize(sub(lhs, rhs));
}

Expr variational_derivative(const Expr& L, const VarTarget& which) {
    if (which.which == VarTarget::Which::T) {
        Expr dt = diff(L, SymRef::time());
        return normalize(add(dt, shift_minus_raw(dt)));
    }
    VarBase base = which.which == VarTarget::Which::Q ? VarBase::State : VarBase::Costate;
    Expr d0 = diff(L, SymRef::of(base, which.index, 0));
    Expr d1 = diff(L, SymRef::of(base, which.index, +1));
    return normalize(add(d0, shift_minus_raw(d1)));
}

DifferenceSystem hamiltonian_equations(const Expr& H, const MeshContext& ctx) {
    ctx.validate();
    for (const auto& s : symbols_of(H)) {
        if (s.is_time) continue;
        bool ok = (s.seq.base == VarBase::State && s.seq.offset == 0) ||
                  (s.seq.base == VarBase::Costate && s.seq.offset == +1);
        if (!ok)
            throw ValidationError("canonical Hamiltonian may depend only on t, q[0] and p[+1]; found " +
                                  s.str());
        int dim = ctx.n;
        if (s.seq.index > dim)
            throw ValidationError("Hamiltonian uses " + s.str() + " but n = " + std::to_string(dim));
    }

    DifferenceSystem sys;
    sys.kind = SystemKind::Canonical;
    sys.ctx = ctx;
    sys.hamiltonian = normalize(H);
    sys.costate_base = VarBase::Costate;
    Expr hsym = param("h");
    for (int i = 1; i <= ctx.n; ++i) {
        Expr dq = div(sub(q(i, +1), q(i, 0)), hsym);
        Expr dp = div(sub(p(i, +1), p(i, 0)), hsym);
        sys.state_residuals.push_back(normalize(sub(dq, diff(H, SymRef::of(VarBase::Costate, i, +1)))));
        sys.costate_residuals.push_back(normalize(add(dp, diff(H, SymRef::of(VarBase::State, i, 0)))));
        sys.gamma.push_back(rational(0));
    }
    Expr hm = shift_minus_raw(H);
    sys.time_residual = normalize(sum({mul(hsym, diff(H, SymRef::time())),
                                       mul(hsym, diff(hm, SymRef::time())), neg(H), hm}));
    return sys;
}

} // namespace dht
