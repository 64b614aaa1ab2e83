#ifndef DHT_MESH_OPS_HPP
#define DHT_MESH_OPS_HPP

#include "dht/normalize.hpp"
#include "dht/system.hpp"

namespace dht {

/// Total shift operators S_{+h} / S_{-h}: sequence offsets move by one,
/// t maps to t +- h, geometric factors pick up one power of their base.
Expr shift_plus(const Expr& e);
Expr shift_minus(const Expr& e);

/// Right and left discrete derivatives D_{+h} = (S_{+h} - 1)/h and
/// D_{-h} = (1 - S_{-h})/h, normalized.
Expr d_plus(const Expr& e);
Expr d_minus(const Expr& e);

enum class Direction { Plus, Minus };

/// D(FG) - [D(F)G + F D(G) +- h D(F)D(G)], normalized. Identically zero;
/// the correction term carries +h for the right derivative and -h for
/// the left one.
Expr leibniz_residual(const Expr& F, const Expr& G, Direction dir);

/// Variational derivative target.
struct VarTarget {
    enum class Which { Q, P, T } which;
    int index = 1;
    static VarTarget state(int i) { return {Which::Q, i}; }
    static VarTarget costate(int i) { return {Which::P, i}; }
    static VarTarget time() { return {Which::T, 1}; }
};

/// delta/delta(x) = d/d(x at offset 0) + S_{-h} d/d(x at offset +1) for a
/// summand depending on offsets 0 and +1. With a single time symbol the
/// two time slots coincide, so the t-variant reduces to (1 + S_{-h}) d/dt.
Expr variational_derivative(const Expr& L, const VarTarget& which);

/// Canonical discrete Hamiltonian equations from H(t, q[0], p[+1]):
/// state (q[+1]-q[0])/h - dH/dp[+1], costate (p[+1]-p[0])/h + dH/dq[0],
/// and the diagnostic time residual
/// h dH/dt + h d(S_{-h}H)/dt - H + S_{-h}H.
DifferenceSystem hamiltonian_equations(const Expr& H, const MeshContext& ctx);

} // namespace dht

#endif
