#ifndef DHT_NORMALIZE_HPP
#define DHT_NORMALIZE_HPP

#include <cstdint>
#include <random>

#include "dht/expr.hpp"

namespace dht {

/// Canonical form for the rational fragment: expands products over sums,
/// collects like monomials over (sequence symbols, t, parameters,
/// geometric factors), cancels rational constants. Transcendental
/// subtrees become opaque atoms keyed by their own canonical form.
/// Idempotent: normalize(normalize(e)) is structurally normalize(e).
Expr normalize(const Expr& e);

/// True iff the canonical form is the zero tree with exact arithmetic
/// throughout (float constants disable the claim).
bool is_symbolically_zero(const Expr& e);

inline bool symbolic_equal(const Expr& a, const Expr& b) {
    return is_symbolically_zero(sub(a, b));
}

/// Sampling box for numeric equivalence checks: sequence symbols and
/// model constants uniform in [0.1, 2], beta uniform in (0, 1), h uniform
/// in (0.01, 1), t uniform in [0.1, 2].
struct SampleBox {
    double sym_lo = 0.1, sym_hi = 2.0;
    double beta_lo = 1e-6, beta_hi = 1.0 - 1e-6;
    double h_lo = 0.01, h_hi = 1.0;
    int retry_cap = 50;
};

Point random_point(const std::vector<SymRef>& syms, const std::vector<std::string>& params,
                   std::mt19937_64& rng, const SampleBox& box = {});

inline constexpr std::uint64_t kDefaultSeed = 20250810u;

/// Symbolic zero of a-b short-circuits; otherwise |eval(a-b)| <=
/// tol*(1+|eval(a)|) must hold at `samples` random points. Domain errors
/// trigger a resample up to the retry cap, then fail loudly.
bool equivalent(const Expr& a, const Expr& b, int samples = 100, double tol = 1e-9,
                std::uint64_t seed = kDefaultSeed, const SampleBox& box = {});

/// Replaces named parameters by expressions, then normalizes.
Expr substitute_params(const Expr& e, const std::map<std::string, Expr>& bindings);

/// One linear condition extracted from a canonical monomial: the
/// per-unknown coefficients of that monomial in normalize(e)'s numerator.
struct LinearRow {
    std::string key;                        // canonical monomial (printed)
    std::map<std::string, Rational> coeffs; // exact coefficients per unknown
    std::map<std::string, double> coeffs_f; // float values (always filled)
    Rational constant{0};                   // term free of unknowns
    double constant_f = 0;
    bool exact = true;
};

/// Decomposes normalize(e) by canonical monomial, treating the given
/// parameter names as linear unknowns. Throws ValidationError if an
/// unknown enters nonlinearly or lands in a denominator.
std::vector<LinearRow> collect_linear_rows(const Expr& e, const std::vector<std::string>& unknowns);

} // namespace dht

#endif
