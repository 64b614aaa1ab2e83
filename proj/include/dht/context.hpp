#ifndef DHT_CONTEXT_HPP
#define DHT_CONTEXT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dht/expr.hpp"

namespace dht {

/// Uniform-mesh context: step h, discount factor beta, dimensions and the
/// model-constant registry. Numeric values drive evaluation and
/// simulation; exact rational forms (kept when values were written as
/// decimals) drive the exact linear algebra in the symmetry solver.
struct MeshContext {
    double h = 1.0;
    double beta = 1.0;
    int n = 1; // state/costate dimension
    int m = 1; // control dimension

    std::vector<std::string> params; // registered model constants
    std::map<std::string, double> param_values;

    std::optional<Rational> h_exact;
    std::optional<Rational> beta_exact;
    std::map<std::string, Rational> param_exact;

    void validate() const;
    bool has_param(const std::string& name) const;
    void add_param(const std::string& name);

    /// Point pre-loaded with h, beta and all bound model constants.
    Point base_point() const;

    /// Exact rational bindings for the parameter symbols (h, beta, model
    /// constants) where available; used to ground symbolic systems before
    /// exact kernel computations.
    std::map<std::string, Rational> exact_param_map() const;
};

} // namespace dht

#endif
