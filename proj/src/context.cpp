#include "dht/context.hpp"

#include <algorithm>

namespace dht {

void MeshContext::validate() const {
    if (!(h > 0)) throw ValidationError("mesh step h must be > 0");
    if (!(beta > 0) || beta > 1) throw ValidationError("discount factor beta must be in (0, 1]");
    if (n < 1) throw ValidationError("state dimension n must be >= 1");
    if (m < 0) throw ValidationError("control dimension m must be >= 0");
    std::vector<std::string> names = params;
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
        throw ValidationError("duplicate parameter name in registry");
    for (const auto& name : names) {
        if (name == "t" || name == "h" || name == "beta" || name == "ln" || name == "exp" ||
            name == "q" || name == "p" || name == "lambda" || name == "u")
            throw ValidationError("parameter name '" + name + "' is reserved");
        if (name.empty() || name[0] == '_')
            throw ValidationError("parameter names must not start with '_'");
    }
}

bool MeshContext::has_param(const std::string& name) const {
    return std::find(params.begin(), params.end(), name) != params.end();
}

void MeshContext::add_param(const std::string& name) {
    if (!has_param(name)) params.push_back(name);
}

Point MeshContext::base_point() const {
    Point pt;
    pt.set("h", h);
    pt.set("beta", beta);
    for (const auto& [name, v] : param_values) pt.set(name, v);
    return pt;
}

std::map<std::string, Rational> MeshContext::exact_param_map() const {
    std::map<std::string, Rational> out;
    if (h_exact) out["h"] = *h_exact;
    if (beta_exact) out["beta"] = *beta_exact;
    for (const auto& [name, r] : param_exact) out[name] = r;
    return out;
}

} // namespace dht
