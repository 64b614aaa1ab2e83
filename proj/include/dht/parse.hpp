#ifndef DHT_PARSE_HPP
#define DHT_PARSE_HPP

#include <string>

#include "dht/context.hpp"
#include "dht/expr.hpp"

namespace dht {

/// Parses the expression syntax emitted by the printer. Sequence symbols
/// carry a bracketed shift: q1[0], p2[+1], lambda1[-1], u1[0]. Geometric
/// discount factors are written base^[t], e.g. beta^[t]. Decimal literals
/// become exact rationals.
Expr parse(const std::string& text, const MeshContext& ctx);

/// Exact rational from an integer/decimal/scientific literal.
Rational parse_rational_literal(const std::string& text);

} // namespace dht

#endif
