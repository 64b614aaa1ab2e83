#include "dht/expr.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace dht {

const char* var_base_name(VarBase b) {
    switch (b) {
        case VarBase::State: return "q";
        case VarBase::Costate: return "p";
        case VarBase::PresentCostate: return "lambda";
        case VarBase::Control: return "u";
    }
    return "?";
}

std::string SeqSym::str() const {
    std::string s = var_base_name(base) + std::to_string(index);
    s += '[';
    if (offset > 0) s += '+';
    s += std::to_string(offset);
    s += ']';
    return s;
}

namespace {

std::size_t hash_mix(std::size_t a, std::size_t b) {
    return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
}

std::size_t node_hash(const Node& n) {
    std::size_t h = static_cast<std::size_t>(n.kind) * 0x100000001b3ULL;
    switch (n.kind) {
        case NodeKind::Rat:
            h = hash_mix(h, std::hash<std::int64_t>{}(n.rat.num()));
            h = hash_mix(h, std::hash<std::int64_t>{}(n.rat.den()));
            break;
        case NodeKind::Flt:
            h = hash_mix(h, std::hash<double>{}(n.flt));
            break;
        case NodeKind::Param:
            h = hash_mix(h, std::hash<std::string>{}(n.name));
            break;
        case NodeKind::Time:
            break;
        case NodeKind::Seq:
            h = hash_mix(h, static_cast<std::size_t>(n.seq.base));
            h = hash_mix(h, static_cast<std::size_t>(n.seq.index));
            h = hash_mix(h, static_cast<std::size_t>(n.seq.offset + 16));
            break;
        case NodeKind::Pow:
            h = hash_mix(h, std::hash<std::int64_t>{}(n.rat.num()));
            h = hash_mix(h, std::hash<std::int64_t>{}(n.rat.den()));
            [[fallthrough]];
        default:
            for (const auto& k : n.kids) h = hash_mix(h, k.hash());
    }
    return h;
}

Expr make(Node n) {
    n.hash = node_hash(n);
    return Expr(std::make_shared<const Node>(std::move(n)));
}

const Expr& zero_expr() {
    static const Expr z = [] {
        Node n;
        n.kind = NodeKind::Rat;
        n.rat = Rational(0);
        return make(std::move(n));
    }();
    return z;
}

} // namespace

Expr::Expr() : node_(zero_expr().node_) {}

bool Expr::same(const Expr& o) const {
    if (node_ == o.node_) return true;
    const Node& a = *node_;
    const Node& b = *o.node_;
    if (a.hash != b.hash || a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Rat: return a.rat == b.rat;
        case NodeKind::Flt: return a.flt == b.flt;
        case NodeKind::Param: return a.name == b.name;
        case NodeKind::Time: return true;
        case NodeKind::Seq: return a.seq == b.seq;
        case NodeKind::Pow:
            if (a.rat != b.rat) return false;
            [[fallthrough]];
        default: {
            if (a.kids.size() != b.kids.size()) return false;
            for (std::size_t i = 0; i < a.kids.size(); ++i)
                if (!a.kids[i].same(b.kids[i])) return false;
            return true;
        }
    }
}

Expr rational(Rational r) {
    Node n;
    n.kind = NodeKind::Rat;
    n.rat = r;
    return make(std::move(n));
}

Expr rational(std::int64_t a, std::int64_t b) { return rational(Rational(a, b)); }

Expr floating(double v) {
    Node n;
    n.kind = NodeKind::Flt;
    n.flt = v;
    return make(std::move(n));
}

Expr param(const std::string& name) {
    Node n;
    n.kind = NodeKind::Param;
    n.name = name;
    return make(std::move(n));
}

Expr time_sym() {
    Node n;
    n.kind = NodeKind::Time;
    return make(std::move(n));
}

Expr seq(VarBase base, int index, int offset) {
    if (index < 1) throw ValidationError("sequence component index must be >= 1");
    if (offset < -kShiftWindow || offset > kShiftWindow)
        throw ValidationError("shift offset " + std::to_string(offset) + " outside window [-" +
                              std::to_string(kShiftWindow) + ",+" + std::to_string(kShiftWindow) +
                              "]");
    Node n;
    n.kind = NodeKind::Seq;
    n.seq = SeqSym{base, index, offset};
    return make(std::move(n));
}

Expr sum(std::vector<Expr> kids) {
    std::vector<Expr> flat;
    for (auto& k : kids) {
        if (k.kind() == NodeKind::Sum)
            for (const auto& kk : k.node().kids) flat.push_back(kk);
        else if (!k.is_zero())
            flat.push_back(k);
    }
    if (flat.empty()) return rational(0);
    if (flat.size() == 1) return flat[0];
    Node n;
    n.kind = NodeKind::Sum;
    n.kids = std::move(flat);
    return make(std::move(n));
}

Expr prod(std::vector<Expr> kids) {
    std::vector<Expr> flat;
    for (auto& k : kids) {
        if (k.kind() == NodeKind::Prod)
            for (const auto& kk : k.node().kids) flat.push_back(kk);
        else if (k.is_zero())
            return rational(0);
        else if (!k.is_one())
            flat.push_back(k);
    }
    if (flat.empty()) return rational(1);
    if (flat.size() == 1) return flat[0];
    Node n;
    n.kind = NodeKind::Prod;
    n.kids = std::move(flat);
    return make(std::move(n));
}

Expr add(const Expr& a, const Expr& b) { return sum({a, b}); }
Expr sub(const Expr& a, const Expr& b) { return sum({a, neg(b)}); }
Expr mul(const Expr& a, const Expr& b) { return prod({a, b}); }
Expr neg(const Expr& a) { return prod({rational(-1), a}); }

Expr div(const Expr& a, const Expr& b) {
    if (b.is_zero()) throw ValidationError("division by literal zero");
    return prod({a, pow_r(b, Rational(-1))});
}

Expr ln(const Expr& a) {
    Node n;
    n.kind = NodeKind::Ln;
    n.kids = {a};
    return make(std::move(n));
}

Expr exp_e(const Expr& a) {
    Node n;
    n.kind = NodeKind::Exp;
    n.kids = {a};
    return make(std::move(n));
}

Expr pow_r(const Expr& base, Rational exponent) {
    if (exponent.is_zero()) return rational(1);
    if (exponent.is_one()) return base;
    Node n;
    n.kind = NodeKind::Pow;
    n.rat = exponent;
    n.kids = {base};
    return make(std::move(n));
}

Expr geom(const Expr& base) {
    std::map<SymRef, bool> syms;
    collect_symbols(base, syms);
    if (!syms.empty())
        throw ValidationError("geometric factor base must not involve t or sequence symbols");
    if (base.is_one()) return rational(1);
    Node n;
    n.kind = NodeKind::Geom;
    n.kids = {base};
    return make(std::move(n));
}

double Point::get(const std::string& name) const {
    auto it = vals.find(name);
    if (it == vals.end()) throw EvalDomainError("unbound symbol in evaluation: " + name);
    return it->second;
}

double eval(const Expr& e, const Point& pt) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Rat: return n.rat.to_double();
        case NodeKind::Flt: return n.flt;
        case NodeKind::Param: return pt.get(n.name);
        case NodeKind::Time: return pt.get("t");
        case NodeKind::Seq: return pt.get(n.seq.str());
        case NodeKind::Ln: {
            double v = eval(n.kids[0], pt);
            if (!(v > 0)) throw EvalDomainError("ln of non-positive value " + std::to_string(v));
            return std::log(v);
        }
        case NodeKind::Exp: return std::exp(eval(n.kids[0], pt));
        case NodeKind::Pow: {
            double b = eval(n.kids[0], pt);
            if (n.rat.is_integer()) {
                if (b == 0 && n.rat.num() < 0) throw EvalDomainError("division by zero");
                return std::pow(b, static_cast<double>(n.rat.num()));
            }
            if (!(b > 0)) throw EvalDomainError("fractional power of non-positive base");
            return std::pow(b, n.rat.to_double());
        }
        case NodeKind::Geom: {
            double c = eval(n.kids[0], pt);
            if (!(c > 0)) throw EvalDomainError("geometric factor with non-positive base");
            double t = pt.get("t");
            double h = pt.get("h");
            if (h == 0) throw EvalDomainError("geometric factor with h = 0");
            return std::pow(c, t / h);
        }
        case NodeKind::Sum: {
            double acc = 0;
            for (const auto& k : n.kids) acc += eval(k, pt);
            return acc;
        }
        case NodeKind::Prod: {
            double acc = 1;
            for (const auto& k : n.kids) acc *= eval(k, pt);
            return acc;
        }
    }
    throw std::logic_error("unreachable node kind");
}

Expr diff(const Expr& e, const SymRef& s) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Rat:
        case NodeKind::Flt:
        case NodeKind::Param: return rational(0);
        case NodeKind::Time: return s.is_time ? rational(1) : rational(0);
        case NodeKind::Seq:
            return (!s.is_time && n.seq == s.seq) ? rational(1) : rational(0);
        case NodeKind::Ln: return div(diff(n.kids[0], s), n.kids[0]);
        case NodeKind::Exp: return mul(e, diff(n.kids[0], s));
        case NodeKind::Pow:
            return prod({rational(n.rat), pow_r(n.kids[0], n.rat - Rational(1)),
                         diff(n.kids[0], s)});
        case NodeKind::Geom:
            // d/dt c^(t/h) = c^(t/h) ln(c)/h; constant in everything else
            if (s.is_time) return prod({e, ln(n.kids[0]), pow_r(param("h"), Rational(-1))});
            return rational(0);
        case NodeKind::Sum: {
            std::vector<Expr> parts;
            for (const auto& k : n.kids) parts.push_back(diff(k, s));
            return sum(std::move(parts));
        }
        case NodeKind::Prod: {
            std::vector<Expr> parts;
            for (std::size_t i = 0; i < n.kids.size(); ++i) {
                std::vector<Expr> term;
                for (std::size_t j = 0; j < n.kids.size(); ++j)
                    term.push_back(i == j ? diff(n.kids[j], s) : n.kids[j]);
                parts.push_back(prod(std::move(term)));
            }
            return sum(std::move(parts));
        }
    }
    throw std::logic_error("unreachable node kind");
}

namespace {

Expr map_tree(const Expr& e, const std::function<std::optional<Expr>(const Node&)>& fn) {
    if (auto r = fn(e.node())) return *r;
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Rat:
        case NodeKind::Flt:
        case NodeKind::Param:
        case NodeKind::Time:
        case NodeKind::Seq: return e;
        case NodeKind::Ln: return ln(map_tree(n.kids[0], fn));
        case NodeKind::Exp: return exp_e(map_tree(n.kids[0], fn));
        case NodeKind::Pow: return pow_r(map_tree(n.kids[0], fn), n.rat);
        case NodeKind::Geom: return geom(map_tree(n.kids[0], fn));
        case NodeKind::Sum: {
            std::vector<Expr> kids;
            for (const auto& k : n.kids) kids.push_back(map_tree(k, fn));
            return sum(std::move(kids));
        }
        case NodeKind::Prod: {
            std::vector<Expr> kids;
            for (const auto& k : n.kids) kids.push_back(map_tree(k, fn));
            return prod(std::move(kids));
        }
    }
    throw std::logic_error("unreachable node kind");
}

Expr shift_raw(const Expr& e, int dir) {
    return map_tree(e, [dir](const Node& n) -> std::optional<Expr> {
        switch (n.kind) {
            case NodeKind::Seq: {
                int off = n.seq.offset + dir;
                if (off < -kShiftWindow || off > kShiftWindow)
                    throw ValidationError("shift would take " + n.seq.str() +
                                          " outside the offset window");
                return seq(n.seq.base, n.seq.index, off);
            }
            case NodeKind::Time:
                return dir > 0 ? add(time_sym(), param("h")) : sub(time_sym(), param("h"));
            case NodeKind::Geom: {
                // c^((t+-h)/h) = c^(+-1) c^(t/h)
                Expr g = geom(n.kids[0]);
                Expr c = dir > 0 ? n.kids[0] : pow_r(n.kids[0], Rational(-1));
                return mul(c, g);
            }
            default: return std::nullopt;
        }
    });
}

} // namespace

Expr shift_plus_raw(const Expr& e) { return shift_raw(e, +1); }
Expr shift_minus_raw(const Expr& e) { return shift_raw(e, -1); }

Expr substitute_raw(const Expr& e, const std::map<SymRef, Expr>& bindings);

Expr substitute_raw(const Expr& e, const std::map<SymRef, Expr>& bindings) {
    if (bindings.empty()) return e;
    return map_tree(e, [&bindings](const Node& n) -> std::optional<Expr> {
        if (n.kind == NodeKind::Seq) {
            auto it = bindings.find(SymRef::of(n.seq.base, n.seq.index, n.seq.offset));
            if (it != bindings.end()) return it->second;
        } else if (n.kind == NodeKind::Time) {
            auto it = bindings.find(SymRef::time());
            if (it != bindings.end()) return it->second;
        }
        return std::nullopt;
    });
}

void collect_symbols(const Expr& e, std::map<SymRef, bool>& out) {
    const Node& n = e.node();
    if (n.kind == NodeKind::Seq) out[SymRef::of(n.seq.base, n.seq.index, n.seq.offset)] = true;
    if (n.kind == NodeKind::Time || n.kind == NodeKind::Geom) out[SymRef::time()] = true;
    for (const auto& k : n.kids) collect_symbols(k, out);
}

std::vector<SymRef> symbols_of(const Expr& e) {
    std::map<SymRef, bool> m;
    collect_symbols(e, m);
    std::vector<SymRef> v;
    for (const auto& [s, _] : m) v.push_back(s);
    return v;
}

void collect_params(const Expr& e, std::map<std::string, bool>& out) {
    const Node& n = e.node();
    if (n.kind == NodeKind::Param) out[n.name] = true;
    if (n.kind == NodeKind::Geom) out["h"] = true;
    for (const auto& k : n.kids) collect_params(k, out);
}

bool contains_symbol(const Expr& e, const SymRef& s) {
    const Node& n = e.node();
    if (s.is_time && (n.kind == NodeKind::Time || n.kind == NodeKind::Geom)) return true;
    if (!s.is_time && n.kind == NodeKind::Seq && n.seq == s.seq) return true;
    for (const auto& k : n.kids)
        if (contains_symbol(k, s)) return true;
    return false;
}

bool contains_base(const Expr& e, VarBase b) {
    const Node& n = e.node();
    if (n.kind == NodeKind::Seq && n.seq.base == b) return true;
    for (const auto& k : n.kids)
        if (contains_base(k, b)) return true;
    return false;
}

int max_offset(const Expr& e) {
    const Node& n = e.node();
    int best = -1000000;
    if (n.kind == NodeKind::Seq) best = n.seq.offset;
    for (const auto& k : n.kids) best = std::max(best, max_offset(k));
    return best;
}

int min_offset(const Expr& e) {
    const Node& n = e.node();
    int best = 1000000;
    if (n.kind == NodeKind::Seq) best = n.seq.offset;
    for (const auto& k : n.kids) best = std::min(best, min_offset(k));
    return best;
}

bool contains_float(const Expr& e) {
    const Node& n = e.node();
    if (n.kind == NodeKind::Flt) return true;
    for (const auto& k : n.kids)
        if (contains_float(k)) return true;
    return false;
}

// --- printer -----------------------------------------------------------

namespace {

// precedence: sum 1, product/quotient 2, unary minus 2, power 3, atoms 4
void print_node(std::ostream& os, const Expr& e, int parent_prec);

void print_number(std::ostream& os, const Rational& r, int parent_prec) {
    bool needs = (!r.is_integer() || r.sign() < 0) && parent_prec >= 2;
    if (needs) os << '(';
    os << r.str();
    if (needs) os << ')';
}

void print_product(std::ostream& os, const std::vector<Expr>& kids, int parent_prec) {
    // split into numerator and denominator factors
    std::vector<std::pair<Expr, Rational>> num, den;
    Rational coeff(1);
    bool coeff_set = false;
    for (const auto& k : kids) {
        if (k.kind() == NodeKind::Rat && !coeff_set) {
            coeff = k.node().rat;
            coeff_set = true;
            continue;
        }
        if (k.kind() == NodeKind::Pow && k.node().rat.sign() < 0)
            den.push_back({k.node().kids[0], -k.node().rat});
        else
            num.push_back({k, Rational(1)});
    }
    bool neg_one = coeff_set && coeff == Rational(-1) && !num.empty();
    int prec = 2;
    bool parens = parent_prec > prec || (parent_prec == prec && neg_one);
    if (neg_one && parent_prec >= 2) parens = true;
    if (parens) os << '(';
    bool first = true;
    auto emit_factor = [&](const Expr& base, const Rational& ex) {
        if (!first) os << '*';
        first = false;
        if (ex.is_one())
            print_node(os, base, 2);
        else
            print_node(os, pow_r(base, ex), 2);
    };
    if (neg_one) {
        os << '-';
        first = true;
        for (const auto& [b, ex] : num) emit_factor(b, ex);
    } else {
        if (coeff_set && (!coeff.is_one() || num.empty())) {
            print_number(os, coeff, den.empty() && num.empty() ? parent_prec : 2);
            first = false;
        }
        for (const auto& [b, ex] : num) emit_factor(b, ex);
        if (first) { os << '1'; first = false; }
    }
    for (const auto& [b, ex] : den) {
        os << '/';
        bool wrap = b.kind() == NodeKind::Sum || b.kind() == NodeKind::Prod ||
                    b.kind() == NodeKind::Rat;
        if (!ex.is_one()) {
            print_node(os, pow_r(b, ex), 3);
        } else if (wrap) {
            os << '(';
            print_node(os, b, 0);
            os << ')';
        } else {
            print_node(os, b, 3);
        }
    }
    if (parens) os << ')';
}

void print_node(std::ostream& os, const Expr& e, int parent_prec) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Rat: print_number(os, n.rat, parent_prec); return;
        case NodeKind::Flt: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n.flt;
            std::string s = tmp.str();
            if (s.find_first_of(".eE") == std::string::npos) s += ".0";
            bool needs = n.flt < 0 && parent_prec >= 2;
            if (needs) os << '(';
            os << s;
            if (needs) os << ')';
            return;
        }
        case NodeKind::Param: os << n.name; return;
        case NodeKind::Time: os << 't'; return;
        case NodeKind::Seq: os << n.seq.str(); return;
        case NodeKind::Ln:
            os << "ln(";
            print_node(os, n.kids[0], 0);
            os << ')';
            return;
        case NodeKind::Exp:
            os << "exp(";
            print_node(os, n.kids[0], 0);
            os << ')';
            return;
        case NodeKind::Pow: {
            if (parent_prec > 3) os << '(';
            print_node(os, n.kids[0], 4);
            os << '^';
            if (n.rat.is_integer() && n.rat.sign() > 0)
                os << n.rat.str();
            else
                os << '(' << n.rat.str() << ')';
            if (parent_prec > 3) os << ')';
            return;
        }
        case NodeKind::Geom:
            print_node(os, n.kids[0], 4);
            os << "^[t]";
            return;
        case NodeKind::Sum: {
            if (parent_prec > 1) os << '(';
            bool first = true;
            for (const auto& k : n.kids) {
                // fold a leading -1 coefficient into a binary minus
                bool minus = false;
                Expr term = k;
                if (k.kind() == NodeKind::Prod && !k.node().kids.empty() &&
                    k.node().kids[0].kind() == NodeKind::Rat &&
                    k.node().kids[0].node().rat.sign() < 0) {
                    Rational c = k.node().kids[0].node().rat;
                    minus = true;
                    std::vector<Expr> rest(k.node().kids.begin() + 1, k.node().kids.end());
                    if (c == Rational(-1) && !rest.empty())
                        term = prod(std::move(rest));
                    else {
                        rest.insert(rest.begin(), rational(-c));
                        term = prod(std::move(rest));
                    }
                } else if (k.kind() == NodeKind::Rat && k.node().rat.sign() < 0) {
                    minus = true;
                    term = rational(-k.node().rat);
                }
                if (first) {
                    if (minus) os << '-';
                } else {
                    os << (minus ? " - " : " + ");
                }
                first = false;
                print_node(os, term, 1);
            }
            if (parent_prec > 1) os << ')';
            return;
        }
        case NodeKind::Prod: print_product(os, n.kids, parent_prec); return;
    }
}

} // namespace

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print_node(os, e, 0);
    return os.str();
}

std::string Expr::str() const { return to_string(*this); }

} // namespace dht
