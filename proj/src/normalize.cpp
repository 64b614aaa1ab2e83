#include "dht/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dht {

namespace {

struct Canon;
using CanonPtr = std::shared_ptr<const Canon>;

struct Atom {
    enum class Tag : std::uint8_t { Time, Param, Seq, Ln, Exp, PowA, Geom } tag{};
    std::string name; // Param
    SeqSym seq;       // Seq
    CanonPtr arg;     // Ln/Exp/PowA/Geom
    Rational pexp;    // PowA: non-integer rational exponent
};

// Coefficient that stays exact until a float constant (or an int64
// overflow) taints it.
struct Coeff {
    bool exact = true;
    Rational r{1};
    double f = 0;

    static Coeff of(Rational v) { return Coeff{true, v, 0}; }
    static Coeff of_float(double v) { return Coeff{false, Rational(0), v}; }
    double value() const { return exact ? r.to_double() : f; }
    bool is_zero() const { return exact ? r.is_zero() : f == 0.0; }
    bool is_one() const { return exact ? r.is_one() : f == 1.0; }
};

Coeff c_add(const Coeff& a, const Coeff& b, bool& saw_float) {
    if (a.exact && b.exact) {
        try {
            return Coeff::of(a.r + b.r);
        } catch (const OverflowError&) {
            saw_float = true;
        }
    }
    saw_float = true;
    return Coeff::of_float(a.value() + b.value());
}

Coeff c_mul(const Coeff& a, const Coeff& b, bool& saw_float) {
    if (a.exact && b.exact) {
        try {
            return Coeff::of(a.r * b.r);
        } catch (const OverflowError&) {
            saw_float = true;
        }
    }
    saw_float = true;
    return Coeff::of_float(a.value() * b.value());
}

Coeff c_div(const Coeff& a, const Coeff& b, bool& saw_float) {
    if (a.exact && b.exact) {
        try {
            return Coeff::of(a.r / b.r);
        } catch (const OverflowError&) {
            saw_float = true;
        }
    }
    saw_float = true;
    return Coeff::of_float(a.value() / b.value());
}

Coeff c_neg(const Coeff& a) {
    if (a.exact) return Coeff::of(-a.r);
    return Coeff::of_float(-a.f);
}

using Mono = std::vector<std::pair<Atom, int>>; // sorted, exponents != 0

int canon_cmp(const Canon& a, const Canon& b);

int atom_cmp(const Atom& a, const Atom& b) {
    if (a.tag != b.tag) return a.tag < b.tag ? -1 : 1;
    switch (a.tag) {
        case Atom::Tag::Time: return 0;
        case Atom::Tag::Param: return a.name.compare(b.name);
        case Atom::Tag::Seq:
            if (a.seq == b.seq) return 0;
            return a.seq < b.seq ? -1 : 1;
        case Atom::Tag::PowA: {
            int c = canon_cmp(*a.arg, *b.arg);
            if (c) return c;
            if (a.pexp == b.pexp) return 0;
            return a.pexp < b.pexp ? -1 : 1;
        }
        default: return canon_cmp(*a.arg, *b.arg);
    }
}

int mono_cmp(const Mono& a, const Mono& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (std::size_t i = 0; i < a.size(); ++i) {
        int c = atom_cmp(a[i].first, b[i].first);
        if (c) return c;
        if (a[i].second != b[i].second) return a[i].second < b[i].second ? -1 : 1;
    }
    return 0;
}

struct MonoLess {
    bool operator()(const Mono& a, const Mono& b) const { return mono_cmp(a, b) < 0; }
};

using Poly = std::map<Mono, Coeff, MonoLess>;

int coeff_cmp(const Coeff& a, const Coeff& b) {
    if (a.exact != b.exact) return a.exact ? -1 : 1;
    if (a.exact) {
        if (a.r == b.r) return 0;
        return a.r < b.r ? -1 : 1;
    }
    if (a.f == b.f) return 0;
    return a.f < b.f ? -1 : 1;
}

int poly_cmp(const Poly& a, const Poly& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    auto ia = a.begin();
    auto ib = b.begin();
    for (; ia != a.end(); ++ia, ++ib) {
        int c = mono_cmp(ia->first, ib->first);
        if (c) return c;
        c = coeff_cmp(ia->second, ib->second);
        if (c) return c;
    }
    return 0;
}

struct Canon {
    Poly num;
    Poly den; // {} means 1; multi-monomial only (single monomials fold into num)
};

int canon_cmp(const Canon& a, const Canon& b) {
    int c = poly_cmp(a.num, b.num);
    if (c) return c;
    return poly_cmp(a.den, b.den);
}

Poly poly_const(Coeff c) {
    Poly p;
    if (!c.is_zero()) p[Mono{}] = c;
    return p;
}

Poly poly_one() { return poly_const(Coeff::of(Rational(1))); }

bool poly_is_one(const Poly& p) {
    return p.size() == 1 && p.begin()->first.empty() && p.begin()->second.is_one();
}

void poly_insert(Poly& p, const Mono& m, const Coeff& c, bool& saw_float) {
    if (c.is_zero()) return;
    auto it = p.find(m);
    if (it == p.end()) {
        p.emplace(m, c);
    } else {
        Coeff s = c_add(it->second, c, saw_float);
        if (s.is_zero())
            p.erase(it);
        else
            it->second = s;
    }
}

Poly poly_add(const Poly& a, const Poly& b, bool& saw_float) {
    Poly r = a;
    for (const auto& [m, c] : b) poly_insert(r, m, c, saw_float);
    return r;
}

Poly poly_neg(const Poly& a) {
    Poly r;
    for (const auto& [m, c] : a) r[m] = c_neg(c);
    return r;
}

Mono mono_mul(const Mono& a, const Mono& b) {
    Mono r;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && atom_cmp(a[i].first, b[j].first) < 0)) {
            r.push_back(a[i++]);
        } else if (i == a.size() || atom_cmp(b[j].first, a[i].first) < 0) {
            r.push_back(b[j++]);
        } else {
            int e = a[i].second + b[j].second;
            if (e != 0) r.push_back({a[i].first, e});
            ++i;
            ++j;
        }
    }
    return r;
}

Poly poly_mul(const Poly& a, const Poly& b, bool& saw_float) {
    Poly r;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) poly_insert(r, mono_mul(ma, mb), c_mul(ca, cb, saw_float), saw_float);
    return r;
}

Poly poly_pow(const Poly& a, long k, bool& saw_float) {
    Poly acc = poly_one();
    Poly base = a;
    while (k) {
        if (k & 1) acc = poly_mul(acc, base, saw_float);
        k >>= 1;
        if (k) base = poly_mul(base, base, saw_float);
    }
    return acc;
}

Mono mono_inverse(const Mono& m) {
    Mono r = m;
    for (auto& [a, e] : r) e = -e;
    return r;
}

// gcd of two rationals as nonneg rational: gcd of numerators over lcm of
// denominators.
Rational rat_gcd(const Rational& a, const Rational& b) {
    auto igcd = [](std::int64_t x, std::int64_t y) {
        x = x < 0 ? -x : x;
        y = y < 0 ? -y : y;
        while (y) { std::int64_t t = x % y; x = y; y = t; }
        return x;
    };
    auto ilcm = [&](std::int64_t x, std::int64_t y) {
        return x / igcd(x, y) * y;
    };
    if (a.is_zero()) return b.abs();
    if (b.is_zero()) return a.abs();
    return Rational(igcd(a.num(), b.num()), ilcm(a.den(), b.den()));
}

struct Canonicalizer {
    bool saw_float = false;

    Canon reduce(Canon c) {
        if (c.num.empty()) {
            c.den.clear();
            return c;
        }
        // fold a single-monomial denominator into the numerator
        if (c.den.size() == 1 && !poly_is_one(c.den)) {
            const Mono inv = mono_inverse(c.den.begin()->first);
            const Coeff dc = c.den.begin()->second;
            Poly num;
            for (const auto& [m, co] : c.num)
                poly_insert(num, mono_mul(m, inv), c_div(co, dc, saw_float), saw_float);
            c.num = std::move(num);
            c.den.clear();
            if (c.num.empty()) return c;
        }
        if (!c.den.empty() && !poly_is_one(c.den)) {
            // cancel the common monomial factor of every monomial in num and den
            std::map<Mono, int> dummy;
            bool first = true;
            std::vector<std::pair<Atom, int>> gcd;
            auto fold = [&](const Mono& m) {
                if (first) {
                    gcd.assign(m.begin(), m.end());
                    first = false;
                    return;
                }
                std::vector<std::pair<Atom, int>> out;
                std::size_t i = 0, j = 0;
                while (i < gcd.size() && j < m.size()) {
                    int cmp = atom_cmp(gcd[i].first, m[j].first);
                    if (cmp < 0) {
                        if (gcd[i].second < 0) out.push_back(gcd[i]); // absent counts as 0
                        ++i;
                    } else if (cmp > 0) {
                        if (m[j].second < 0) out.push_back(m[j]);
                        ++j;
                    } else {
                        int e = std::min(gcd[i].second, m[j].second);
                        if (e != 0) out.push_back({gcd[i].first, e});
                        ++i;
                        ++j;
                    }
                }
                for (; i < gcd.size(); ++i)
                    if (gcd[i].second < 0) out.push_back(gcd[i]);
                for (; j < m.size(); ++j)
                    if (m[j].second < 0) out.push_back(m[j]);
                gcd = std::move(out);
            };
            for (const auto& [m, _] : c.num) fold(m);
            for (const auto& [m, _] : c.den) fold(m);
            if (!gcd.empty()) {
                Mono inv = mono_inverse(Mono(gcd.begin(), gcd.end()));
                Poly num, den;
                for (const auto& [m, co] : c.num) num[mono_mul(m, inv)] = co;
                for (const auto& [m, co] : c.den) den[mono_mul(m, inv)] = co;
                c.num = std::move(num);
                c.den = std::move(den);
            }
            // scale so the denominator has content 1 and a positive lead
            bool exact = true;
            for (const auto& [m, co] : c.den) exact = exact && co.exact;
            if (exact) {
                Rational content(0);
                for (const auto& [m, co] : c.den) content = rat_gcd(content, co.r);
                if (c.den.begin()->second.r.sign() < 0) content = -content;
                if (!content.is_one() && !content.is_zero()) {
                    Coeff inv = Coeff::of(Rational(1) / content);
                    Poly num, den;
                    for (const auto& [m, co] : c.num) num[m] = c_mul(co, inv, saw_float);
                    for (const auto& [m, co] : c.den) den[m] = c_mul(co, inv, saw_float);
                    c.num = std::move(num);
                    c.den = std::move(den);
                }
            } else {
                Coeff lead = c.den.begin()->second;
                if (!lead.is_one()) {
                    Poly num, den;
                    for (const auto& [m, co] : c.num) num[m] = c_div(co, lead, saw_float);
                    for (const auto& [m, co] : c.den) den[m] = c_div(co, lead, saw_float);
                    c.num = std::move(num);
                    c.den = std::move(den);
                }
            }
            if (poly_is_one(c.den)) c.den.clear();
        }
        return c;
    }

    Canon from_poly(Poly p) { return Canon{std::move(p), {}}; }

    Canon c_add2(const Canon& a, const Canon& b) {
        if (a.den.empty() && b.den.empty())
            return reduce(from_poly(poly_add(a.num, b.num, saw_float)));
        Poly ad = a.den.empty() ? poly_one() : a.den;
        Poly bd = b.den.empty() ? poly_one() : b.den;
        Canon r;
        r.num = poly_add(poly_mul(a.num, bd, saw_float), poly_mul(b.num, ad, saw_float), saw_float);
        r.den = poly_mul(ad, bd, saw_float);
        return reduce(std::move(r));
    }

    Canon c_mul2(const Canon& a, const Canon& b) {
        Canon r;
        r.num = poly_mul(a.num, b.num, saw_float);
        if (a.den.empty() && b.den.empty())
            return reduce(std::move(r));
        Poly ad = a.den.empty() ? poly_one() : a.den;
        Poly bd = b.den.empty() ? poly_one() : b.den;
        r.den = poly_mul(ad, bd, saw_float);
        return reduce(std::move(r));
    }

    Canon c_inv(const Canon& a) {
        if (a.num.empty()) throw ValidationError("division by an expression that normalizes to zero");
        Canon r;
        r.num = a.den.empty() ? poly_one() : a.den;
        r.den = a.num;
        return reduce(std::move(r));
    }

    Canon c_powi(const Canon& a, long k) {
        if (k == 0) return from_poly(poly_one());
        if (k < 0) return c_powi(c_inv(a), -k);
        Canon r;
        r.num = poly_pow(a.num, k, saw_float);
        if (!a.den.empty()) r.den = poly_pow(a.den, k, saw_float);
        return reduce(std::move(r));
    }

    Canon atom_canon(Atom a) {
        Canon c;
        c.num[Mono{{std::move(a), 1}}] = Coeff::of(Rational(1));
        return c;
    }

    // x^(p/q) with q > 1. Distributes over single monomials when exact.
    Canon c_pow_rat(const Canon& base, const Rational& r) {
        if (r.is_integer()) return c_powi(base, r.num());
        if (base.den.empty() && base.num.size() == 1) {
            const auto& [m, co] = *base.num.begin();
            // merge nested rational powers of a single atom
            if (co.is_one() && m.size() == 1 && m[0].first.tag == Atom::Tag::PowA &&
                m[0].second == 1) {
                Rational e = m[0].first.pexp * r;
                return c_pow_rat(*m[0].first.arg, e);
            }
            bool all_int = true;
            for (const auto& [atom, e] : m) {
                Rational er = r * Rational(e);
                if (!er.is_integer()) all_int = false;
            }
            if (all_int) {
                Coeff nc;
                bool ok = false;
                if (co.exact) {
                    Rational root;
                    if (co.r.nth_root(r.den(), root)) {
                        nc = Coeff::of(root.pow(r.num()));
                        ok = true;
                    }
                } else {
                    saw_float = true;
                    nc = Coeff::of_float(std::pow(co.f, r.to_double()));
                    ok = co.f > 0;
                }
                if (ok) {
                    Mono nm;
                    for (const auto& [atom, e] : m)
                        nm.push_back({atom, static_cast<int>((r * Rational(e)).num())});
                    Canon res;
                    if (!nc.is_zero()) res.num[nm] = nc;
                    return reduce(std::move(res));
                }
            }
        }
        Atom a;
        a.tag = Atom::Tag::PowA;
        a.arg = std::make_shared<const Canon>(base);
        a.pexp = r;
        return atom_canon(std::move(a));
    }

    Canon c_ln(const Canon& x) {
        if (x.num.empty()) throw ValidationError("ln of an expression that normalizes to zero");
        if (!x.den.empty()) {
            // ln(num/den) = ln(num) - ln(den) on the positive domain
            Canon n{x.num, {}};
            Canon d{x.den, {}};
            return c_add2(c_ln(reduce(std::move(n))), c_mul2(from_poly(poly_const(Coeff::of(Rational(-1)))), c_ln(reduce(std::move(d)))));
        }
        if (x.num.size() == 1) {
            const auto& [m, co] = *x.num.begin();
            bool positive = co.exact ? co.r.sign() > 0 : co.f > 0;
            if (positive) {
                Canon acc = from_poly(Poly{});
                if (!co.is_one()) {
                    if (co.exact) {
                        Atom a;
                        a.tag = Atom::Tag::Ln;
                        a.arg = std::make_shared<const Canon>(from_poly(poly_const(co)));
                        acc = atom_canon(std::move(a));
                    } else {
                        saw_float = true;
                        acc = from_poly(poly_const(Coeff::of_float(std::log(co.f))));
                    }
                }
                for (const auto& [atom, e] : m) {
                    Canon term;
                    if (atom.tag == Atom::Tag::Exp) {
                        term = *atom.arg; // ln(exp(y)) = y
                    } else if (atom.tag == Atom::Tag::PowA) {
                        term = c_mul2(from_poly(poly_const(Coeff::of(atom.pexp))), c_ln(*atom.arg));
                    } else {
                        Atom a;
                        a.tag = Atom::Tag::Ln;
                        a.arg = std::make_shared<const Canon>(atom_canon(atom));
                        term = atom_canon(std::move(a));
                    }
                    acc = c_add2(acc, c_mul2(from_poly(poly_const(Coeff::of(Rational(e)))), term));
                }
                return acc;
            }
        }
        Atom a;
        a.tag = Atom::Tag::Ln;
        a.arg = std::make_shared<const Canon>(x);
        return atom_canon(std::move(a));
    }

    Canon c_exp(const Canon& x) {
        if (x.num.empty()) return from_poly(poly_one());
        // exp(r ln(y)) = y^r
        if (x.den.empty() && x.num.size() == 1) {
            const auto& [m, co] = *x.num.begin();
            if (co.exact && m.size() == 1 && m[0].first.tag == Atom::Tag::Ln && m[0].second == 1)
                return c_pow_rat(*m[0].first.arg, co.r);
        }
        Atom a;
        a.tag = Atom::Tag::Exp;
        a.arg = std::make_shared<const Canon>(x);
        return atom_canon(std::move(a));
    }

    Canon c_geom(const Canon& x) {
        if (poly_is_one(x.num) && x.den.empty()) return from_poly(poly_one());
        Atom a;
        a.tag = Atom::Tag::Geom;
        a.arg = std::make_shared<const Canon>(x);
        return atom_canon(std::move(a));
    }

    Canon run(const Expr& e) {
        const Node& n = e.node();
        switch (n.kind) {
            case NodeKind::Rat: return from_poly(poly_const(Coeff::of(n.rat)));
            case NodeKind::Flt:
                saw_float = true;
                return from_poly(poly_const(Coeff::of_float(n.flt)));
            case NodeKind::Param: {
                Atom a;
                a.tag = Atom::Tag::Param;
                a.name = n.name;
                return atom_canon(std::move(a));
            }
            case NodeKind::Time: {
                Atom a;
                a.tag = Atom::Tag::Time;
                return atom_canon(std::move(a));
            }
            case NodeKind::Seq: {
                Atom a;
                a.tag = Atom::Tag::Seq;
                a.seq = n.seq;
                return atom_canon(std::move(a));
            }
            case NodeKind::Ln: return c_ln(run(n.kids[0]));
            case NodeKind::Exp: return c_exp(run(n.kids[0]));
            case NodeKind::Pow: return c_pow_rat(run(n.kids[0]), n.rat);
            case NodeKind::Geom: return c_geom(run(n.kids[0]));
            case NodeKind::Sum: {
                Canon acc = from_poly(Poly{});
                for (const auto& k : n.kids) acc = c_add2(acc, run(k));
                return acc;
            }
            case NodeKind::Prod: {
                Canon acc = from_poly(poly_one());
                for (const auto& k : n.kids) {
                    acc = c_mul2(acc, run(k));
                    if (acc.num.empty()) return acc;
                }
                return acc;
            }
        }
        throw std::logic_error("unreachable node kind");
    }
};

Expr canon_to_tree(const Canon& c);

Expr atom_to_tree(const Atom& a) {
    switch (a.tag) {
        case Atom::Tag::Time: return time_sym();
        case Atom::Tag::Param: return param(a.name);
        case Atom::Tag::Seq: return seq(a.seq.base, a.seq.index, a.seq.offset);
        case Atom::Tag::Ln: return ln(canon_to_tree(*a.arg));
        case Atom::Tag::Exp: return exp_e(canon_to_tree(*a.arg));
        case Atom::Tag::PowA: return pow_r(canon_to_tree(*a.arg), a.pexp);
        case Atom::Tag::Geom: return geom(canon_to_tree(*a.arg));
    }
    throw std::logic_error("unreachable atom tag");
}

Expr mono_to_tree(const Mono& m, const Coeff& c) {
    std::vector<Expr> factors;
    if (c.exact) {
        if (!c.r.is_one()) factors.push_back(rational(c.r));
    } else {
        factors.push_back(floating(c.f));
    }
    for (const auto& [a, e] : m) {
        Expr at = atom_to_tree(a);
        factors.push_back(e == 1 ? at : pow_r(at, Rational(e)));
    }
    if (factors.empty()) return rational(1);
    return prod(std::move(factors));
}

Expr poly_to_tree(const Poly& p) {
    if (p.empty()) return rational(0);
    std::vector<Expr> terms;
    for (const auto& [m, c] : p) terms.push_back(mono_to_tree(m, c));
    return sum(std::move(terms));
}

Expr canon_to_tree(const Canon& c) {
    Expr num = poly_to_tree(c.num);
    if (c.den.empty()) return num;
    return div(num, poly_to_tree(c.den));
}

} // namespace

Expr normalize(const Expr& e) {
    Canonicalizer cz;
    Canon c = cz.run(e);
    return canon_to_tree(c);
}

Expr substitute_raw(const Expr& e, const std::map<SymRef, Expr>& bindings);

Expr substitute(const Expr& e, const std::map<SymRef, Expr>& bindings) {
    return normalize(substitute_raw(e, bindings));
}

namespace {

Expr substitute_params_raw(const Expr& e, const std::map<std::string, Expr>& bindings) {
    const Node& n = e.node();
    switch (n.kind) {
        case NodeKind::Param: {
            auto it = bindings.find(n.name);
            return it != bindings.end() ? it->second : e;
        }
        case NodeKind::Rat:
        case NodeKind::Flt:
        case NodeKind::Time:
        case NodeKind::Seq: return e;
        case NodeKind::Ln: return ln(substitute_params_raw(n.kids[0], bindings));
        case NodeKind::Exp: return exp_e(substitute_params_raw(n.kids[0], bindings));
        case NodeKind::Pow: return pow_r(substitute_params_raw(n.kids[0], bindings), n.rat);
        case NodeKind::Geom: return geom(substitute_params_raw(n.kids[0], bindings));
        case NodeKind::Sum: {
            std::vector<Expr> kids;
            for (const auto& k : n.kids) kids.push_back(substitute_params_raw(k, bindings));
            return sum(std::move(kids));
        }
        case NodeKind::Prod: {
            std::vector<Expr> kids;
            for (const auto& k : n.kids) kids.push_back(substitute_params_raw(k, bindings));
            return prod(std::move(kids));
        }
    }
    throw std::logic_error("unreachable node kind");
}

} // namespace

Expr substitute_params(const Expr& e, const std::map<std::string, Expr>& bindings) {
    if (bindings.empty()) return normalize(e);
    return normalize(substitute_params_raw(e, bindings));
}

std::vector<LinearRow> collect_linear_rows(const Expr& e, const std::vector<std::string>& unknowns) {
    Canonicalizer cz;
    Canon c = cz.run(e);

    auto is_unknown = [&](const Atom& a) {
        return a.tag == Atom::Tag::Param &&
               std::find(unknowns.begin(), unknowns.end(), a.name) != unknowns.end();
    };
    auto atom_in_canon_check = [&](const Canon& cc, auto&& self) -> void {
        for (const Poly* poly : {&cc.num, &cc.den})
            for (const auto& [m, co] : *poly)
                for (const auto& [a, ex] : m) {
                    if (is_unknown(a))
                        throw ValidationError(
                            "unsupported nonlinearity: unknown coefficient inside a "
                            "transcendental or denominator");
                    if (a.arg) self(*a.arg, self);
                }
    };
    for (const auto& [m, co] : c.den)
        for (const auto& [a, ex] : m) {
            if (is_unknown(a))
                throw ValidationError("unsupported nonlinearity: unknown coefficient in denominator");
            if (a.arg) atom_in_canon_check(*a.arg, atom_in_canon_check);
        }

    std::map<std::string, LinearRow> rows;
    for (const auto& [m, co] : c.num) {
        std::string unk;
        Mono rest;
        for (const auto& [a, ex] : m) {
            if (is_unknown(a)) {
                if (!unk.empty() || ex != 1)
                    throw ValidationError(
                        "unsupported nonlinearity: product of unknown coefficients");
                unk = a.name;
            } else {
                if (a.arg) atom_in_canon_check(*a.arg, atom_in_canon_check);
                rest.push_back({a, ex});
            }
        }
        std::string key = to_string(mono_to_tree(rest, Coeff::of(Rational(1))));
        LinearRow& row = rows[key];
        row.key = key;
        if (unk.empty()) {
            if (co.exact)
                row.constant = row.constant + co.r;
            else
                row.exact = false;
            row.constant_f += co.value();
        } else {
            if (co.exact) {
                auto [it, fresh] = row.coeffs.emplace(unk, co.r);
                if (!fresh) it->second = it->second + co.r;
            } else {
                row.exact = false;
            }
            row.coeffs_f[unk] += co.value();
        }
        if (!co.exact) row.exact = false;
    }
    if (cz.saw_float)
        for (auto& [k, row] : rows) row.exact = false;

    std::vector<LinearRow> out;
    for (auto& [k, row] : rows) out.push_back(std::move(row));
    return out;
}

bool is_symbolically_zero(const Expr& e) {
    Canonicalizer cz;
    Canon c = cz.run(e);
    return c.num.empty() && !cz.saw_float;
}

Point random_point(const std::vector<SymRef>& syms, const std::vector<std::string>& params,
                   std::mt19937_64& rng, const SampleBox& box) {
    Point pt;
    std::uniform_real_distribution<double> usym(box.sym_lo, box.sym_hi);
    std::uniform_real_distribution<double> ubeta(box.beta_lo, box.beta_hi);
    std::uniform_real_distribution<double> uh(box.h_lo, box.h_hi);
    for (const auto& s : syms) pt.set(s.str(), usym(rng));
    if (!pt.has("t")) pt.set("t", usym(rng));
    for (const auto& name : params) {
        if (name == "beta")
            pt.set(name, ubeta(rng));
        else if (name == "h")
            pt.set(name, uh(rng));
        else
            pt.set(name, usym(rng));
    }
    if (!pt.has("h")) pt.set("h", uh(rng));
    return pt;
}

bool equivalent(const Expr& a, const Expr& b, int samples, double tol, std::uint64_t seed,
                const SampleBox& box) {
    if (samples < 1) throw ValidationError("equivalent: samples must be >= 1");
    if (!(tol > 0)) throw ValidationError("equivalent: tol must be > 0");
    Expr d = sub(a, b);
    if (is_symbolically_zero(d)) return true;

    std::vector<SymRef> syms = symbols_of(d);
    {
        std::map<SymRef, bool> ms;
        collect_symbols(a, ms);
        collect_symbols(b, ms);
        syms.clear();
        for (const auto& [s, _] : ms) syms.push_back(s);
    }
    std::map<std::string, bool> pm;
    collect_params(a, pm);
    collect_params(b, pm);
    std::vector<std::string> params;
    for (const auto& [name, _] : pm) params.push_back(name);

    std::mt19937_64 rng(seed);
    int failures = 0;
    int done = 0;
    while (done < samples) {
        Point pt = random_point(syms, params, rng, box);
        try {
            double va = eval(a, pt);
            double vd = eval(d, pt);
            if (std::isnan(vd) || std::abs(vd) > tol * (1.0 + std::abs(va))) return false;
            ++done;
        } catch (const EvalDomainError&) {
            if (++failures > box.retry_cap)
                throw NumericError(
                    "equivalent: could not find enough evaluable sample points (domain errors)");
        }
    }
    return true;
}

} // namespace dht
