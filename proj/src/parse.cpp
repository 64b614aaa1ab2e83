#include "dht/parse.hpp"

#include <cctype>
#include <cstdlib>

namespace dht {

namespace {

struct Parser {
    const std::string& s;
    const MeshContext& ctx;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("col " + std::to_string(pos + 1) + ": " + msg);
    }

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    Expr parse_expr() {
        Expr acc = parse_term();
        while (true) {
            if (eat('+'))
                acc = add(acc, parse_term());
            else if (eat('-'))
                acc = sub(acc, parse_term());
            else
                return acc;
        }
    }

    Expr parse_term() {
        Expr acc = parse_unary();
        while (true) {
            if (eat('*'))
                acc = mul(acc, parse_unary());
            else if (eat('/'))
                acc = div(acc, parse_unary());
            else
                return acc;
        }
    }

    Expr parse_unary() {
        if (eat('-')) return neg(parse_unary());
        if (eat('+')) return parse_unary();
        return parse_postfix();
    }

    Expr parse_postfix() {
        Expr base = parse_primary();
        while (peek() == '^') {
            ++pos;
            skip_ws();
            if (pos < s.size() && s[pos] == '[') {
                ++pos;
                skip_ws();
                if (pos >= s.size() || s[pos] != 't') fail("expected t in ^[t]");
                ++pos;
                if (!eat(']')) fail("expected ] after ^[t");
                try {
                    base = geom(base);
                } catch (const ValidationError& e) {
                    fail(e.what());
                }
            } else {
                base = pow_r(base, parse_exponent());
            }
        }
        return base;
    }

    Rational parse_exponent() {
        skip_ws();
        bool parens = eat('(');
        bool negate = false;
        if (eat('-')) negate = true;
        skip_ws();
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
            fail("expected rational exponent");
        Rational r = parse_number();
        if (parens && eat('/')) {
            skip_ws();
            Rational d = parse_number();
            if (d.is_zero()) fail("zero denominator in exponent");
            r = r / d;
        }
        if (parens && !eat(')')) fail("expected ) in exponent");
        if (!r.is_integer() && !parens) fail("fractional exponents need parentheses: ^(p/q)");
        return negate ? -r : r;
    }

    Rational parse_number() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        std::string intpart = s.substr(start, pos - start);
        std::string fracpart;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            std::size_t fs = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            fracpart = s.substr(fs, pos - fs);
        }
        long exp10 = 0;
        if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
            std::size_t save = pos;
            ++pos;
            bool eneg = false;
            if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) eneg = (s[pos++] == '-');
            if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                long v = 0;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
                    v = v * 10 + (s[pos++] - '0');
                exp10 = eneg ? -v : v;
            } else {
                pos = save; // not an exponent, likely an identifier boundary
            }
        }
        if (intpart.empty() && fracpart.empty()) fail("malformed number");
        if (intpart.size() + fracpart.size() > 18) fail("numeric literal too long for exact arithmetic");
        if (exp10 > 18 || exp10 < -18) fail("numeric exponent out of range");
        std::int64_t mant = 0;
        for (char c : intpart) mant = mant * 10 + (c - '0');
        for (char c : fracpart) mant = mant * 10 + (c - '0');
        Rational r(mant);
        long scale = exp10 - static_cast<long>(fracpart.size());
        r = r * Rational(10).pow(scale);
        return r;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of expression");
        char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return rational(parse_number());
        if (c == '(') {
            ++pos;
            Expr e = parse_expr();
            if (!eat(')')) fail("expected )");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail(std::string("unexpected character '") + c + "'");
    }

    Expr parse_ident() {
        std::size_t start = pos;
        while (pos < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            ++pos;
        std::string name = s.substr(start, pos - start);

        if (name == "ln" || name == "exp") {
            if (!eat('(')) fail("expected ( after " + name);
            Expr arg = parse_expr();
            if (!eat(')')) fail("expected ) after " + name + " argument");
            return name == "ln" ? ln(arg) : exp_e(arg);
        }
        if (name == "t") return time_sym();
        if (name == "h" || name == "beta") return param(name);

        // sequence symbol: base name + component index + [shift]
        static const std::pair<const char*, VarBase> bases[] = {
            {"q", VarBase::State},
            {"p", VarBase::Costate},
            {"lambda", VarBase::PresentCostate},
            {"u", VarBase::Control},
        };
        for (const auto& [bname, base] : bases) {
            std::string bs = bname;
            if (name.size() > bs.size() && name.compare(0, bs.size(), bs) == 0 &&
                std::isdigit(static_cast<unsigned char>(name[bs.size()]))) {
                int index = std::atoi(name.c_str() + bs.size());
                int dim = (base == VarBase::Control) ? ctx.m : ctx.n;
                if (index < 1 || index > dim)
                    fail("unknown symbol " + name + " (dimension for " + bs + " is " +
                         std::to_string(dim) + ")");
                if (!eat('[')) fail("sequence symbol " + name + " needs a [shift], e.g. " + name + "[0]");
                skip_ws();
                int sign = 1;
                if (pos < s.size() && (s[pos] == '+' || s[pos] == '-'))
                    sign = (s[pos++] == '-') ? -1 : 1;
                skip_ws();
                if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
                    fail("expected shift offset in brackets");
                int off = 0;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
                    off = off * 10 + (s[pos++] - '0');
                off *= sign;
                if (!eat(']')) fail("expected ] after shift offset");
                if (off < -kShiftWindow || off > kShiftWindow)
                    fail("shift offset " + std::to_string(off) + " outside window [-" +
                         std::to_string(kShiftWindow) + ",+" + std::to_string(kShiftWindow) + "]");
                return seq(base, index, off);
            }
        }
        if (ctx.has_param(name)) return param(name);
        fail("unknown symbol " + name);
    }
};

} // namespace

Expr parse(const std::string& text, const MeshContext& ctx) {
    Parser p{text, ctx};
    Expr e = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return e;
}

Rational parse_rational_literal(const std::string& text) {
    MeshContext ctx;
    Parser p{text, ctx};
    bool negate = p.eat('-');
    Rational r = p.parse_number();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input after number");
    return negate ? -r : r;
}

} // namespace dht
