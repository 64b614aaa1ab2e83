#ifndef DHT_EXPR_HPP
#define DHT_EXPR_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dht/rational.hpp"

namespace dht {

/// Input/configuration problems: bad syntax, unknown symbols, offsets
/// outside the shift window, invalid parameters. CLI exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numeric failures: non-convergence, singular Jacobians, evaluation
/// outside a function domain. CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalDomainError : NumericError {
    using NumericError::NumericError;
};

/// Shift offsets anywhere in a tree are confined to this window.
inline constexpr int kShiftWindow = 2;

/// Indexed mesh sequences: states q^i, current-value costates p^i,
/// present-value costates lambda^i, controls u^i.
enum class VarBase : std::uint8_t { State, Costate, PresentCostate, Control };

const char* var_base_name(VarBase b);

/// One component of a sequence variable at a relative mesh offset,
/// e.g. {State, 1, +1} is q^1_{t+1}.
struct SeqSym {
    VarBase base{};
    int index = 1;  // 1-based component
    int offset = 0; // relative shift, |offset| <= kShiftWindow

    friend bool operator==(const SeqSym& a, const SeqSym& b) {
        return a.base == b.base && a.index == b.index && a.offset == b.offset;
    }
    friend bool operator<(const SeqSym& a, const SeqSym& b) {
        if (a.base != b.base) return a.base < b.base;
        if (a.index != b.index) return a.index < b.index;
        return a.offset < b.offset;
    }
    std::string str() const;
};

enum class NodeKind : std::uint8_t {
    Rat,   // exact rational constant
    Flt,   // float constant (demotes symbolic zero detection)
    Param, // named parameter: h, beta, model constants
    Time,  // the time symbol t
    Seq,   // sequence symbol
    Ln,
    Exp,
    Pow,  // child ^ rational exponent
    Geom, // c^(t/h): per-period geometric factor with t-free base c
    Sum,
    Prod,
};

class Expr;

struct Node {
    NodeKind kind;
    Rational rat;           // Rat, and the exponent for Pow
    double flt = 0;         // Flt
    std::string name;       // Param
    SeqSym seq;             // Seq
    std::vector<Expr> kids; // Ln/Exp/Pow/Geom: 1, Sum/Prod: >= 2
    std::size_t hash = 0;
};

/// Immutable expression tree with value semantics. All operations on
/// expressions are pure; sharing across threads is safe.
class Expr {
  public:
    Expr(); // zero
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    const Node& node() const { return *node_; }
    NodeKind kind() const { return node_->kind; }
    std::size_t hash() const { return node_->hash; }

    bool is_zero() const { return kind() == NodeKind::Rat && node_->rat.is_zero(); }
    bool is_one() const { return kind() == NodeKind::Rat && node_->rat.is_one(); }

    /// Structural equality (same tree shape and payloads).
    bool same(const Expr& o) const;

    std::string str() const;

  private:
    std::shared_ptr<const Node> node_;
};

// --- builders ---------------------------------------------------------

Expr rational(Rational r);
Expr rational(std::int64_t n, std::int64_t d = 1);
Expr floating(double v);
Expr param(const std::string& name);
Expr time_sym();
Expr seq(VarBase base, int index, int offset);
inline Expr q(int i, int off = 0) { return seq(VarBase::State, i, off); }
inline Expr p(int i, int off = 0) { return seq(VarBase::Costate, i, off); }
inline Expr lam(int i, int off = 0) { return seq(VarBase::PresentCostate, i, off); }
inline Expr u(int i, int off = 0) { return seq(VarBase::Control, i, off); }

Expr sum(std::vector<Expr> kids);
Expr prod(std::vector<Expr> kids);
Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr mul(const Expr& a, const Expr& b);
Expr div(const Expr& a, const Expr& b);
Expr neg(const Expr& a);
Expr ln(const Expr& a);
Expr exp_e(const Expr& a);
Expr pow_r(const Expr& base, Rational exponent);
/// c^(t/h); base must not involve t or sequence symbols.
Expr geom(const Expr& base);

inline Expr operator+(const Expr& a, const Expr& b) { return add(a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return sub(a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return mul(a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return div(a, b); }
inline Expr operator-(const Expr& a) { return neg(a); }

// --- symbols and evaluation points ------------------------------------

/// A differentiation / substitution target: one sequence symbol at one
/// offset, or the time symbol.
struct SymRef {
    bool is_time = false;
    SeqSym seq;

    static SymRef time() { return SymRef{true, {}}; }
    static SymRef of(VarBase b, int i, int off) { return SymRef{false, {b, i, off}}; }
    friend bool operator<(const SymRef& a, const SymRef& b) {
        if (a.is_time != b.is_time) return a.is_time < b.is_time;
        return a.seq < b.seq;
    }
    friend bool operator==(const SymRef& a, const SymRef& b) {
        return a.is_time == b.is_time && (a.is_time || a.seq == b.seq);
    }
    std::string str() const { return is_time ? "t" : seq.str(); }
};

/// Total assignment of symbol names (printed form: "q1[+1]", "t", "h",
/// "beta", model constants) to values. Evaluation fails loudly on any
/// unbound symbol.
struct Point {
    std::map<std::string, double> vals;

    Point& set(const std::string& name, double v) {
        vals[name] = v;
        return *this;
    }
    double get(const std::string& name) const;
    bool has(const std::string& name) const { return vals.count(name) != 0; }
};

// --- core operations ---------------------------------------------------

double eval(const Expr& e, const Point& pt);

/// Exact partial derivative; symbols at other offsets are constants.
Expr diff(const Expr& e, const SymRef& s);

/// Simultaneous, non-recursive replacement of whole symbols, then
/// normalization.
Expr substitute(const Expr& e, const std::map<SymRef, Expr>& bindings);

/// Raw shifts: every sequence offset +-1, t -> t +- h, geometric factors
/// pick up one power of their base. Throws ValidationError on window
/// overflow.
Expr shift_plus_raw(const Expr& e);
Expr shift_minus_raw(const Expr& e);

/// Collects every symbol occurring in the tree.
void collect_symbols(const Expr& e, std::map<SymRef, bool>& out);
std::vector<SymRef> symbols_of(const Expr& e);
void collect_params(const Expr& e, std::map<std::string, bool>& out);
bool contains_symbol(const Expr& e, const SymRef& s);
bool contains_base(const Expr& e, VarBase b);
int max_offset(const Expr& e);
int min_offset(const Expr& e);
bool contains_float(const Expr& e);

std::string to_string(const Expr& e);

} // namespace dht

#endif
