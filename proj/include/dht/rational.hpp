#ifndef DHT_RATIONAL_HPP
#define DHT_RATIONAL_HPP

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dht {

/// Thrown when exact integer arithmetic would overflow 64 bits.
struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Exact rational on int64 with checked arithmetic. Always normalized:
/// den > 0, gcd(num, den) = 1.
class Rational {
  public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t n) : num_(n), den_(1) {}
    Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) {
        if (den_ == 0) throw std::domain_error("rational with zero denominator");
        reduce();
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_one() const { return num_ == 1 && den_ == 1; }
    bool is_integer() const { return den_ == 1; }
    int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    Rational operator-() const { return Rational(checked(-static_cast<__int128>(num_)), den_, already_reduced{}); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        __int128 n = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
        __int128 d = static_cast<__int128>(a.den_) * b.den_;
        return make(n, d);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        __int128 n = static_cast<__int128>(a.num_) * b.num_;
        __int128 d = static_cast<__int128>(a.den_) * b.den_;
        return make(n, d);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        __int128 n = static_cast<__int128>(a.num_) * b.den_;
        __int128 d = static_cast<__int128>(a.den_) * b.num_;
        return make(n, d);
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }

    Rational abs() const { return num_ >= 0 ? *this : -*this; }

    /// Integer power; exponent may be negative (value must be nonzero then).
    Rational pow(long e) const {
        if (e == 0) return Rational(1);
        if (num_ == 0 && e < 0) throw std::domain_error("zero to negative power");
        Rational base = e > 0 ? *this : Rational(den_, num_);
        unsigned long k = e > 0 ? static_cast<unsigned long>(e) : static_cast<unsigned long>(-e);
        Rational acc(1);
        while (k) {
            if (k & 1) acc *= base;
            base = (k >>= 1) ? base * base : base;
        }
        return acc;
    }

    /// Exact q-th root if it exists (q > 0), e.g. (4/9)^(1/2) -> 2/3.
    bool nth_root(long q, Rational& out) const {
        if (q <= 0 || num_ < 0) return false;
        auto iroot = [](std::int64_t v, long k, std::int64_t& r) {
            if (v == 0 || v == 1) { r = v; return true; }
            std::int64_t lo = 1, hi = v;
            while (lo < hi) {
                std::int64_t mid = lo + (hi - lo) / 2;
                __int128 p = 1;
                bool over = false;
                for (long i = 0; i < k; ++i) {
                    p *= mid;
                    if (p > static_cast<__int128>(v)) { over = true; break; }
                }
                if (!over && p == v) { r = mid; return true; }
                if (over || p > static_cast<__int128>(v)) hi = mid; else lo = mid + 1;
            }
            return false;
        };
        std::int64_t rn, rd;
        if (!iroot(num_, q, rn) || !iroot(den_, q, rd)) return false;
        out = Rational(rn, rd);
        return true;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

  private:
    struct already_reduced {};
    Rational(std::int64_t n, std::int64_t d, already_reduced) : num_(n), den_(d) {}

    static std::int64_t checked(__int128 v) {
        if (v > INT64_MAX || v < INT64_MIN)
            throw OverflowError("rational arithmetic overflow");
        return static_cast<std::int64_t>(v);
    }

    static Rational make(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        __int128 a = n < 0 ? -n : n, b = d;
        while (b) { __int128 t = a % b; a = b; b = t; }
        if (a > 1) { n /= a; d /= a; }
        return Rational(checked(n), checked(d), already_reduced{});
    }

    void reduce() {
        *this = make(num_, den_);
    }

    std::int64_t num_;
    std::int64_t den_;
};

} // namespace dht

#endif
