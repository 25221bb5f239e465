#ifndef CCSIM_RATIONAL_HPP
#define CCSIM_RATIONAL_HPP

/*
 * Minimal arbitrary-precision unsigned rationals, enough to evaluate the
 * analytic rate expressions exactly on small instances. Only the oracle
 * code paths use this; nothing here is performance-sensitive.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ccsim/errors.hpp"

namespace ccsim {

class BigUint {
public:
    BigUint() = default;
    BigUint(std::uint64_t v) { // NOLINT(google-explicit-constructor)
        while (v) {
            limbs_.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
            v >>= 32;
        }
    }

    bool is_zero() const { return limbs_.empty(); }
    bool is_even() const { return limbs_.empty() || (limbs_[0] & 1u) == 0; }

    static int compare(const BigUint& a, const BigUint& b) {
        if (a.limbs_.size() != b.limbs_.size())
            return a.limbs_.size() < b.limbs_.size() ? -1 : 1;
        for (std::size_t i = a.limbs_.size(); i-- > 0;)
            if (a.limbs_[i] != b.limbs_[i])
                return a.limbs_[i] < b.limbs_[i] ? -1 : 1;
        return 0;
    }

    friend bool operator==(const BigUint& a, const BigUint& b) { return compare(a, b) == 0; }
    friend bool operator<(const BigUint& a, const BigUint& b) { return compare(a, b) < 0; }
    friend bool operator<=(const BigUint& a, const BigUint& b) { return compare(a, b) <= 0; }

    friend BigUint operator+(const BigUint& a, const BigUint& b) {
        BigUint out;
        const std::size_t n = std::max(a.limbs_.size(), b.limbs_.size());
        out.limbs_.reserve(n + 1);
        std::uint64_t carry = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t s = carry;
            if (i < a.limbs_.size())
                s += a.limbs_[i];
            if (i < b.limbs_.size())
                s += b.limbs_[i];
            out.limbs_.push_back(static_cast<std::uint32_t>(s & 0xffffffffu));
            carry = s >> 32;
        }
        if (carry)
            out.limbs_.push_back(static_cast<std::uint32_t>(carry));
        return out;
    }

    // requires a >= b
    friend BigUint operator-(const BigUint& a, const BigUint& b) {
        if (a < b)
            throw contract_violation("BigUint: subtraction underflow");
        BigUint out;
        out.limbs_.reserve(a.limbs_.size());
        std::int64_t borrow = 0;
        for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
            std::int64_t d = static_cast<std::int64_t>(a.limbs_[i]) - borrow -
                             (i < b.limbs_.size() ? b.limbs_[i] : 0);
            borrow = 0;
            if (d < 0) {
                d += (std::int64_t{1} << 32);
                borrow = 1;
            }
            out.limbs_.push_back(static_cast<std::uint32_t>(d));
        }
        out.trim();
        return out;
    }

    friend BigUint operator*(const BigUint& a, const BigUint& b) {
        if (a.is_zero() || b.is_zero())
            return BigUint{};
        BigUint out;
        out.limbs_.assign(a.limbs_.size() + b.limbs_.size(), 0);
        for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
            std::uint64_t carry = 0;
            for (std::size_t j = 0; j < b.limbs_.size(); ++j) {
                std::uint64_t cur = out.limbs_[i + j] +
                                    static_cast<std::uint64_t>(a.limbs_[i]) * b.limbs_[j] + carry;
                out.limbs_[i + j] = static_cast<std::uint32_t>(cur & 0xffffffffu);
                carry = cur >> 32;
            }
            std::size_t k = i + b.limbs_.size();
            while (carry) {
                std::uint64_t cur = out.limbs_[k] + carry;
                out.limbs_[k] = static_cast<std::uint32_t>(cur & 0xffffffffu);
                carry = cur >> 32;
                ++k;
            }
        }
        out.trim();
        return out;
    }

    void halve() {
        std::uint32_t carry = 0;
        for (std::size_t i = limbs_.size(); i-- > 0;) {
            const std::uint32_t next = limbs_[i] & 1u;
            limbs_[i] = (limbs_[i] >> 1) | (carry << 31);
            carry = next;
        }
        trim();
    }

    void double_up() {
        std::uint32_t carry = 0;
        for (auto& limb : limbs_) {
            const std::uint32_t next = limb >> 31;
            limb = (limb << 1) | carry;
            carry = next;
        }
        if (carry)
            limbs_.push_back(carry);
    }

    static BigUint gcd(BigUint a, BigUint b) {
        if (a.is_zero())
            return b;
        if (b.is_zero())
            return a;
        int shift = 0;
        while (a.is_even() && b.is_even()) {
            a.halve();
            b.halve();
            ++shift;
        }
        while (a.is_even())
            a.halve();
        while (!b.is_zero()) {
            while (b.is_even())
                b.halve();
            if (b < a)
                std::swap(a, b);
            b = b - a;
        }
        while (shift--)
            a.double_up();
        return a;
    }

    long double to_long_double() const {
        long double v = 0.0L;
        for (std::size_t i = limbs_.size(); i-- > 0;)
            v = v * 4294967296.0L + limbs_[i];
        return v;
    }

private:
    void trim() {
        while (!limbs_.empty() && limbs_.back() == 0)
            limbs_.pop_back();
    }

    std::vector<std::uint32_t> limbs_; // little-endian base 2^32
};

// Non-negative rational, always reduced.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(std::uint64_t num, std::uint64_t den = 1) : num_(num), den_(den) {
        if (den == 0)
            throw invalid_parameter("Rational: zero denominator");
        reduce();
    }
    Rational(BigUint num, BigUint den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero())
            throw invalid_parameter("Rational: zero denominator");
        reduce();
    }

    // exact value of a finite non-negative double (mantissa / power of two)
    static Rational from_double(double v);

    bool is_zero() const { return num_.is_zero(); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.num_, a.den_ * b.den_);
    }

    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num_ * b.den_ < b.num_ * a.den_;
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

    Rational pow(int e) const {
        Rational out(1);
        Rational base = *this;
        while (e > 0) {
            if (e & 1)
                out = out * base;
            base = base * base;
            e >>= 1;
        }
        return out;
    }

    double to_double() const {
        return static_cast<double>(num_.to_long_double() / den_.to_long_double());
    }

private:
    void reduce() {
        if (num_.is_zero()) {
            den_ = BigUint(1);
            return;
        }
        const BigUint g = BigUint::gcd(num_, den_);
        num_ = divide_exact(num_, g);
        den_ = divide_exact(den_, g);
    }

    // exact division by repeated halving/subtraction via gcd structure is
    // slow; do schoolbook binary long division instead (d divides x).
    static BigUint divide_exact(const BigUint& x, const BigUint& d) {
        if (BigUint::compare(d, BigUint(1)) == 0)
            return x;
        // binary long division
        BigUint quotient(0);
        BigUint remainder(0);
        // walk bits of x from most significant to least
        std::vector<bool> bits;
        BigUint tmp = x;
        while (!tmp.is_zero()) {
            bits.push_back(!tmp.is_even());
            tmp.halve();
        }
        for (std::size_t i = bits.size(); i-- > 0;) {
            remainder.double_up();
            if (bits[i])
                remainder = remainder + BigUint(1);
            quotient.double_up();
            if (d <= remainder) {
                remainder = remainder - d;
                quotient = quotient + BigUint(1);
            }
        }
        return quotient;
    }

    BigUint num_;
    BigUint den_;
};

inline Rational Rational::from_double(double v) {
    if (!(v >= 0.0) || v != v || v > 1e300)
        throw invalid_parameter("Rational::from_double: need a finite non-negative value");
    if (v == 0.0)
        return Rational(0);
    int exp = 0;
    const double mant = std::frexp(v, &exp); // v = mant * 2^exp, mant in [0.5, 1)
    const auto scaled = static_cast<std::uint64_t>(std::ldexp(mant, 53));
    exp -= 53;
    BigUint num(scaled);
    BigUint den(1);
    for (; exp > 0; --exp)
        num.double_up();
    for (; exp < 0; ++exp)
        den.double_up();
    return Rational(std::move(num), std::move(den));
}

} // namespace ccsim

#endif
