#ifndef MSW_POLY_HPP_
#define MSW_POLY_HPP_

// Morse, Poincare and Morse-Bott polynomials, the remainder R(t), and the
// polynomial inequality checks. Exact integer arithmetic throughout.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msw/complex.hpp"
#include "msw/errors.hpp"

namespace msw
{

class IntPolynomial
{
  public:
    IntPolynomial() = default;
    explicit IntPolynomial(std::vector<std::int64_t> c) : c_(std::move(c)) { normalize(); }
    IntPolynomial(std::initializer_list<std::int64_t> c) : c_(c) { normalize(); }

    static IntPolynomial monomial(int k, std::int64_t a = 1)
    {
        std::vector<std::int64_t> c(k + 1, 0);
        c[k] = a;
        return IntPolynomial(std::move(c));
    }

    /// -1 for the zero polynomial.
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    std::int64_t operator[](int k) const { return k >= 0 && k < static_cast<int>(c_.size()) ? c_[k] : 0; }
    const std::vector<std::int64_t>& coefficients() const { return c_; }

    bool nonnegative() const
    {
        return std::all_of(c_.begin(), c_.end(), [](std::int64_t a) { return a >= 0; });
    }
    /// Smallest degree with a negative coefficient.
    std::optional<int> first_negative() const
    {
        for (int k = 0; k < static_cast<int>(c_.size()); ++k)
            if (c_[k] < 0)
                return k;
        return std::nullopt;
    }

    friend IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b)
    {
        std::vector<std::int64_t> c(std::max(a.c_.size(), b.c_.size()), 0);
        for (std::size_t k = 0; k < c.size(); ++k)
            c[k] = a[static_cast<int>(k)] + b[static_cast<int>(k)];
        return IntPolynomial(std::move(c));
    }
    friend IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b)
    {
        std::vector<std::int64_t> c(std::max(a.c_.size(), b.c_.size()), 0);
        for (std::size_t k = 0; k < c.size(); ++k)
            c[k] = a[static_cast<int>(k)] - b[static_cast<int>(k)];
        return IntPolynomial(std::move(c));
    }
    friend IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b)
    {
        if (a.is_zero() || b.is_zero())
            return {};
        std::vector<std::int64_t> c(a.c_.size() + b.c_.size() - 1, 0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j)
                c[i + j] += a.c_[i] * b.c_[j];
        return IntPolynomial(std::move(c));
    }
    friend bool operator==(const IntPolynomial& a, const IntPolynomial& b) { return a.c_ == b.c_; }

    /// Exact quotient by (1 + t), or nothing when (1 + t) does not divide.
    std::optional<IntPolynomial> divide_by_one_plus_t() const
    {
        if (c_.empty())
            return IntPolynomial{};
        // Synthetic division from the top: q_{k-1} = a_k - q_k.
        const int n = degree();
        std::vector<std::int64_t> q(n, 0);
        std::int64_t carry = 0;
        for (int k = n; k >= 1; --k) {
            q[k - 1] = c_[k] - carry;
            carry = q[k - 1];
        }
        if (c_[0] - carry != 0)
            return std::nullopt;
        return IntPolynomial(std::move(q));
    }

    std::string pretty() const
    {
        if (c_.empty())
            return "0";
        std::string s;
        for (int k = 0; k < static_cast<int>(c_.size()); ++k) {
            const std::int64_t a = c_[k];
            if (a == 0)
                continue;
            const std::int64_t mag = a < 0 ? -a : a;
            if (s.empty())
                s += a < 0 ? "-" : "";
            else
                s += a < 0 ? " - " : " + ";
            if (k == 0 || mag != 1)
                s += std::to_string(mag);
            if (k >= 1)
                s += "t";
            if (k >= 2)
                s += "^" + std::to_string(k);
        }
        return s;
    }

  private:
    void normalize()
    {
        while (!c_.empty() && c_.back() == 0)
            c_.pop_back();
    }
    std::vector<std::int64_t> c_;
};

inline void to_json(nlohmann::json& j, const IntPolynomial& p) { j = p.coefficients(); }

inline IntPolynomial from_profile(const std::vector<int>& v)
{
    return IntPolynomial(std::vector<std::int64_t>(v.begin(), v.end()));
}

/// M_t(f) = sum nu_k t^k.
inline IntPolynomial morse_polynomial(const std::vector<int>& nu)
{
    for (int v : nu)
        if (v < 0)
            throw Error(ErrorKind::domain, "morse_polynomial: negative count");
    return from_profile(nu);
}

/// P_t(M) = sum b_k t^k.
inline IntPolynomial poincare_polynomial(const HomologyProfile& h) { return from_profile(h.betti); }

struct RemainderResult
{
    IntPolynomial R;
    bool nonnegative = true;
    std::optional<int> negative_degree;  // degree of t with a negative coefficient
};

inline RemainderResult make_remainder(IntPolynomial r)
{
    RemainderResult out;
    out.negative_degree = r.first_negative();
    out.nonnegative = !out.negative_degree;
    out.R = std::move(r);
    return out;
}

/// R(t) = sum_{k=0}^{m-1} (nu_{k+1} - z_{k+1}) t^k; requires nu_0 = z_0.
inline RemainderResult morse_R(const std::vector<int>& nu, const std::vector<int>& z)
{
    if (nu.size() != z.size())
        throw Error(ErrorKind::domain, "morse_R: profile lengths differ");
    if (nu.empty())
        return {};
    if (nu[0] != z[0])
        throw Error(ErrorKind::inconsistency, "morse_R: nu_0 = " + std::to_string(nu[0]) + " but z_0 = " +
                                                  std::to_string(z[0]) + "; the degree-0 boundary must vanish");
    std::vector<std::int64_t> r;
    for (std::size_t k = 1; k < nu.size(); ++k)
        r.push_back(static_cast<std::int64_t>(nu[k]) - z[k]);
    return make_remainder(IntPolynomial(std::move(r)));
}

struct IdentityCheck
{
    bool pass = false;
    bool identity_holds = false;
    bool remainder_nonnegative = false;
    std::optional<int> negative_degree;
    IntPolynomial lhs, rhs;
};

/// M = P + (1 + t) R exactly, with R >= 0 coefficientwise.
inline IdentityCheck verify_morse_identity(const IntPolynomial& M, const IntPolynomial& P, const IntPolynomial& R)
{
    IdentityCheck c;
    c.lhs = M;
    c.rhs = P + IntPolynomial{1, 1} * R;
    c.identity_holds = c.lhs == c.rhs;
    c.negative_degree = R.first_negative();
    c.remainder_nonnegative = !c.negative_degree;
    c.pass = c.identity_holds && c.remainder_nonnegative;
    return c;
}

struct BottTerm
{
    IntPolynomial poincare;  // P_t(C_j)
    int bott_index = 0;
};

/// MB_t(f) = sum_j P_t(C_j) t^{lambda_j}.
inline IntPolynomial morse_bott_polynomial(const std::vector<BottTerm>& terms)
{
    IntPolynomial s;
    for (const auto& t : terms)
        s = s + t.poincare * IntPolynomial::monomial(t.bott_index);
    return s;
}

struct SubmanifoldKernels
{
    int bott_index = 0;
    std::vector<int> z;  // z_k of the complex of f_j on C_j, k = 0..c_j
};

/// R(t) with coefficient of t^{n-1} equal to (sum_{lambda_j + k = n} z_k^j) - z_n^h,
/// the inner sum over k >= 0 (the k = 0 terms are the ones the index shift
/// moves into degree lambda_j).
inline RemainderResult morse_bott_R(const std::vector<SubmanifoldKernels>& subs, const std::vector<int>& zh)
{
    const int m = static_cast<int>(zh.size()) - 1;
    std::vector<std::int64_t> r(std::max(m, 0), 0);
    for (int n = 1; n <= m; ++n) {
        std::int64_t s = 0;
        for (const auto& sub : subs) {
            const int k = n - sub.bott_index;
            if (k >= 0 && k < static_cast<int>(sub.z.size()))
                s += sub.z[k];
        }
        r[n - 1] = s - zh[n];
    }
    return make_remainder(IntPolynomial(std::move(r)));
}

inline IdentityCheck verify_morse_bott_identity(const IntPolynomial& MB, const IntPolynomial& P,
                                                const IntPolynomial& R)
{
    return verify_morse_identity(MB, P, R);
}

struct InequalityCheck
{
    bool weak = true;
    bool strong = true;
    bool euler_equality = true;
    std::optional<int> weak_witness;    // k with nu_k < b_k
    std::optional<int> strong_witness;  // n where the alternating sum fails
};

/// Weak nu_k >= b_k and strong sum_{k<=n} (-1)^{n-k} (nu_k - b_k) >= 0 for all
/// n, with equality at n = m.
inline InequalityCheck check_inequalities(const IntPolynomial& M, const IntPolynomial& P, int m)
{
    InequalityCheck c;
    std::int64_t alt = 0;
    for (int n = 0; n <= m; ++n) {
        const std::int64_t d = M[n] - P[n];
        if (d < 0 && !c.weak_witness) {
            c.weak = false;
            c.weak_witness = n;
        }
        alt = d - alt;
        if (alt < 0 && !c.strong_witness) {
            c.strong = false;
            c.strong_witness = n;
        }
        if (n == m)
            c.euler_equality = alt == 0;
    }
    return c;
}

} // namespace msw

#endif // MSW_POLY_HPP_
