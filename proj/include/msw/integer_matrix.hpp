#ifndef MSW_INTEGER_MATRIX_HPP_
#define MSW_INTEGER_MATRIX_HPP_

// Dense matrices over the integers (arbitrary precision) and over GF(2):
// Smith normal form, ranks, kernel bases.

#include <algorithm>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "msw/errors.hpp"

namespace msw
{

using BigInt = boost::multiprecision::cpp_int;

class IntMatrix
{
  public:
    IntMatrix() = default;
    IntMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols) {}
    IntMatrix(std::initializer_list<std::initializer_list<long>> init)
    {
        rows_ = static_cast<int>(init.size());
        cols_ = rows_ ? static_cast<int>(init.begin()->size()) : 0;
        a_.resize(static_cast<std::size_t>(rows_) * cols_);
        int i = 0;
        for (const auto& row : init) {
            if (static_cast<int>(row.size()) != cols_)
                throw Error(ErrorKind::domain, "IntMatrix: ragged initializer");
            int j = 0;
            for (long v : row)
                (*this)(i, j++) = v;
            ++i;
        }
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    BigInt& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    const BigInt& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    bool is_zero() const
    {
        return std::all_of(a_.begin(), a_.end(), [](const BigInt& v) { return v == 0; });
    }

    static IntMatrix identity(int n)
    {
        IntMatrix m(n, n);
        for (int i = 0; i < n; ++i)
            m(i, i) = 1;
        return m;
    }

    IntMatrix transpose() const
    {
        IntMatrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    IntMatrix reduced_mod2() const
    {
        IntMatrix r(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) {
                BigInt v = (*this)(i, j) % 2;
                r(i, j) = v < 0 ? BigInt(-v) : v;
            }
        return r;
    }

    friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b)
    {
        if (a.cols_ != b.rows_)
            throw Error(ErrorKind::domain, "IntMatrix: dimension mismatch in product");
        IntMatrix c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                if (a(i, k) == 0)
                    continue;
                for (int j = 0; j < b.cols_; ++j)
                    c(i, j) += a(i, k) * b(k, j);
            }
        return c;
    }

    friend bool operator==(const IntMatrix& a, const IntMatrix& b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
    }

    /// Plain-text dump: one row per line, entries separated by spaces.
    std::string to_text() const
    {
        std::ostringstream os;
        os << rows_ << ' ' << cols_ << '\n';
        for (int i = 0; i < rows_; ++i) {
            for (int j = 0; j < cols_; ++j)
                os << (j ? " " : "") << (*this)(i, j);
            os << '\n';
        }
        return os.str();
    }

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<BigInt> a_;
};

struct SmithForm
{
    std::vector<BigInt> invariants;  // nonzero diagonal entries d_1 | d_2 | ...
    int rank = 0;
    int kernel_rank = 0;
    IntMatrix column_transform;  // unimodular Q with P A Q = D
};

namespace detail
{

inline void swap_rows(IntMatrix& m, int a, int b)
{
    if (a == b)
        return;
    for (int j = 0; j < m.cols(); ++j)
        std::swap(m(a, j), m(b, j));
}

inline void swap_cols(IntMatrix& m, int a, int b)
{
    if (a == b)
        return;
    for (int i = 0; i < m.rows(); ++i)
        std::swap(m(i, a), m(i, b));
}

// row_a -= k * row_b
inline void row_axpy(IntMatrix& m, int a, int b, const BigInt& k)
{
    for (int j = 0; j < m.cols(); ++j)
        if (m(b, j) != 0)
            m(a, j) -= k * m(b, j);
}

inline void col_axpy(IntMatrix& m, int a, int b, const BigInt& k)
{
    for (int i = 0; i < m.rows(); ++i)
        if (m(i, b) != 0)
            m(i, a) -= k * m(i, b);
}

} // namespace detail

/// Smith normal form by alternating row and column reduction; the column
/// transform is accumulated so that its trailing columns span the kernel.
inline SmithForm smith_normal_form(const IntMatrix& input)
{
    IntMatrix a = input;
    const int r = a.rows(), c = a.cols();
    IntMatrix q = IntMatrix::identity(c);
    int t = 0;
    for (; t < std::min(r, c); ++t) {
        // Pivot: nonzero entry of least magnitude in the trailing block.
        int pi = -1, pj = -1;
        BigInt best = 0;
        for (int i = t; i < r; ++i)
            for (int j = t; j < c; ++j)
                if (a(i, j) != 0 && (pi < 0 || abs(a(i, j)) < best)) {
                    best = abs(a(i, j));
                    pi = i;
                    pj = j;
                }
        if (pi < 0)
            break;
        detail::swap_rows(a, t, pi);
        detail::swap_cols(a, t, pj);
        detail::swap_cols(q, t, pj);
        for (;;) {
            bool dirty = false;
            for (int i = t + 1; i < r; ++i) {
                if (a(i, t) == 0)
                    continue;
                detail::row_axpy(a, i, t, a(i, t) / a(t, t));
                if (a(i, t) != 0) {
                    detail::swap_rows(a, t, i);
                    dirty = true;
                }
            }
            for (int j = t + 1; j < c; ++j) {
                if (a(t, j) == 0)
                    continue;
                const BigInt k = a(t, j) / a(t, t);
                detail::col_axpy(a, j, t, k);
                detail::col_axpy(q, j, t, k);
                if (a(t, j) != 0) {
                    detail::swap_cols(a, t, j);
                    detail::swap_cols(q, t, j);
                    dirty = true;
                }
            }
            if (dirty)
                continue;
            // Divisibility: fold in a row whose entry the pivot does not divide.
            int bad = -1;
            for (int i = t + 1; i < r && bad < 0; ++i)
                for (int j = t + 1; j < c; ++j)
                    if (a(i, j) % a(t, t) != 0) {
                        bad = i;
                        break;
                    }
            if (bad < 0)
                break;
            detail::row_axpy(a, t, bad, BigInt(-1));
        }
        if (a(t, t) < 0) {
            for (int j = 0; j < c; ++j)
                a(t, j) = -a(t, j);
        }
    }
    SmithForm s;
    for (int i = 0; i < t; ++i)
        s.invariants.push_back(a(i, i));
    s.rank = t;
    s.kernel_rank = c - t;
    s.column_transform = std::move(q);
    return s;
}

struct RankPair
{
    int rank = 0;
    int kernel_rank = 0;
};

/// Rank and kernel rank over the integers (free part).
inline RankPair smith_rank(const IntMatrix& m)
{
    const SmithForm s = smith_normal_form(m);
    return {s.rank, s.kernel_rank};
}

/// Integer kernel basis as columns (c x kernel_rank).
inline IntMatrix kernel_basis(const IntMatrix& m)
{
    const SmithForm s = smith_normal_form(m);
    IntMatrix k(m.cols(), s.kernel_rank);
    for (int j = 0; j < s.kernel_rank; ++j)
        for (int i = 0; i < m.cols(); ++i)
            k(i, j) = s.column_transform(i, s.rank + j);
    return k;
}

/// Torsion coefficients (invariants > 1) of the cokernel.
inline std::vector<BigInt> torsion(const IntMatrix& m)
{
    std::vector<BigInt> out;
    for (const auto& d : smith_normal_form(m).invariants)
        if (d > 1)
            out.push_back(d);
    return out;
}

/// Row echelon form over GF(2); returns rank and the pivot columns.
inline RankPair rank_mod2(const IntMatrix& input)
{
    IntMatrix a = input.reduced_mod2();
    const int r = a.rows(), c = a.cols();
    int rank = 0;
    for (int j = 0; j < c && rank < r; ++j) {
        int p = -1;
        for (int i = rank; i < r; ++i)
            if (a(i, j) != 0) {
                p = i;
                break;
            }
        if (p < 0)
            continue;
        detail::swap_rows(a, rank, p);
        for (int i = 0; i < r; ++i)
            if (i != rank && a(i, j) != 0)
                for (int k = 0; k < c; ++k)
                    a(i, k) = (a(i, k) + a(rank, k)) % 2;
        ++rank;
    }
    return {rank, c - rank};
}

/// Kernel basis over GF(2) as 0/1 columns.
inline IntMatrix kernel_basis_mod2(const IntMatrix& input)
{
    IntMatrix a = input.reduced_mod2();
    const int r = a.rows(), c = a.cols();
    std::vector<int> pivot_col;
    int rank = 0;
    for (int j = 0; j < c && rank < r; ++j) {
        int p = -1;
        for (int i = rank; i < r; ++i)
            if (a(i, j) != 0) {
                p = i;
                break;
            }
        if (p < 0)
            continue;
        detail::swap_rows(a, rank, p);
        for (int i = 0; i < r; ++i)
            if (i != rank && a(i, j) != 0)
                for (int k = 0; k < c; ++k)
                    a(i, k) = (a(i, k) + a(rank, k)) % 2;
        pivot_col.push_back(j);
        ++rank;
    }
    std::vector<bool> is_pivot(c, false);
    for (int j : pivot_col)
        is_pivot[j] = true;
    IntMatrix k(c, c - rank);
    int col = 0;
    for (int f = 0; f < c; ++f) {
        if (is_pivot[f])
            continue;
        k(f, col) = 1;
        for (int i = 0; i < rank; ++i)
            if (a(i, f) != 0)
                k(pivot_col[i], col) = 1;
        ++col;
    }
    return k;
}

} // namespace msw

#endif // MSW_INTEGER_MATRIX_HPP_
