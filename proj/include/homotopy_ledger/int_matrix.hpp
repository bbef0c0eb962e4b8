#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hl {

using Integer = boost::multiprecision::cpp_int;
using IntVector = std::vector<Integer>;

inline Integer abs_value(const Integer& x) { return x < 0 ? Integer(-x) : x; }

inline Integer gcd(const Integer& a, const Integer& b) {
    return boost::multiprecision::gcd(abs_value(a), abs_value(b));
}

/// Dense integer matrix, row-major. Empty shapes (0 x n, n x 0) are valid.
class IntMatrix {
public:
    IntMatrix() = default;
    IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    IntMatrix(std::initializer_list<std::initializer_list<Integer>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw std::invalid_argument("IntMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static IntMatrix from_rows(const std::vector<IntVector>& rows, std::size_t cols) {
        IntMatrix m(rows.size(), cols);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != cols)
                throw std::invalid_argument("IntMatrix::from_rows: row length mismatch");
            for (std::size_t j = 0; j < cols; ++j)
                m(i, j) = rows[i][j];
        }
        return m;
    }

    static IntMatrix identity(std::size_t n) {
        IntMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1;
        return m;
    }

    static IntMatrix diagonal(std::span<const Integer> diag) {
        IntMatrix m(diag.size(), diag.size());
        for (std::size_t i = 0; i < diag.size(); ++i)
            m(i, i) = diag[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    Integer& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Integer& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    IntVector row(std::size_t r) const {
        return IntVector(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                         data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
    }

    IntVector column(std::size_t c) const {
        IntVector out(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            out[r] = (*this)(r, c);
        return out;
    }

    bool is_zero() const {
        for (const auto& x : data_)
            if (x != 0)
                return false;
        return true;
    }

    IntMatrix transpose() const {
        IntMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                t(c, r) = (*this)(r, c);
        return t;
    }

    /// Vertical concatenation; column counts must agree.
    IntMatrix stacked(const IntMatrix& below) const {
        if (rows_ == 0)
            return below.rows_ == 0 ? IntMatrix(0, std::max(cols_, below.cols_)) : below;
        if (below.rows_ == 0)
            return *this;
        if (below.cols_ != cols_)
            throw std::invalid_argument("IntMatrix::stacked: column mismatch");
        IntMatrix out(rows_ + below.rows_, cols_);
        std::copy(data_.begin(), data_.end(), out.data_.begin());
        std::copy(below.data_.begin(), below.data_.end(),
                  out.data_.begin() + static_cast<std::ptrdiff_t>(data_.size()));
        return out;
    }

    /// Columns [first, first + count).
    IntMatrix column_block(std::size_t first, std::size_t count) const {
        IntMatrix out(rows_, count);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < count; ++c)
                out(r, c) = (*this)(r, first + c);
        return out;
    }

    IntMatrix row_subset(std::span<const std::size_t> which) const {
        IntMatrix out(which.size(), cols_);
        for (std::size_t i = 0; i < which.size(); ++i)
            for (std::size_t c = 0; c < cols_; ++c)
                out(i, c) = (*this)(which[i], c);
        return out;
    }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b)
            return;
        for (std::size_t c = 0; c < cols_; ++c)
            std::swap((*this)(a, c), (*this)(b, c));
    }
    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b)
            return;
        for (std::size_t r = 0; r < rows_; ++r)
            std::swap((*this)(r, a), (*this)(r, b));
    }
    // row[dst] += k * row[src]
    void add_row_multiple(std::size_t dst, std::size_t src, const Integer& k) {
        if (k == 0)
            return;
        for (std::size_t c = 0; c < cols_; ++c)
            (*this)(dst, c) += k * (*this)(src, c);
    }
    // col[dst] += k * col[src]
    void add_col_multiple(std::size_t dst, std::size_t src, const Integer& k) {
        if (k == 0)
            return;
        for (std::size_t r = 0; r < rows_; ++r)
            (*this)(r, dst) += k * (*this)(r, src);
    }
    void negate_row(std::size_t r) {
        for (std::size_t c = 0; c < cols_; ++c)
            (*this)(r, c) = -(*this)(r, c);
    }
    void negate_col(std::size_t c) {
        for (std::size_t r = 0; r < rows_; ++r)
            (*this)(r, c) = -(*this)(r, c);
    }

    friend bool operator==(const IntMatrix& a, const IntMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
        if (a.cols_ != b.rows_)
            throw std::invalid_argument("IntMatrix product: shape mismatch");
        IntMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Integer& aik = a(i, k);
                if (aik == 0)
                    continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    out(i, j) += aik * b(k, j);
            }
        return out;
    }

    /// Row vector times matrix.
    IntVector left_multiply(std::span<const Integer> v) const {
        if (v.size() != rows_)
            throw std::invalid_argument("IntMatrix::left_multiply: length mismatch");
        IntVector out(cols_);
        for (std::size_t r = 0; r < rows_; ++r) {
            if (v[r] == 0)
                continue;
            for (std::size_t c = 0; c < cols_; ++c)
                out[c] += v[r] * (*this)(r, c);
        }
        return out;
    }

    /// Matrix times column vector.
    IntVector right_multiply(std::span<const Integer> v) const {
        if (v.size() != cols_)
            throw std::invalid_argument("IntMatrix::right_multiply: length mismatch");
        IntVector out(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                if (v[c] != 0)
                    out[r] += (*this)(r, c) * v[c];
        return out;
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    Integer determinant() const {
        if (rows_ != cols_)
            throw std::invalid_argument("IntMatrix::determinant: not square");
        if (rows_ == 0)
            return 1;
        IntMatrix a = *this;
        Integer sign = 1;
        Integer prev = 1;
        const std::size_t n = rows_;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (a(k, k) == 0) {
                std::size_t swap_with = k + 1;
                while (swap_with < n && a(swap_with, k) == 0)
                    ++swap_with;
                if (swap_with == n)
                    return 0;
                a.swap_rows(k, swap_with);
                sign = -sign;
            }
            for (std::size_t i = k + 1; i < n; ++i)
                for (std::size_t j = k + 1; j < n; ++j)
                    a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
            prev = a(k, k);
        }
        return sign * a(n - 1, n - 1);
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Integer> data_;
};

inline std::ostream& operator<<(std::ostream& os, const IntMatrix& m) {
    os << '[';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        os << (r ? ", [" : "[");
        for (std::size_t c = 0; c < m.cols(); ++c)
            os << (c ? ", " : "") << m(r, c);
        os << ']';
    }
    return os << ']';
}

} // namespace hl
