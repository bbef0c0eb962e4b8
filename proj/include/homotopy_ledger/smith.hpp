#pragma once

#include "homotopy_ledger/int_matrix.hpp"

#include <optional>
#include <utility>

namespace hl {

/// left * m * right == diag(invariants..., 0...), with invariants[i] | invariants[i+1].
/// left and right are unimodular; their inverses are tracked alongside.
struct SmithForm {
    IntVector invariants;
    IntMatrix left;
    IntMatrix right;
    IntMatrix left_inverse;
    IntMatrix right_inverse;

    std::size_t rank() const { return invariants.size(); }
};

namespace detail {

// Position of the nonzero entry of least absolute value in the block [t.., t..].
inline std::optional<std::pair<std::size_t, std::size_t>> smallest_entry(const IntMatrix& a, std::size_t t) {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    Integer best_abs;
    for (std::size_t i = t; i < a.rows(); ++i)
        for (std::size_t j = t; j < a.cols(); ++j) {
            if (a(i, j) == 0)
                continue;
            Integer v = abs_value(a(i, j));
            if (!best || v < best_abs) {
                best = {i, j};
                best_abs = std::move(v);
                if (best_abs == 1)
                    return best;
            }
        }
    return best;
}

class SmithReducer {
public:
    explicit SmithReducer(const IntMatrix& m)
        : a_(m),
          left_(IntMatrix::identity(m.rows())),
          left_inv_(IntMatrix::identity(m.rows())),
          right_(IntMatrix::identity(m.cols())),
          right_inv_(IntMatrix::identity(m.cols())) {}

    SmithForm run() && {
        IntVector invariants;
        const std::size_t limit = std::min(a_.rows(), a_.cols());
        for (std::size_t t = 0; t < limit; ++t) {
            if (!settle_pivot(t))
                break;
            if (a_(t, t) < 0)
                negate_row(t);
            invariants.push_back(a_(t, t));
        }
        return SmithForm{std::move(invariants), std::move(left_), std::move(right_), std::move(left_inv_),
                         std::move(right_inv_)};
    }

private:
    // Drives a_(t,t) to a pivot that divides every entry of the trailing block and
    // clears row t and column t. Returns false when the trailing block is zero.
    bool settle_pivot(std::size_t t) {
        for (;;) {
            auto pos = smallest_entry(a_, t);
            if (!pos)
                return false;
            swap_rows(t, pos->first);
            swap_cols(t, pos->second);

            bool clean = true;
            for (std::size_t i = t + 1; i < a_.rows(); ++i) {
                if (a_(i, t) == 0)
                    continue;
                Integer q = a_(i, t) / a_(t, t);
                add_row_multiple(i, t, -q);
                if (a_(i, t) != 0)
                    clean = false;
            }
            for (std::size_t j = t + 1; j < a_.cols(); ++j) {
                if (a_(t, j) == 0)
                    continue;
                Integer q = a_(t, j) / a_(t, t);
                add_col_multiple(j, t, -q);
                if (a_(t, j) != 0)
                    clean = false;
            }
            if (!clean)
                continue;

            // Row and column are clear; enforce divisibility on the remaining block.
            bool divides_all = true;
            for (std::size_t i = t + 1; i < a_.rows() && divides_all; ++i)
                for (std::size_t j = t + 1; j < a_.cols(); ++j)
                    if (a_(i, j) % a_(t, t) != 0) {
                        add_row_multiple(t, i, 1);
                        divides_all = false;
                        break;
                    }
            if (divides_all)
                return true;
        }
    }

    void swap_rows(std::size_t x, std::size_t y) {
        a_.swap_rows(x, y);
        left_.swap_rows(x, y);
        left_inv_.swap_cols(x, y);
    }
    void swap_cols(std::size_t x, std::size_t y) {
        a_.swap_cols(x, y);
        right_.swap_cols(x, y);
        right_inv_.swap_rows(x, y);
    }
    void add_row_multiple(std::size_t dst, std::size_t src, const Integer& k) {
        a_.add_row_multiple(dst, src, k);
        left_.add_row_multiple(dst, src, k);
        left_inv_.add_col_multiple(src, dst, -k);
    }
    void add_col_multiple(std::size_t dst, std::size_t src, const Integer& k) {
        a_.add_col_multiple(dst, src, k);
        right_.add_col_multiple(dst, src, k);
        right_inv_.add_row_multiple(src, dst, -k);
    }
    void negate_row(std::size_t r) {
        a_.negate_row(r);
        left_.negate_row(r);
        left_inv_.negate_col(r);
    }

    IntMatrix a_;
    IntMatrix left_;
    IntMatrix left_inv_;
    IntMatrix right_;
    IntMatrix right_inv_;
};

} // namespace detail

inline SmithForm smith_normal_form(const IntMatrix& m) { return detail::SmithReducer(m).run(); }

/// Basis (as rows) of the left kernel {x : x * m == 0} over the integers.
inline IntMatrix left_kernel(const IntMatrix& m) {
    SmithForm snf = smith_normal_form(m);
    const std::size_t k = snf.rank();
    IntMatrix basis(m.rows() - k, m.rows());
    for (std::size_t i = k; i < m.rows(); ++i)
        for (std::size_t c = 0; c < m.rows(); ++c)
            basis(i - k, c) = snf.left(i, c);
    return basis;
}

} // namespace hl
