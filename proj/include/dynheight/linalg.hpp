// Dense exact linear algebra over Q: row reduction, rank, solve, null space.
// Sizes here are desk-scale (certificate searches, Perron vectors), so plain
// fraction arithmetic with pivot-by-first-nonzero is plenty.
#pragma once

#include <optional>
#include <vector>

#include "dynheight/bigint.hpp"

namespace dynheight {

using RatMatrix = std::vector<std::vector<Rat>>;
using RatVector = std::vector<Rat>;

struct Rref {
    RatMatrix m;
    std::vector<int> pivot_col;  // one entry per pivot row
    int rank = 0;
};

inline Rref rref(RatMatrix a) {
    const size_t rows = a.size();
    const size_t cols = rows ? a[0].size() : 0;
    Rref out;
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t piv = r;
        while (piv < rows && a[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[r], a[piv]);
        Rat inv = a[r][c];
        for (size_t j = c; j < cols; ++j) a[r][j] /= inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || a[i][c] == 0) continue;
            Rat f = a[i][c];
            for (size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
        }
        out.pivot_col.push_back(static_cast<int>(c));
        ++r;
    }
    out.rank = static_cast<int>(r);
    out.m = std::move(a);
    return out;
}

inline int rank(const RatMatrix& a) { return rref(a).rank; }

// Solve A x = b exactly; empty optional if inconsistent. With several
// solutions the free variables are set to zero.
inline std::optional<RatVector> solve(const RatMatrix& a, const RatVector& b) {
    const size_t rows = a.size();
    const size_t cols = rows ? a[0].size() : 0;
    RatMatrix aug(rows, RatVector(cols + 1));
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < cols; ++j) aug[i][j] = a[i][j];
        aug[i][cols] = b[i];
    }
    Rref r = rref(std::move(aug));
    for (int i = 0; i < r.rank; ++i)
        if (r.pivot_col[i] == static_cast<int>(cols)) return std::nullopt;
    RatVector x(cols, Rat(0));
    for (int i = 0; i < r.rank; ++i) x[r.pivot_col[i]] = r.m[i][cols];
    return x;
}

// Basis of the null space of A.
inline std::vector<RatVector> null_space(const RatMatrix& a) {
    const size_t rows = a.size();
    const size_t cols = rows ? a[0].size() : 0;
    Rref r = rref(a);
    std::vector<bool> is_pivot(cols, false);
    for (int c : r.pivot_col) is_pivot[c] = true;
    std::vector<RatVector> basis;
    for (size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        RatVector v(cols, Rat(0));
        v[f] = 1;
        for (int i = 0; i < r.rank; ++i) v[r.pivot_col[i]] = -r.m[i][f];
        basis.push_back(std::move(v));
    }
    return basis;
}

inline RatVector mat_vec(const RatMatrix& a, const RatVector& x) {
    RatVector y(a.size(), Rat(0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
    return y;
}

}  // namespace dynheight
