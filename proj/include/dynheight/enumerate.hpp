// Northcott enumeration: all canonical points of bounded naive height.
// Order is deterministic: increasing max-abs, then lexicographic on
// coordinates, factors combined left to right.
#pragma once

#include <functional>
#include <vector>

#include "dynheight/projective.hpp"

namespace dynheight {

namespace detail {

// Emit canonical coprime sign-normalized integer vectors of length n with
// max |entry| == m, in lexicographic order.
inline void shell_points(int n, long m, const std::function<void(const std::vector<Int>&)>& emit) {
    std::vector<long> v(n, -m);
    std::vector<Int> vi(n);
    while (true) {
        long maxabs = 0;
        for (long c : v) maxabs = std::max(maxabs, std::labs(c));
        if (maxabs == m) {
            Int g(0);
            for (int i = 0; i < n; ++i) g = gcd(g, Int(v[i]));
            if (g == 1) {
                bool lead_pos = false, seen = false;
                for (long c : v) {
                    if (c != 0) {
                        seen = true;
                        lead_pos = c > 0;
                        break;
                    }
                }
                if (seen && lead_pos) {
                    for (int i = 0; i < n; ++i) vi[i] = v[i];
                    emit(vi);
                }
            }
        }
        int i = n - 1;
        while (i >= 0 && v[i] == m) {
            v[i] = -m;
            --i;
        }
        if (i < 0) break;
        ++v[i];
    }
}

}  // namespace detail

// All x in P^N(Q) (single factor) with h_nv(x) <= B, each exactly once.
inline std::vector<ProjPoint> enumerate_bounded(int N, double B) {
    if (B < 0) throw DomainError("enumerate_bounded: B must be >= 0");
    long hmax = 1;
    while (std::log(static_cast<double>(hmax + 1)) <= B + 1e-12) ++hmax;
    std::vector<ProjPoint> out;
    for (long m = 1; m <= hmax; ++m) {
        detail::shell_points(N + 1, m, [&](const std::vector<Int>& v) {
            out.push_back(make_point({N}, {v}));
        });
    }
    return out;
}

// Product-space version: height is additive over factors, so combine
// per-factor enumerations and keep combined height <= B.
inline std::vector<ProjPoint> enumerate_bounded(const SpaceDesc& space, double B) {
    if (space.size() == 1) return enumerate_bounded(space[0], B);
    std::vector<ProjPoint> out;
    std::vector<std::vector<ProjPoint>> per_factor;
    for (int N : space) per_factor.push_back(enumerate_bounded(N, B));
    std::vector<size_t> idx(space.size(), 0);
    std::function<void(size_t, double, std::vector<std::vector<Int>>&)> rec =
        [&](size_t j, double used, std::vector<std::vector<Int>>& acc) {
            if (j == space.size()) {
                out.push_back(make_point(space, acc));
                return;
            }
            for (const auto& p : per_factor[j]) {
                double h = naive_height(p);
                if (used + h > B + 1e-12) continue;
                acc.push_back(p.coords[0]);
                rec(j + 1, used + h, acc);
                acc.pop_back();
            }
        };
    std::vector<std::vector<Int>> acc;
    rec(0, 0.0, acc);
    return out;
}

}  // namespace dynheight
