// Homogeneous polynomial self-maps of P^N with integer coefficients:
// exact evaluation on integer lifts, the morphism test at the Macaulay
// degree, and certified height-discrepancy constants from integral
// Nullstellensatz certificates.
#pragma once

#include <algorithm>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dynheight/bigint.hpp"
#include "dynheight/linalg.hpp"

namespace dynheight {

struct Monomial {
    Int coeff;
    std::vector<int> exps;  // length N+1, sum == degree of the poly
};

struct HomogPoly {
    int nvars = 0;  // N+1
    int degree = 0;
    std::vector<Monomial> terms;

    Int eval(const std::vector<Int>& x) const {
        Int acc(0), t;
        for (const auto& m : terms) {
            t = m.coeff;
            for (int i = 0; i < nvars; ++i)
                for (int e = 0; e < m.exps[i]; ++e) t *= x[i];
            acc += t;
        }
        return acc;
    }

    std::complex<double> eval(const std::vector<std::complex<double>>& x) const {
        std::complex<double> acc(0.0, 0.0);
        for (const auto& m : terms) {
            std::complex<double> t(m.coeff.get_d(), 0.0);
            for (int i = 0; i < nvars; ++i)
                for (int e = 0; e < m.exps[i]; ++e) t *= x[i];
            acc += t;
        }
        return acc;
    }

    // sum of |coefficients|
    Int one_norm() const {
        Int s(0);
        for (const auto& m : terms) s += abs(m.coeff);
        return s;
    }
};

struct PolyMapPN {
    int N = 0;
    int degree = 0;
    std::vector<HomogPoly> polys;  // N+1 entries, equal degree

    std::vector<Int> eval(const std::vector<Int>& lift) const {
        std::vector<Int> out;
        out.reserve(polys.size());
        for (const auto& p : polys) out.push_back(p.eval(lift));
        return out;
    }
};

// Convenience builders ------------------------------------------------------

inline HomogPoly poly_from_terms(int nvars, std::vector<Monomial> terms) {
    HomogPoly p;
    p.nvars = nvars;
    p.terms = std::move(terms);
    p.degree = p.terms.empty() ? 0 : 0;
    for (const auto& m : p.terms) {
        int d = 0;
        for (int e : m.exps) d += e;
        if (p.degree == 0) p.degree = d;
        if (d != p.degree) throw DomainError("poly_from_terms: inhomogeneous");
    }
    return p;
}

// (x0^d, x1^d, ..., xN^d)
inline PolyMapPN power_map(int N, int d) {
    PolyMapPN f;
    f.N = N;
    f.degree = d;
    for (int i = 0; i <= N; ++i) {
        std::vector<int> e(N + 1, 0);
        e[i] = d;
        f.polys.push_back(poly_from_terms(N + 1, {{Int(1), e}}));
    }
    return f;
}

// Monomial (toric) map: row i of the exponent matrix gives coordinate i.
inline PolyMapPN monomial_map(int N, const std::vector<std::vector<int>>& exps) {
    PolyMapPN f;
    f.N = N;
    f.degree = 0;
    for (const auto& row : exps) {
        HomogPoly p = poly_from_terms(N + 1, {{Int(1), row}});
        if (f.degree == 0) f.degree = p.degree;
        if (p.degree != f.degree) throw DomainError("monomial_map: mixed degrees");
        f.polys.push_back(p);
    }
    if (f.polys.size() != static_cast<size_t>(N + 1))
        throw DomainError("monomial_map: wrong coordinate count");
    return f;
}

// Macaulay machinery ---------------------------------------------------------

namespace detail {

inline void monomials_of_degree(int nvars, int deg, std::vector<std::vector<int>>& out) {
    std::vector<int> cur(nvars, 0);
    std::function<void(int, int)> rec = [&](int i, int rem) {
        if (i == nvars - 1) {
            cur[i] = rem;
            out.push_back(cur);
            return;
        }
        for (int e = rem; e >= 0; --e) {
            cur[i] = e;
            rec(i + 1, rem - e);
        }
    };
    rec(0, deg);
}

inline size_t monomial_index(const std::vector<std::vector<int>>& mons,
                             const std::vector<int>& m) {
    for (size_t i = 0; i < mons.size(); ++i)
        if (mons[i] == m) return i;
    throw DomainError("monomial_index: not found");
}

}  // namespace detail

enum class MorphismCheck { yes, no, unknown };

// Macaulay degree for N+1 forms of equal degree d in N+1 variables.
inline int macaulay_degree(int N, int d) { return (N + 1) * (d - 1) + 1; }

// Columns of the Macaulay-style matrix at degree `deg`: m * F_j for every
// monomial m of degree deg - d. Rows are indexed by monomials of degree deg.
inline RatMatrix macaulay_matrix(const PolyMapPN& f, int deg,
                                 std::vector<std::vector<int>>* row_mons = nullptr) {
    const int nv = f.N + 1;
    std::vector<std::vector<int>> rows, shifts;
    detail::monomials_of_degree(nv, deg, rows);
    detail::monomials_of_degree(nv, deg - f.degree, shifts);
    RatMatrix m(rows.size(), RatVector(shifts.size() * f.polys.size(), Rat(0)));
    size_t col = 0;
    for (const auto& s : shifts) {
        for (const auto& p : f.polys) {
            for (const auto& t : p.terms) {
                std::vector<int> e(nv);
                for (int i = 0; i < nv; ++i) e[i] = s[i] + t.exps[i];
                m[detail::monomial_index(rows, e)][col] += Rat(t.coeff);
            }
            ++col;
        }
    }
    if (row_mons) *row_mons = std::move(rows);
    return m;
}

// True iff the only common zero of the coordinate forms is the origin,
// decided by surjectivity of multiplication into degree nu (Macaulay/Lazard
// bound). Definitive whenever the system fits under the size cap, which
// covers all N <= 2 cases here.
inline MorphismCheck check_morphism(const PolyMapPN& f, size_t size_cap = 5000) {
    if (f.degree < 1) return MorphismCheck::no;
    const int nu = macaulay_degree(f.N, f.degree);
    std::vector<std::vector<int>> rows;
    detail::monomials_of_degree(f.N + 1, nu, rows);
    if (rows.size() > size_cap) return MorphismCheck::unknown;
    RatMatrix m = macaulay_matrix(f, nu);
    return rank(m) == static_cast<int>(rows.size()) ? MorphismCheck::yes
                                                    : MorphismCheck::no;
}

// One integral Nullstellensatz certificate: D * x_i^deg = sum_j G_ij F_j with
// integer G_ij and D > 0. Returned as the constants the height bound needs.
struct Certificate {
    Int denom;        // D
    Int g_one_norms;  // sum_j ||G_ij||_1
};

inline std::optional<Certificate> power_certificate(const PolyMapPN& f, int var,
                                                    int deg) {
    std::vector<std::vector<int>> rows;
    RatMatrix m = macaulay_matrix(f, deg, &rows);
    std::vector<int> target(f.N + 1, 0);
    target[var] = deg;
    RatVector b(rows.size(), Rat(0));
    b[detail::monomial_index(rows, target)] = 1;
    auto x = solve(m, b);
    if (!x) return std::nullopt;
    Int den(1);
    for (const auto& c : *x) den = lcm(den, c.get_den());
    Int norms(0);
    for (const auto& c : *x) norms += abs(Int(c.get_num() * (den / c.get_den())));
    return Certificate{den, norms};
}

// Height discrepancy of a single map on P^N with h = h_nv:
//   d*h(x) - lower <= h(f(x)) <= d*h(x) + upper   on all canonical points.
struct MapDiscrepancy {
    double upper = 0.0;
    double lower = 0.0;
    bool certified = false;
};

inline MapDiscrepancy map_discrepancy(const PolyMapPN& f, size_t size_cap = 5000) {
    MapDiscrepancy out;
    Int max_norm(1);
    for (const auto& p : f.polys) {
        Int n = p.one_norm();
        if (n > max_norm) max_norm = n;
    }
    out.upper = log_abs(max_norm);

    const int nu = macaulay_degree(f.N, f.degree);
    std::vector<std::vector<int>> rows;
    detail::monomials_of_degree(f.N + 1, nu, rows);
    if (rows.size() > size_cap) return out;  // uncertified, lower unknown

    // Search the smallest degree admitting certificates for every variable;
    // smaller degrees give sharper constants.
    for (int deg = f.degree; deg <= nu; ++deg) {
        std::vector<Certificate> certs;
        bool all = true;
        for (int i = 0; i <= f.N && all; ++i) {
            auto c = power_certificate(f, i, deg);
            if (!c)
                all = false;
            else
                certs.push_back(*c);
        }
        if (!all) continue;
        double c_low = 0.0;
        Int lcm_d(1);
        for (const auto& c : certs) {
            c_low = std::max(c_low, log_abs(c.g_one_norms) - log_abs(c.denom));
            lcm_d = lcm(lcm_d, c.denom);
        }
        out.lower = c_low + log_abs(lcm_d);
        out.certified = true;
        return out;
    }
    return out;  // no certificate at the cap: not a morphism or too large
}

}  // namespace dynheight
