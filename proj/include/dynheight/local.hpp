// Local canonical heights for polynomial-map systems on P^N, per place of Q,
// as lift-based Green functions
//   g_v(x~) = lim_l d^{-l} sum_{f in F_l} log ||f(x~)||_v ,
// computed on the exact unnormalized lift tree (no gcd reduction between
// steps: the accumulated content IS the finite-place data). The section
// dependence of the classical local height is exactly the scaling law
// g_v(c x~) = g_v(x~) + log|c|_v, which is tested instead of hidden; see the
// README for the translation to divisor/section normalizations.
//
// Also: the S-operator fixed point on finite closed domains, solved both by
// exact-style direct elimination and by contraction iteration.
#pragma once

#include <map>
#include <set>

#include "dynheight/canonical.hpp"
#include "dynheight/system.hpp"

namespace dynheight {

struct LocalHeightEstimate {
    Place place = Place::archimedean();
    double value = 0.0;
    double error_radius = 0.0;
    int iterations = 0;
    bool truncated = false;  // digit budget stopped the lift tree early
};

namespace localdetail {

struct LiftNode {
    std::vector<Int> lift;
    double mult;
};

// One level of the exact lift tree (no normalization).
inline std::vector<LiftNode> expand_lifts(const PolyPNSystem& sys,
                                          const std::vector<LiftNode>& level) {
    std::vector<LiftNode> next;
    next.reserve(level.size() * sys.maps().size());
    for (const auto& n : level) {
        for (const auto& f : sys.maps()) {
            std::vector<Int> img = f.eval(n.lift);
            bool all_zero = true;
            for (const auto& c : img)
                if (c != 0) all_zero = false;
            if (all_zero)
                throw IndeterminateError("local lift tree hit an indeterminate point");
            next.push_back({std::move(img), n.mult});
        }
    }
    // merge identical lifts (power maps and friends collapse heavily)
    std::map<std::string, size_t> seen;
    std::vector<LiftNode> merged;
    for (auto& n : next) {
        std::string key;
        for (const auto& c : n.lift) key += c.get_str() + "|";
        auto it = seen.find(key);
        if (it == seen.end()) {
            seen.emplace(std::move(key), merged.size());
            merged.push_back(std::move(n));
        } else {
            merged[it->second].mult += n.mult;
        }
    }
    return merged;
}

inline long max_bits(const std::vector<LiftNode>& level) {
    long m = 0;
    for (const auto& n : level)
        for (const auto& c : n.lift)
            if (c != 0) m = std::max(m, static_cast<long>(bit_size(c)));
    return m;
}

}  // namespace localdetail

// Green function of the system at one place, evaluated on a fixed integer
// lift. Stops when the geometric tail closes, when consecutive levels are
// stationary with certified C = 0 (then the value is exact), or when the
// digit budget trips (flagged truncated).
inline LocalHeightEstimate local_green(std::shared_ptr<const PolyPNSystem> sys,
                                       const std::vector<Int>& lift, Place v,
                                       const EngineOptions& opts = {}) {
    bool all_zero = true;
    for (const auto& c : lift)
        if (c != 0) all_zero = false;
    if (all_zero) throw DomainError("local_green: zero lift");

    const double d = sys->degree();
    const int k = sys->map_count();
    DiscrepancyBound disc = compute_discrepancy_bound(*sys, opts);
    auto tail = [&](int l) { return disc.C * std::pow(k / d, l) / (d - k); };

    LocalHeightEstimate est;
    est.place = v;
    std::vector<localdetail::LiftNode> level{{lift, 1.0}};
    double value = local_log_norm(lift, v);
    int l = 0;
    while (tail(l) > opts.target_error && l < opts.depth_cap) {
        if (localdetail::max_bits(level) > opts.digit_budget_bits) {
            est.truncated = true;
            break;
        }
        level = localdetail::expand_lifts(*sys, level);
        ++l;
        double sum = 0.0;
        for (const auto& n : level) sum += n.mult * local_log_norm(n.lift, v);
        value = sum / std::pow(d, l);
    }
    est.value = value;
    est.iterations = l;
    est.error_radius = (disc.certified && disc.C == 0.0) ? 0.0 : tail(l);
    return est;
}

struct HeightDecomposition {
    std::map<Place, LocalHeightEstimate> locals;
    double local_sum = 0.0;
    double local_sum_radius = 0.0;
    HeightEstimate global;  // from the canonical engine, for cross-checking
};

// hhat as a sum of local terms: the archimedean Green value plus one term
// per prime dividing the content of any composite lift. For a coprime lift
// every other prime contributes exactly 0.
inline HeightDecomposition decompose_height(std::shared_ptr<const PolyPNSystem> sys,
                                            const ProjPoint& x,
                                            const EngineOptions& opts = {}) {
    HeightDecomposition out;
    const double d = sys->degree();
    const int k = sys->map_count();
    DiscrepancyBound disc = compute_discrepancy_bound(*sys, opts);
    auto tail = [&](int l) { return disc.C * std::pow(k / d, l) / (d - k); };

    // Walk the exact lift tree once, recording per-level local sums at the
    // archimedean place and the full content factorization at finite ones.
    std::vector<localdetail::LiftNode> level{{x.coords[0], 1.0}};
    std::set<Int> primes;
    std::map<Int, double> finite_value;  // running d^{-l} sums per prime
    double arch_value = local_log_norm(x.coords[0], Place::archimedean());
    int l = 0;
    bool truncated = false;
    while (tail(l) > opts.target_error && l < opts.depth_cap) {
        if (localdetail::max_bits(level) > opts.digit_budget_bits) {
            truncated = true;
            break;
        }
        level = localdetail::expand_lifts(*sys, level);
        ++l;
        double scale = std::pow(d, l);
        // content primes of this level
        for (const auto& n : level) {
            Int g(0);
            for (const auto& c : n.lift) g = gcd(g, c);
            if (g > 1)
                for (const auto& p : factor(g)) primes.insert(p);
        }
        arch_value = 0.0;
        for (auto& [p, val] : finite_value) val = 0.0;
        for (const auto& n : level) {
            arch_value += n.mult * local_log_norm(n.lift, Place::archimedean());
            for (const auto& p : primes) {
                double t = n.mult * local_log_norm(n.lift, Place::finite(p));
                if (t != 0.0) finite_value[p] += t;
            }
        }
        arch_value /= scale;
        for (auto& [p, val] : finite_value) val /= scale;
    }

    double radius = (disc.certified && disc.C == 0.0) ? 0.0 : tail(l);
    LocalHeightEstimate arch;
    arch.place = Place::archimedean();
    arch.value = arch_value;
    arch.error_radius = radius;
    arch.iterations = l;
    arch.truncated = truncated;
    out.locals.emplace(arch.place, arch);
    out.local_sum = arch_value;
    out.local_sum_radius = radius;
    for (const auto& [p, val] : finite_value) {
        LocalHeightEstimate le;
        le.place = Place::finite(p);
        le.value = val;
        le.error_radius = radius;
        le.iterations = l;
        le.truncated = truncated;
        out.locals.emplace(le.place, le);
        out.local_sum += val;
        out.local_sum_radius += radius;
    }
    out.global = canonical_height(sys, x, opts);
    return out;
}

// --- S-operator on a finite closed domain -----------------------------------

struct SOperatorResult {
    std::vector<double> gamma_hat_direct;     // direct linear solve
    std::vector<double> gamma_hat_iterated;   // fixed-point iteration
    double max_difference = 0.0;
    double sup_bound = 0.0;  // (2d+1)/(d-k) * ||gamma||_sup
    int iterations = 0;
};

// Solve gamma(x) = sum_i gamma_hat(f_i(x)) - d gamma_hat(x) on a finite
// domain closed under all maps, given as maps[i][x] = index of f_i(x).
// Direct route: the system matrix (counts - d I) is strictly diagonally
// dominant since d > k, so plain LU is exact to roundoff. Iterative route:
// S delta = (1/d)(sum_i delta(f_i .) - gamma), a (k/d)-contraction, started
// at gamma per the construction.
inline SOperatorResult s_operator_fixed_point(
    const std::vector<std::vector<int>>& maps, const std::vector<double>& gamma,
    double d, double tol = 1e-13, int max_iter = 100000) {
    const size_t n = gamma.size();
    const size_t k = maps.size();
    if (d <= static_cast<double>(k)) throw DomainError("s_operator: requires d > k");
    for (const auto& m : maps) {
        if (m.size() != n) throw DomainError("s_operator: map table size mismatch");
        for (int t : m)
            if (t < 0 || t >= static_cast<int>(n))
                throw DomainError("s_operator: domain not closed");
    }

    SOperatorResult res;
    // direct solve: A ghat = gamma, A[x][y] = #{i: f_i(x)=y} - d delta_{xy}
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (size_t x = 0; x < n; ++x) {
        for (size_t i = 0; i < k; ++i) A[x][maps[i][x]] += 1.0;
        A[x][x] -= d;
    }
    std::vector<double> b = gamma;
    // Gaussian elimination with partial pivoting
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    for (size_t c = 0; c < n; ++c) {
        size_t piv = c;
        for (size_t r = c + 1; r < n; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (size_t r = c + 1; r < n; ++r) {
            double f = A[r][c] / A[c][c];
            if (f == 0.0) continue;
            for (size_t j = c; j < n; ++j) A[r][j] -= f * A[c][j];
            b[r] -= f * b[c];
        }
    }
    res.gamma_hat_direct.assign(n, 0.0);
    for (size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (size_t j = ri + 1; j < n; ++j) s -= A[ri][j] * res.gamma_hat_direct[j];
        res.gamma_hat_direct[ri] = s / A[ri][ri];
    }

    // S-iteration from gamma
    std::vector<double> cur = gamma, nxt(n);
    int it = 0;
    double diff = 1.0;
    while (diff > tol && it < max_iter) {
        diff = 0.0;
        for (size_t x = 0; x < n; ++x) {
            double s = -gamma[x];
            for (size_t i = 0; i < k; ++i) s += cur[maps[i][x]];
            nxt[x] = s / d;
        }
        for (size_t x = 0; x < n; ++x) diff = std::max(diff, std::fabs(nxt[x] - cur[x]));
        cur.swap(nxt);
        ++it;
    }
    res.gamma_hat_iterated = cur;
    res.iterations = it;
    for (size_t x = 0; x < n; ++x)
        res.max_difference = std::max(
            res.max_difference,
            std::fabs(res.gamma_hat_direct[x] - res.gamma_hat_iterated[x]));
    double gnorm = 0.0;
    for (double g : gamma) gnorm = std::max(gnorm, std::fabs(g));
    res.sup_bound = (2.0 * d + 1.0) / (d - static_cast<double>(k)) * gnorm;
    return res;
}

}  // namespace dynheight
