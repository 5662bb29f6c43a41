// Forward orbits as labeled multigraphs, F-periodicity via strong
// connectivity, Northcott-bounded periodic-point search, the nonnegative
// eigenvector of column-sum-k transition matrices, and the Henon height
// inequality report.
//
// F-periodicity note: condition (3) -- no proper nonempty subset of C(x)
// closed under all k maps -- is equivalent to strong connectivity of the
// orbit multigraph. A subset closed under all maps is exactly a set with no
// out-edges leaving it, i.e. a union of forward-reachability-closed sets;
// every node's reachable set is such a subset, so minimality forces every
// node to reach every other, and conversely a strongly connected graph has
// no proper closed subset. See README for the two-line proof.
#pragma once

#include <map>
#include <random>
#include <unordered_map>

#include "dynheight/enumerate.hpp"
#include "dynheight/henon.hpp"
#include "dynheight/linalg.hpp"
#include "dynheight/system.hpp"

namespace dynheight {

struct OrbitEdge {
    int from;
    int map;
    int to;
};

struct OrbitReport {
    enum class Status { closed, budget_exceeded };
    std::vector<ProjPoint> nodes;
    std::vector<OrbitEdge> edges;
    Status status = Status::closed;
    std::vector<int> visit_order;

    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(nodes.size());
        for (const auto& e : edges)
            if (e.to >= 0) adj[e.from].push_back(e.to);
        return adj;
    }
};

// BFS closure of x under all k maps, deduplicated by canonical form.
// Closure is also abandoned (status budget_exceeded) when a coordinate
// outgrows digit_budget_bits: heights on non-closing orbits grow
// geometrically, so unbounded expansion is never survivable.
inline OrbitReport forward_orbit(const System& sys, const ProjPoint& x,
                                 long node_budget,
                                 long digit_budget_bits = 1000000) {
    if (node_budget < 1) throw DomainError("forward_orbit: budget must be >= 1");
    OrbitReport rep;
    std::unordered_map<std::string, int> index;
    auto too_big = [&](const ProjPoint& p) {
        for (const auto& f : p.coords)
            for (const auto& c : f)
                if (static_cast<long>(bit_size(c)) > digit_budget_bits) return true;
        return false;
    };
    auto intern = [&](const ProjPoint& p) -> int {
        auto key = p.key();
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(rep.nodes.size());
        index.emplace(std::move(key), id);
        rep.nodes.push_back(p);
        rep.visit_order.push_back(id);
        return id;
    };
    intern(x);
    size_t expanded = 0;
    while (expanded < rep.nodes.size()) {
        if (static_cast<long>(rep.nodes.size()) > node_budget) {
            rep.status = OrbitReport::Status::budget_exceeded;
            return rep;
        }
        int id = static_cast<int>(expanded++);
        ProjPoint p = rep.nodes[id];
        if (too_big(p)) {
            rep.status = OrbitReport::Status::budget_exceeded;
            return rep;
        }
        for (int i = 0; i < sys.map_count(); ++i) {
            ProjPoint img = sys.apply(i, p);
            int to = intern(img);
            rep.edges.push_back({id, i, to});
        }
    }
    if (static_cast<long>(rep.nodes.size()) > node_budget)
        rep.status = OrbitReport::Status::budget_exceeded;
    return rep;
}

// Iterative Tarjan SCC; returns component ids in reverse topological order.
inline std::vector<int> strongly_connected_components(
    const std::vector<std::vector<int>>& adj, int* count_out = nullptr) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> comp(n, -1), low(n), num(n, -1), stk;
    std::vector<bool> on_stack(n, false);
    int idx = 0, ncomp = 0;
    struct Frame {
        int v;
        size_t child;
    };
    for (int root = 0; root < n; ++root) {
        if (num[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        num[root] = low[root] = idx++;
        stk.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& f = frames.back();
            if (f.child < adj[f.v].size()) {
                int w = adj[f.v][f.child++];
                if (num[w] == -1) {
                    num[w] = low[w] = idx++;
                    stk.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], num[w]);
                }
            } else {
                if (low[f.v] == num[f.v]) {
                    while (true) {
                        int w = stk.back();
                        stk.pop_back();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if (w == f.v) break;
                    }
                    ++ncomp;
                }
                int v = f.v;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().v] = std::min(low[frames.back().v], low[v]);
            }
        }
    }
    if (count_out) *count_out = ncomp;
    return comp;
}

enum class PeriodicVerdict { periodic, not_periodic, budget_exceeded };

struct PeriodicityReport {
    PeriodicVerdict verdict = PeriodicVerdict::budget_exceeded;
    OrbitReport orbit;
    // For not_periodic: a proper sub-orbit closed under all maps (a sink
    // strongly connected component of the orbit graph).
    std::vector<ProjPoint> witness_suborbit;
};

inline PeriodicityReport is_f_periodic(const System& sys, const ProjPoint& x,
                                       long node_budget) {
    PeriodicityReport rep;
    rep.orbit = forward_orbit(sys, x, node_budget);
    if (rep.orbit.status == OrbitReport::Status::budget_exceeded) {
        rep.verdict = PeriodicVerdict::budget_exceeded;
        return rep;
    }
    auto adj = rep.orbit.adjacency();
    int ncomp = 0;
    auto comp = strongly_connected_components(adj, &ncomp);
    if (ncomp == 1) {
        rep.verdict = PeriodicVerdict::periodic;
        return rep;
    }
    rep.verdict = PeriodicVerdict::not_periodic;
    // Tarjan emits components in reverse topological order, so component 0
    // has no edges into later components: it is a closed sub-orbit.
    for (size_t v = 0; v < adj.size(); ++v)
        if (comp[v] == 0) rep.witness_suborbit.push_back(rep.orbit.nodes[v]);
    return rep;
}

struct PeriodicOrbit {
    ProjPoint representative;  // minimal canonical node
    std::vector<ProjPoint> orbit;
};

// All F-periodic orbits meeting {h_nv <= B}, each reported once by minimal
// node. Complete relative to the bound only: an orbit is found iff it
// contains a point of height <= B.
inline std::vector<PeriodicOrbit> find_periodic_points(const System& sys, double B,
                                                       long node_budget) {
    std::vector<PeriodicOrbit> out;
    std::map<std::string, size_t> seen_orbits;
    for (const auto& p : enumerate_bounded(sys.space(), B)) {
        PeriodicityReport rep;
        try {
            rep = is_f_periodic(sys, p, node_budget);
        } catch (const EvalError&) {
            continue;  // off-surface / indeterminate points are not in the domain
        }
        if (rep.verdict != PeriodicVerdict::periodic) continue;
        ProjPoint rep_node = *std::min_element(rep.orbit.nodes.begin(),
                                               rep.orbit.nodes.end());
        auto key = rep_node.key();
        if (seen_orbits.count(key)) continue;
        seen_orbits.emplace(key, out.size());
        auto orbit_nodes = rep.orbit.nodes;
        std::sort(orbit_nodes.begin(), orbit_nodes.end());
        out.push_back({std::move(rep_node), std::move(orbit_nodes)});
    }
    std::sort(out.begin(), out.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        return a.representative < b.representative;
    });
    return out;
}

// --- transition matrices and the eigenvector lemma --------------------------

struct TransitionMatrix {
    int n = 0;
    long k = 0;
    std::vector<std::vector<long>> a;  // a[i][j] >= 0, column sums == k

    void validate() const {
        if (n <= 0 || k <= 0 || static_cast<int>(a.size()) != n)
            throw DomainError("transition matrix: bad shape");
        for (int j = 0; j < n; ++j) {
            long s = 0;
            for (int i = 0; i < n; ++i) {
                if (a[i][j] < 0) throw DomainError("transition matrix: negative entry");
                s += a[i][j];
            }
            if (s != k) throw DomainError("transition matrix: column sum != k");
        }
    }

    static TransitionMatrix from_orbit(const OrbitReport& rep, int k) {
        if (rep.status != OrbitReport::Status::closed)
            throw DomainError("transition matrix needs a closed orbit");
        TransitionMatrix t;
        t.n = static_cast<int>(rep.nodes.size());
        t.k = k;
        t.a.assign(t.n, std::vector<long>(t.n, 0));
        for (const auto& e : rep.edges) ++t.a[e.to][e.from];
        return t;
    }
};

namespace detail {

// Unique eigenvector on a closed communicating class, per the lemma's proof:
// set the last coordinate to 1 and solve the complementary system exactly.
inline std::optional<RatVector> perron_by_elimination(
    const std::vector<std::vector<long>>& a, long k) {
    const int n = static_cast<int>(a.size());
    if (n == 1) return RatVector{Rat(1)};
    RatMatrix B(n - 1, RatVector(n - 1, Rat(0)));
    RatVector rhs(n - 1);
    for (int i = 0; i < n - 1; ++i) {
        for (int j = 0; j < n - 1; ++j)
            B[i][j] = (i == j) ? Rat(k - a[i][i]) : Rat(-a[i][j]);
        rhs[i] = Rat(a[i][n - 1]);
    }
    auto c = solve(B, rhs);
    if (!c) return std::nullopt;
    c->push_back(Rat(1));
    for (const auto& v : *c)
        if (v < 0) return std::nullopt;
    // verify A c = k c exactly
    for (int i = 0; i < n; ++i) {
        Rat s(0);
        for (int j = 0; j < n; ++j) s += Rat(a[i][j]) * (*c)[j];
        if (s != Rat(k) * (*c)[i]) return std::nullopt;
    }
    return c;
}

}  // namespace detail

// Nonnegative c != 0 with A c = k c, exact, normalized to sum 1. The
// elimination path follows the lemma's proof; if it fails (reducible A), fall
// back to closed communicating classes: solve each sink class and average the
// class vectors uniformly, which also fixes the deterministic choice when the
// nonnegative eigencone has dimension > 1.
inline RatVector perron_vector(const TransitionMatrix& t) {
    t.validate();
    auto normalize_sum = [](RatVector v) {
        Rat s(0);
        for (const auto& c : v) s += c;
        for (auto& c : v) c /= s;
        return v;
    };
    if (auto c = detail::perron_by_elimination(t.a, t.k)) return normalize_sum(*c);

    // communicating classes: edge j -> i when a[i][j] > 0
    std::vector<std::vector<int>> adj(t.n);
    for (int i = 0; i < t.n; ++i)
        for (int j = 0; j < t.n; ++j)
            if (t.a[i][j] > 0) adj[j].push_back(i);
    int ncomp = 0;
    auto comp = strongly_connected_components(adj, &ncomp);
    std::vector<bool> is_sink(ncomp, true);
    for (int v = 0; v < t.n; ++v)
        for (int w : adj[v])
            if (comp[w] != comp[v]) is_sink[comp[v]] = false;

    RatVector acc(t.n, Rat(0));
    int used = 0;
    for (int c = 0; c < ncomp; ++c) {
        if (!is_sink[c]) continue;
        std::vector<int> members;
        for (int v = 0; v < t.n; ++v)
            if (comp[v] == c) members.push_back(v);
        std::vector<std::vector<long>> sub(members.size(),
                                           std::vector<long>(members.size(), 0));
        for (size_t i = 0; i < members.size(); ++i)
            for (size_t j = 0; j < members.size(); ++j)
                sub[i][j] = t.a[members[i]][members[j]];
        auto cs = detail::perron_by_elimination(sub, t.k);
        if (!cs) {
            // last resort: nonnegative vector in the null space of (sub - kI)
            RatMatrix m(members.size(), RatVector(members.size(), Rat(0)));
            for (size_t i = 0; i < members.size(); ++i)
                for (size_t j = 0; j < members.size(); ++j)
                    m[i][j] = Rat(sub[i][j]) - (i == j ? Rat(t.k) : Rat(0));
            for (auto& v : null_space(m)) {
                bool nonneg = true, nonpos = true;
                for (const auto& e : v) {
                    if (e < 0) nonneg = false;
                    if (e > 0) nonpos = false;
                }
                if (nonpos)
                    for (auto& e : v) e = -e;
                if (nonneg || nonpos) {
                    cs = v;
                    break;
                }
            }
            if (!cs) throw DomainError("perron_vector: no nonnegative eigenvector found");
        }
        Rat s(0);
        for (const auto& e : *cs) s += e;
        for (size_t i = 0; i < members.size(); ++i) acc[members[i]] += (*cs)[i] / s;
        ++used;
    }
    if (used == 0) throw DomainError("perron_vector: no closed class");
    return normalize_sum(std::move(acc));
}

// --- Henon inequality margins ------------------------------------------------

struct HenonMarginReport {
    struct Bucket {
        double h_lo = 0, h_hi = 0;
        long count = 0;
        double min_margin = 0, mean_margin = 0;
    };
    std::vector<Bucket> buckets;
    double global_min = 0;
    double global_mean = 0;
    long sample_size = 0;
    long skipped = 0;
};

// margin(x) = h(phi x) + h(phi^{-1} x) - (5/2) h(x), bucketed by h(x).
inline HenonMarginReport henon_inequality_check(const HenonSystem& sys,
                                                const std::vector<ProjPoint>& sample,
                                                int bucket_count = 8) {
    HenonMarginReport rep;
    std::vector<std::pair<double, double>> pts;  // (h, margin)
    double hmax = 0;
    for (const auto& p : sample) {
        try {
            ProjPoint f = sys.apply(0, p);
            ProjPoint g = sys.apply(1, p);
            double h = sys.height(p);
            double m = sys.height(f) + sys.height(g) - 2.5 * h;
            pts.emplace_back(h, m);
            hmax = std::max(hmax, h);
        } catch (const EvalError&) {
            ++rep.skipped;
        }
    }
    rep.sample_size = static_cast<long>(pts.size());
    if (pts.empty()) return rep;
    rep.global_min = pts[0].second;
    double sum = 0;
    for (auto& [h, m] : pts) {
        rep.global_min = std::min(rep.global_min, m);
        sum += m;
    }
    rep.global_mean = sum / static_cast<double>(pts.size());
    double width = hmax > 0 ? hmax / bucket_count : 1.0;
    rep.buckets.assign(bucket_count, {});
    for (int b = 0; b < bucket_count; ++b) {
        rep.buckets[b].h_lo = b * width;
        rep.buckets[b].h_hi = (b + 1) * width;
    }
    for (auto& [h, m] : pts) {
        int b = std::min(bucket_count - 1, static_cast<int>(h / width));
        auto& bk = rep.buckets[b];
        if (bk.count == 0 || m < bk.min_margin) bk.min_margin = m;
        bk.mean_margin += m;
        ++bk.count;
    }
    for (auto& bk : rep.buckets)
        if (bk.count) bk.mean_margin /= static_cast<double>(bk.count);
    return rep;
}

// Deterministic sample of affine rational points with numerators and
// denominators bounded by `coord_bound`.
inline std::vector<ProjPoint> henon_sample(long count, long coord_bound,
                                           uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> num(-coord_bound, coord_bound);
    std::uniform_int_distribution<long> den(1, coord_bound);
    std::vector<ProjPoint> out;
    out.reserve(count);
    for (long i = 0; i < count; ++i) {
        Rat x(num(rng), den(rng)), y(num(rng), den(rng));
        x.canonicalize();
        y.canonicalize();
        out.push_back(HenonSystem::affine_point(x, y));
    }
    return out;
}

}  // namespace dynheight
