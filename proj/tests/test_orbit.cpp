#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dynheight/canonical.hpp"
#include "dynheight/orbit.hpp"

using namespace dynheight;

namespace {

SystemPtr squaring() {
    return std::make_shared<PolyPNSystem>(1, std::vector<PolyMapPN>{power_map(1, 2)},
                                          "squaring");
}

SystemPtr swap_square() {
    auto f = power_map(1, 2);
    PolyMapPN g;
    g.N = 1;
    g.degree = 2;
    g.polys.push_back(poly_from_terms(2, {{Int(1), {0, 2}}}));
    g.polys.push_back(poly_from_terms(2, {{Int(1), {2, 0}}}));
    return std::make_shared<PolyPNSystem>(1, std::vector<PolyMapPN>{f, g}, "swap_square");
}

ProjPoint p1(long a, long b) { return make_point({1}, {{Int(a), Int(b)}}); }

ProjPoint aff222(long x, long y, long z) {
    return make_point({1, 1, 1}, {{Int(x), Int(1)}, {Int(y), Int(1)}, {Int(z), Int(1)}});
}

// brute-force closure oracle: set-quantified F-periodicity condition (3)
bool no_proper_closed_suborbit(const OrbitReport& rep, int k) {
    const int n = static_cast<int>(rep.nodes.size());
    if (n > 20) throw std::runtime_error("oracle only for small orbits");
    auto adj = rep.adjacency();
    for (long mask = 1; mask < (1L << n) - 1; ++mask) {
        bool closed = true;
        for (int v = 0; v < n && closed; ++v) {
            if (!(mask >> v & 1)) continue;
            for (int w : adj[v])
                if (!(mask >> w & 1)) closed = false;
        }
        if (closed) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("forward orbit of a fixed point") {
    auto rep = forward_orbit(*squaring(), p1(1, 1), 100);
    REQUIRE(rep.status == OrbitReport::Status::closed);
    REQUIRE(rep.nodes.size() == 1);
    REQUIRE(rep.edges.size() == 1);
}

TEST_CASE("forward orbit of the (2,2,2) example at (0,0,0): the 7 points") {
    auto sys = K3TrilinearSystem::example_surface();
    auto rep = forward_orbit(sys, aff222(0, 0, 0), 1000);
    REQUIRE(rep.status == OrbitReport::Status::closed);
    REQUIRE(rep.nodes.size() == 7);
    std::set<std::string> keys;
    for (const auto& n : rep.nodes) keys.insert(n.key());
    for (auto [x, y, z] : std::vector<std::array<long, 3>>{{0, 0, 0},
                                                           {1, 0, 0},
                                                           {0, 1, 0},
                                                           {0, 0, 1},
                                                           {1, 1, 0},
                                                           {1, 0, 1},
                                                           {0, 1, 1}})
        REQUIRE(keys.count(aff222(x, y, z).key()) == 1);
    // closed orbit: every node has exactly k out-edges into the node set
    REQUIRE(rep.edges.size() == 7 * 3);
}

TEST_CASE("growing orbits exceed the budget") {
    auto rep = forward_orbit(*squaring(), p1(2, 1), 50);
    REQUIRE(rep.status == OrbitReport::Status::budget_exceeded);
}

TEST_CASE("F-periodicity verdicts for the squaring map") {
    REQUIRE(is_f_periodic(*squaring(), p1(1, 1), 100).verdict ==
            PeriodicVerdict::periodic);
    REQUIRE(is_f_periodic(*squaring(), p1(0, 1), 100).verdict ==
            PeriodicVerdict::periodic);
    auto rep = is_f_periodic(*squaring(), p1(1, -1), 100);
    REQUIRE(rep.verdict == PeriodicVerdict::not_periodic);
    REQUIRE(rep.witness_suborbit.size() == 1);
    REQUIRE(rep.witness_suborbit[0] == p1(1, 1));
    REQUIRE(is_f_periodic(*squaring(), p1(2, 1), 100).verdict ==
            PeriodicVerdict::budget_exceeded);
}

TEST_CASE("K3 example orbit is F-periodic (involutions reverse every edge)") {
    auto sys = K3TrilinearSystem::example_surface();
    auto rep = is_f_periodic(sys, aff222(0, 0, 0), 1000);
    REQUIRE(rep.verdict == PeriodicVerdict::periodic);
    REQUIRE(no_proper_closed_suborbit(rep.orbit, 3));
}

TEST_CASE("SCC verdict agrees with the set-quantified oracle on swap-square") {
    auto sys = swap_square();
    for (long a = -4; a <= 4; ++a)
        for (long b = 0; b <= 4; ++b) {
            if (a == 0 && b == 0) continue;
            auto rep = is_f_periodic(*sys, p1(a, b), 200);
            if (rep.verdict == PeriodicVerdict::budget_exceeded) continue;
            bool oracle = no_proper_closed_suborbit(rep.orbit, 2);
            REQUIRE((rep.verdict == PeriodicVerdict::periodic) == oracle);
            if (rep.verdict == PeriodicVerdict::not_periodic)
                REQUIRE_FALSE(rep.witness_suborbit.empty());
        }
}

TEST_CASE("periodic implies every orbit member is periodic with the same orbit") {
    auto sys = swap_square();
    auto rep = is_f_periodic(*sys, p1(0, 1), 100);
    REQUIRE(rep.verdict == PeriodicVerdict::periodic);
    for (const auto& y : rep.orbit.nodes) {
        auto rep_y = is_f_periodic(*sys, y, 100);
        REQUIRE(rep_y.verdict == PeriodicVerdict::periodic);
        auto a = rep.orbit.nodes, b = rep_y.orbit.nodes;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        REQUIRE(a == b);
    }
}

TEST_CASE("find_periodic_points for the squaring map") {
    auto sys = squaring();
    auto found0 = find_periodic_points(*sys, 0.0, 100);
    REQUIRE(found0.size() == 3);
    std::vector<std::string> reps;
    for (const auto& o : found0) reps.push_back(o.representative.key());
    REQUIRE(std::find(reps.begin(), reps.end(), p1(0, 1).key()) != reps.end());
    REQUIRE(std::find(reps.begin(), reps.end(), p1(1, 0).key()) != reps.end());
    REQUIRE(std::find(reps.begin(), reps.end(), p1(1, 1).key()) != reps.end());

    auto found5 = find_periodic_points(*sys, std::log(5.0), 100);
    REQUIRE(found5.size() == 3);  // no new rational periodic points up to height log 5
}

TEST_CASE("find_periodic_points is monotone in the bound") {
    auto sys = swap_square();
    auto small = find_periodic_points(*sys, 0.0, 200);
    auto large = find_periodic_points(*sys, std::log(3.0), 200);
    std::set<std::string> large_keys;
    for (const auto& o : large) large_keys.insert(o.representative.key());
    for (const auto& o : small) REQUIRE(large_keys.count(o.representative.key()) == 1);
}

TEST_CASE("closed orbit implies canonical height zero") {
    auto sys = swap_square();
    EngineOptions opts;
    CanonicalEngine eng(sys, opts);
    for (const auto& o : find_periodic_points(*sys, std::log(2.0), 200))
        for (const auto& y : o.orbit) {
            auto est = eng.height(y);
            REQUIRE(est.value == 0.0);
            REQUIRE(est.error_radius == 0.0);
        }
}

// --- perron vectors ---------------------------------------------------------

namespace {

TransitionMatrix random_transition(std::mt19937_64& rng, int n, long k) {
    std::uniform_int_distribution<int> row(0, n - 1);
    TransitionMatrix t;
    t.n = n;
    t.k = k;
    t.a.assign(n, std::vector<long>(n, 0));
    for (int j = 0; j < n; ++j)
        for (long c = 0; c < k; ++c) ++t.a[row(rng)][j];
    return t;
}

std::vector<double> power_iteration(const TransitionMatrix& t, int iters = 20000) {
    std::vector<double> v(t.n, 1.0 / t.n), w(t.n);
    for (int it = 0; it < iters; ++it) {
        for (int i = 0; i < t.n; ++i) {
            double s = 0;
            for (int j = 0; j < t.n; ++j) s += t.a[i][j] * v[j];
            w[i] = s;
        }
        double total = 0;
        for (double x : w) total += std::fabs(x);
        for (int i = 0; i < t.n; ++i) v[i] = w[i] / total;
    }
    return v;
}

}  // namespace

TEST_CASE("perron examples") {
    TransitionMatrix id2{2, 3, {{3, 0}, {0, 3}}};
    auto c = perron_vector(id2);
    REQUIRE(c == RatVector{Rat(1, 2), Rat(1, 2)});

    TransitionMatrix swap2{2, 4, {{0, 4}, {4, 0}}};
    auto c2 = perron_vector(swap2);
    REQUIRE(c2 == RatVector{Rat(1, 2), Rat(1, 2)});
}

TEST_CASE("perron vector: exact eigen equation on 1000 random matrices") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> nd(1, 8);
    std::uniform_int_distribution<long> kd(1, 5);
    for (int trial = 0; trial < 1000; ++trial) {
        auto t = random_transition(rng, nd(rng), kd(rng));
        auto c = perron_vector(t);
        Rat sum(0);
        bool nonneg = true;
        for (const auto& x : c) {
            sum += x;
            if (x < 0) nonneg = false;
        }
        REQUIRE(nonneg);
        REQUIRE(sum == 1);
        auto rm = RatMatrix(t.n, RatVector(t.n));
        for (int i = 0; i < t.n; ++i)
            for (int j = 0; j < t.n; ++j) rm[i][j] = Rat(t.a[i][j]);
        auto Ac = mat_vec(rm, c);
        for (int i = 0; i < t.n; ++i) REQUIRE(Ac[i] == Rat(t.k) * c[i]);
    }
}

TEST_CASE("perron vector matches power iteration for strictly positive matrices") {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> nd(2, 4);
    for (int trial = 0; trial < 50; ++trial) {
        int n = nd(rng);
        // strictly positive with column sums k = 2n
        TransitionMatrix t;
        t.n = n;
        t.k = 2 * n;
        t.a.assign(n, std::vector<long>(n, 1));
        std::uniform_int_distribution<int> row(0, n - 1);
        for (int j = 0; j < n; ++j)
            for (int c = 0; c < n; ++c) ++t.a[row(rng)][j];
        auto c = perron_vector(t);
        auto approx = power_iteration(t);
        for (int i = 0; i < n; ++i)
            REQUIRE_THAT(c[i].get_d(), Catch::Matchers::WithinAbs(approx[i], 1e-8));
    }
}

TEST_CASE("transition matrix from the K3 example orbit") {
    auto sys = K3TrilinearSystem::example_surface();
    auto rep = forward_orbit(sys, aff222(0, 0, 0), 1000);
    auto t = TransitionMatrix::from_orbit(rep, 3);
    t.validate();
    auto c = perron_vector(t);
    REQUIRE(c.size() == 7);
}

// --- henon margins -----------------------------------------------------------

TEST_CASE("henon margin at specific points") {
    HenonSystem sys(Rat(1), Rat(0));
    auto rep0 = henon_inequality_check(sys, {HenonSystem::affine_point(Rat(0), Rat(0))});
    REQUIRE_THAT(rep0.global_min, Catch::Matchers::WithinAbs(0.0, 1e-15));

    auto rep1 = henon_inequality_check(sys, {HenonSystem::affine_point(Rat(1), Rat(2))});
    double expect = std::log(5.0) - 2.5 * std::log(2.0);
    REQUIRE_THAT(rep1.global_min, Catch::Matchers::WithinAbs(expect, 1e-12));
}

TEST_CASE("henon margins over a large sample have no downward trend") {
    HenonSystem sys(Rat(1), Rat(0));
    auto sample = henon_sample(10000, 100, 7);
    auto rep = henon_inequality_check(sys, sample);
    REQUIRE(rep.sample_size + rep.skipped == 10000);
    REQUIRE(rep.global_min > -std::numeric_limits<double>::infinity());
    // the top bucket's minimum is no worse than the global minimum
    const auto& top = rep.buckets.back();
    if (top.count > 0) REQUIRE(top.min_margin >= rep.global_min - 1e-12);
}
