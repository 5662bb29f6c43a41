#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dynheight/enumerate.hpp"
#include "dynheight/projective.hpp"

using namespace dynheight;

namespace {

ProjPoint pt1(long a, long b) { return make_point({1}, {{Int(a), Int(b)}}); }

// independent oracle: brute-force double loop over integer pairs
long count_p1_points_bruteforce(long maxabs) {
    long count = 0;
    for (long a = -maxabs; a <= maxabs; ++a)
        for (long b = -maxabs; b <= maxabs; ++b) {
            if (a == 0 && b == 0) continue;
            Int g = gcd(Int(a), Int(b));
            if (g != 1) continue;
            long lead = a != 0 ? a : b;
            if (lead < 0) continue;
            ++count;
        }
    return count;
}

}  // namespace

TEST_CASE("normalize clears denominators, gcd and sign") {
    auto p = normalize({1}, {{Rat(2, 3), Rat(4, 3)}});
    REQUIRE(p == pt1(1, 2));

    auto q = normalize({1}, {{Rat(0), Rat(-5)}});
    REQUIRE(q == pt1(0, 1));

    auto r = normalize({2}, {{Rat(6), Rat(10), Rat(15)}});
    REQUIRE(r.coords[0] == std::vector<Int>{Int(6), Int(10), Int(15)});
}

TEST_CASE("normalize rejects the zero factor") {
    REQUIRE_THROWS_AS(normalize({1}, {{Rat(0), Rat(0)}}), DomainError);
}

TEST_CASE("normalize is idempotent and scale-invariant on random tuples") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> num(-50, 50), den(1, 30);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Rat> raw;
        bool nonzero = false;
        for (int i = 0; i < 3; ++i) {
            Rat r(num(rng), den(rng));
            r.canonicalize();
            if (r != 0) nonzero = true;
            raw.push_back(r);
        }
        if (!nonzero) continue;
        auto p = normalize({2}, {raw});
        // idempotent
        std::vector<Rat> again;
        for (const auto& c : p.coords[0]) again.emplace_back(c);
        REQUIRE(normalize({2}, {again}) == p);
        // invariant under scaling by nonzero c
        long cn = num(rng);
        Rat c(cn == 0 ? 1 : cn, den(rng));
        c.canonicalize();
        std::vector<Rat> scaled;
        for (const auto& r : raw) scaled.push_back(r * c);
        auto q = normalize({2}, {scaled});
        REQUIRE(q == p);
        REQUIRE(naive_height(q) == naive_height(p));
    }
}

TEST_CASE("naive height basics") {
    REQUIRE(naive_height(pt1(1, 1)) == 0.0);
    REQUIRE_THAT(naive_height(pt1(2, 3)),
                 Catch::Matchers::WithinAbs(std::log(3.0), 1e-15));
    auto p = make_point({1, 1}, {{Int(2), Int(3)}, {Int(1), Int(5)}});
    REQUIRE_THAT(naive_height(p),
                 Catch::Matchers::WithinAbs(std::log(3.0) + std::log(5.0), 1e-15));
    // zero exactly when every coordinate is -1, 0 or 1
    REQUIRE(naive_height(make_point({2}, {{Int(1), Int(-1), Int(0)}})) == 0.0);
}

TEST_CASE("local log norms") {
    REQUIRE(local_log_norm({Int(2), Int(1)}, Place::finite(Int(2))) == 0.0);
    REQUIRE_THAT(local_log_norm({Int(4), Int(6)}, Place::finite(Int(2))),
                 Catch::Matchers::WithinAbs(-std::log(2.0), 1e-15));
    REQUIRE_THAT(local_log_norm({Int(2), Int(3)}, Place::archimedean()),
                 Catch::Matchers::WithinAbs(std::log(3.0), 1e-15));
}

TEST_CASE("product formula: sum of local norms equals the naive height") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> coord(-400, 400);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Int> lift{Int(coord(rng)), Int(coord(rng)), Int(coord(rng))};
        if (lift[0] == 0 && lift[1] == 0 && lift[2] == 0) continue;
        // places: primes dividing any entry, plus infinity
        std::set<Int> primes;
        for (const auto& c : lift)
            if (c != 0)
                for (const auto& p : factor(c)) primes.insert(p);
        double total = local_log_norm(lift, Place::archimedean());
        for (const auto& p : primes) total += local_log_norm(lift, Place::finite(p));
        auto normed = make_point({2}, {lift});
        REQUIRE_THAT(total, Catch::Matchers::WithinAbs(naive_height(normed), 1e-12));
    }
}

TEST_CASE("exact product formula bookkeeping via prime factorization") {
    // max|x_i| of the normalized point equals the product over finite places
    // of p^{-min ord} times the archimedean max of the raw lift
    std::vector<Int> lift{Int(12), Int(30), Int(42)};  // content 6
    auto normed = make_point({2}, {lift});
    Int content = gcd(gcd(Int(12), Int(30)), Int(42));
    REQUIRE(content == 6);
    Int reconstructed(1);
    for (const auto& p : std::vector<Int>{Int(2), Int(3)}) {
        unsigned long mn = std::min({p_adic_valuation(Int(12), p),
                                     p_adic_valuation(Int(30), p),
                                     p_adic_valuation(Int(42), p)});
        Int pw;
        mpz_pow_ui(pw.get_mpz_t(), p.get_mpz_t(), mn);
        reconstructed *= pw;
    }
    REQUIRE(reconstructed == content);
    Int maxnorm(0);
    for (const auto& c : normed.coords[0]) maxnorm = std::max(maxnorm, Int(abs(c)));
    REQUIRE(maxnorm * content == 42);
}

TEST_CASE("enumerate_bounded P^1 at B = 0 and B = log 2") {
    auto pts0 = enumerate_bounded(1, 0.0);
    REQUIRE(pts0.size() == 4);
    std::vector<ProjPoint> expect0{pt1(0, 1), pt1(1, -1), pt1(1, 0), pt1(1, 1)};
    std::sort(expect0.begin(), expect0.end());
    auto sorted0 = pts0;
    std::sort(sorted0.begin(), sorted0.end());
    REQUIRE(sorted0 == expect0);

    auto pts1 = enumerate_bounded(1, std::log(2.0));
    REQUIRE(pts1.size() == 8);
    for (const auto& extra : {pt1(1, 2), pt1(1, -2), pt1(2, 1), pt1(2, -1)})
        REQUIRE(std::find(pts1.begin(), pts1.end(), extra) != pts1.end());
}

TEST_CASE("enumerate_bounded P^2 at B = 0 gives 13 points") {
    REQUIRE(enumerate_bounded(2, 0.0).size() == 13);
}

TEST_CASE("enumerate_bounded matches brute force for B = log 1 .. log 20") {
    for (long m = 1; m <= 20; ++m) {
        auto pts = enumerate_bounded(1, std::log(static_cast<double>(m)));
        REQUIRE(static_cast<long>(pts.size()) == count_p1_points_bruteforce(m));
        // emitted exactly once
        std::set<std::string> keys;
        for (const auto& p : pts) keys.insert(p.key());
        REQUIRE(keys.size() == pts.size());
        // all within the bound
        for (const auto& p : pts)
            REQUIRE(naive_height(p) <= std::log(static_cast<double>(m)) + 1e-12);
    }
}

TEST_CASE("enumeration order is deterministic: max-abs shells then lex") {
    auto pts = enumerate_bounded(1, std::log(3.0));
    for (size_t i = 1; i < pts.size(); ++i) {
        Int mprev(0), mcur(0);
        for (const auto& c : pts[i - 1].coords[0]) mprev = std::max(mprev, Int(abs(c)));
        for (const auto& c : pts[i].coords[0]) mcur = std::max(mcur, Int(abs(c)));
        REQUIRE(mprev <= mcur);
    }
}

TEST_CASE("point literal parsing") {
    REQUIRE(parse_point({1}, "(2:3)") == pt1(2, 3));
    REQUIRE(parse_point({1}, "(2/3:4/3)") == pt1(1, 2));
    auto p = parse_point({1, 1}, "((2:3),(1:5))");
    REQUIRE(p == make_point({1, 1}, {{Int(2), Int(3)}, {Int(1), Int(5)}}));
    // affine shorthand on P^2
    REQUIRE(parse_point({2}, "(1,2)") == make_point({2}, {{Int(1), Int(2), Int(1)}}));
    REQUIRE_THROWS_AS(parse_point({1}, "(1:2:3)"), DomainError);
}
