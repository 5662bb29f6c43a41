// Lattes maps on P^1: the duplication map of y^2 = x^3 + ax + b descended to
// the x-line. Degree 4, and x(2P) agrees with the group law on the curve.
#pragma once

#include "dynheight/polymap.hpp"

namespace dynheight {

// ((x^4 - 2a x^2 z^2 - 8b x z^3 + a^2 z^4) : (4x^3 z + 4a x z^3 + 4b z^4))
// for the curve y^2 = x^3 + ax + b; points (x:z) have affine value x/z.
inline PolyMapPN lattes_duplication(const Int& a, const Int& b) {
    if (4 * a * a * a + 27 * b * b == 0)
        throw DomainError("lattes_duplication: singular curve");
    PolyMapPN f;
    f.N = 1;
    f.degree = 4;
    std::vector<Monomial> num, den;
    num.push_back({Int(1), {4, 0}});
    if (a != 0) num.push_back({Int(-2) * a, {2, 2}});
    if (b != 0) num.push_back({Int(-8) * b, {1, 3}});
    if (a != 0) num.push_back({a * a, {0, 4}});
    den.push_back({Int(4), {3, 1}});
    if (a != 0) den.push_back({Int(4) * a, {1, 3}});
    if (b != 0) den.push_back({Int(4) * b, {0, 4}});
    f.polys.push_back(poly_from_terms(2, std::move(num)));
    f.polys.push_back(poly_from_terms(2, std::move(den)));
    return f;
}

// Exact group-law arithmetic on y^2 = x^3 + ax + b over Q: the independent
// oracle for the descended duplication map.
struct EllipticCurve {
    Int a, b;

    bool singular() const { return 4 * a * a * a + 27 * b * b == 0; }

    // Affine point or infinity.
    struct Point {
        bool infinity = true;
        Rat x, y;
    };

    bool on_curve(const Point& p) const {
        if (p.infinity) return true;
        return p.y * p.y == p.x * p.x * p.x + Rat(a) * p.x + Rat(b);
    }

    Point double_point(const Point& p) const {
        if (p.infinity) return p;
        if (p.y == 0) return Point{};  // 2-torsion
        Rat lam = (Rat(3) * p.x * p.x + Rat(a)) / (Rat(2) * p.y);
        Rat x3 = lam * lam - Rat(2) * p.x;
        Rat y3 = lam * (p.x - x3) - p.y;
        return Point{false, x3, y3};
    }

    Point add(const Point& p, const Point& q) const {
        if (p.infinity) return q;
        if (q.infinity) return p;
        if (p.x == q.x) {
            if (p.y == -q.y) return Point{};
            return double_point(p);
        }
        Rat lam = (q.y - p.y) / (q.x - p.x);
        Rat x3 = lam * lam - p.x - q.x;
        Rat y3 = lam * (p.x - x3) - p.y;
        return Point{false, x3, y3};
    }

    // Lift an x-coordinate to the curve over some quadratic extension; for
    // the oracle we only use x-coordinates that lift over Q.
    std::optional<Point> lift_x(const Rat& x) const {
        Rat rhs = x * x * x + Rat(a) * x + Rat(b);
        if (rhs < 0) return std::nullopt;
        // exact square root test
        Int num = rhs.get_num(), den = rhs.get_den();
        Int rn, rd;
        if (!mpz_perfect_square_p(num.get_mpz_t()) ||
            !mpz_perfect_square_p(den.get_mpz_t()))
            return std::nullopt;
        mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
        mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
        return Point{false, x, Rat(rn, rd)};
    }
};

}  // namespace dynheight
