// K3 surfaces with double-cover involutions:
//   - tridegree (2,2,2) hypersurfaces in P^1 x P^1 x P^1 (three involutions),
//   - intersections of bidegree forms in P^2 x P^2 (Wheler-type, bidegrees
//     (1,1)&(2,2), and the (1,2)&(2,1) variant), two involutions.
// Every involution reduces to the residual-root (Vieta) step on a binary
// quadratic, performed exactly over Z.
//
// Convention: a P^1 point (c0:c1) has affine value c0/c1.
#pragma once

#include <array>
#include <random>

#include "dynheight/system.hpp"

namespace dynheight {

// Second root of A u^2 + B uv + C v^2 given the root (u0:v0).
// Uses the root-sum identity, which stays valid when u0 = 0; a double root
// returns the input (fixed point of the cover involution).
inline std::pair<Int, Int> k3_involution_step(const Int& A, const Int& B,
                                              const Int& C, const Int& u0,
                                              const Int& v0) {
    if (A == 0 && B == 0 && C == 0)
        throw DegenerateFiberError("binary quadratic vanishes identically");
    if (A * u0 * u0 + B * u0 * v0 + C * v0 * v0 != 0)
        throw OffSurfaceError("(u0:v0) is not a root of the form");
    if (v0 == 0) {
        // root at infinity forces A = 0
        if (B != 0) return {-C, B};
        return {u0, v0};  // C v^2: double root at (1:0)
    }
    if (A != 0) return {-(B * v0 + A * u0), A * v0};
    if (B != 0) return {Int(1), Int(0)};
    throw DegenerateFiberError("binary quadratic vanishes identically");
}

namespace k3detail {

// Quadratic monomials x_i x_j on P^2, ordered (00,01,02,11,12,22).
inline constexpr std::array<std::pair<int, int>, 6> kQuadMono = {
    {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

inline Int eval_quad(const std::array<Int, 6>& q, const std::vector<Int>& y) {
    Int s(0);
    for (int m = 0; m < 6; ++m)
        s += q[m] * y[kQuadMono[m].first] * y[kQuadMono[m].second];
    return s;
}

// Integer basis of the line L.y = 0 in P^2.
inline std::pair<std::vector<Int>, std::vector<Int>> line_basis(
    const std::array<Int, 3>& L) {
    if (L[0] != 0)
        return {{-L[1], L[0], Int(0)}, {-L[2], Int(0), L[0]}};
    if (L[1] != 0)
        return {{Int(1), Int(0), Int(0)}, {Int(0), -L[2], L[1]}};
    if (L[2] != 0)
        return {{Int(1), Int(0), Int(0)}, {Int(0), Int(1), Int(0)}};
    throw DegenerateFiberError("fiber line degenerates: linear form vanishes");
}

// Coordinates (u:v) of y in the basis e1,e2 of its line.
inline std::pair<Int, Int> on_line_coords(const std::vector<Int>& y,
                                          const std::vector<Int>& e1,
                                          const std::vector<Int>& e2) {
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s) {
            if (r == s) continue;
            Int det = e1[r] * e2[s] - e1[s] * e2[r];
            if (det != 0) {
                Int u = y[r] * e2[s] - y[s] * e2[r];
                Int v = e1[r] * y[s] - e1[s] * y[r];
                // consistency: y must equal (u e1 + v e2)/det projectively
                return {u, v};
            }
        }
    throw DegenerateFiberError("line basis vectors dependent");
}

// Residual intersection of the line (basis e1,e2) with the conic q through
// y; returns the normalized other point.
inline std::vector<Int> residual_on_line(const std::array<Int, 6>& q,
                                         const std::vector<Int>& e1,
                                         const std::vector<Int>& e2,
                                         const std::vector<Int>& y) {
    Int A = eval_quad(q, e1);
    Int C = eval_quad(q, e2);
    std::vector<Int> e12{e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]};
    Int B = eval_quad(q, e12) - A - C;
    auto [u0, v0] = on_line_coords(y, e1, e2);
    auto [u1, v1] = k3_involution_step(A, B, C, u0, v0);
    std::vector<Int> out{u1 * e1[0] + v1 * e2[0], u1 * e1[1] + v1 * e2[1],
                         u1 * e1[2] + v1 * e2[2]};
    normalize_factor(out);
    return out;
}

}  // namespace k3detail

// --- (2,2,2) hypersurface in (P^1)^3 ---------------------------------------

class K3TrilinearSystem : public System {
  public:
    // q[i][j][k] = coefficient of x0^i x1^{2-i} y0^j y1^{2-j} z0^k z1^{2-k}.
    using Coeffs = std::array<std::array<std::array<Int, 3>, 3>, 3>;

    explicit K3TrilinearSystem(Coeffs q, std::string name = "k3_222")
        : q_(std::move(q)), name_(std::move(name)) {}

    // The affine surface x(1-x)+y(1-y)+z(1-z)-xyz = 0, tri-homogenized.
    static K3TrilinearSystem example_surface() {
        Coeffs q{};
        q[1][0][0] = 1;
        q[2][0][0] = -1;
        q[0][1][0] = 1;
        q[0][2][0] = -1;
        q[0][0][1] = 1;
        q[0][0][2] = -1;
        q[1][1][1] = -1;
        return K3TrilinearSystem(std::move(q), "k3_222_example");
    }

    int map_count() const override { return 3; }
    double degree() const override { return 5.0; }
    SpaceDesc space() const override { return {1, 1, 1}; }
    std::string name() const override { return name_; }
    const Coeffs& coeffs() const { return q_; }

    Int form_value(const ProjPoint& p) const {
        Int s(0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) {
                    if (q_[i][j][k] == 0) continue;
                    s += q_[i][j][k] * mono(p.coords[0], i) * mono(p.coords[1], j) *
                         mono(p.coords[2], k);
                }
        return s;
    }

    bool on_surface(const ProjPoint& p) const { return form_value(p) == 0; }

    // sigma_i: other root of Q as a binary quadratic in factor i.
    ProjPoint apply(int i, const ProjPoint& x) const override {
        if (!on_surface(x))
            throw OffSurfaceError(name_ + ": point off surface: " + x.key());
        return apply_trusted(i, x);
    }

    // The involution step itself verifies the input is a root of the
    // restricted quadratic, which is exactly surface membership here.
    ProjPoint apply_trusted(int i, const ProjPoint& x) const override {
        Int A = restricted_coeff(x, i, 2);
        Int B = restricted_coeff(x, i, 1);
        Int C = restricted_coeff(x, i, 0);
        const auto& f = x.coords[i];
        auto [u1, v1] = k3_involution_step(A, B, C, f[0], f[1]);
        auto coords = x.coords;
        coords[i] = {u1, v1};
        return make_point(space(), std::move(coords));
    }

  private:
    static Int mono(const std::vector<Int>& c, int i) {
        // c0^i * c1^{2-i}
        Int r(1);
        for (int t = 0; t < i; ++t) r *= c[0];
        for (int t = 0; t < 2 - i; ++t) r *= c[1];
        return r;
    }

    // Coefficient of (factor f)_0^e (factor f)_1^{2-e} after substituting the
    // other two factors of x.
    Int restricted_coeff(const ProjPoint& x, int f, int e) const {
        Int s(0);
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                int idx[3];
                idx[f] = e;
                int o1 = (f + 1) % 3, o2 = (f + 2) % 3;
                idx[o1] = j;
                idx[o2] = k;
                const Int& c = q_[idx[0]][idx[1]][idx[2]];
                if (c == 0) continue;
                s += c * mono(x.coords[o1], j) * mono(x.coords[o2], k);
            }
        return s;
    }

    Coeffs q_;
    std::string name_;
};

// --- double covers in P^2 x P^2 ---------------------------------------------

// Bihomogeneous form on P^2 x P^2 of bidegree (dx,dy) with dx,dy in {1,2}.
struct BiForm {
    int dx = 1, dy = 1;
    // coeffs[mx][my]: mx runs over x-monomials (3 if deg 1, 6 if deg 2), my
    // likewise for y.
    std::vector<std::vector<Int>> coeffs;

    static int mono_count(int d) { return d == 1 ? 3 : 6; }

    Int eval(const std::vector<Int>& x, const std::vector<Int>& y) const {
        Int s(0);
        for (int mx = 0; mx < mono_count(dx); ++mx)
            for (int my = 0; my < mono_count(dy); ++my) {
                if (coeffs[mx][my] == 0) continue;
                s += coeffs[mx][my] * mono(x, dx, mx) * mono(y, dy, my);
            }
        return s;
    }

    static Int mono(const std::vector<Int>& v, int d, int m) {
        if (d == 1) return v[m];
        auto [i, j] = k3detail::kQuadMono[m];
        return v[i] * v[j];
    }

    // Substitute the x side; returns coefficients of the resulting form in y
    // (3 entries if dy==1, 6 if dy==2).
    std::vector<Int> restrict_x(const std::vector<Int>& x) const {
        std::vector<Int> out(mono_count(dy), Int(0));
        for (int mx = 0; mx < mono_count(dx); ++mx) {
            Int xm = mono(x, dx, mx);
            if (xm == 0) continue;
            for (int my = 0; my < mono_count(dy); ++my) out[my] += coeffs[mx][my] * xm;
        }
        return out;
    }

    std::vector<Int> restrict_y(const std::vector<Int>& y) const {
        std::vector<Int> out(mono_count(dx), Int(0));
        for (int my = 0; my < mono_count(dy); ++my) {
            Int ym = mono(y, dy, my);
            if (ym == 0) continue;
            for (int mx = 0; mx < mono_count(dx); ++mx) out[mx] += coeffs[mx][my] * ym;
        }
        return out;
    }
};

// S in P^2 x P^2 cut out by two biforms whose restrictions to each fiber
// direction give a line and a conic. Covers Wheler surfaces ((1,1)&(2,2),
// d=4) and the (1,2)&(2,1) variant (d=5); k=2 either way.
class K3DoubleCoverSystem : public System {
  public:
    K3DoubleCoverSystem(BiForm f, BiForm g, double degree_d,
                        std::vector<double> weights = {1.0, 1.0},
                        std::string name = "k3_wheeler")
        : f_(std::move(f)), g_(std::move(g)), d_(degree_d),
          weights_(std::move(weights)), name_(std::move(name)) {
        auto check_pair = [](int a, int b) { return (a == 1 && b == 2) || (a == 2 && b == 1); };
        if (!check_pair(f_.dy, g_.dy) || !check_pair(f_.dx, g_.dx))
            throw DomainError("k3 cover: need a line/conic pair in each direction");
    }

    int map_count() const override { return 2; }
    double degree() const override { return d_; }
    SpaceDesc space() const override { return {2, 2}; }
    std::vector<double> height_weights() const override { return weights_; }
    std::string name() const override { return name_; }
    const BiForm& form1() const { return f_; }
    const BiForm& form2() const { return g_; }

    bool on_surface(const ProjPoint& p) const {
        return f_.eval(p.coords[0], p.coords[1]) == 0 &&
               g_.eval(p.coords[0], p.coords[1]) == 0;
    }

    // map 0 = sigma_1 (fixes x, moves y), map 1 = sigma_2 (fixes y, moves x)
    ProjPoint apply(int i, const ProjPoint& p) const override {
        if (!on_surface(p))
            throw OffSurfaceError(name_ + ": point off surface: " + p.key());
        return apply_trusted(i, p);
    }

    // Skips the full surface check; the line membership and conic root
    // checks inside the step still validate consistency cheaply.
    ProjPoint apply_trusted(int i, const ProjPoint& p) const override {
        const auto& x = p.coords[0];
        const auto& y = p.coords[1];
        std::vector<Int> lin, quad;
        if (i == 0) {
            lin = (f_.dy == 1) ? f_.restrict_x(x) : g_.restrict_x(x);
            quad = (f_.dy == 2) ? f_.restrict_x(x) : g_.restrict_x(x);
        } else {
            lin = (f_.dx == 1) ? f_.restrict_y(y) : g_.restrict_y(y);
            quad = (f_.dx == 2) ? f_.restrict_y(y) : g_.restrict_y(y);
        }
        std::array<Int, 3> L{lin[0], lin[1], lin[2]};
        std::array<Int, 6> Q{quad[0], quad[1], quad[2], quad[3], quad[4], quad[5]};
        const auto& moving = i == 0 ? y : x;
        if (L[0] * moving[0] + L[1] * moving[1] + L[2] * moving[2] != 0)
            throw OffSurfaceError(name_ + ": point off fiber line: " + p.key());
        auto [e1, e2] = k3detail::line_basis(L);
        std::vector<Int> moved = k3detail::residual_on_line(Q, e1, e2, moving);
        auto coords = p.coords;
        coords[i == 0 ? 1 : 0] = std::move(moved);
        return make_point(space(), std::move(coords));
    }

    K3DoubleCoverSystem with_weights(std::vector<double> w, std::string nm) const {
        return K3DoubleCoverSystem(f_, g_, d_, std::move(w), std::move(nm));
    }

  private:
    BiForm f_, g_;
    double d_;
    std::vector<double> weights_;
    std::string name_;
};

// k=1 view applying a fixed word of another system's maps (for Silverman's
// one-map heights on Wheler surfaces). Degree and weights are the caller's:
// they encode the eigen-divisor data.
class CompositeSystem : public System {
  public:
    CompositeSystem(SystemPtr base, std::vector<int> word, double degree_d,
                    std::vector<double> weights, std::string name)
        : base_(std::move(base)), word_(std::move(word)), d_(degree_d),
          weights_(std::move(weights)), name_(std::move(name)) {}

    int map_count() const override { return 1; }
    double degree() const override { return d_; }
    SpaceDesc space() const override { return base_->space(); }
    std::vector<double> height_weights() const override { return weights_; }
    std::string name() const override { return name_; }

    ProjPoint apply(int, const ProjPoint& x) const override {
        ProjPoint p = x;
        bool first = true;
        for (int i : word_) {
            p = first ? base_->apply(i, p) : base_->apply_trusted(i, p);
            first = false;
        }
        return p;
    }

    ProjPoint apply_trusted(int, const ProjPoint& x) const override {
        ProjPoint p = x;
        for (int i : word_) p = base_->apply_trusted(i, p);
        return p;
    }

  private:
    SystemPtr base_;
    std::vector<int> word_;
    double d_;
    std::vector<double> weights_;
    std::string name_;
};

// Random Wheler surface through a given point: small random coefficients,
// one coefficient of each form adjusted (after integer scaling) so both
// forms vanish at the point; retries until both involutions are defined and
// act nontrivially there.
inline K3DoubleCoverSystem build_wheeler_through(const ProjPoint& pt,
                                                 uint64_t seed,
                                                 int coeff_range = 3,
                                                 int max_attempts = 200) {
    if (pt.space != SpaceDesc{2, 2})
        throw DomainError("build_wheeler_through: point must lie in P^2 x P^2");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(-coeff_range, coeff_range);
    const auto& x = pt.coords[0];
    const auto& y = pt.coords[1];
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        BiForm f11;
        f11.dx = f11.dy = 1;
        f11.coeffs.assign(3, std::vector<Int>(3));
        for (auto& row : f11.coeffs)
            for (auto& c : row) c = dist(rng);
        BiForm f22;
        f22.dx = f22.dy = 2;
        f22.coeffs.assign(6, std::vector<Int>(6));
        for (auto& row : f22.coeffs)
            for (auto& c : row) c = dist(rng);

        auto pin = [](BiForm& F, const std::vector<Int>& xv,
                      const std::vector<Int>& yv) -> bool {
            Int v = F.eval(xv, yv);
            for (int mx = 0; mx < BiForm::mono_count(F.dx); ++mx)
                for (int my = 0; my < BiForm::mono_count(F.dy); ++my) {
                    Int m = BiForm::mono(xv, F.dx, mx) * BiForm::mono(yv, F.dy, my);
                    if (m == 0) continue;
                    for (auto& row : F.coeffs)
                        for (auto& c : row) c *= m;
                    F.coeffs[mx][my] -= v;
                    return true;
                }
            return false;
        };
        if (!pin(f11, x, y) || !pin(f22, x, y)) continue;

        K3DoubleCoverSystem sys(std::move(f11), std::move(f22), 4.0, {1.0, 1.0},
                                "wheeler_seed" + std::to_string(seed));
        try {
            ProjPoint p1 = sys.apply(0, pt);
            ProjPoint p2 = sys.apply(1, pt);
            if (p1 == pt || p2 == pt) continue;
            if (!(sys.apply(0, p1) == pt) || !(sys.apply(1, p2) == pt)) continue;
        } catch (const EvalError&) {
            continue;
        }
        return sys;
    }
    throw DomainError("build_wheeler_through: retry cap exceeded");
}

}  // namespace dynheight
