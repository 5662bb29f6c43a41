// Points of products of projective spaces over Q in canonical integer
// coordinates, places of Q, and the logarithmic naive height.
//
// Canonical representative per factor: coprime integers, first nonzero
// coordinate positive. This makes points hashable and orbit sets exact.
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dynheight/bigint.hpp"

namespace dynheight {

// Dimensions N_1,...,N_m of the factors of P^{N_1} x ... x P^{N_m}.
using SpaceDesc = std::vector<int>;

inline std::string space_to_string(const SpaceDesc& s) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += " x ";
        out += "P^" + std::to_string(s[i]);
    }
    return out;
}

struct ProjPoint {
    SpaceDesc space;
    std::vector<std::vector<Int>> coords;  // coords[j].size() == space[j]+1

    bool operator==(const ProjPoint& o) const {
        return space == o.space && coords == o.coords;
    }
    bool operator<(const ProjPoint& o) const {
        if (space != o.space) return space < o.space;
        for (size_t j = 0; j < coords.size(); ++j)
            for (size_t i = 0; i < coords[j].size(); ++i) {
                int c = cmp(coords[j][i], o.coords[j][i]);
                if (c != 0) return c < 0;
            }
        return false;
    }

    // Stable text key, also used for hashing and orbit dedup.
    std::string key() const {
        std::string s;
        for (const auto& f : coords) {
            s += '(';
            for (size_t i = 0; i < f.size(); ++i) {
                if (i) s += ':';
                s += f[i].get_str();
            }
            s += ')';
        }
        return s;
    }
};

struct ProjPointHash {
    size_t operator()(const ProjPoint& p) const {
        return std::hash<std::string>{}(p.key());
    }
};

// Canonicalize one factor in place: divide by gcd, fix sign.
inline void normalize_factor(std::vector<Int>& v) {
    Int g(0);
    for (const auto& c : v) g = gcd(g, c);
    if (g == 0) throw DomainError("degenerate point: all coordinates zero in a factor");
    for (auto& c : v) c /= g;
    for (const auto& c : v) {
        if (c != 0) {
            if (c < 0)
                for (auto& d : v) d = -d;
            break;
        }
    }
}

// Canonical representative from integer lifts.
inline ProjPoint make_point(SpaceDesc space, std::vector<std::vector<Int>> coords) {
    if (coords.size() != space.size()) throw DomainError("factor count mismatch");
    for (size_t j = 0; j < coords.size(); ++j) {
        if (static_cast<int>(coords[j].size()) != space[j] + 1)
            throw DomainError("coordinate count mismatch in factor " + std::to_string(j));
        normalize_factor(coords[j]);
    }
    return ProjPoint{std::move(space), std::move(coords)};
}

// Canonical representative from rational tuples (clears denominators).
inline ProjPoint normalize(const SpaceDesc& space,
                           const std::vector<std::vector<Rat>>& raw) {
    std::vector<std::vector<Int>> coords;
    coords.reserve(raw.size());
    for (const auto& f : raw) {
        Int den(1);
        for (const auto& r : f) den = lcm(den, r.get_den());
        std::vector<Int> v;
        v.reserve(f.size());
        for (const auto& r : f) v.push_back(Int(r.get_num() * (den / r.get_den())));
        coords.push_back(std::move(v));
    }
    return make_point(space, std::move(coords));
}

struct Place {
    // p == 0 encodes the archimedean place.
    Int p;

    static Place archimedean() { return Place{Int(0)}; }
    static Place finite(Int prime) {
        if (!is_probable_prime(prime)) throw DomainError("place: p must be prime");
        return Place{std::move(prime)};
    }
    bool is_archimedean() const { return p == 0; }
    bool operator<(const Place& o) const { return cmp(p, o.p) < 0; }
    bool operator==(const Place& o) const { return p == o.p; }
    std::string to_string() const { return is_archimedean() ? "inf" : p.get_str(); }
};

// log max_i |x_i|_v for an integer lift of a single factor.
// At a finite place this is -(min_i ord_p x_i) * log p.
inline double local_log_norm(const std::vector<Int>& lift, const Place& v) {
    bool all_zero = std::all_of(lift.begin(), lift.end(),
                                [](const Int& c) { return c == 0; });
    if (all_zero) throw DomainError("local_log_norm: zero lift");
    if (v.is_archimedean()) {
        Int m(0);
        for (const auto& c : lift) {
            Int a = abs(c);
            if (a > m) m = a;
        }
        return log_abs(m);
    }
    unsigned long min_ord = std::numeric_limits<unsigned long>::max();
    for (const auto& c : lift) {
        if (c == 0) continue;
        min_ord = std::min(min_ord, p_adic_valuation(c, v.p));
        if (min_ord == 0) break;
    }
    if (min_ord == 0) return 0.0;
    return -static_cast<double>(min_ord) * log_abs(v.p);
}

// Logarithmic naive height of a canonical point: over Q with coprime
// coordinates all finite-place terms vanish, leaving the archimedean max
// per factor.
inline double naive_height(const ProjPoint& x) {
    double h = 0.0;
    for (const auto& f : x.coords) h += local_log_norm(f, Place::archimedean());
    return h;
}

// --- point literals -------------------------------------------------------
// "((2:3),(1:5))" or a single factor "(2:3)"; entries are rationals.

inline ProjPoint parse_point(const SpaceDesc& space, const std::string& text) {
    std::vector<std::vector<Rat>> factors;
    std::vector<Rat> current;
    std::string tok;
    int depth = 0;
    bool in_factor = false;
    auto flush_tok = [&]() {
        if (tok.empty()) return;
        current.push_back(parse_rational(tok));
        tok.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '(') {
            ++depth;
            if (depth > 2) throw DomainError("point literal: nesting too deep");
            if (depth == 2 || (depth == 1 && space.size() == 1)) in_factor = true;
            continue;
        }
        if (c == ')') {
            if (in_factor) {
                flush_tok();
                if (!current.empty()) {
                    factors.push_back(current);
                    current.clear();
                }
                in_factor = false;
            }
            --depth;
            continue;
        }
        if (c == ':') {
            flush_tok();
            continue;
        }
        if (c == ',' && !in_factor) continue;
        if (c == ',' && in_factor && space.size() == 1 && depth == 1) {
            // Affine shorthand "(x,y)" for a single-factor space: treat the
            // comma-separated entries as affine coordinates, last coord 1.
            flush_tok();
            continue;
        }
        tok += c;
    }
    flush_tok();
    if (!current.empty()) factors.push_back(current);
    if (factors.size() == 1 && space.size() == 1 &&
        static_cast<int>(factors[0].size()) == space[0]) {
        factors[0].push_back(Rat(1));  // affine literal
    }
    if (factors.size() != space.size())
        throw DomainError("point literal: expected " + std::to_string(space.size()) +
                          " factor(s)");
    for (size_t j = 0; j < factors.size(); ++j)
        if (static_cast<int>(factors[j].size()) != space[j] + 1)
            throw DomainError("point literal: factor " + std::to_string(j) +
                              " needs " + std::to_string(space[j] + 1) + " entries");
    return normalize(space, factors);
}

}  // namespace dynheight
