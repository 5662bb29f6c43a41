// Henon maps phi(x,y) = (y, y^2 + b + ax) as the pair {phi, phi^{-1}} on
// affine Q^2, with the naive P^2 height of (x:y:1). Registered as
// inequality-only: the known bound is
//   h(phi(x)) + h(phi^{-1}(x)) >= (5/2) h(x) + O(1),
// not a line-bundle relation, so the canonical-height engine refuses it.
#pragma once

#include "dynheight/system.hpp"

namespace dynheight {

class HenonSystem : public System {
  public:
    HenonSystem(Rat a, Rat b) : a_(std::move(a)), b_(std::move(b)) {
        if (a_ == 0) throw DomainError("henon: a must be nonzero");
    }

    int map_count() const override { return 2; }
    // Only the inequality constant is registered; 5/2 plays the role of k+eps.
    double degree() const override { return 2.5; }
    SpaceDesc space() const override { return {2}; }
    bool inequality_only() const override { return true; }
    std::string name() const override { return "henon"; }
    const Rat& a() const { return a_; }
    const Rat& b() const { return b_; }

    // map 0 = phi, map 1 = phi^{-1}; points are (X:Y:Z) with Z != 0.
    ProjPoint apply(int i, const ProjPoint& p) const override {
        const auto& c = p.coords[0];
        if (c[2] == 0)
            throw IndeterminateError("henon: line at infinity is outside the domain");
        Rat x(c[0], c[2]), y(c[1], c[2]);
        x.canonicalize();
        y.canonicalize();
        Rat u, v;
        if (i == 0) {
            u = y;
            v = y * y + b_ + a_ * x;
        } else {
            u = (y - x * x - b_) / a_;
            v = x;
        }
        return normalize({2}, {{u, v, Rat(1)}});
    }

    static ProjPoint affine_point(const Rat& x, const Rat& y) {
        return normalize({2}, {{x, y, Rat(1)}});
    }

  private:
    Rat a_, b_;
};

}  // namespace dynheight
