// A dynamical system (X; f_1,...,f_k) with a height functional for an
// R-line bundle L of degree d > k. Systems evaluate points exactly; the
// engines only see this interface.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dynheight/polymap.hpp"
#include "dynheight/projective.hpp"

namespace dynheight {

struct EvalError : DomainError {
    using DomainError::DomainError;
};
struct IndeterminateError : EvalError {
    using EvalError::EvalError;
};
struct DegenerateFiberError : EvalError {
    using EvalError::EvalError;
};
struct OffSurfaceError : EvalError {
    using EvalError::EvalError;
};
// e.g. `height` asked of an inequality-only system
struct RefusalError : DomainError {
    using DomainError::DomainError;
};

class System {
  public:
    virtual ~System() = default;

    virtual int map_count() const = 0;
    virtual double degree() const = 0;  // d > k, real (R-line bundles)
    virtual SpaceDesc space() const = 0;
    virtual ProjPoint apply(int map_index, const ProjPoint& x) const = 0;

    // Evaluation that may skip redundant invariant checks when the input is
    // already known to be a valid image of this system (used by the orbit
    // iteration engines, where surface checks on huge coordinates dominate).
    virtual ProjPoint apply_trusted(int map_index, const ProjPoint& x) const {
        return apply(map_index, x);
    }

    // Per-factor weights r_j of L = sum r_j L_j; h_L = sum r_j h_nv,factor j.
    virtual std::vector<double> height_weights() const {
        return std::vector<double>(space().size(), 1.0);
    }

    // Registered with a height inequality only (no line-bundle relation):
    // the canonical-height engine refuses such systems.
    virtual bool inequality_only() const { return false; }

    // True when h_L is ample (all weights positive): finite orbit <=> hhat 0.
    virtual bool ample() const {
        for (double w : height_weights())
            if (w <= 0) return false;
        return true;
    }

    virtual std::string name() const = 0;

    double height(const ProjPoint& x) const {
        auto w = height_weights();
        double h = 0.0;
        for (size_t j = 0; j < x.coords.size(); ++j)
            h += w[j] * local_log_norm(x.coords[j], Place::archimedean());
        return h;
    }
};

using SystemPtr = std::shared_ptr<const System>;

// k polynomial morphisms of P^N with L = O(1), d = sum of the degrees.
class PolyPNSystem : public System {
  public:
    PolyPNSystem(int N, std::vector<PolyMapPN> maps, std::string name = "poly_pn")
        : N_(N), maps_(std::move(maps)), name_(std::move(name)) {
        degree_ = 0;
        for (const auto& f : maps_) {
            if (f.N != N_) throw DomainError("poly_pn: dimension mismatch");
            degree_ += f.degree;
        }
        if (degree_ <= static_cast<double>(maps_.size()))
            throw DomainError("poly_pn: requires d > k");
    }

    int map_count() const override { return static_cast<int>(maps_.size()); }
    double degree() const override { return degree_; }
    SpaceDesc space() const override { return {N_}; }
    std::string name() const override { return name_; }
    const std::vector<PolyMapPN>& maps() const { return maps_; }

    ProjPoint apply(int i, const ProjPoint& x) const override {
        std::vector<Int> img = maps_[i].eval(x.coords[0]);
        bool all_zero = true;
        for (const auto& c : img)
            if (c != 0) all_zero = false;
        if (all_zero)
            throw IndeterminateError(name_ + ": map " + std::to_string(i) +
                                     " indeterminate at " + x.key());
        return make_point({N_}, {std::move(img)});
    }

  private:
    int N_;
    std::vector<PolyMapPN> maps_;
    double degree_;
    std::string name_;
};

}  // namespace dynheight
