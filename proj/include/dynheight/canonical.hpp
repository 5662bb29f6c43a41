// Canonical height engine.
//
// hhat(x) = lim_l a_l(x),  a_l(x) = d^{-l} sum_{f in F_l} h_L(f(x)),
// with |a_{l+1} - a_l| <= k^l C / d^{l+1} for the discrepancy constant C of
// the system, so stopping at level l leaves a tail of at most
// C (k/d)^l / (d-k). The F_l multiset is evaluated over the orbit DAG with
// multiplicity weights, never as the raw k^l tree. Finite orbits short-cut
// to the exact value 0 before any iteration.
#pragma once

#include <atomic>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "dynheight/k3.hpp"
#include "dynheight/orbit.hpp"
#include "dynheight/system.hpp"

namespace dynheight {

struct HeightEstimate {
    double value = 0.0;
    double error_radius = 0.0;
    bool certified = false;
    int iterations = 0;
    long orbit_nodes_visited = 0;
    double discrepancy_C = 0.0;
};

struct DiscrepancyBound {
    double C = 0.0;
    bool certified = false;
    long sample_size = 0;  // for the empirical fallback
};

struct EngineOptions {
    double target_error = 1e-8;
    long node_budget = 10000;          // finite-orbit detection, per level width
    int depth_cap = 64;
    long digit_budget_bits = 64000000;  // per coordinate, during iteration
    // The closure pre-pass gives up earlier: an orbit whose coordinates pass
    // this size is not going to close at desk scale, and iteration handles it
    // with an honest radius anyway.
    long closure_digit_budget_bits = 200000;
    int threads = 1;
    long empirical_sample = 10000;
    double empirical_height_cap = 200.0;
    uint64_t seed = 1;
};

// --- discrepancy constants ---------------------------------------------------

// Certified route: a polynomial-map system on P^N has, per map,
//   d_i h(x) - lower_i <= h(f_i(x)) <= d_i h(x) + upper_i
// with upper from coefficient one-norms and lower from an integral
// Nullstellensatz certificate; the system constant is the worst signed sum.
// Anything else falls back to an empirical bound over a point sample,
// flagged uncertified, with a 2x safety factor.
inline DiscrepancyBound compute_discrepancy_bound(
    const System& sys, const EngineOptions& opts = {},
    const std::vector<ProjPoint>& seed_points = {}) {
    if (sys.inequality_only())
        throw RefusalError(sys.name() + " is registered inequality-only");

    if (const auto* pn = dynamic_cast<const PolyPNSystem*>(&sys)) {
        double up = 0.0, low = 0.0;
        bool certified = true;
        for (const auto& f : pn->maps()) {
            MapDiscrepancy md = map_discrepancy(f);
            up += md.upper;
            low += md.lower;
            certified = certified && md.certified;
        }
        if (certified) return {std::max(up, low), true, 0};
    }

    // Empirical fallback: explore orbit balls from the seeds, capped in
    // height and node count, and measure |sum_i h(f_i y) - d h(y)|.
    DiscrepancyBound out;
    out.certified = false;
    const double d = sys.degree();
    double cap = opts.empirical_height_cap;
    for (const auto& s : seed_points) cap = std::max(cap, 30.0 * (sys.height(s) + 1.0));
    std::unordered_map<std::string, bool> seen;
    std::vector<ProjPoint> frontier = seed_points;
    double cmax = 0.0;
    long samples = 0;
    while (!frontier.empty() && samples < opts.empirical_sample) {
        ProjPoint p = frontier.back();
        frontier.pop_back();
        if (!seen.emplace(p.key(), true).second) continue;
        std::vector<ProjPoint> imgs;
        bool ok = true;
        for (int i = 0; i < sys.map_count() && ok; ++i) {
            try {
                imgs.push_back(sys.apply(i, p));
            } catch (const EvalError&) {
                ok = false;
            }
        }
        if (!ok) continue;
        double delta = -d * sys.height(p);
        for (const auto& q : imgs) delta += sys.height(q);
        cmax = std::max(cmax, std::fabs(delta));
        ++samples;
        for (auto& q : imgs)
            if (sys.height(q) <= cap && !seen.count(q.key())) frontier.push_back(std::move(q));
    }
    out.C = 2.0 * cmax;
    out.sample_size = samples;
    return out;
}

namespace detail {

struct DagNode {
    ProjPoint point;
    double height = 0.0;
    bool expanded = false;
    std::vector<int> images;  // node ids, one per map
};

// Evaluate all maps at the given frontier nodes, optionally in parallel.
// Returns per-node image points; rethrows the first evaluation error.
inline std::vector<std::vector<ProjPoint>> expand_frontier(
    const System& sys, const std::vector<const ProjPoint*>& frontier, int threads) {
    const int k = sys.map_count();
    std::vector<std::vector<ProjPoint>> images(frontier.size(),
                                               std::vector<ProjPoint>());
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    auto worker = [&]() {
        while (true) {
            size_t j = next.fetch_add(1);
            if (j >= frontier.size()) return;
            try {
                std::vector<ProjPoint> imgs;
                imgs.reserve(k);
                for (int i = 0; i < k; ++i)
                    imgs.push_back(sys.apply_trusted(i, *frontier[j]));
                images[j] = std::move(imgs);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    int nt = std::max(1, std::min<int>(threads, static_cast<int>(frontier.size())));
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nt);
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
    return images;
}

}  // namespace detail

struct FunctionalEquationReport {
    double residual = 0.0;
    double bound = 0.0;  // (k + d) * target_error
    HeightEstimate at_x;
    std::vector<HeightEstimate> at_images;
};

class CanonicalEngine {
  public:
    explicit CanonicalEngine(SystemPtr sys, EngineOptions opts = {})
        : sys_(std::move(sys)), opts_(opts) {
        if (sys_->inequality_only())
            throw RefusalError(sys_->name() +
                               " is inequality-only: canonical heights are undefined");
        if (sys_->degree() <= sys_->map_count())
            throw DomainError("canonical engine requires d > k");
    }

    const EngineOptions& options() const { return opts_; }
    const System& system() const { return *sys_; }

    DiscrepancyBound discrepancy(const std::vector<ProjPoint>& seeds = {}) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!disc_) disc_ = compute_discrepancy_bound(*sys_, opts_, seeds);
        return *disc_;
    }

    HeightEstimate height(const ProjPoint& x) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = memo_.find(x.key());
            if (it != memo_.end()) return it->second;
        }
        HeightEstimate est = compute(x);
        std::lock_guard<std::mutex> lock(mutex_);
        memo_.emplace(x.key(), est);  // concurrent duplicates agree within radii
        return est;
    }

    // |sum_i hhat(f_i x) - d hhat(x)|, with the analytic bound it must meet.
    FunctionalEquationReport functional_equation(const ProjPoint& x);

  private:
    HeightEstimate compute(const ProjPoint& x) {
        const double d = sys_->degree();
        const int k = sys_->map_count();

        // Finite-orbit shortcut: heights on a finite orbit are bounded and
        // d > k, so a_l -> 0; the value is exactly 0.
        OrbitReport orb =
            forward_orbit(*sys_, x, opts_.node_budget,
                          std::min(opts_.closure_digit_budget_bits,
                                   opts_.digit_budget_bits));
        if (orb.status == OrbitReport::Status::closed) {
            double cexp = 0.0;
            for (size_t j = 0; j < orb.nodes.size(); ++j) {
                double delta = -d * sys_->height(orb.nodes[j]);
                for (int i = 0; i < k; ++i)
                    delta += sys_->height(orb.nodes[orb.edges[j * k + i].to]);
                cexp = std::max(cexp, std::fabs(delta));
            }
            return {0.0, 0.0, true, 0, static_cast<long>(orb.nodes.size()), cexp};
        }

        DiscrepancyBound disc = discrepancy({x});
        const double contraction = k / d;
        auto tail = [&](int l) {
            return disc.C * std::pow(contraction, l) / (d - k);
        };

        HeightEstimate est;
        est.discrepancy_C = disc.C;
        est.certified = disc.certified;

        // level-synchronised DAG iteration with multiplicity weights
        std::unordered_map<std::string, int> index;
        std::vector<detail::DagNode> nodes;
        auto intern = [&](ProjPoint p) -> int {
            auto key = p.key();
            auto it = index.find(key);
            if (it != index.end()) return it->second;
            int id = static_cast<int>(nodes.size());
            index.emplace(std::move(key), id);
            detail::DagNode n;
            n.height = sys_->height(p);
            n.point = std::move(p);
            nodes.push_back(std::move(n));
            return id;
        };

        std::unordered_map<int, double> level{{intern(x), 1.0}};
        double a_l = nodes[0].height;
        int l = 0;
        bool budget_hit = false;
        while (tail(l) > opts_.target_error && l < opts_.depth_cap) {
            // expand any unexpanded frontier nodes
            std::vector<const ProjPoint*> todo_pts;
            std::vector<int> todo_ids;
            for (const auto& [id, mult] : level) {
                if (!nodes[id].expanded) {
                    todo_ids.push_back(id);
                    todo_pts.push_back(&nodes[id].point);
                }
            }
            for (int id : todo_ids)
                for (const auto& f : nodes[id].point.coords)
                    for (const auto& c : f)
                        if (static_cast<long>(bit_size(c)) > opts_.digit_budget_bits)
                            budget_hit = true;
            if (static_cast<long>(nodes.size()) > opts_.node_budget * k) budget_hit = true;
            if (budget_hit) break;

            auto images = detail::expand_frontier(*sys_, todo_pts, opts_.threads);
            for (size_t j = 0; j < todo_ids.size(); ++j) {
                auto& n = nodes[todo_ids[j]];
                for (auto& img : images[j]) n.images.push_back(intern(std::move(img)));
                nodes[todo_ids[j]].expanded = true;
            }

            std::unordered_map<int, double> next;
            next.reserve(level.size() * 2);
            for (const auto& [id, mult] : level)
                for (int to : nodes[id].images) next[to] += mult;
            level = std::move(next);
            ++l;
            double sum = 0.0;
            double scale = std::pow(d, l);
            for (const auto& [id, mult] : level) sum += mult * nodes[id].height;
            a_l = sum / scale;
        }

        est.value = a_l;
        est.iterations = l;
        est.orbit_nodes_visited = static_cast<long>(nodes.size());
        est.error_radius = tail(l);
        // A resource-capped run keeps the analytic radius of the level it
        // reached; certification still reflects the status of C.
        return est;
    }

    SystemPtr sys_;
    EngineOptions opts_;
    std::mutex mutex_;
    std::optional<DiscrepancyBound> disc_;
    std::unordered_map<std::string, HeightEstimate> memo_;
};

inline FunctionalEquationReport CanonicalEngine::functional_equation(
    const ProjPoint& x) {
    FunctionalEquationReport rep;
    rep.at_x = height(x);
    double sum = 0.0;
    for (int i = 0; i < sys_->map_count(); ++i) {
        rep.at_images.push_back(height(sys_->apply(i, x)));
        sum += rep.at_images.back().value;
    }
    rep.residual = std::fabs(sum - sys_->degree() * rep.at_x.value);
    rep.bound = (sys_->map_count() + sys_->degree()) * opts_.target_error;
    return rep;
}

inline HeightEstimate canonical_height(SystemPtr sys, const ProjPoint& x,
                                       const EngineOptions& opts = {}) {
    CanonicalEngine eng(std::move(sys), opts);
    return eng.height(x);
}

inline FunctionalEquationReport check_functional_equation(
    SystemPtr sys, const ProjPoint& x, const EngineOptions& opts = {}) {
    CanonicalEngine eng(std::move(sys), opts);
    return eng.functional_equation(x);
}

// --- Wheler K3: Silverman's heights and the ratio (1 + sqrt 3) --------------

struct SilvermanRatioReport {
    HeightEstimate h_plus, h_minus, h_base;
    double ratio = 0.0;
    double expected = 1.0 + std::sqrt(3.0);
    // first-order bound on |ratio - (hplus+hminus)/hbase| from the radii
    double ratio_error_bound = 0.0;
};

// hhat_Sil = hhat^+ + hhat^-, with hhat^{+-} the k=1 canonical heights of
// the eigen-divisors E^{+-} = (2+sqrt3) L_i - L_j under (sigma_2 sigma_1)^{+-1},
// both of degree lambda = 7 + 4 sqrt 3. The ratio against the two-map height
// of L = L_1 + L_2 is 1 + sqrt 3.
inline SilvermanRatioReport wheeler_silverman_ratio(
    std::shared_ptr<const K3DoubleCoverSystem> surface, const ProjPoint& x,
    const EngineOptions& opts = {}) {
    const double s3 = std::sqrt(3.0);
    const double lambda = 7.0 + 4.0 * s3;
    auto plus = std::make_shared<CompositeSystem>(
        surface, std::vector<int>{0, 1}, lambda,
        std::vector<double>{2.0 + s3, -1.0}, surface->name() + "_Eplus");
    auto minus = std::make_shared<CompositeSystem>(
        surface, std::vector<int>{1, 0}, lambda,
        std::vector<double>{-1.0, 2.0 + s3}, surface->name() + "_Eminus");

    SilvermanRatioReport rep;
    CanonicalEngine eng_p(plus, opts), eng_m(minus, opts), eng_b(surface, opts);
    rep.h_plus = eng_p.height(x);
    rep.h_minus = eng_m.height(x);
    rep.h_base = eng_b.height(x);
    double denom = rep.h_base.value;
    if (std::fabs(denom) <= rep.h_base.error_radius)
        throw DomainError("silverman ratio undefined: hhat_L(x) = 0 (finite orbit)");
    rep.ratio = (rep.h_plus.value + rep.h_minus.value) / denom;
    rep.ratio_error_bound =
        (rep.h_plus.error_radius + rep.h_minus.error_radius +
         std::fabs(rep.ratio) * rep.h_base.error_radius) /
        std::fabs(denom);
    return rep;
}

}  // namespace dynheight
