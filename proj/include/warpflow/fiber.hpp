#pragma once

#include <vector>

#include "warpflow/errors.hpp"

namespace warpflow {

// One round-sphere fiber S^{n} scaled so that Rc[ghat] = mu * ghat.
// The hat metric has constant sectional curvature lambda_hat = mu/(n-1);
// mu = n-1 recovers the unit sphere.
struct FiberSpec {
    int n = 2;
    double mu = 1.0;

    double lambda_hat() const { return mu / static_cast<double>(n - 1); }

    void validate() const {
        if (n < 2) throw InvalidConfig("fiber dimension must satisfy n_a >= 2");
        if (mu < 0.0) throw InvalidConfig("Einstein constant must satisfy mu_a >= 0");
    }
};

enum class BaseKind { CircleS1, TorusT2 };

inline int base_dim(BaseKind k) { return k == BaseKind::CircleS1 ? 1 : 2; }

// g = gcheck + sum_a v_a^2 ghat_a over an S^1 or T^2 base.
struct WarpedProductSpec {
    BaseKind base = BaseKind::CircleS1;
    std::vector<FiberSpec> fibers;

    int fiber_count() const { return static_cast<int>(fibers.size()); }

    int total_dim() const {
        int n = base_dim(base);
        for (const auto& f : fibers) n += f.n;
        return n;
    }

    void validate() const {
        if (fibers.empty()) throw InvalidConfig("at least one fiber is required");
        for (const auto& f : fibers) f.validate();
    }
};

}  // namespace warpflow
