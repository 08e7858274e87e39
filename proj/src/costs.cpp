#include "drddpc/costs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace drddpc {

double OutputCost::eval(const VectorXd &y) const {
    if (y.size() != y_ref.size())
        throw std::invalid_argument("OutputCost: dimension mismatch");
    const VectorXd dev = y - y_ref;
    switch (variant) {
    case OutputCostVariant::Quadratic: {
        if (q_weights.size() != y.size())
            throw std::invalid_argument("OutputCost: weight size mismatch");
        return dev.array().square().matrix().dot(q_weights);
    }
    case OutputCostVariant::L1:
        return dev.cwiseAbs().sum();
    case OutputCostVariant::Asymmetric: {
        double acc = 0.0;
        for (int i = 0; i < dev.size(); ++i)
            acc += dev(i) >= 0.0 ? w_over * dev(i) : -w_under * dev(i);
        return acc;
    }
    }
    return 0.0;
}

double InputCost::eval(const VectorXd &u) const {
    if (u.size() != r_weights.size())
        throw std::invalid_argument("InputCost: dimension mismatch");
    return u.array().square().matrix().dot(r_weights);
}

bool ConstraintSpec::has_output_box() const {
    for (int i = 0; i < y_lo.size(); ++i)
        if (std::isfinite(y_lo(i)) || std::isfinite(y_hi(i))) return true;
    return false;
}

double ConstraintSpec::h_box(const VectorXd &y) const {
    if (y.size() != y_lo.size() || y.size() != y_hi.size())
        throw std::invalid_argument("ConstraintSpec: dimension mismatch");
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < y.size(); ++i) {
        if (std::isfinite(y_hi(i))) worst = std::max(worst, y(i) - y_hi(i));
        if (std::isfinite(y_lo(i))) worst = std::max(worst, y_lo(i) - y(i));
    }
    return std::isfinite(worst) ? worst : 0.0;
}

namespace {

// Dual-norm aggregation of per-component gradient bounds g_i >= 0:
// L = ||g||_{r*} with 1/r + 1/r* = 1, for r in {1, 2, inf}.
double dual_aggregate(const VectorXd &g, double r) {
    if (r == 2.0) return g.norm();
    if (r == 1.0) return g.size() ? g.maxCoeff() : 0.0;
    if (std::isinf(r)) return g.sum();
    throw std::invalid_argument("lipschitz: r must be 1, 2, or inf");
}

} // namespace

double lipschitz(const OutputCost &cost, double r, const VectorXd &dom_lo,
                 const VectorXd &dom_hi) {
    const int d = static_cast<int>(cost.y_ref.size());
    VectorXd g(d);
    switch (cost.variant) {
    case OutputCostVariant::L1:
        g.setOnes();
        break;
    case OutputCostVariant::Asymmetric:
        g.setConstant(std::max(cost.w_over, cost.w_under));
        break;
    case OutputCostVariant::Quadratic: {
        if (dom_lo.size() != d || dom_hi.size() != d)
            throw std::invalid_argument("lipschitz: domain box size mismatch");
        for (int i = 0; i < d; ++i) {
            if (!std::isfinite(dom_lo(i)) || !std::isfinite(dom_hi(i)))
                throw std::invalid_argument(
                    "lipschitz: quadratic cost needs a bounded domain box");
            const double e = std::max(std::abs(dom_lo(i) - cost.y_ref(i)),
                                      std::abs(dom_hi(i) - cost.y_ref(i)));
            g(i) = 2.0 * cost.q_weights(i) * e;
        }
        break;
    }
    }
    return dual_aggregate(g, r);
}

double lipschitz_box(double r) {
    // The gradient of h is a single signed unit vector, so every dual norm
    // in {1, 2, inf} evaluates to 1.
    if (r == 1.0 || r == 2.0 || std::isinf(r)) return 1.0;
    throw std::invalid_argument("lipschitz_box: r must be 1, 2, or inf");
}

} // namespace drddpc
