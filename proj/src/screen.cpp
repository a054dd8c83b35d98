#include "ebvs/screen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ebvs/parallel.hpp"

namespace ebvs {

MarginalScreen marginal_screen(const Dataset& data) {
    data.validate();
    const Eigen::Index K = data.k();
    const Eigen::Index J = data.j();
    const bool quasi = data.family.family == Family::poisson;

    MarginalScreen out;
    out.p_values = VectorXd::Ones(K);
    out.signs = VectorXi::Zero(K);

    const VectorXd offset = data.offset.size() ? data.offset : VectorXd();
    parallel_for(static_cast<std::size_t>(K), [&](std::size_t kk) {
        const Eigen::Index k = static_cast<Eigen::Index>(kk);
        MatrixXd design(data.n(), J + 1);
        if (J > 0) design.leftCols(J) = data.X;
        design.col(J) = data.Z.col(k);
        try {
            const GlmFit fit = glm_fit(data.y, design, data.family, offset, quasi);
            out.p_values[k] = wald_p_value(fit, data.family, data.n(), J, quasi);
            const double c = fit.coef[J];
            out.signs[k] = c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
        } catch (const Error&) {
            // an unfittable column is simply not a discovery
            out.p_values[k] = 1.0;
            out.signs[k] = 0;
        }
    });
    return out;
}

std::vector<bool> bh_reject(const VectorXd& p_values, double level) {
    const Eigen::Index K = p_values.size();
    if (level <= 0.0 || level >= 1.0) throw ValidationError("BH level must lie in (0,1)");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return p_values[a] < p_values[b]; });

    Eigen::Index cut = -1;  // largest i with p_(i) <= (i+1)/K * level
    for (Eigen::Index i = 0; i < K; ++i) {
        const double bound = level * static_cast<double>(i + 1) / static_cast<double>(K);
        if (p_values[order[static_cast<std::size_t>(i)]] <= bound) cut = i;
    }
    std::vector<bool> reject(static_cast<std::size_t>(K), false);
    for (Eigen::Index i = 0; i <= cut; ++i)
        reject[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
    return reject;
}

std::vector<Eigen::Index> bh_select(const Dataset& data, double level) {
    const MarginalScreen screen = marginal_screen(data);
    const std::vector<bool> reject = bh_reject(screen.p_values, level);
    std::vector<Eigen::Index> selected;
    for (Eigen::Index k = 0; k < data.k(); ++k)
        if (reject[static_cast<std::size_t>(k)]) selected.push_back(k);
    return selected;
}

}  // namespace ebvs
