#pragma once

#include <vector>

#include "ebvs/data.hpp"
#include "ebvs/glm_fit.hpp"

namespace ebvs {

// Marginal single-predictor screen: for every putative column k, fit
// y ~ [X, z_k] and record the two-sided p-value and coefficient sign for z_k.
// Poisson fits use the quasi-likelihood dispersion correction.
struct MarginalScreen {
    VectorXd p_values;   // size K
    VectorXi signs;      // sign of the marginal coefficient, in {-1, 0, 1}
};
MarginalScreen marginal_screen(const Dataset& data);

// Benjamini-Hochberg step-up at level `level`: returns the discovery
// indicator for each p-value.
std::vector<bool> bh_reject(const VectorXd& p_values, double level);

// BH-selected putative columns at the given level (the FDR comparison
// baseline; also the core of the selector's screen-based initializer).
std::vector<Eigen::Index> bh_select(const Dataset& data, double level = 0.05);

}  // namespace ebvs
