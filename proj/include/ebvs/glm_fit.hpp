#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "ebvs/family.hpp"

namespace ebvs {

// Plain fixed-effects GLM fit by iteratively reweighted least squares.
// Used for marginal screening fits and for refitting the selected model when
// reporting.  The design matrix is taken as-is (caller supplies intercept).
struct GlmFit {
    VectorXd coef;
    VectorXd se;             // Wald standard errors (dispersion-scaled)
    VectorXd fitted;         // means
    double deviance = 0.0;
    double null_deviance = 0.0;  // intercept-plus-offset-only model
    double dispersion = 1.0;     // 1 for binomial/poisson; Pearson X^2/(N-p) if quasi
    double aic = 0.0;
    double r_squared = 0.0;      // normal family only
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
};

// `quasi` rescales Wald errors by the Pearson dispersion estimate and switches
// p-values to Student-t with N-p degrees of freedom (used for the Poisson
// marginal screen).  Offset may be empty.
GlmFit glm_fit(const VectorXd& y, const MatrixXd& X, const FamilySpec& family,
               const VectorXd& offset = VectorXd(), bool quasi = false,
               int max_iter = 50, double tol = 1e-10);

// Two-sided p-value for coefficient `idx` of a fit with design column count p.
// Normal family and quasi fits use Student-t with N-p df, otherwise standard
// normal.
double wald_p_value(const GlmFit& fit, const FamilySpec& family, Eigen::Index n,
                    Eigen::Index idx, bool quasi = false);

}  // namespace ebvs
