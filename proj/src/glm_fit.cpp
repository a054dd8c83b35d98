#include "ebvs/glm_fit.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "ebvs/errors.hpp"

namespace ebvs {

namespace {

double xlogx_ratio(double a, double b) {  // a * log(a/b), 0 log 0 = 0
    if (a <= 0.0) return 0.0;
    return a * std::log(a / b);
}

double deviance_of(const FamilySpec& spec, const VectorXd& y, const VectorXd& mu,
                   const VectorXd& m) {
    double dev = 0.0;
    switch (spec.family) {
        case Family::normal:
            dev = (m.array() * (y - mu).array().square()).sum();
            break;
        case Family::poisson:
            for (Eigen::Index i = 0; i < y.size(); ++i)
                dev += 2.0 * m[i] * (xlogx_ratio(y[i], mu[i]) - (y[i] - mu[i]));
            break;
        case Family::binomial:
            for (Eigen::Index i = 0; i < y.size(); ++i)
                dev += 2.0 * m[i] *
                       (xlogx_ratio(y[i], mu[i]) + xlogx_ratio(1.0 - y[i], 1.0 - mu[i]));
            break;
    }
    return dev;
}

double loglik_of(const FamilySpec& spec, const VectorXd& y, const VectorXd& mu,
                 const VectorXd& m) {
    const Eigen::Index n = y.size();
    double ll = 0.0;
    switch (spec.family) {
        case Family::normal: {
            const double rss = (m.array() * (y - mu).array().square()).sum();
            ll = -0.5 * n * (std::log(2.0 * M_PI * rss / n) + 1.0);
            break;
        }
        case Family::poisson:
            for (Eigen::Index i = 0; i < n; ++i)
                ll += m[i] * (y[i] * std::log(mu[i]) - mu[i] - std::lgamma(y[i] + 1.0));
            break;
        case Family::binomial:
            for (Eigen::Index i = 0; i < n; ++i) {
                const double s = m[i] * y[i];  // successes
                ll += std::lgamma(m[i] + 1.0) - std::lgamma(s + 1.0) -
                      std::lgamma(m[i] - s + 1.0) + s * std::log(mu[i]) +
                      (m[i] - s) * std::log1p(-mu[i]);
            }
            break;
    }
    return ll;
}

VectorXd means_from_eta(const FamilySpec& spec, const VectorXd& eta) {
    VectorXd mu(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // keep exp() in range; working_response applies the domain floor anyway
        const double e = std::min(std::max(eta[i], -30.0), 30.0);
        mu[i] = inverse_link(spec.family, spec.family == Family::normal ? eta[i] : e);
    }
    return mu;
}

}  // namespace

GlmFit glm_fit(const VectorXd& y, const MatrixXd& X, const FamilySpec& family,
               const VectorXd& offset, bool quasi, int max_iter, double tol) {
    const Eigen::Index n = y.size();
    const Eigen::Index p = X.cols();
    if (X.rows() != n) throw ValidationError("design matrix rows do not match response");
    if (offset.size() != 0 && offset.size() != n)
        throw ValidationError("offset has wrong length");
    validate_response(family, y);
    const VectorXd m = family.weights_or_ones(n);
    const VectorXd off = offset.size() ? offset : VectorXd::Zero(n);

    GlmFit fit;
    fit.coef = VectorXd::Zero(p);
    VectorXd mu = initial_means(family, y);
    double dev_old = std::numeric_limits<double>::infinity();
    MatrixXd gram;  // final-iteration X' W X, reused for standard errors

    for (int it = 1; it <= max_iter; ++it) {
        const WorkingData wd = working_response(family, y, mu);
        const VectorXd z = wd.y_tilde - off;
        const VectorXd sw = wd.w_tilde.array().sqrt();
        const MatrixXd a = sw.asDiagonal() * X;
        const VectorXd b = sw.cwiseProduct(z);
        Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
        qr.setThreshold(1e-10);
        fit.coef = qr.solve(b);
        gram.noalias() = a.transpose() * a;

        const VectorXd eta = X * fit.coef + off;
        mu = means_from_eta(family, eta);
        fit.deviance = deviance_of(family, y, mu, m);
        fit.iterations = it;
        if (std::abs(fit.deviance - dev_old) / (0.1 + std::abs(fit.deviance)) < tol) {
            fit.converged = true;
            break;
        }
        dev_old = fit.deviance;
    }
    fit.fitted = mu;

    // null model: intercept (plus offset) only
    {
        VectorXd mu0 = initial_means(family, y);
        double coef0 = 0.0;
        for (int it = 0; it < max_iter; ++it) {
            const WorkingData wd = working_response(family, y, mu0);
            const VectorXd z = wd.y_tilde - off;
            coef0 = (wd.w_tilde.cwiseProduct(z)).sum() / wd.w_tilde.sum();
            const VectorXd eta0 = VectorXd::Constant(n, coef0) + off;
            const VectorXd mu_new = means_from_eta(family, eta0);
            if ((mu_new - mu0).cwiseAbs().maxCoeff() < 1e-12) { mu0 = mu_new; break; }
            mu0 = mu_new;
        }
        fit.null_deviance = deviance_of(family, y, mu0, m);
    }

    // dispersion: Pearson X^2 / (n - p) for quasi and normal fits, else 1
    double pearson = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hi = family.family == Family::binomial ? 1.0 - kMeanFloor
                                                            : std::numeric_limits<double>::max();
        const double v =
            variance_function(family.family, std::min(std::max(mu[i], kMeanFloor), hi));
        pearson += m[i] * (y[i] - mu[i]) * (y[i] - mu[i]) / v;
    }
    const double df_resid = std::max<double>(1.0, static_cast<double>(n - p));
    if (family.family == Family::normal || quasi)
        fit.dispersion = pearson / df_resid;
    else
        fit.dispersion = 1.0;

    // covariance of coef: dispersion * (X'WX)^-1
    fit.se = VectorXd::Constant(p, std::numeric_limits<double>::infinity());
    Eigen::LDLT<MatrixXd> ldlt(gram);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const MatrixXd cov = ldlt.solve(MatrixXd::Identity(p, p));
        if (cov.allFinite())
            fit.se = (fit.dispersion * cov.diagonal().array()).sqrt();
    }

    fit.loglik = loglik_of(family, y, mu, m);
    const double k_params = static_cast<double>(p) + (family.family == Family::normal ? 1.0 : 0.0);
    fit.aic = -2.0 * fit.loglik + 2.0 * k_params;
    if (family.family == Family::normal) {
        const double tss = (m.array() * (y.array() - (m.cwiseProduct(y)).sum() / m.sum()).square()).sum();
        fit.r_squared = tss > 0.0 ? 1.0 - fit.deviance / tss : 0.0;
    }
    return fit;
}

double wald_p_value(const GlmFit& fit, const FamilySpec& family, Eigen::Index n,
                    Eigen::Index idx, bool quasi) {
    if (idx < 0 || idx >= fit.coef.size()) throw ValidationError("coefficient index out of range");
    const double se = fit.se[idx];
    if (!std::isfinite(se) || se <= 0.0) return 1.0;
    const double t = std::abs(fit.coef[idx] / se);
    if (!std::isfinite(t)) return 0.0;
    if (family.family == Family::normal || quasi) {
        const double df = std::max<double>(1.0, static_cast<double>(n - fit.coef.size()));
        boost::math::students_t dist(df);
        return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
    }
    boost::math::normal dist;
    return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace ebvs
