#include "ebvs/likelihood.hpp"

#include <Eigen/QR>
#include <cmath>

namespace ebvs {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// variance of v with ddof 1, floored away from zero; used only as a starting
// value when sigma2 must be kicked off an exact zero.
double start_variance(const VectorXd& v) {
    if (v.size() < 2) return 1.0;
    const double mean = v.mean();
    const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
    return std::max(var, 1e-6);
}

}  // namespace

PrecisionCache::PrecisionCache(const Dataset& data, const WorkingData& working,
                               const MixtureAssignment& assign, const Theta& theta)
    : phi_(theta.phi), sigma2_(theta.sigma2) {
    const Eigen::Index n = data.n();
    if (working.y_tilde.size() != n || working.w_tilde.size() != n)
        throw ValidationError("working data does not match dataset dimensions");
    if (assign.size() != data.k())
        throw ValidationError("assignment length does not match putative column count");
    if (!(phi_ > 0.0) || !std::isfinite(phi_)) throw DomainError("phi must be positive and finite");
    if (sigma2_ < 0.0 || !std::isfinite(sigma2_)) throw DomainError("sigma2 must be nonnegative");
    if (!working.w_tilde.allFinite() || (working.w_tilde.array() <= 0.0).any())
        throw DomainError("working weights must be positive and finite");

    w_ = working.w_tilde;
    sum_log_w_ = w_.array().log().sum();
    active_ = assign.active();
    revision_ = assign.revision();

    const Eigen::Index L = assign.n_active();
    za_.resize(n, L);
    signs_.resize(L);
    for (Eigen::Index a = 0; a < L; ++a) {
        za_.col(a) = data.Z.col(active_[static_cast<std::size_t>(a)]);
        signs_[a] = static_cast<double>(assign.label(active_[static_cast<std::size_t>(a)]));
    }

    if (L > 0) {
        gram_.noalias() = za_.transpose() * w_.asDiagonal() * za_;
        MatrixXd core = (sigma2_ / phi_) * gram_;
        core.diagonal().array() += 1.0;
        core_llt_.compute(core);
        if (core_llt_.info() != Eigen::Success)
            throw SingularCoreError("low-rank core failed to factor");
        log_det_core_ =
            2.0 * core_llt_.matrixLLT().diagonal().array().log().sum();
    } else {
        gram_.resize(0, 0);
        log_det_core_ = 0.0;
    }
}

void PrecisionCache::assert_fresh(const MixtureAssignment& assign) const {
    if (assign.revision() != revision_)
        throw ContractViolation("precision cache is stale for this assignment");
}

VectorXd PrecisionCache::core_solve(const VectorXd& s) const {
    if (n_active() == 0) return VectorXd();
    return core_llt_.solve(s);
}

MatrixXd PrecisionCache::core_solve_matrix(const MatrixXd& s) const {
    if (n_active() == 0) return MatrixXd(0, s.cols());
    return core_llt_.solve(s);
}

VectorXd PrecisionCache::apply_inverse(const VectorXd& v) const {
    if (v.size() != n()) throw ValidationError("vector length does not match dataset");
    VectorXd t = w_.cwiseProduct(v);
    if (n_active() == 0 || sigma2_ == 0.0) return t / phi_;
    VectorXd s = za_.transpose() * t;
    VectorXd u = core_llt_.solve(s);
    t.noalias() -= (sigma2_ / phi_) * w_.cwiseProduct(za_ * u);
    return t / phi_;
}

double PrecisionCache::quad_form(const VectorXd& v) const {
    if (v.size() != n()) throw ValidationError("vector length does not match dataset");
    const VectorXd t = w_.cwiseProduct(v);
    double q = v.dot(t);
    if (n_active() > 0 && sigma2_ > 0.0) {
        const VectorXd s = za_.transpose() * t;
        q -= (sigma2_ / phi_) * s.dot(core_llt_.solve(s));
    }
    return q / phi_;
}

double PrecisionCache::log_det() const {
    return static_cast<double>(n()) * std::log(phi_) - sum_log_w_ + log_det_core_;
}

double PrecisionCache::trace_inverse() const {
    double tr = w_.sum();
    if (n_active() > 0 && sigma2_ > 0.0) {
        const MatrixXd w2z = w_.array().square().matrix().asDiagonal() * za_;
        const MatrixXd f = za_.transpose() * w2z;  // Z_A' W^2 Z_A
        tr -= (sigma2_ / phi_) * core_llt_.solve(f).trace();
    }
    return tr / phi_;
}

double PrecisionCache::trace_inverse_winv() const {
    double tr = static_cast<double>(n());
    if (n_active() > 0 && sigma2_ > 0.0)
        tr -= (sigma2_ / phi_) * core_llt_.solve(gram_).trace();
    return tr / phi_;
}

double PrecisionCache::trace_active_quad() const {
    if (n_active() == 0) return 0.0;
    double tr = gram_.trace();
    if (sigma2_ > 0.0) {
        const MatrixXd g2 = gram_ * gram_;
        tr -= (sigma2_ / phi_) * core_llt_.solve(g2).trace();
    }
    return tr / phi_;
}

Eigen::Index PrecisionCache::active_rank() const {
    const Eigen::Index L = n_active();
    if (L == 0) return 0;
    MatrixXd scaled = w_.array().sqrt().matrix().asDiagonal() * za_;
    Eigen::ColPivHouseholderQR<MatrixXd> qr(scaled);
    const VectorXd diag = qr.matrixQR().diagonal().cwiseAbs();
    const double tol = 1e-10 * diag[0];
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < diag.size(); ++i)
        if (diag[i] > tol) ++rank;
    return rank;
}

VectorXd working_residual(const Dataset& data, const WorkingData& working,
                          const MixtureAssignment& assign, const Theta& theta) {
    VectorXd r = working.y_tilde;
    if (data.offset.size() > 0) r -= data.offset;
    if (data.j() > 0) {
        if (theta.beta.size() != data.j())
            throw ValidationError("beta length does not match locked-in design");
        r.noalias() -= data.X * theta.beta;
    }
    if (theta.mu != 0.0) {
        for (Eigen::Index k : assign.active())
            r.noalias() -= (theta.mu * assign.label(k)) * data.Z.col(k);
    }
    return r;
}

static double mixture_term(const MixtureAssignment& assign, const Theta& theta) {
    double t = 0.0;
    const auto counts = assign.counts();
    for (int j = -1; j <= 1; ++j) {
        const auto nj = counts[static_cast<std::size_t>(j + 1)];
        if (nj == 0) continue;  // 0 * log 0 counts as 0
        const double pj = theta.p_of(j);
        if (pj <= 0.0) return kNegInf;
        t += static_cast<double>(nj) * std::log(pj);
    }
    return t;
}

double complete_loglik(const Dataset& data, const WorkingData& working,
                       const MixtureAssignment& assign, const Theta& theta,
                       const PrecisionCache& cache) {
    cache.assert_fresh(assign);
    const double mult = mixture_term(assign, theta);
    if (mult == kNegInf) return kNegInf;
    const VectorXd r = working_residual(data, working, assign, theta);
    const double value = -0.5 * cache.quad_form(r) - 0.5 * cache.log_det() + mult -
                         0.5 * static_cast<double>(data.n()) * kLog2Pi;
    return std::isnan(value) ? kNegInf : value;
}

double complete_loglik(const Dataset& data, const WorkingData& working,
                       const MixtureAssignment& assign, const Theta& theta) {
    PrecisionCache cache(data, working, assign, theta);
    return complete_loglik(data, working, assign, theta, cache);
}

// ---------------------------------------------------------------------------
// Candidate sweep
// ---------------------------------------------------------------------------

namespace {

// Shared rank-one move arithmetic.  a1 = z'Sigma^-1 r, a2 = z'Sigma^-1 z for
// the candidate column under the *current* Sigma; g is the current label and
// j the proposed one.  Returns NaN when the removal downdate is numerically
// unsafe (caller takes the slow path).
double move_delta(double a1, double a2, double mu, double sigma2,
                  const Theta& theta, int g, int j) {
    const double pj = theta.p_of(j);
    if (pj <= 0.0) return kNegInf;  // target component is empty
    const double pg = theta.p_of(g);
    const double dmult = std::log(pj) - safe_log(pg);  // +inf escape from p_g = 0

    double dq = 0.0;   // q* - q
    double dld = 0.0;  // log|Sigma*| - log|Sigma|
    if (g == 0) {      // activate
        const double denom = 1.0 + sigma2 * a2;
        const double alpha = sigma2 / denom;
        const double zr_new = a1 - j * mu * a2;
        dq = -2.0 * j * mu * a1 + mu * mu * a2 - alpha * zr_new * zr_new;
        dld = std::log1p(sigma2 * a2);
    } else if (j == 0) {  // deactivate
        const double denom = 1.0 - sigma2 * a2;
        if (denom <= 1e-10) return std::numeric_limits<double>::quiet_NaN();
        const double alpha = sigma2 / denom;
        const double zr_new = a1 + g * mu * a2;
        dq = 2.0 * g * mu * a1 + mu * mu * a2 + alpha * zr_new * zr_new;
        dld = std::log(denom);
    } else {  // sign flip; Sigma is unchanged
        dq = 4.0 * g * mu * a1 + 4.0 * mu * mu * a2;
    }
    const double d = -0.5 * dq - 0.5 * dld + dmult;
    return d;
}

// Exact recomputation for one move; the reference the fast formulas must
// match and the fallback when they are unsafe.
double recompute_delta(const Dataset& data, const WorkingData& working,
                       const MixtureAssignment& assign, const Theta& theta,
                       Eigen::Index k, int j, double current) {
    MixtureAssignment moved = assign;
    moved.set(k, j);
    Theta guarded = theta;
    if (moved.n_active() == 0) {
        guarded.mu = 0.0;
        guarded.sigma2 = 0.0;
    }
    // Note: mu/sigma2 are otherwise held fixed; this is a theta-fixed delta.
    const double value = complete_loglik(data, working, moved, guarded);
    if (std::isnan(value - current)) return kNegInf;
    return value - current;
}

}  // namespace

DeltaSweep delta_sweep(const Dataset& data, const WorkingData& working,
                       const MixtureAssignment& assign, const Theta& theta,
                       const PrecisionCache& cache) {
    cache.assert_fresh(assign);
    const Eigen::Index K = data.k();
    const Eigen::Index L = cache.n_active();
    const double sigma2 = cache.sigma2();
    const double phi = cache.phi();
    const double mu = theta.mu;

    DeltaSweep out;
    out.d = MatrixXd::Zero(3, K);
    out.loglik = complete_loglik(data, working, assign, theta, cache);

    const VectorXd r = working_residual(data, working, assign, theta);
    const VectorXd srv = cache.apply_inverse(r);
    const VectorXd a1 = data.Z.transpose() * srv;

    // a2_k = z_k' Sigma^-1 z_k for all k through the L x K cross-Gram
    const MatrixXd wz = cache.w().asDiagonal() * data.Z;  // N x K
    const VectorXd wz2 = data.Z.cwiseProduct(wz).colwise().sum().transpose();
    VectorXd a2(K);
    if (L > 0 && sigma2 > 0.0) {
        const MatrixXd m = cache.active_columns().transpose() * wz;  // L x K
        const MatrixXd t = cache.core_solve_matrix(m);
        a2 = (wz2 - (sigma2 / phi) * m.cwiseProduct(t).colwise().sum().transpose()) / phi;
    } else {
        a2 = wz2 / phi;
    }

    for (Eigen::Index k = 0; k < K; ++k) {
        const int g = assign.label(k);
        for (int j = -1; j <= 1; ++j) {
            if (j == g) continue;  // d = 0 on the diagonal by definition
            double d = move_delta(a1[k], a2[k], mu, sigma2, theta, g, j);
            if (std::isnan(d))
                d = recompute_delta(data, working, assign, theta, k, j, out.loglik);
            out.d(j + 1, k) = d;
        }
    }
    return out;
}

double delta_loglik(const Dataset& data, const WorkingData& working,
                    const MixtureAssignment& assign, const Theta& theta,
                    Eigen::Index k, int label) {
    if (k < 0 || k >= data.k()) throw ValidationError("candidate index out of range");
    if (label < -1 || label > 1) throw ValidationError("candidate label must be -1, 0 or 1");
    const int g = assign.label(k);
    if (label == g) return 0.0;

    PrecisionCache cache(data, working, assign, theta);
    const VectorXd r = working_residual(data, working, assign, theta);
    const VectorXd z = data.Z.col(k);
    const double a1 = z.dot(cache.apply_inverse(r));
    const double a2 = cache.quad_form(z);
    double d = move_delta(a1, a2, theta.mu, cache.sigma2(), theta, g, label);
    if (std::isnan(d)) {
        const double current = complete_loglik(data, working, assign, theta, cache);
        d = recompute_delta(data, working, assign, theta, k, label, current);
    }
    return d;
}

// ---------------------------------------------------------------------------
// M-step
// ---------------------------------------------------------------------------

BetaMu update_beta_mu(const Dataset& data, const WorkingData& working,
                      const MixtureAssignment& assign, const Theta&,
                      const PrecisionCache& cache) {
    cache.assert_fresh(assign);
    const Eigen::Index J = data.j();
    const Eigen::Index L = assign.n_active();
    const Eigen::Index p = J + (L > 0 ? 1 : 0);
    BetaMu out;
    out.beta = VectorXd::Zero(J);
    if (p == 0) return out;

    MatrixXd h(data.n(), p);
    if (J > 0) h.leftCols(J) = data.X;
    if (L > 0)
        h.col(J) = cache.active_columns() * cache.active_signs();  // Z Gamma 1

    VectorXd yw = working.y_tilde;
    if (data.offset.size() > 0) yw -= data.offset;

    MatrixXd sih(data.n(), p);
    for (Eigen::Index c = 0; c < p; ++c) sih.col(c) = cache.apply_inverse(h.col(c));
    const MatrixXd a = h.transpose() * sih;
    const VectorXd b = sih.transpose() * yw;

    Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        // When the fixed-effect block alone is full rank the deficiency can
        // only come from the selection-mean column (active columns cancelling
        // or degenerating to zero).  mu is then unidentified -- any value
        // gives the same likelihood -- so drop it instead of failing the run.
        if (L > 0) {
            if (J == 0) return out;  // lone degenerate mean column: mu = 0
            Eigen::ColPivHouseholderQR<MatrixXd> qx(a.topLeftCorner(J, J));
            qx.setThreshold(1e-10);
            if (qx.rank() == J) {
                out.beta = qx.solve(b.head(J));
                return out;
            }
        }
        std::string names;
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < p; ++i) {
            const Eigen::Index col = perm[i];
            if (!names.empty()) names += ", ";
            if (col < J)
                names += (col < static_cast<Eigen::Index>(data.x_names.size()))
                             ? data.x_names[static_cast<std::size_t>(col)]
                             : ("X" + std::to_string(col + 1));
            else
                names += "<selection-mean>";
        }
        throw RankDeficiencyError("GLS design is rank deficient; offending columns: " + names);
    }
    const VectorXd sol = qr.solve(b);
    out.beta = sol.head(J);
    out.mu = (L > 0) ? sol[J] : 0.0;
    return out;
}

VarianceComponents update_variance_components(const Dataset& data, const WorkingData& working,
                                              const MixtureAssignment& assign, const Theta& theta,
                                              const PrecisionCache& cache) {
    cache.assert_fresh(assign);
    const double n = static_cast<double>(data.n());
    const double phi = cache.phi();
    const double sigma2 = cache.sigma2();
    const VectorXd r = working_residual(data, working, assign, theta);
    const VectorXd srv = cache.apply_inverse(r);

    VarianceComponents out;
    if (data.family.dispersion_fixed()) {
        out.phi = 1.0;
    } else {
        // tau_e = E[e' W e | y] = phi N - phi^2 tr(Sigma^-1 W^-1) + phi^2 ||W^-1/2 Sigma^-1 r||^2
        const double quad = (srv.array().square() / cache.w().array()).sum();
        const double tau_e = phi * n - phi * phi * cache.trace_inverse_winv() + phi * phi * quad;
        out.phi = std::max(tau_e / n, 1e-12);
    }

    const Eigen::Index rank = cache.active_rank();
    if (assign.n_active() == 0 || rank == 0) {
        out.sigma2 = 0.0;
    } else {
        // tau_r over the active block: sigma2 L - sigma2^2 tr(Z_A' Sigma^-1 Z_A)
        //                              + sigma2^2 ||Z_A' Sigma^-1 r||^2
        const double L = static_cast<double>(assign.n_active());
        const VectorXd t = cache.active_columns().transpose() * srv;
        const double tau_r =
            sigma2 * L - sigma2 * sigma2 * cache.trace_active_quad() + sigma2 * sigma2 * t.squaredNorm();
        out.sigma2 = std::max(tau_r / static_cast<double>(rank), kSigma2Floor);
    }
    return out;
}

std::array<double, 3> update_mixture_probs(const MixtureAssignment& assign) {
    const double k = static_cast<double>(assign.size());
    if (k == 0) return {0.0, 1.0, 0.0};  // no putative columns at all
    const auto counts = assign.counts();
    return {static_cast<double>(counts[0]) / k, static_cast<double>(counts[1]) / k,
            static_cast<double>(counts[2]) / k};
}

MStepResult m_step(const Dataset& data, const WorkingData& working,
                   const MixtureAssignment& assign, Theta theta,
                   double tol, int max_inner) {
    MStepResult out;
    const Eigen::Index L = assign.n_active();
    theta.p = update_mixture_probs(assign);  // gamma fixed: set once

    if (L == 0) {
        theta.mu = 0.0;
        theta.sigma2 = 0.0;
    } else if (theta.sigma2 < kSigma2Floor) {
        // a multiplicative EM update cannot leave an exact zero; restart from
        // the marginal spread of the working response
        VectorXd yw = working.y_tilde;
        if (data.offset.size() > 0) yw -= data.offset;
        theta.sigma2 = start_variance(yw);
    }
    if (!data.family.dispersion_fixed() && !(theta.phi > 0.0)) theta.phi = 1.0;

    double l_prev = kNegInf;
    for (int it = 0; it < max_inner; ++it) {
        PrecisionCache cache(data, working, assign, theta);
        const BetaMu bm = update_beta_mu(data, working, assign, theta, cache);
        theta.beta = bm.beta;
        theta.mu = bm.mu;
        const VarianceComponents vc =
            update_variance_components(data, working, assign, theta, cache);
        theta.phi = vc.phi;
        theta.sigma2 = vc.sigma2;
        if (assign.n_active() == 0) {
            theta.mu = 0.0;
            theta.sigma2 = 0.0;
        }
        const double l = complete_loglik(data, working, assign, theta);
        out.inner_trace.push_back(l);
        if (std::isfinite(l) && std::isfinite(l_prev) && l - l_prev < tol) {
            out.converged = true;
            break;
        }
        l_prev = l;
    }
    out.theta = std::move(theta);
    return out;
}

}  // namespace ebvs
