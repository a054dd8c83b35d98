#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <limits>
#include <optional>
#include <vector>

#include "ebvs/data.hpp"
#include "ebvs/family.hpp"

namespace ebvs {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Marginal covariance of the working response given the assignment:
//   Sigma = phi * W^-1 + sigma2 * Z_A Z_A'         (active columns Z_A)
// held in factored form so products with Sigma^-1 and log|Sigma| cost
// O(N L + L^3) instead of O(N^3).  The identity used throughout:
//   Sigma^-1 = (1/phi) [ W - (sigma2/phi) W Z_A C^-1 Z_A' W ]
//   C        = I_L + (sigma2/phi) Z_A' W Z_A
//   log|Sigma| = N log phi - sum_i log w_i + log|C|
// Signs cancel out of Sigma (Gamma^2 = I on active columns), so the cache is
// sign-free; signs enter only through mean terms handled by callers.
//
// A cache snapshot is tied to the (assignment, theta, working-data) state it
// was built from; `revision` catches stale use after the assignment mutates.
class PrecisionCache {
  public:
    PrecisionCache(const Dataset& data, const WorkingData& working,
                   const MixtureAssignment& assign, const Theta& theta);

    Eigen::Index n() const { return w_.size(); }
    Eigen::Index n_active() const { return za_.cols(); }
    double phi() const { return phi_; }
    double sigma2() const { return sigma2_; }
    const VectorXd& w() const { return w_; }
    const MatrixXd& active_columns() const { return za_; }
    const VectorXd& active_signs() const { return signs_; }
    const std::vector<Eigen::Index>& active_index() const { return active_; }

    VectorXd apply_inverse(const VectorXd& v) const;      // Sigma^-1 v
    double quad_form(const VectorXd& v) const;            // v' Sigma^-1 v
    double log_det() const;                               // log|Sigma|

    // Solve C T = S for the L-dimensional core (sign-free form).
    VectorXd core_solve(const VectorXd& s) const;
    MatrixXd core_solve_matrix(const MatrixXd& s) const;
    const MatrixXd& gram() const { return gram_; }        // Z_A' W Z_A

    // trace(Sigma^-1), trace(Sigma^-1 W^-1), trace(Z_A' Sigma^-1 Z_A) —
    // all through L x L reductions; used by the variance-component updates.
    double trace_inverse() const;
    double trace_inverse_winv() const;
    double trace_active_quad() const;

    // rank of W^{1/2} Z_A by column-pivoted QR, tolerance 1e-10 * |R_00|.
    Eigen::Index active_rank() const;

    std::uint64_t revision() const { return revision_; }
    void assert_fresh(const MixtureAssignment& assign) const;

  private:
    double phi_;
    double sigma2_;
    VectorXd w_;
    MatrixXd za_;        // N x L active columns
    VectorXd signs_;     // +-1 per active column
    std::vector<Eigen::Index> active_;
    MatrixXd gram_;      // Z_A' W Z_A
    Eigen::LLT<MatrixXd> core_llt_;  // C = I + (sigma2/phi) * gram
    double log_det_core_;
    double sum_log_w_;
    std::uint64_t revision_;
};

// Complete-data log-likelihood of (y~, gamma) under theta:
//   -1/2 r' Sigma^-1 r - 1/2 log|Sigma| + sum_j n_j log p_j - N/2 log(2pi)
// with r = y~ - offset - X beta - mu * Z_A s.  Returns -inf (never NaN) when
// some n_j > 0 has p_j = 0; 0 * log 0 counts as 0.
double complete_loglik(const Dataset& data, const WorkingData& working,
                       const MixtureAssignment& assign, const Theta& theta);
double complete_loglik(const Dataset& data, const WorkingData& working,
                       const MixtureAssignment& assign, const Theta& theta,
                       const PrecisionCache& cache);

// GLS residual on the working scale for the given state.
VectorXd working_residual(const Dataset& data, const WorkingData& working,
                          const MixtureAssignment& assign, const Theta& theta);

// ---------------------------------------------------------------------------
// Candidate sweep: log-likelihood deltas for single-coordinate moves with
// theta held fixed.  For candidate column z with a1 = z' Sigma^-1 r and
// a2 = z' Sigma^-1 z, each move is a rank-one (or rank-zero) change of Sigma
// plus a mean shift, evaluated in O(1) from (a1, a2).
// ---------------------------------------------------------------------------

// All 3K deltas: d(j, k) = loglik(gamma with gamma_k := j) - loglik(gamma).
// Row index maps label j via row = j + 1.  d = 0 where j equals the current
// label.  Columns of Z whose move is blocked by an empty target component
// (p_j = 0) get -inf.
struct DeltaSweep {
    MatrixXd d;           // 3 x K
    double loglik = 0.0;  // current-state log-likelihood the deltas refer to
};

DeltaSweep delta_sweep(const Dataset& data, const WorkingData& working,
                       const MixtureAssignment& assign, const Theta& theta,
                       const PrecisionCache& cache);

// Single-candidate version (used by tests and the slow path).  Falls back to
// a dense rebuild when the rank-one downdate is numerically unsafe; returns
// -inf only on genuine numerical failure.
double delta_loglik(const Dataset& data, const WorkingData& working,
                    const MixtureAssignment& assign, const Theta& theta,
                    Eigen::Index k, int label);

// ---------------------------------------------------------------------------
// M-step: maximize theta for fixed gamma.
// ---------------------------------------------------------------------------

// Joint GLS update of (beta, mu): solve H' Sigma^-1 H b = H' Sigma^-1 y* with
// H = [X, Z_A s] (the mean column is dropped when L = 0, and mu set to 0).
// A degenerate selection-mean column (active columns cancelling) leaves mu
// unidentified; it is dropped and mu set to 0, which preserves the optimum.
// Rank deficiency among the fixed-effect columns themselves throws
// RankDeficiencyError naming the offending columns.
struct BetaMu {
    VectorXd beta;
    double mu = 0.0;
};
BetaMu update_beta_mu(const Dataset& data, const WorkingData& working,
                      const MixtureAssignment& assign, const Theta& theta,
                      const PrecisionCache& cache);

// One EM step for the variance components:
//   phi    <- tau_e / N,  tau_e = phi N - phi^2 tr(Sigma^-1 W^-1)
//                                 + phi^2 r' Sigma^-1 W^-1 Sigma^-1 r
//   sigma2 <- tau_r / L,  tau_r = sigma2 L - sigma2^2 tr(Z_A' Sigma^-1 Z_A)
//                                 + sigma2^2 || Z_A' Sigma^-1 r ||^2
// (traces via the L x L reduction).  phi is held at 1 for families with
// fixed dispersion; sigma2 floors at kSigma2Floor while L > 0 and is exactly
// 0 when L = 0.
struct VarianceComponents {
    double phi = 1.0;
    double sigma2 = 0.0;
};
inline constexpr double kSigma2Floor = 1e-12;

VarianceComponents update_variance_components(const Dataset& data, const WorkingData& working,
                                              const MixtureAssignment& assign, const Theta& theta,
                                              const PrecisionCache& cache);

// Closed-form multinomial update p_j = n_j / K.
std::array<double, 3> update_mixture_probs(const MixtureAssignment& assign);

// Full M-step: cycles (beta, mu) <-> (phi, sigma2) with p set once (gamma is
// fixed, so the counts cannot change), until the complete log-likelihood
// improves by less than `tol` or `max_inner` cycles.  Monotone by the EM
// argument; the returned trace is the inner log-likelihood sequence.
struct MStepResult {
    Theta theta;
    std::vector<double> inner_trace;
    bool converged = false;
};
MStepResult m_step(const Dataset& data, const WorkingData& working,
                   const MixtureAssignment& assign, Theta theta,
                   double tol = 1e-8, int max_inner = 100);

}  // namespace ebvs
