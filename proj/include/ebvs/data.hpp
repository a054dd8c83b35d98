#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ebvs/errors.hpp"
#include "ebvs/family.hpp"

namespace ebvs {

// A model-ready problem instance.  X is the locked-in design (J >= 0 columns,
// intercept included explicitly if wanted); Z holds the K putative columns
// the selector searches over.  `offset` (empty = zero) is a fixed additive
// term on the linear predictor with coefficient pinned to 1 — it exists for
// the piecewise-exponential survival expansion.
struct Dataset {
    VectorXd y;
    MatrixXd X;
    MatrixXd Z;
    VectorXd offset;  // size N or empty
    FamilySpec family;
    std::vector<std::string> x_names;
    std::vector<std::string> z_names;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index j() const { return X.cols(); }
    Eigen::Index k() const { return Z.cols(); }

    VectorXd offset_or_zero() const;
    std::string z_name(Eigen::Index k) const;

    // Dimension/domain consistency; throws ValidationError / DomainError.
    void validate() const;
};

// Label values for the three mixture components, in fixed order.
enum : int { kLeft = -1, kNull = 0, kRight = 1 };

// Assignment gamma in {-1,0,+1}^K plus derived bookkeeping.  `active` keeps
// ascending column indices of the nonnull entries; counts are maintained
// incrementally so the selector loop never rescans all K.
class MixtureAssignment {
  public:
    MixtureAssignment() = default;
    explicit MixtureAssignment(VectorXi gamma);
    static MixtureAssignment all_null(Eigen::Index k);

    const VectorXi& gamma() const { return gamma_; }
    int label(Eigen::Index k) const { return gamma_[k]; }
    void set(Eigen::Index k, int label);  // bumps revision

    const std::vector<Eigen::Index>& active() const { return active_; }
    Eigen::Index n_active() const { return static_cast<Eigen::Index>(active_.size()); }
    Eigen::Index size() const { return gamma_.size(); }

    // counts (n_{-1}, n_0, n_{+1}); sums to K.
    std::array<Eigen::Index, 3> counts() const { return counts_; }
    Eigen::Index count(int label) const { return counts_[static_cast<std::size_t>(label + 1)]; }

    // Monotone revision counter; PrecisionCache uses it to detect stale use.
    std::uint64_t revision() const { return revision_; }

    bool operator==(const MixtureAssignment& o) const { return gamma_ == o.gamma_; }

  private:
    VectorXi gamma_;
    std::vector<Eigen::Index> active_;
    std::array<Eigen::Index, 3> counts_{0, 0, 0};
    std::uint64_t revision_ = 0;
};

// Model parameters.  p = (p_{-1}, p_0, p_{+1}).  Invariants: probabilities
// nonnegative summing to 1; phi > 0; sigma2 >= 0, with mu = sigma2 = 0
// exactly when no column is active.
struct Theta {
    VectorXd beta;   // size J (+1 slot is NOT included; mu is separate)
    double mu = 0.0;
    double sigma2 = 0.0;
    double phi = 1.0;
    std::array<double, 3> p{0.0, 1.0, 0.0};

    double p_of(int label) const { return p[static_cast<std::size_t>(label + 1)]; }
    void validate(Eigen::Index j_expected, Eigen::Index n_active) const;
};

}  // namespace ebvs
