#include "ebvs/data.hpp"

#include <algorithm>
#include <cmath>

namespace ebvs {

VectorXd Dataset::offset_or_zero() const {
    if (offset.size() == 0) return VectorXd::Zero(n());
    return offset;
}

std::string Dataset::z_name(Eigen::Index k) const {
    if (k >= 0 && k < static_cast<Eigen::Index>(z_names.size())) return z_names[k];
    return "Z" + std::to_string(k + 1);
}

void Dataset::validate() const {
    const Eigen::Index N = n();
    if (N == 0) throw ValidationError("dataset has no rows");
    if (X.cols() > 0 && X.rows() != N)
        throw ValidationError("X has " + std::to_string(X.rows()) + " rows, expected " + std::to_string(N));
    if (Z.rows() != N)
        throw ValidationError("Z has " + std::to_string(Z.rows()) + " rows, expected " + std::to_string(N));
    if (offset.size() != 0 && offset.size() != N)
        throw ValidationError("offset has wrong length");
    if (!y.allFinite() || (X.size() > 0 && !X.allFinite()) || !Z.allFinite())
        throw ValidationError("dataset contains non-finite values");
    if (family.weights.size() != 0 && family.weights.size() != N)
        throw ValidationError("prior weights have wrong length");
    if (!x_names.empty() && static_cast<Eigen::Index>(x_names.size()) != X.cols())
        throw ValidationError("x_names length does not match X");
    if (!z_names.empty() && static_cast<Eigen::Index>(z_names.size()) != Z.cols())
        throw ValidationError("z_names length does not match Z");
    validate_response(family, y);
}

MixtureAssignment::MixtureAssignment(VectorXi gamma) : gamma_(std::move(gamma)) {
    counts_ = {0, 0, 0};
    for (Eigen::Index k = 0; k < gamma_.size(); ++k) {
        const int g = gamma_[k];
        if (g < -1 || g > 1)
            throw ValidationError("assignment entry " + std::to_string(k) +
                                  " is " + std::to_string(g) + ", expected -1, 0 or 1");
        ++counts_[static_cast<std::size_t>(g + 1)];
        if (g != 0) active_.push_back(k);
    }
}

MixtureAssignment MixtureAssignment::all_null(Eigen::Index k) {
    return MixtureAssignment(VectorXi::Zero(k));
}

void MixtureAssignment::set(Eigen::Index k, int label) {
    if (k < 0 || k >= gamma_.size()) throw ValidationError("assignment index out of range");
    if (label < -1 || label > 1) throw ValidationError("assignment label must be -1, 0 or 1");
    const int old = gamma_[k];
    if (old == label) return;
    gamma_[k] = label;
    --counts_[static_cast<std::size_t>(old + 1)];
    ++counts_[static_cast<std::size_t>(label + 1)];
    auto it = std::lower_bound(active_.begin(), active_.end(), k);
    if (old != 0 && label == 0) {
        active_.erase(it);
    } else if (old == 0 && label != 0) {
        active_.insert(it, k);
    }
    ++revision_;
}

void Theta::validate(Eigen::Index j_expected, Eigen::Index n_active) const {
    if (beta.size() != j_expected)
        throw ValidationError("beta has size " + std::to_string(beta.size()) +
                              ", expected " + std::to_string(j_expected));
    if (!(phi > 0.0) || !std::isfinite(phi)) throw DomainError("phi must be positive and finite");
    if (sigma2 < 0.0 || !std::isfinite(sigma2)) throw DomainError("sigma2 must be nonnegative and finite");
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0 || !std::isfinite(v)) throw DomainError("mixture probabilities must be nonnegative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-8) throw DomainError("mixture probabilities must sum to 1");
    if (n_active == 0 && (mu != 0.0 || sigma2 != 0.0))
        throw ValidationError("mu and sigma2 must be exactly 0 with no active columns");
}

}  // namespace ebvs
