#pragma once

#include <Eigen/Core>
#include <string>

#include "ebvs/errors.hpp"

namespace ebvs {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

enum class Family { normal, binomial, poisson };

Family family_from_string(const std::string& name);
std::string to_string(Family f);

// Exponential-family description with canonical link.  `weights` holds the
// prior weights m_i (binomial trials, Poisson exposure replicates, inverse
// variance weights for the normal family); an empty vector means all ones.
struct FamilySpec {
    Family family = Family::normal;
    VectorXd weights;  // size N or empty

    // Dispersion phi is a free parameter only for the normal family.
    bool dispersion_fixed() const { return family != Family::normal; }

    VectorXd weights_or_ones(Eigen::Index n) const;
};

// Canonical link g and friends, scalar versions.  Domain violations throw
// DomainError; these are exact-domain checks, clamping happens only in
// working_response.
double link(Family f, double mean);
double inverse_link(Family f, double eta);
double cumulant(Family f, double eta);        // b(eta), log-partition
double variance_function(Family f, double mean);  // V(mu) = b''(theta)

// Linearization state for one IRLS/outer iteration: working response y~ and
// working weights w~ evaluated at the current fitted means.
struct WorkingData {
    VectorXd y_tilde;
    VectorXd w_tilde;
    bool clamped = false;  // true if any mean hit the domain guard
};

// Mean-domain guards used before linearizing (see working_response): Poisson
// means clamped to >= kMeanFloor, binomial to [kMeanFloor, 1 - kMeanFloor].
inline constexpr double kMeanFloor = 1e-10;

// y~_i = g(mu_i) + g'(mu_i)(y_i - mu_i),  w~_i = m_i / g'(mu_i).
// For canonical links w~_i = m_i * V(mu_i).  The normal family is its own
// linearization: returns (y, m) unchanged.
WorkingData working_response(const FamilySpec& spec, const VectorXd& y, const VectorXd& means);

// Family-specific starting means before any fit exists.
// normal: y;  poisson: y + 0.1;  binomial: (m*y + 0.5) / (m + 1).
VectorXd initial_means(const FamilySpec& spec, const VectorXd& y);

// Throws DomainError if y is outside the family's response domain
// (Poisson y >= 0; binomial y in [0,1] as a proportion of m trials).
void validate_response(const FamilySpec& spec, const VectorXd& y);

}  // namespace ebvs
