#include "ebvs/family.hpp"

#include <cmath>

namespace ebvs {

Family family_from_string(const std::string& name) {
    if (name == "normal" || name == "gaussian") return Family::normal;
    if (name == "binomial") return Family::binomial;
    if (name == "poisson") return Family::poisson;
    throw ValidationError("unknown family '" + name + "' (expected normal, binomial or poisson)");
}

std::string to_string(Family f) {
    switch (f) {
        case Family::normal: return "normal";
        case Family::binomial: return "binomial";
        case Family::poisson: return "poisson";
    }
    throw ContractViolation("unreachable family value");
}

VectorXd FamilySpec::weights_or_ones(Eigen::Index n) const {
    if (weights.size() == 0) return VectorXd::Ones(n);
    if (weights.size() != n)
        throw ValidationError("prior weights have size " + std::to_string(weights.size()) +
                              ", expected " + std::to_string(n));
    if ((weights.array() <= 0.0).any())
        throw DomainError("prior weights must be positive");
    return weights;
}

double link(Family f, double mean) {
    switch (f) {
        case Family::normal:
            return mean;
        case Family::poisson:
            if (mean <= 0.0) throw DomainError("poisson mean must be positive");
            return std::log(mean);
        case Family::binomial:
            if (mean <= 0.0 || mean >= 1.0) throw DomainError("binomial mean must lie in (0,1)");
            return std::log(mean) - std::log1p(-mean);
    }
    throw ContractViolation("unreachable family value");
}

double inverse_link(Family f, double eta) {
    switch (f) {
        case Family::normal:
            return eta;
        case Family::poisson:
            return std::exp(eta);
        case Family::binomial:
            // logistic, stable on both tails
            return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta))
                              : std::exp(eta) / (1.0 + std::exp(eta));
    }
    throw ContractViolation("unreachable family value");
}

double cumulant(Family f, double eta) {
    switch (f) {
        case Family::normal:
            return 0.5 * eta * eta;
        case Family::poisson:
            return std::exp(eta);
        case Family::binomial:
            // log(1 + e^eta) without overflow
            return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    }
    throw ContractViolation("unreachable family value");
}

double variance_function(Family f, double mean) {
    switch (f) {
        case Family::normal:
            return 1.0;
        case Family::poisson:
            if (mean <= 0.0) throw DomainError("poisson mean must be positive");
            return mean;
        case Family::binomial:
            if (mean <= 0.0 || mean >= 1.0) throw DomainError("binomial mean must lie in (0,1)");
            return mean * (1.0 - mean);
    }
    throw ContractViolation("unreachable family value");
}

WorkingData working_response(const FamilySpec& spec, const VectorXd& y, const VectorXd& means) {
    const Eigen::Index n = y.size();
    if (means.size() != n)
        throw ValidationError("means and response have different lengths");
    VectorXd m = spec.weights_or_ones(n);

    WorkingData out;
    out.y_tilde.resize(n);
    out.w_tilde.resize(n);

    if (spec.family == Family::normal) {
        out.y_tilde = y;
        out.w_tilde = m;
        return out;
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        double mu = means[i];
        // clamp into the link's domain rather than failing mid-fit
        if (spec.family == Family::poisson) {
            if (mu < kMeanFloor) { mu = kMeanFloor; out.clamped = true; }
        } else {  // binomial
            if (mu < kMeanFloor) { mu = kMeanFloor; out.clamped = true; }
            if (mu > 1.0 - kMeanFloor) { mu = 1.0 - kMeanFloor; out.clamped = true; }
        }
        // canonical link: g'(mu) = 1 / V(mu)
        const double v = variance_function(spec.family, mu);
        out.y_tilde[i] = link(spec.family, mu) + (y[i] - mu) / v;
        out.w_tilde[i] = m[i] * v;
    }
    return out;
}

VectorXd initial_means(const FamilySpec& spec, const VectorXd& y) {
    switch (spec.family) {
        case Family::normal:
            return y;
        case Family::poisson:
            return y.array() + 0.1;
        case Family::binomial: {
            VectorXd m = spec.weights_or_ones(y.size());
            return (m.array() * y.array() + 0.5) / (m.array() + 1.0);
        }
    }
    throw ContractViolation("unreachable family value");
}

void validate_response(const FamilySpec& spec, const VectorXd& y) {
    if (!y.allFinite()) throw DomainError("response contains non-finite values");
    switch (spec.family) {
        case Family::normal:
            return;
        case Family::poisson:
            if ((y.array() < 0.0).any()) throw DomainError("poisson response must be nonnegative");
            return;
        case Family::binomial:
            if ((y.array() < 0.0).any() || (y.array() > 1.0).any())
                throw DomainError("binomial response must lie in [0,1] as a proportion of trials");
            return;
    }
}

}  // namespace ebvs
