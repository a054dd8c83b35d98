#include "ebvs/report.hpp"

#include <iomanip>
#include <sstream>

namespace ebvs {

std::string text_report(const FitResult& result, const Dataset& data,
                        const Standardization* std_info) {
    std::ostringstream os;
    os << "selection fit (" << result.mode << " mode, family " << to_string(data.family.family)
       << ", delta " << result.delta << ", seed " << result.seed << ")\n";
    os << "  status: " << (result.converged ? "converged" : "not converged") << " after "
       << result.n_outer << " outer iterations, " << result.moves.size() << " moves, "
       << std::fixed << std::setprecision(2) << result.runtime_seconds << " s\n";
    if (!result.loglik_trace.empty())
        os << "  final log-likelihood: " << std::setprecision(4) << result.loglik_trace.back()
           << "\n";
    os.unsetf(std::ios::fixed);

    os << "  selected " << result.selected.size() << " of " << data.k()
       << " putative columns\n";
    for (std::size_t i = 0; i < result.selected.size(); ++i) {
        const Eigen::Index k = result.selected[i];
        os << "    " << data.z_name(k) << "  (component "
           << (result.selected_signs[i] > 0 ? "+1" : "-1") << ")\n";
    }

    os << "  mixture: p = (" << std::setprecision(4) << result.theta.p[0] << ", "
       << result.theta.p[1] << ", " << result.theta.p[2] << "), mu = " << result.theta.mu
       << ", sigma2 = " << result.theta.sigma2 << ", phi = " << result.theta.phi << "\n";

    if (result.refit) {
        const RefitSummary& rf = *result.refit;
        os << "  refit of the selected model:\n";
        VectorXd shown = rf.coef;
        if (std_info && !result.selected.empty()) {
            const Eigen::Index n_locked =
                static_cast<Eigen::Index>(rf.names.size() - result.selected.size());
            Eigen::Index intercept_idx = -1;
            for (Eigen::Index c = 0; c < n_locked; ++c)
                if (rf.names[static_cast<std::size_t>(c)] == "(Intercept)") intercept_idx = c;
            shown = unstandardize_coef(*std_info, result.selected, rf.coef, n_locked,
                                       intercept_idx);
            os << "    (coefficients on the original column scale)\n";
        }
        for (std::size_t i = 0; i < rf.names.size(); ++i)
            os << "    " << std::setw(20) << rf.names[i] << "  " << std::setprecision(6)
               << shown[static_cast<Eigen::Index>(i)] << "\n";
        if (data.family.family == Family::normal)
            os << "    AIC " << rf.aic << ", R^2 " << rf.r_squared << "\n";
        else
            os << "    AIC " << rf.aic << ", deviance " << rf.deviance << " (null "
               << rf.null_deviance << ")\n";
    }

    bool any_neighbors = false;
    for (const auto& [col, list] : result.neighbors)
        if (!list.empty()) any_neighbors = true;
    if (any_neighbors) {
        os << "  correlated neighbors of the selection:\n";
        for (const auto& [col, list] : result.neighbors) {
            if (list.empty()) continue;
            os << "    " << data.z_name(col) << ":";
            for (const Neighbor& nb : list)
                os << " " << data.z_name(nb.column) << " (" << std::setprecision(3)
                   << nb.correlation << ")";
            os << "\n";
        }
    }
    for (const std::string& w : result.warnings) os << "  warning: " << w << "\n";
    return os.str();
}

std::string text_report(const StudyResult& result) {
    std::ostringstream os;
    os << "scenario " << result.spec.id << "  (N = " << result.spec.n_effective()
       << ", K = " << result.spec.k_effective() << ", "
       << result.selector_scores.size() << " replications, " << std::fixed
       << std::setprecision(1) << result.seconds << " s)\n";
    os << "  method        median TP   median FP\n";
    os << "  selector      " << std::setw(9) << std::setprecision(1) << result.selector_tp_median
       << "   " << std::setw(9) << result.selector_fp_median << "\n";
    if (!result.baseline_scores.empty())
        os << "  bh_baseline   " << std::setw(9) << result.baseline_tp_median << "   "
           << std::setw(9) << result.baseline_fp_median << "\n";
    return os.str();
}

std::string tsv_report(const StudyResult& result) {
    std::ostringstream os;
    os << "scenario\tmethod\tn\tk\treplications\ttp_median\tfp_median\n";
    os << result.spec.id << "\tselector\t" << result.spec.n_effective() << "\t"
       << result.spec.k_effective() << "\t" << result.selector_scores.size() << "\t"
       << result.selector_tp_median << "\t" << result.selector_fp_median << "\n";
    if (!result.baseline_scores.empty())
        os << result.spec.id << "\tbh_baseline\t" << result.spec.n_effective() << "\t"
           << result.spec.k_effective() << "\t" << result.baseline_scores.size() << "\t"
           << result.baseline_tp_median << "\t" << result.baseline_fp_median << "\n";
    return os.str();
}

}  // namespace ebvs
