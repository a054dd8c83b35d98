#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ebvs/data.hpp"
#include "ebvs/likelihood.hpp"

namespace ebvs {

enum class SelectMode { greedy, weighted };
enum class InitStrategy { bh_screen, all_null, user_provided };

SelectMode select_mode_from_string(const std::string& s);
std::string to_string(SelectMode m);

struct SelectorConfig {
    SelectMode mode = SelectMode::greedy;
    double delta = 0.0;               // acceptance threshold on the loglik gain
    InitStrategy init = InitStrategy::bh_screen;
    VectorXi gamma_init;              // consulted when init == user_provided
    std::uint64_t rng_seed = 1;
    int restarts = 10;                // multi_run only
    double neighbor_threshold = 0.75;
    Eigen::Index max_outer = 0;       // 0 means 20 * K
    double bh_level = 0.05;
    int screen_fallback = 5;          // seeds when the BH screen is empty
    double mstep_tol = 1e-8;
    int mstep_max_inner = 100;
    bool refit_summary = true;        // fit the selected model for reporting
};

// Float-noise guard: deltas must clear max(config.delta, kDeltaEpsilon) so a
// user delta of 0 cannot loop on round-off.
inline constexpr double kDeltaEpsilon = 1e-10;

struct Move {
    Eigen::Index iteration;  // 1-based outer iteration
    Eigen::Index column;
    int from;
    int to;
    double gain;             // the d value that justified the move
};

struct Neighbor {
    Eigen::Index column;
    double correlation;
};

struct RefitSummary {
    std::vector<std::string> names;  // locked-in names then selected z names
    VectorXd coef;
    VectorXd se;
    double aic = 0.0;
    double deviance = 0.0;
    double null_deviance = 0.0;
    double r_squared = 0.0;
    bool converged = false;
};

struct FitResult {
    VectorXi gamma;
    std::vector<Eigen::Index> selected;      // ascending active indices
    std::vector<int> selected_signs;
    Theta theta;
    std::vector<double> loglik_trace;        // post-M-step value per outer iteration
    std::vector<Move> moves;
    Eigen::Index n_outer = 0;
    bool converged = false;
    std::vector<std::string> warnings;
    std::map<Eigen::Index, std::vector<Neighbor>> neighbors;
    std::optional<RefitSummary> refit;
    double runtime_seconds = 0.0;
    std::uint64_t seed = 0;
    std::string mode;
    double delta = 0.0;
};

// Initial assignment per strategy.  bh_screen marks BH discoveries (level
// config.bh_level) with the sign of the marginal coefficient; when BH returns
// nothing it seeds the config.screen_fallback smallest marginal p-values so
// the fit does not start in the absorbing all-null state.
MixtureAssignment initialize_gamma(const Dataset& data, const SelectorConfig& config);

// Pick the move from a sweep.  Greedy takes the largest d, ties broken by
// smaller column then label order (-1, 0, +1); weighted samples
// proportionally to d over the candidates above threshold.  Throws
// ContractViolation when no candidate clears the threshold (callers check
// emptiness first).
std::pair<Eigen::Index, int> choose_candidate(const MatrixXd& d, const MixtureAssignment& assign,
                                              double threshold, SelectMode mode,
                                              std::mt19937_64& rng);

// One full selection fit (generalized alternating maximization: full M-step,
// then one accepted coordinate move per outer iteration).
FitResult run(const Dataset& data, const SelectorConfig& config);

struct MultiRunResult {
    std::vector<FitResult> runs;
    std::size_t best = 0;                       // argmax final log-likelihood
    std::vector<Eigen::Index> union_selected;   // ascending
    std::map<Eigen::Index, double> frequency;   // fraction of runs selecting col
};

// `restarts` independent runs with per-run derived seeds (deterministic in
// config.rng_seed, independent of thread schedule).
MultiRunResult multi_run(const Dataset& data, const SelectorConfig& config);

struct SequentialResult {
    std::vector<FitResult> rounds;
    std::vector<Eigen::Index> promoted;  // original Z indices, promotion order
    FitResult final_fit;                 // last round (empty selection)
};

// Repeatedly promote the selected columns into the locked-in design and rerun
// on the remaining putative columns until a round selects nothing.
SequentialResult sequential_fit(const Dataset& data, const SelectorConfig& config);

// For each selected column, the other putative columns whose absolute sample
// correlation with it meets `threshold`.  Zero-variance columns cannot be
// scored and are reported through `warnings` instead.
std::map<Eigen::Index, std::vector<Neighbor>> correlated_neighbors(
    const Dataset& data, const std::vector<Eigen::Index>& selected, double threshold,
    std::vector<std::string>* warnings = nullptr);

// Selected columns plus every reported correlated companion, ascending and
// deduplicated.  Because a move that adds a near-duplicate of an active column
// cannot pay for itself, the fit keeps one representative per tightly
// correlated group; the companions carry interchangeable signal, so reports
// and study scores count them as part of the finding.
std::vector<Eigen::Index> relevant_variables(const FitResult& fit);

}  // namespace ebvs
