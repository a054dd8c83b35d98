#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ebvs/data.hpp"
#include "ebvs/selector.hpp"

namespace ebvs {

// Benchmark scenario identifiers: N1-N9 Gaussian, B1-B3 binomial, P1-P2
// Poisson.  Each has a fixed generative recipe; n and k can be overridden
// (0 keeps the scenario default).
struct ScenarioSpec {
    std::string id = "N1";
    Eigen::Index n = 0;
    Eigen::Index k = 0;
    std::uint64_t seed = 1;

    Eigen::Index n_default() const;
    Eigen::Index n_effective() const { return n > 0 ? n : n_default(); }
    Eigen::Index k_effective() const { return k > 0 ? k : 1000; }
    Family family() const;
    static std::vector<std::string> known_ids();
};

// One generated replication: model-ready data plus the true support.
struct SimulatedData {
    Dataset data;
    std::set<Eigen::Index> truth;  // indices into data.Z
};

// Deterministic in (spec, replication): the stream seed is derived from
// (spec.seed, scenario id, replication) only.
SimulatedData generate(const ScenarioSpec& spec, std::uint64_t replication);

// True/false positive counts of a selected set against the truth.
struct Score {
    Eigen::Index tp = 0;
    Eigen::Index fp = 0;
};
Score score_selection(const std::set<Eigen::Index>& truth,
                      const std::vector<Eigen::Index>& selected);

// Median of integer counts with the usual mid-average for even length (so
// half-integer medians are representable).
double median_count(std::vector<Eigen::Index> counts);

// Replicated study of the selector and the marginal-screen/BH baseline on a
// scenario.  Putative columns are standardized before fitting.  Replications
// run in parallel; results are deterministic in (spec, config) regardless of
// worker count.
struct StudyResult {
    ScenarioSpec spec;
    std::vector<Score> selector_scores;  // per replication
    std::vector<Score> baseline_scores;
    double selector_tp_median = 0.0;
    double selector_fp_median = 0.0;
    double baseline_tp_median = 0.0;
    double baseline_fp_median = 0.0;
    double seconds = 0.0;
};
StudyResult run_study(const ScenarioSpec& spec, const SelectorConfig& config,
                      int replications, bool run_baseline = true);

// The BH-at-level baseline on one dataset (the FDR comparison row).
std::vector<Eigen::Index> bh_baseline(const Dataset& data, double level = 0.05);

}  // namespace ebvs
