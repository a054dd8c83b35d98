// Acceptance gate: ten end-to-end checks, one PASS/FAIL/SKIP line each.
//
// Every tolerance and time budget is pinned right here as a named constant.
// The binary exits nonzero when any executed criterion fails; the two
// case-study checks are skipped (not failed) when the datasets are not
// bundled under data/ -- see README.md for the export recipe.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ebvs/errors.hpp"
#include "ebvs/likelihood.hpp"
#include "ebvs/pipeline.hpp"
#include "ebvs/selector.hpp"
#include "ebvs/simulate.hpp"
#include "oracles.hpp"

using namespace ebvs;
namespace fs = std::filesystem;

namespace {

// --- pinned tolerances ------------------------------------------------------
constexpr double kOracleRelTol = 1e-9;   // factored engine vs dense reference
constexpr int kOracleInstances = 200;
constexpr double kStationarityBump = 1e-4;   // parameter perturbation size
constexpr double kStationaritySlack = 1e-8;  // allowed log-likelihood gain
constexpr int kStationarityInstances = 20;
constexpr int kStudyReps = 30;
constexpr std::uint64_t kStudySeed = 1;
constexpr double kRiboflavinMinR2 = 0.80;
constexpr double kRiboflavinMaxAic = 80.0;
constexpr int kRiboflavinRestarts = 100;
constexpr double kSurvivalDeviance = 39.0;      // +-20% band
constexpr double kSurvivalDevianceBand = 0.20;
constexpr double kEventWindowYears = 0.25;      // three-month outcome window

struct Outcome {
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

double rel_err(double got, double want) {
    return std::abs(got - want) / (1.0 + std::abs(want));
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// --- criterion 1: factored covariance algebra vs a dense reference ----------
Outcome oracle_equivalence() {
    std::mt19937_64 rng(881);
    std::uniform_int_distribution<int> pick_n(8, 30), pick_k(3, 40), pick_l(0, 8);
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    for (int rep = 0; rep < kOracleInstances; ++rep) {
        const Eigen::Index n = pick_n(rng);
        const Eigen::Index k = pick_k(rng);
        const Eigen::Index l = std::min<Eigen::Index>(pick_l(rng), k);
        const auto inst = oracle::random_instance(rng, n, k, l, rep % 3 == 0, rep % 4 == 0);
        const PrecisionCache cache(inst.data, inst.working, inst.assign, inst.theta);
        const MatrixXd sigma = oracle::dense_sigma(inst.working, inst.data, inst.assign, inst.theta);
        Eigen::LLT<MatrixXd> llt(sigma);

        VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
        const VectorXd slow = llt.solve(v);
        worst = std::max(worst, (cache.apply_inverse(v) - slow).norm() / (1.0 + slow.norm()));
        worst = std::max(worst, rel_err(cache.log_det(), oracle::dense_log_det(sigma)));
        const double ll = complete_loglik(inst.data, inst.working, inst.assign, inst.theta);
        worst = std::max(
            worst, rel_err(ll, oracle::dense_loglik(inst.working, inst.data, inst.assign,
                                                    inst.theta)));
    }
    Outcome o;
    o.pass = worst <= kOracleRelTol;
    o.detail = fmt("%d random instances (N<=30, K<=40, L<=8): max relative error %.2e vs dense "
                   "solve/log-det/log-likelihood (tol %.0e)",
                   kOracleInstances, worst, kOracleRelTol);
    return o;
}

// --- criterion 2: ascent and termination properties --------------------------
struct PropertyFit {
    Dataset data;
    SelectorConfig config;
    FitResult fit;
};

Dataset synth_regression(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k,
                         const std::vector<std::pair<Eigen::Index, double>>& effects,
                         Family family) {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif;
    Dataset data;
    data.family.family = family;
    data.X = MatrixXd::Ones(n, 1);
    data.x_names = {"(Intercept)"};
    data.Z.resize(n, k);
    for (Eigen::Index c = 0; c < k; ++c)
        for (Eigen::Index i = 0; i < n; ++i) data.Z(i, c) = gauss(rng);
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double eta = family == Family::poisson ? 1.5 : 0.0;
        for (const auto& [col, b] : effects) eta += b * data.Z(i, col);
        switch (family) {
            case Family::normal: data.y[i] = eta + 0.5 * gauss(rng); break;
            case Family::binomial:
                data.y[i] = unif(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
                break;
            case Family::poisson: {
                std::poisson_distribution<long> pois(std::exp(std::min(eta, 4.0)));
                data.y[i] = static_cast<double>(pois(rng));
                break;
            }
        }
    }
    return data;
}

std::string gamma_key(const VectorXi& g) {
    return std::string(reinterpret_cast<const char*>(g.data()),
                       static_cast<std::size_t>(g.size()) * sizeof(int));
}

Outcome ascent_properties() {
    std::mt19937_64 rng(4417);
    std::vector<PropertyFit> fits;
    const std::vector<std::pair<Eigen::Index, double>> small = {{1, 2.0}, {4, -1.5}};
    const std::vector<std::pair<Eigen::Index, double>> wide = {
        {0, 1.8}, {7, -2.2}, {31, 1.2}, {90, 2.5}};

    for (int i = 0; i < 24; ++i) {  // Gaussian fits of varied shape
        PropertyFit pf;
        const Eigen::Index n = 40 + 20 * (i % 3);
        const Eigen::Index k = (i % 2 == 0) ? 30 : 150;
        pf.data = synth_regression(rng, n, k, k > 100 ? wide : small, Family::normal);
        pf.config.rng_seed = 100 + static_cast<std::uint64_t>(i);
        if (i % 6 == 5) pf.config.delta = 0.5;
        if (i % 8 == 7) pf.config.mode = SelectMode::weighted;
        pf.config.refit_summary = false;
        pf.fit = run(pf.data, pf.config);
        fits.push_back(std::move(pf));
    }
    for (int i = 0; i < 4; ++i) {  // binomial and Poisson coverage
        PropertyFit pb;
        pb.data = synth_regression(rng, 150, 12, small, Family::binomial);
        pb.config.rng_seed = 300 + static_cast<std::uint64_t>(i);
        pb.config.refit_summary = false;
        pb.fit = run(pb.data, pb.config);
        fits.push_back(std::move(pb));

        PropertyFit pp;
        pp.data = synth_regression(rng, 120, 15, small, Family::poisson);
        pp.config.rng_seed = 400 + static_cast<std::uint64_t>(i);
        pp.config.refit_summary = false;
        pp.fit = run(pp.data, pp.config);
        fits.push_back(std::move(pp));
    }

    int converged_count = 0;
    int checked_terminal = 0;
    for (const PropertyFit& pf : fits) {
        const FitResult& fit = pf.fit;
        const double delta_eff = std::max(pf.config.delta, kDeltaEpsilon);

        // every accepted move strictly clears the improvement threshold
        for (const Move& m : fit.moves)
            if (!(m.gain > delta_eff))
                return {false, false,
                        fmt("move on column %ld gained %.3e, not above the threshold %.3e",
                            static_cast<long>(m.column), m.gain, delta_eff)};

        // no assignment state is revisited along the accepted path; a fit that
        // re-linearizes (binomial/Poisson) may legally close a loop, but then
        // the engine must have stopped on that very move and said so
        VectorXi g = fit.gamma;
        for (auto it = fit.moves.rbegin(); it != fit.moves.rend(); ++it) {
            if (g[it->column] != it->to)
                return {false, false, "move log does not replay back to the initial state"};
            g[it->column] = it->from;
        }
        std::set<std::string> seen{gamma_key(g)};
        for (std::size_t mi = 0; mi < fit.moves.size(); ++mi) {
            const Move& m = fit.moves[mi];
            g[m.column] = m.to;
            if (seen.insert(gamma_key(g)).second) continue;
            const bool loop_allowed =
                pf.data.family.family != Family::normal && mi + 1 == fit.moves.size() &&
                std::find(fit.warnings.begin(), fit.warnings.end(),
                          "assignment state revisited after relinearization; stopping") !=
                    fit.warnings.end();
            if (!loop_allowed)
                return {false, false,
                        fmt("assignment state silently revisited after the move on column %ld",
                            static_cast<long>(m.column))};
        }

        // the trace never falls by more than float noise (Gaussian fits keep
        // one linearization throughout, so the trace is directly comparable)
        if (pf.data.family.family == Family::normal) {
            for (std::size_t t = 1; t < fit.loglik_trace.size(); ++t) {
                const double prev = fit.loglik_trace[t - 1];
                if (!(fit.loglik_trace[t] >= prev - 1e-7 * (1.0 + std::abs(prev))))
                    return {false, false,
                            fmt("log-likelihood trace fell from %.6f to %.6f", prev,
                                fit.loglik_trace[t])};
            }
        }

        // a converged Gaussian fit really is terminal: re-sweeping every
        // single-coordinate move at the final state clears nothing
        if (fit.converged && pf.data.family.family == Family::normal) {
            ++converged_count;
            const WorkingData working{pf.data.y, VectorXd::Ones(pf.data.n()), false};
            const MixtureAssignment assign(fit.gamma);
            const PrecisionCache cache(pf.data, working, assign, fit.theta);
            const DeltaSweep sweep = delta_sweep(pf.data, working, assign, fit.theta, cache);
            double residual = -std::numeric_limits<double>::infinity();
            for (Eigen::Index k = 0; k < sweep.d.cols(); ++k)
                for (int row = 0; row < 3; ++row)
                    if (row - 1 != assign.label(k)) residual = std::max(residual, sweep.d(row, k));
            ++checked_terminal;
            if (!(residual <= delta_eff))
                return {false, false,
                        fmt("converged fit still has an improving move of %.3e (threshold %.3e)",
                            residual, delta_eff)};
        } else if (fit.converged) {
            ++converged_count;
        }
    }
    if (converged_count < 20 || checked_terminal < 10)
        return {false, false,
                fmt("property batch too weak: %d converged fits, %d terminal sweeps",
                    converged_count, checked_terminal)};
    return {true, false,
            fmt("%zu fits (3 families, greedy+weighted): every move gain above threshold, no "
                "state revisited, traces ascend, %d terminal states re-swept clean",
                fits.size(), checked_terminal)};
}

// --- criteria 3-8: replicated scenario studies -------------------------------
StudyResult study(const std::string& id, Eigen::Index n_override, bool baseline) {
    ScenarioSpec spec;
    spec.id = id;
    spec.n = n_override;
    spec.seed = kStudySeed;
    SelectorConfig config;
    config.rng_seed = kStudySeed;
    return run_study(spec, config, kStudyReps, baseline);
}

Outcome study_n1_exact() {
    const StudyResult r = study("N1", 0, false);
    Outcome o;
    o.pass = r.selector_tp_median == 1.0 && r.selector_fp_median == 0.0;
    o.detail = fmt("N1 medians (%.1f, %.1f), required exactly (1, 0); %d reps, seed %llu",
                   r.selector_tp_median, r.selector_fp_median, kStudyReps,
                   static_cast<unsigned long long>(kStudySeed));
    return o;
}

Outcome study_n5() {
    const StudyResult r = study("N5", 0, false);
    Outcome o;
    o.pass = r.selector_tp_median >= 19.0 && r.selector_fp_median == 0.0;
    o.detail = fmt("N5 medians (%.1f, %.1f), required TP >= 19 and FP = 0",
                   r.selector_tp_median, r.selector_fp_median);
    return o;
}

Outcome study_n8() {
    const StudyResult r = study("N8", 0, false);
    Outcome o;
    o.pass = r.selector_tp_median >= 9.0 && r.selector_fp_median == 0.0;
    o.detail = fmt("N8 medians (%.1f, %.1f), required TP >= 9 and FP = 0",
                   r.selector_tp_median, r.selector_fp_median);
    return o;
}

Outcome study_n2_small_sample() {
    const StudyResult r = study("N2", 50, false);
    Outcome o;
    o.pass = r.selector_tp_median >= 1.0 && r.selector_tp_median <= 4.0 &&
             r.selector_fp_median <= 6.0;
    o.detail = fmt("N2 at N=50 medians (%.1f, %.1f), required TP in [1, 4] and FP <= 6",
                   r.selector_tp_median, r.selector_fp_median);
    return o;
}

Outcome study_glm_scenarios() {
    const StudyResult b3 = study("B3", 0, false);
    const StudyResult p2 = study("P2", 0, false);
    const bool b3_ok = std::abs(b3.selector_tp_median - 5.0) <= 1.0 && b3.selector_fp_median <= 1.0;
    const bool p2_ok = std::abs(p2.selector_tp_median - 7.0) <= 1.0 && p2.selector_fp_median <= 1.0;
    Outcome o;
    o.pass = b3_ok && p2_ok;
    o.detail = fmt("B3 medians (%.1f, %.1f) vs (5, 0), P2 medians (%.1f, %.1f) vs (7, 0); "
                   "required TP within +-1 and FP <= 1",
                   b3.selector_tp_median, b3.selector_fp_median, p2.selector_tp_median,
                   p2.selector_fp_median);
    return o;
}

Outcome baseline_crosscheck() {
    auto medians = [](const std::string& id) {
        ScenarioSpec spec;
        spec.id = id;
        spec.seed = kStudySeed;
        std::vector<Eigen::Index> tp, fp;
        for (int rep = 0; rep < kStudyReps; ++rep) {
            SimulatedData sim = generate(spec, static_cast<std::uint64_t>(rep));
            standardize_putative(sim.data);
            const Score s = score_selection(sim.truth, bh_baseline(sim.data));
            tp.push_back(s.tp);
            fp.push_back(s.fp);
        }
        return std::pair<double, double>{median_count(tp), median_count(fp)};
    };
    const auto n1 = medians("N1");
    const auto n6 = medians("N6");
    Outcome o;
    o.pass = n1.first == 1.0 && n1.second == 0.0 && n6.first == 2.0 && n6.second == 0.0;
    o.detail = fmt("marginal-screen baseline: N1 medians (%.1f, %.1f) vs required (1, 0); "
                   "N6 medians (%.1f, %.1f) vs required (2, 0)",
                   n1.first, n1.second, n6.first, n6.second);
    return o;
}

// --- criterion 9: stationarity of the closed-form parameter updates ----------
Outcome mstep_stationarity() {
    std::mt19937_64 rng(515);
    std::normal_distribution<double> gauss;
    std::uniform_int_distribution<int> pick_n(40, 80), pick_k(12, 30), pick_l(2, 5);

    double worst_gain = -std::numeric_limits<double>::infinity();
    for (int repi = 0; repi < kStationarityInstances; ++repi) {
        const Eigen::Index n = pick_n(rng);
        const Eigen::Index k = pick_k(rng);
        const Eigen::Index l = pick_l(rng);
        const bool structured = repi % 10 < 7;  // a few pure-noise boundary cases

        Dataset data;
        data.family.family = Family::normal;
        data.X.resize(n, 2);
        data.X.col(0).setOnes();
        for (Eigen::Index i = 0; i < n; ++i) data.X(i, 1) = gauss(rng);
        data.Z.resize(n, k);
        for (Eigen::Index c = 0; c < k; ++c)
            for (Eigen::Index i = 0; i < n; ++i) data.Z(i, c) = gauss(rng);

        VectorXi gamma = VectorXi::Zero(k);
        for (Eigen::Index a = 0; a < l; ++a) gamma[a] = (a % 2 == 0) ? 1 : -1;
        const MixtureAssignment assign(gamma);

        data.y = 0.5 * data.X.col(0) - 0.3 * data.X.col(1);
        for (Eigen::Index i = 0; i < n; ++i) data.y[i] += 0.4 * gauss(rng);
        if (structured)
            for (Eigen::Index a = 0; a < l; ++a) {
                const double u = 1.5 + 0.45 * gauss(rng);  // unit effect around the mean
                data.y += static_cast<double>(gamma[a]) * u * data.Z.col(a);
            }

        const WorkingData working{data.y, VectorXd::Ones(n), false};
        Theta theta;
        theta.beta = VectorXd::Zero(2);
        theta.mu = 1.0;
        theta.sigma2 = 0.3;
        theta.phi = 1.0;
        const auto counts = assign.counts();
        theta.p = {static_cast<double>(counts[0]) / k, static_cast<double>(counts[1]) / k,
                   static_cast<double>(counts[2]) / k};

        const MStepResult ms = m_step(data, working, assign, theta, 1e-10, 3000);
        const double at_opt = complete_loglik(data, working, assign, ms.theta);

        std::vector<Theta> probes;
        for (double dir : {kStationarityBump, -kStationarityBump}) {
            for (Eigen::Index j = 0; j < ms.theta.beta.size(); ++j) {
                Theta t = ms.theta;
                t.beta[j] += dir;
                probes.push_back(t);
            }
            Theta tm = ms.theta;
            tm.mu += dir;
            probes.push_back(tm);
            Theta ts = ms.theta;
            ts.sigma2 += dir;
            if (ts.sigma2 >= 0.0) probes.push_back(ts);
            Theta tp = ms.theta;
            tp.phi += dir;
            if (tp.phi > 0.0) probes.push_back(tp);
            // probability probes move mass between two components, staying
            // on the simplex
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    if (a == b) continue;
                    Theta tt = ms.theta;
                    tt.p[a] += std::abs(dir);
                    tt.p[b] -= std::abs(dir);
                    if (tt.p[b] >= 0.0 && tt.p[a] <= 1.0) probes.push_back(tt);
                }
        }
        for (const Theta& probe : probes) {
            const double ll = complete_loglik(data, working, assign, probe);
            worst_gain = std::max(worst_gain, ll - at_opt);
            if (ll - at_opt > kStationaritySlack)
                return {false, false,
                        fmt("instance %d: a +-%.0e parameter bump raised the log-likelihood "
                            "by %.3e (allowed %.0e)",
                            repi, kStationarityBump, ll - at_opt, kStationaritySlack)};
        }
    }
    return {true, false,
            fmt("%d random Gaussian instances: worst log-likelihood change over all +-%.0e "
                "parameter bumps is %.3e (must not exceed %.0e)",
                kStationarityInstances, kStationarityBump, worst_gain, kStationaritySlack)};
}

// --- criterion 10: bundled case-study datasets (soft, data-gated) ------------
Outcome riboflavin_check(std::string& note) {
    Schema schema;
    schema.roles["y"] = ColumnRole::response;
    schema.has_default = true;
    schema.default_role = ColumnRole::putative;
    const RawTable table = load_csv_file("data/riboflavin.csv", schema);
    FamilySpec family;  // normal response
    Dataset data = build_dataset(table, schema, family);
    standardize_putative(data);

    SelectorConfig greedy;
    greedy.rng_seed = kStudySeed;
    const FitResult fit = run(data, greedy);
    if (!fit.refit) return {false, false, "greedy fit produced no refit summary"};
    const double r2 = fit.refit->r_squared;
    const double aic = fit.refit->aic;

    SelectorConfig weighted;
    weighted.mode = SelectMode::weighted;
    weighted.restarts = kRiboflavinRestarts;
    weighted.rng_seed = kStudySeed;
    weighted.refit_summary = false;
    const MultiRunResult multi = multi_run(data, weighted);
    std::set<std::string> names;
    for (Eigen::Index k : multi.union_selected) names.insert(data.z_name(k));
    const bool genes = names.count("YXLD_at") == 1 && names.count("YOAB_at") == 1;

    note = fmt("riboflavin: greedy R2 %.3f (>= %.2f), AIC %.1f (<= %.0f), %d-restart union "
               "holds YXLD_at %s / YOAB_at %s",
               r2, kRiboflavinMinR2, aic, kRiboflavinMaxAic, kRiboflavinRestarts,
               names.count("YXLD_at") ? "yes" : "NO", names.count("YOAB_at") ? "yes" : "NO");
    return {r2 >= kRiboflavinMinR2 && aic <= kRiboflavinMaxAic && genes, false, note};
}

Outcome survival_check(std::string& note) {
    // Per-subject artificial-Poisson model: the response is an event within
    // the three-month window, log follow-up time and scaled age ride along
    // as locked-in covariates, the 70 expression columns are putative.
    Schema schema;
    schema.roles["time"] = ColumnRole::time;
    schema.roles["event"] = ColumnRole::event;
    schema.roles["Age"] = ColumnRole::locked_in;
    for (const char* c : {"Diam", "N", "ER", "Grade"}) schema.roles[c] = ColumnRole::ignore;
    schema.has_default = true;
    schema.default_role = ColumnRole::putative;
    const RawTable table = load_csv_file("data/nki70.csv", schema);

    int time_col = -1, event_col = -1, age_col = -1;
    std::vector<int> gene_cols;
    std::vector<std::string> gene_names;
    for (std::size_t c = 0; c < table.names.size(); ++c) {
        switch (schema.role_of(table.names[c])) {
            case ColumnRole::time: time_col = table.value_col[c]; break;
            case ColumnRole::event: event_col = table.value_col[c]; break;
            case ColumnRole::locked_in: age_col = table.value_col[c]; break;
            case ColumnRole::putative:
                gene_cols.push_back(table.value_col[c]);
                gene_names.push_back(table.names[c]);
                break;
            default: break;
        }
    }
    if (time_col < 0 || event_col < 0 || age_col < 0)
        return {false, false, "nki70.csv lacks time/event/Age columns"};

    const Eigen::Index n = table.n_rows();
    Dataset data;
    data.family.family = Family::poisson;
    data.y.resize(n);
    data.X.resize(n, 3);
    data.x_names = {"(Intercept)", "log_time", "age_scaled"};
    data.Z.resize(n, static_cast<Eigen::Index>(gene_cols.size()));
    data.z_names = gene_names;
    const double age_mean = table.values.col(age_col).mean();
    const double age_sd = std::sqrt((table.values.col(age_col).array() - age_mean).square().sum() /
                                    static_cast<double>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = table.values(i, time_col);
        data.y[i] = (table.values(i, event_col) != 0.0 && t < kEventWindowYears) ? 1.0 : 0.0;
        data.X(i, 0) = 1.0;
        data.X(i, 1) = std::log(t);
        data.X(i, 2) = (table.values(i, age_col) - age_mean) / age_sd;
        for (std::size_t c = 0; c < gene_cols.size(); ++c)
            data.Z(i, static_cast<Eigen::Index>(c)) = table.values(i, gene_cols[c]);
    }
    data.validate();
    standardize_putative(data);

    SelectorConfig config;
    config.rng_seed = kStudySeed;
    const FitResult fit = run(data, config);
    if (!fit.refit) return {false, false, "survival fit produced no refit summary"};
    const double dev = fit.refit->deviance;
    const double lo = kSurvivalDeviance * (1.0 - kSurvivalDevianceBand);
    const double hi = kSurvivalDeviance * (1.0 + kSurvivalDevianceBand);
    note = fmt("nki70: refit residual deviance %.1f, required in [%.1f, %.1f]", dev, lo, hi);
    return {dev >= lo && dev <= hi, false, note};
}

Outcome case_studies() {
    const bool have_ribo = fs::exists("data/riboflavin.csv");
    const bool have_nki = fs::exists("data/nki70.csv");
    if (!have_ribo && !have_nki)
        return {false, true,
                "data/riboflavin.csv and data/nki70.csv not bundled; export them as described "
                "in README.md to enable this check"};
    Outcome o;
    o.pass = true;
    std::string parts;
    if (have_ribo) {
        std::string note;
        const Outcome r = riboflavin_check(note);
        o.pass = o.pass && r.pass;
        parts += r.detail;
    } else {
        parts += "riboflavin: skipped (data/riboflavin.csv missing)";
    }
    parts += "; ";
    if (have_nki) {
        std::string note;
        const Outcome s = survival_check(note);
        o.pass = o.pass && s.pass;
        parts += s.detail;
    } else {
        parts += "nki70: skipped (data/nki70.csv missing)";
    }
    o.detail = parts;
    return o;
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* title;
        double budget_s;
        std::function<Outcome()> fn;
    };
    const std::vector<Entry> entries = {
        {1, "factored covariance vs dense reference", 10.0, oracle_equivalence},
        {2, "ascent and termination properties", 60.0, ascent_properties},
        {3, "scenario N1 study, exact medians", 300.0, study_n1_exact},
        {4, "scenario N5 study", 900.0, study_n5},
        {5, "scenario N8 study", 900.0, study_n8},
        {6, "scenario N2 study at N=50", 600.0, study_n2_small_sample},
        {7, "scenario B3 and P2 studies", 1200.0, study_glm_scenarios},
        {8, "marginal-screen baseline cross-check", 600.0, baseline_crosscheck},
        {9, "parameter-update stationarity", 60.0, mstep_stationarity},
        {10, "bundled case-study datasets", 1200.0, case_studies},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = e.fn();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.skipped && elapsed > e.budget_s) {
            o.pass = false;
            o.detail += fmt(" [budget %.0fs exceeded]", e.budget_s);
        }
        const char* verdict = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
        std::printf("criterion %2d  %-4s  %6.1fs  %s -- %s\n", e.id, verdict, elapsed, e.title,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.skipped && !o.pass) ++failures;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all executed criteria passed\n");
    return 0;
}
