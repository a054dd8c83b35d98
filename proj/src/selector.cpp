#include "ebvs/selector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

#include "ebvs/glm_fit.hpp"
#include "ebvs/parallel.hpp"
#include "ebvs/screen.hpp"

namespace ebvs {

SelectMode select_mode_from_string(const std::string& s) {
    if (s == "greedy") return SelectMode::greedy;
    if (s == "weighted") return SelectMode::weighted;
    throw ValidationError("unknown selection mode '" + s + "' (expected greedy or weighted)");
}

std::string to_string(SelectMode m) {
    return m == SelectMode::greedy ? "greedy" : "weighted";
}

namespace {

std::string gamma_key(const VectorXi& g) {
    return std::string(reinterpret_cast<const char*>(g.data()), g.size() * sizeof(int));
}

double sample_variance(const VectorXd& v) {
    if (v.size() < 2) return 1.0;
    const double mean = v.mean();
    return std::max((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1), 1e-6);
}

Theta initial_theta(const Dataset& data) {
    Theta theta;
    theta.beta = VectorXd::Zero(data.j());
    theta.phi = data.family.dispersion_fixed() ? 1.0 : sample_variance(data.y);
    return theta;  // mu/sigma2/p are set by the first m_step
}

VectorXd fitted_means(const Dataset& data, const MixtureAssignment& assign, const Theta& theta) {
    VectorXd eta = data.offset_or_zero();
    if (data.j() > 0) eta.noalias() += data.X * theta.beta;
    if (theta.mu != 0.0)
        for (Eigen::Index k : assign.active())
            eta.noalias() += (theta.mu * assign.label(k)) * data.Z.col(k);
    VectorXd means(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double e = std::min(std::max(eta[i], -30.0), 30.0);
        means[i] = inverse_link(data.family.family,
                                data.family.family == Family::normal ? eta[i] : e);
    }
    return means;
}

RefitSummary build_refit(const Dataset& data, const std::vector<Eigen::Index>& selected) {
    const Eigen::Index J = data.j();
    const Eigen::Index p = J + static_cast<Eigen::Index>(selected.size());
    MatrixXd design(data.n(), p);
    RefitSummary out;
    for (Eigen::Index c = 0; c < J; ++c) {
        design.col(c) = data.X.col(c);
        out.names.push_back(c < static_cast<Eigen::Index>(data.x_names.size())
                                ? data.x_names[static_cast<std::size_t>(c)]
                                : "X" + std::to_string(c + 1));
    }
    for (std::size_t i = 0; i < selected.size(); ++i) {
        design.col(J + static_cast<Eigen::Index>(i)) = data.Z.col(selected[i]);
        out.names.push_back(data.z_name(selected[i]));
    }
    const GlmFit fit = glm_fit(data.y, design, data.family,
                               data.offset.size() ? data.offset : VectorXd());
    out.coef = fit.coef;
    out.se = fit.se;
    out.aic = fit.aic;
    out.deviance = fit.deviance;
    out.null_deviance = fit.null_deviance;
    out.r_squared = fit.r_squared;
    out.converged = fit.converged;
    return out;
}

}  // namespace

MixtureAssignment initialize_gamma(const Dataset& data, const SelectorConfig& config) {
    const Eigen::Index K = data.k();
    switch (config.init) {
        case InitStrategy::all_null:
            return MixtureAssignment::all_null(K);
        case InitStrategy::user_provided: {
            if (config.gamma_init.size() != K)
                throw ValidationError("gamma_init has size " +
                                      std::to_string(config.gamma_init.size()) + ", expected " +
                                      std::to_string(K));
            return MixtureAssignment(config.gamma_init);
        }
        case InitStrategy::bh_screen:
            break;
    }
    if (K == 0) return MixtureAssignment::all_null(0);

    const MarginalScreen screen = marginal_screen(data);
    const std::vector<bool> reject = bh_reject(screen.p_values, config.bh_level);
    VectorXi gamma = VectorXi::Zero(K);
    Eigen::Index hits = 0;
    for (Eigen::Index k = 0; k < K; ++k) {
        if (reject[static_cast<std::size_t>(k)]) {
            gamma[k] = screen.signs[k] != 0 ? screen.signs[k] : 1;
            ++hits;
        }
    }
    if (hits == 0 && config.screen_fallback > 0) {
        // an all-null start is absorbing (every activation is blocked by the
        // empty slab); seed the strongest marginal candidates instead
        std::vector<Eigen::Index> order(static_cast<std::size_t>(K));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            if (screen.p_values[a] != screen.p_values[b])
                return screen.p_values[a] < screen.p_values[b];
            return a < b;
        });
        const Eigen::Index take = std::min<Eigen::Index>(config.screen_fallback, K);
        for (Eigen::Index i = 0; i < take; ++i) {
            const Eigen::Index k = order[static_cast<std::size_t>(i)];
            gamma[k] = screen.signs[k] != 0 ? screen.signs[k] : 1;
        }
    }
    return MixtureAssignment(gamma);
}

std::pair<Eigen::Index, int> choose_candidate(const MatrixXd& d, const MixtureAssignment& assign,
                                              double threshold, SelectMode mode,
                                              std::mt19937_64& rng) {
    const Eigen::Index K = d.cols();
    if (d.rows() != 3 || K != assign.size())
        throw ValidationError("delta matrix must be 3 x K");

    if (mode == SelectMode::greedy) {
        Eigen::Index best_k = -1;
        int best_j = 0;
        double best_d = threshold;
        for (Eigen::Index k = 0; k < K; ++k) {
            for (int j = -1; j <= 1; ++j) {
                if (j == assign.label(k)) continue;
                const double v = d(j + 1, k);
                if (v > best_d) {  // strict: ties keep the earlier (k, j)
                    best_d = v;
                    best_k = k;
                    best_j = j;
                }
            }
        }
        if (best_k < 0) throw ContractViolation("choose_candidate called with no admissible move");
        return {best_k, best_j};
    }

    std::vector<std::pair<Eigen::Index, int>> atoms;
    std::vector<double> weights;
    for (Eigen::Index k = 0; k < K; ++k) {
        for (int j = -1; j <= 1; ++j) {
            if (j == assign.label(k)) continue;
            const double v = d(j + 1, k);
            if (v > threshold) {
                if (std::isinf(v)) return {k, j};  // infinitely preferred move
                atoms.emplace_back(k, j);
                weights.push_back(v);
            }
        }
    }
    if (atoms.empty()) throw ContractViolation("choose_candidate called with no admissible move");
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    return atoms[pick(rng)];
}

FitResult run(const Dataset& data, const SelectorConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    data.validate();
    const Eigen::Index K = data.k();
    const Eigen::Index max_outer = config.max_outer > 0 ? config.max_outer : 20 * std::max<Eigen::Index>(K, 1);

    FitResult result;
    result.seed = config.rng_seed;
    result.mode = to_string(config.mode);
    result.delta = config.delta;
    const double threshold = std::max(config.delta, kDeltaEpsilon);
    std::mt19937_64 rng(config.rng_seed);

    MixtureAssignment assign = initialize_gamma(data, config);
    Theta theta = initial_theta(data);
    WorkingData working = working_response(data.family, data.y, initial_means(data.family, data.y));

    std::unordered_set<std::string> seen;
    bool converged = false;
    bool revisited = false;
    for (Eigen::Index outer = 1; outer <= max_outer; ++outer) {
        if (data.family.family != Family::normal && outer > 1) {
            working = working_response(data.family, data.y, fitted_means(data, assign, theta));
            if (working.clamped &&
                std::find(result.warnings.begin(), result.warnings.end(),
                          "fitted means hit the domain guard during linearization") ==
                    result.warnings.end())
                result.warnings.push_back("fitted means hit the domain guard during linearization");
        }
        const MStepResult ms =
            m_step(data, working, assign, theta, config.mstep_tol, config.mstep_max_inner);
        theta = ms.theta;

        PrecisionCache cache(data, working, assign, theta);
        const double l = complete_loglik(data, working, assign, theta, cache);
        result.loglik_trace.push_back(l);

        const std::string key = gamma_key(assign.gamma());
        if (!seen.insert(key).second) {
            result.warnings.push_back("assignment state revisited after relinearization; stopping");
            revisited = true;
            break;
        }

        const DeltaSweep sweep = delta_sweep(data, working, assign, theta, cache);
        bool any = false;
        for (Eigen::Index k = 0; k < K && !any; ++k)
            for (int j = -1; j <= 1; ++j)
                if (j != assign.label(k) && sweep.d(j + 1, k) > threshold) { any = true; break; }
        if (!any) {
            converged = true;
            break;
        }

        const auto [k, j] = choose_candidate(sweep.d, assign, threshold, config.mode, rng);
        result.moves.push_back({outer, k, assign.label(k), j, sweep.d(j + 1, k)});
        assign.set(k, j);
        if (assign.n_active() == 0) {
            theta.mu = 0.0;
            theta.sigma2 = 0.0;
        }
    }

    if (!converged && !revisited) {
        result.warnings.push_back("outer iteration limit reached before convergence");
        // bring theta back in line with the final assignment
        const MStepResult ms =
            m_step(data, working, assign, theta, config.mstep_tol, config.mstep_max_inner);
        theta = ms.theta;
        result.loglik_trace.push_back(complete_loglik(data, working, assign, theta));
    }

    result.converged = converged;
    result.gamma = assign.gamma();
    result.selected.assign(assign.active().begin(), assign.active().end());
    for (Eigen::Index k : result.selected) result.selected_signs.push_back(assign.label(k));
    result.theta = theta;
    result.n_outer = static_cast<Eigen::Index>(result.loglik_trace.size());
    result.neighbors =
        correlated_neighbors(data, result.selected, config.neighbor_threshold, &result.warnings);
    if (config.refit_summary) {
        try {
            result.refit = build_refit(data, result.selected);
        } catch (const Error& e) {
            result.warnings.push_back(std::string("refit failed: ") + e.what());
        }
    }
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

MultiRunResult multi_run(const Dataset& data, const SelectorConfig& config) {
    const int restarts = std::max(1, config.restarts);
    MultiRunResult out;
    out.runs.resize(static_cast<std::size_t>(restarts));
    parallel_for(static_cast<std::size_t>(restarts), [&](std::size_t r) {
        SelectorConfig cfg = config;
        cfg.restarts = 1;
        cfg.rng_seed = derive_seed(config.rng_seed, r, 17);
        out.runs[r] = run(data, cfg);
    });

    std::set<Eigen::Index> everything;
    for (std::size_t r = 0; r < out.runs.size(); ++r) {
        const double lr = out.runs[r].loglik_trace.empty() ? kNegInf : out.runs[r].loglik_trace.back();
        const double lb =
            out.runs[out.best].loglik_trace.empty() ? kNegInf : out.runs[out.best].loglik_trace.back();
        if (lr > lb) out.best = r;
        for (Eigen::Index k : out.runs[r].selected) {
            everything.insert(k);
            out.frequency[k] += 1.0;
        }
    }
    for (auto& [k, v] : out.frequency) v /= static_cast<double>(restarts);
    out.union_selected.assign(everything.begin(), everything.end());
    return out;
}

SequentialResult sequential_fit(const Dataset& data, const SelectorConfig& config) {
    SequentialResult out;
    Dataset current = data;
    if (current.x_names.empty() && current.j() > 0)
        for (Eigen::Index c = 0; c < current.j(); ++c)
            current.x_names.push_back("X" + std::to_string(c + 1));
    std::vector<Eigen::Index> zmap(static_cast<std::size_t>(data.k()));
    std::iota(zmap.begin(), zmap.end(), 0);

    for (;;) {
        FitResult res = run(current, config);
        out.rounds.push_back(res);
        if (res.selected.empty()) {
            out.final_fit = std::move(res);
            break;
        }
        // promote this round's selection into the locked-in design
        const Eigen::Index j_old = current.j();
        const Eigen::Index won = static_cast<Eigen::Index>(res.selected.size());
        MatrixXd x_new(current.n(), j_old + won);
        if (j_old > 0) x_new.leftCols(j_old) = current.X;
        std::vector<std::string> keep_names;
        MatrixXd z_new(current.n(), current.k() - won);
        std::vector<Eigen::Index> zmap_new;
        Eigen::Index zc = 0;
        std::size_t next_sel = 0;
        for (Eigen::Index k = 0; k < current.k(); ++k) {
            if (next_sel < res.selected.size() && res.selected[next_sel] == k) {
                x_new.col(j_old + static_cast<Eigen::Index>(next_sel)) = current.Z.col(k);
                current.x_names.push_back(current.z_name(k));
                out.promoted.push_back(zmap[static_cast<std::size_t>(k)]);
                ++next_sel;
            } else {
                z_new.col(zc++) = current.Z.col(k);
                keep_names.push_back(current.z_name(k));
                zmap_new.push_back(zmap[static_cast<std::size_t>(k)]);
            }
        }
        current.X = std::move(x_new);
        current.Z = std::move(z_new);
        current.z_names = std::move(keep_names);
        zmap = std::move(zmap_new);
    }
    return out;
}

std::map<Eigen::Index, std::vector<Neighbor>> correlated_neighbors(
    const Dataset& data, const std::vector<Eigen::Index>& selected, double threshold,
    std::vector<std::string>* warnings) {
    if (threshold <= 0.0 || threshold > 1.0)
        throw ValidationError("neighbor threshold must lie in (0, 1]");
    std::map<Eigen::Index, std::vector<Neighbor>> out;
    if (selected.empty()) return out;

    const Eigen::Index N = data.n();
    const Eigen::Index K = data.k();
    const double denom = static_cast<double>(N - 1);
    VectorXd mean = data.Z.colwise().mean();
    VectorXd sd(K);
    for (Eigen::Index k = 0; k < K; ++k)
        sd[k] = std::sqrt((data.Z.col(k).array() - mean[k]).square().sum() / denom);

    std::vector<bool> warned(static_cast<std::size_t>(K), false);
    auto flag_constant = [&](Eigen::Index k) {
        if (warnings && !warned[static_cast<std::size_t>(k)]) {
            warnings->push_back("column " + data.z_name(k) +
                                " has zero variance; correlations undefined");
            warned[static_cast<std::size_t>(k)] = true;
        }
    };

    for (Eigen::Index s : selected) {
        if (s < 0 || s >= K) throw ValidationError("selected index out of range");
        std::vector<Neighbor> nb;
        if (sd[s] == 0.0) {
            flag_constant(s);
            out[s] = nb;
            continue;
        }
        const VectorXd zs = (data.Z.col(s).array() - mean[s]).matrix();
        for (Eigen::Index k = 0; k < K; ++k) {
            if (k == s) continue;
            if (sd[k] == 0.0) {
                flag_constant(k);
                continue;
            }
            const double corr = zs.dot((data.Z.col(k).array() - mean[k]).matrix()) /
                                (denom * sd[s] * sd[k]);
            if (std::abs(corr) >= threshold - 1e-12) nb.push_back({k, corr});
        }
        std::sort(nb.begin(), nb.end(), [](const Neighbor& a, const Neighbor& b) {
            if (std::abs(a.correlation) != std::abs(b.correlation))
                return std::abs(a.correlation) > std::abs(b.correlation);
            return a.column < b.column;
        });
        out[s] = std::move(nb);
    }
    return out;
}

std::vector<Eigen::Index> relevant_variables(const FitResult& fit) {
    std::vector<Eigen::Index> out = fit.selected;
    for (const auto& [k, companions] : fit.neighbors) {
        (void)k;
        for (const Neighbor& nb : companions) out.push_back(nb.column);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace ebvs
