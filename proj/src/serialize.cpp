#include "ebvs/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "ebvs/errors.hpp"

namespace ebvs {

using json = nlohmann::ordered_json;

namespace {

json vec_to_json(const VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

VectorXd vec_from_json(const json& a) {
    VectorXd v(a.size());
    Eigen::Index i = 0;
    for (const auto& x : a) v[i++] = x.get<double>();
    return v;
}

json theta_to_json(const Theta& t) {
    return json{{"beta", vec_to_json(t.beta)},
                {"mu", t.mu},
                {"sigma2", t.sigma2},
                {"phi", t.phi},
                {"p", {t.p[0], t.p[1], t.p[2]}}};
}

Theta theta_from_json(const json& j) {
    Theta t;
    t.beta = vec_from_json(j.at("beta"));
    t.mu = j.at("mu").get<double>();
    t.sigma2 = j.at("sigma2").get<double>();
    t.phi = j.at("phi").get<double>();
    const auto& p = j.at("p");
    t.p = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
    return t;
}

}  // namespace

std::string to_json(const FitResult& r, int indent) {
    json j;
    j["gamma"] = std::vector<int>(r.gamma.data(), r.gamma.data() + r.gamma.size());
    j["selected"] = r.selected;
    j["selected_signs"] = r.selected_signs;
    j["theta"] = theta_to_json(r.theta);
    j["loglik_trace"] = r.loglik_trace;
    json moves = json::array();
    for (const Move& m : r.moves)
        moves.push_back({{"iteration", m.iteration},
                         {"column", m.column},
                         {"from", m.from},
                         {"to", m.to},
                         {"gain", m.gain}});
    j["moves"] = moves;
    j["n_outer"] = r.n_outer;
    j["converged"] = r.converged;
    j["warnings"] = r.warnings;
    json nb = json::object();
    for (const auto& [col, list] : r.neighbors) {
        json entries = json::array();
        for (const Neighbor& n : list)
            entries.push_back({{"column", n.column}, {"correlation", n.correlation}});
        nb[std::to_string(col)] = entries;
    }
    j["neighbors"] = nb;
    if (r.refit) {
        j["refit"] = {{"names", r.refit->names},
                      {"coef", vec_to_json(r.refit->coef)},
                      {"se", vec_to_json(r.refit->se)},
                      {"aic", r.refit->aic},
                      {"deviance", r.refit->deviance},
                      {"null_deviance", r.refit->null_deviance},
                      {"r_squared", r.refit->r_squared},
                      {"converged", r.refit->converged}};
    }
    j["runtime_seconds"] = r.runtime_seconds;
    j["seed"] = r.seed;
    j["mode"] = r.mode;
    j["delta"] = r.delta;
    return j.dump(indent);
}

FitResult fit_result_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("invalid fit-result JSON: ") + e.what());
    }
    FitResult r;
    const auto& g = j.at("gamma");
    r.gamma.resize(static_cast<Eigen::Index>(g.size()));
    Eigen::Index i = 0;
    for (const auto& x : g) r.gamma[i++] = x.get<int>();
    r.selected = j.at("selected").get<std::vector<Eigen::Index>>();
    r.selected_signs = j.at("selected_signs").get<std::vector<int>>();
    r.theta = theta_from_json(j.at("theta"));
    r.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
    for (const auto& m : j.at("moves"))
        r.moves.push_back({m.at("iteration").get<Eigen::Index>(), m.at("column").get<Eigen::Index>(),
                           m.at("from").get<int>(), m.at("to").get<int>(),
                           m.at("gain").get<double>()});
    r.n_outer = j.at("n_outer").get<Eigen::Index>();
    r.converged = j.at("converged").get<bool>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& [key, entries] : j.at("neighbors").items()) {
        std::vector<Neighbor> list;
        for (const auto& e : entries)
            list.push_back({e.at("column").get<Eigen::Index>(), e.at("correlation").get<double>()});
        r.neighbors[static_cast<Eigen::Index>(std::stoll(key))] = std::move(list);
    }
    if (j.contains("refit")) {
        RefitSummary s;
        const auto& rf = j.at("refit");
        s.names = rf.at("names").get<std::vector<std::string>>();
        s.coef = vec_from_json(rf.at("coef"));
        s.se = vec_from_json(rf.at("se"));
        s.aic = rf.at("aic").get<double>();
        s.deviance = rf.at("deviance").get<double>();
        s.null_deviance = rf.at("null_deviance").get<double>();
        s.r_squared = rf.at("r_squared").get<double>();
        s.converged = rf.at("converged").get<bool>();
        r.refit = std::move(s);
    }
    r.runtime_seconds = j.at("runtime_seconds").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.mode = j.at("mode").get<std::string>();
    r.delta = j.at("delta").get<double>();
    return r;
}

std::string to_json(const StudyResult& r, int indent) {
    json j;
    j["scenario"] = {{"id", r.spec.id},
                     {"n", r.spec.n_effective()},
                     {"k", r.spec.k_effective()},
                     {"seed", r.spec.seed}};
    auto scores = [](const std::vector<Score>& v) {
        json a = json::array();
        for (const Score& s : v) a.push_back({{"tp", s.tp}, {"fp", s.fp}});
        return a;
    };
    j["selector"] = {{"tp_median", r.selector_tp_median},
                     {"fp_median", r.selector_fp_median},
                     {"replications", scores(r.selector_scores)}};
    if (!r.baseline_scores.empty())
        j["bh_baseline"] = {{"tp_median", r.baseline_tp_median},
                            {"fp_median", r.baseline_fp_median},
                            {"replications", scores(r.baseline_scores)}};
    j["seconds"] = r.seconds;
    return j.dump(indent);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("failed while writing '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("failed to move '" + tmp + "' into place");
}

}  // namespace ebvs
