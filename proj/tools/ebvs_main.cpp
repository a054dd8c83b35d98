// Command-line front end: `fit` runs the selector on a CSV + schema, and
// `simulate` runs replicated benchmark scenarios with the BH comparison row.
// Exit codes: 0 converged, 2 finished without convergence, 1 any error.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ebvs/report.hpp"
#include "ebvs/serialize.hpp"

namespace fs = std::filesystem;
using namespace ebvs;

namespace {

struct FitOptions {
    std::string input;
    std::string schema_path;
    std::string family = "normal";
    std::string mode = "greedy";
    double delta = 0.0;
    std::uint64_t seed = 1;
    int restarts = 1;
    double neighbor_threshold = 0.75;
    bool sequential = false;
    bool standardize = true;
    std::string compositional_ref;
    bool survival = false;
    std::string out_dir = ".";
};

struct SimOptions {
    std::string scenario = "N1";
    int reps = 30;
    std::uint64_t seed = 1;
    Eigen::Index n = 0;
    Eigen::Index k = 0;
    std::string mode = "greedy";
    double delta = 0.0;
    std::string out_dir = ".";
};

std::vector<SurvivalRecord> records_from_table(const RawTable& table, const Schema& schema,
                                               std::vector<std::string>& z_names,
                                               std::vector<std::string>& x_names) {
    int time_col = -1, event_col = -1;
    std::vector<int> z_cols, x_cols;
    for (std::size_t c = 0; c < table.names.size(); ++c) {
        switch (schema.role_of(table.names[c])) {
            case ColumnRole::time: time_col = table.value_col[c]; break;
            case ColumnRole::event: event_col = table.value_col[c]; break;
            case ColumnRole::putative:
                z_cols.push_back(table.value_col[c]);
                z_names.push_back(table.names[c]);
                break;
            case ColumnRole::locked_in:
                x_cols.push_back(table.value_col[c]);
                x_names.push_back(table.names[c]);
                break;
            default: break;
        }
    }
    if (time_col < 0 || event_col < 0)
        throw SchemaError("survival mode needs one 'time' and one 'event' column");
    std::vector<SurvivalRecord> records(static_cast<std::size_t>(table.n_rows()));
    for (Eigen::Index i = 0; i < table.n_rows(); ++i) {
        SurvivalRecord& rec = records[static_cast<std::size_t>(i)];
        rec.time = table.values(i, time_col);
        rec.event = table.values(i, event_col) != 0.0;
        rec.z.resize(static_cast<Eigen::Index>(z_cols.size()));
        for (std::size_t c = 0; c < z_cols.size(); ++c) rec.z[static_cast<Eigen::Index>(c)] = table.values(i, z_cols[c]);
        rec.x.resize(static_cast<Eigen::Index>(x_cols.size()));
        for (std::size_t c = 0; c < x_cols.size(); ++c) rec.x[static_cast<Eigen::Index>(c)] = table.values(i, x_cols[c]);
    }
    return records;
}

int run_fit(const FitOptions& opt) {
    const Schema schema = Schema::load(opt.schema_path);
    const RawTable table = load_csv_file(opt.input, schema);

    Dataset data;
    if (opt.survival) {
        if (!opt.compositional_ref.empty())
            throw ValidationError("--compositional-ref cannot be combined with --survival");
        std::vector<std::string> z_names, x_names;
        const auto records = records_from_table(table, schema, z_names, x_names);
        data = survival_to_poisson(records, z_names, x_names).data;
    } else {
        FamilySpec family;
        family.family = family_from_string(opt.family);
        data = build_dataset(table, schema, family);
    }

    if (!opt.compositional_ref.empty()) {
        const auto it =
            std::find(data.z_names.begin(), data.z_names.end(), opt.compositional_ref);
        if (it == data.z_names.end())
            throw ValidationError("compositional reference column '" + opt.compositional_ref +
                                  "' is not a putative column");
        const Eigen::Index ref = it - data.z_names.begin();
        LogratioResult lr = compositional_logratio(data.Z, data.z_names, ref);
        data.Z = std::move(lr.z);
        data.z_names = std::move(lr.names);
    }

    Standardization std_info;
    bool standardized = false;
    if (opt.standardize) {
        std_info = standardize_putative(data);
        standardized = true;
    }

    SelectorConfig config;
    config.mode = select_mode_from_string(opt.mode);
    config.delta = opt.delta;
    config.rng_seed = opt.seed;
    config.restarts = opt.restarts;
    config.neighbor_threshold = opt.neighbor_threshold;

    fs::create_directories(opt.out_dir);
    const auto out_path = [&](const std::string& name) {
        return (fs::path(opt.out_dir) / name).string();
    };

    bool converged = false;
    std::ostringstream report;
    if (opt.sequential) {
        const SequentialResult seq = sequential_fit(data, config);
        converged = true;
        for (const FitResult& round : seq.rounds) converged = converged && round.converged;
        report << "sequential fit: " << seq.rounds.size() << " rounds, " << seq.promoted.size()
               << " columns promoted\n";
        for (std::size_t r = 0; r < seq.rounds.size(); ++r) {
            report << "--- round " << (r + 1) << " ---\n";
            report << text_report(seq.rounds[r], data, standardized ? &std_info : nullptr);
        }
        nlohmann::ordered_json rounds = nlohmann::ordered_json::array();
        for (const FitResult& round : seq.rounds)
            rounds.push_back(nlohmann::ordered_json::parse(to_json(round)));
        write_file_atomic(out_path("sequential_rounds.json"), rounds.dump(2));
        if (!seq.rounds.empty())
            write_file_atomic(out_path("result.json"), to_json(seq.rounds.front()));
    } else if (opt.restarts > 1) {
        const MultiRunResult multi = multi_run(data, config);
        const FitResult& best = multi.runs[multi.best];
        converged = best.converged;
        report << "multi-run fit: " << multi.runs.size() << " restarts\n";
        report << "union of selections:";
        for (Eigen::Index k : multi.union_selected)
            report << " " << data.z_name(k) << " (" << multi.frequency.at(k) << ")";
        report << "\nbest run (by final log-likelihood): restart " << multi.best << "\n";
        report << text_report(best, data, standardized ? &std_info : nullptr);
        nlohmann::ordered_json runs = nlohmann::ordered_json::array();
        for (const FitResult& r : multi.runs)
            runs.push_back(nlohmann::ordered_json::parse(to_json(r)));
        write_file_atomic(out_path("multi_runs.json"), runs.dump(2));
        write_file_atomic(out_path("result.json"), to_json(best));
    } else {
        const FitResult result = run(data, config);
        converged = result.converged;
        report << text_report(result, data, standardized ? &std_info : nullptr);
        write_file_atomic(out_path("result.json"), to_json(result));
    }

    write_file_atomic(out_path("report.txt"), report.str());
    std::cout << report.str();
    return converged ? 0 : 2;
}

int run_simulate(const SimOptions& opt) {
    ScenarioSpec spec;
    spec.id = opt.scenario;
    spec.n = opt.n;
    spec.k = opt.k;
    spec.seed = opt.seed;

    SelectorConfig config;
    config.mode = select_mode_from_string(opt.mode);
    config.delta = opt.delta;
    config.rng_seed = opt.seed;

    const StudyResult study = run_study(spec, config, opt.reps);

    fs::create_directories(opt.out_dir);
    write_file_atomic((fs::path(opt.out_dir) / "study.tsv").string(), tsv_report(study));
    write_file_atomic((fs::path(opt.out_dir) / "study.json").string(), to_json(study));
    std::cout << text_report(study);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"empirical-Bayes variable selection for generalized linear models"};
    app.require_subcommand(1);

    FitOptions fit_opt;
    CLI::App* fit_cmd = app.add_subcommand("fit", "fit the selector to a CSV dataset");
    fit_cmd->add_option("--input", fit_opt.input, "input CSV file")->required();
    fit_cmd->add_option("--schema", fit_opt.schema_path, "column-role schema file")->required();
    fit_cmd->add_option("--family", fit_opt.family, "normal, binomial or poisson");
    fit_cmd->add_option("--mode", fit_opt.mode, "greedy or weighted candidate choice");
    fit_cmd->add_option("--delta", fit_opt.delta, "acceptance threshold on the log-likelihood gain");
    fit_cmd->add_option("--seed", fit_opt.seed, "random seed");
    fit_cmd->add_option("--restarts", fit_opt.restarts, "number of restarts (union/frequency report)");
    fit_cmd->add_option("--neighbor-threshold", fit_opt.neighbor_threshold,
                        "absolute correlation for the neighbor report");
    fit_cmd->add_flag("--sequential", fit_opt.sequential,
                      "repeatedly promote selections into the locked-in design");
    fit_cmd->add_flag("--standardize,!--no-standardize", fit_opt.standardize,
                      "standardize putative columns (default on)");
    fit_cmd->add_option("--compositional-ref", fit_opt.compositional_ref,
                        "treat putative columns as compositional counts with this reference column");
    fit_cmd->add_flag("--survival", fit_opt.survival,
                      "piecewise-exponential expansion of time/event columns");
    fit_cmd->add_option("--out", fit_opt.out_dir, "output directory");

    SimOptions sim_opt;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "run a replicated benchmark scenario");
    sim_cmd->add_option("--scenario", sim_opt.scenario, "scenario id (N1-N9, B1-B3, P1-P2)");
    sim_cmd->add_option("--reps", sim_opt.reps, "number of replications");
    sim_cmd->add_option("--seed", sim_opt.seed, "random seed");
    sim_cmd->add_option("--n", sim_opt.n, "override sample size");
    sim_cmd->add_option("--k", sim_opt.k, "override putative column count");
    sim_cmd->add_option("--mode", sim_opt.mode, "greedy or weighted candidate choice");
    sim_cmd->add_option("--delta", sim_opt.delta, "acceptance threshold");
    sim_cmd->add_option("--out", sim_opt.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit_cmd->parsed()) return run_fit(fit_opt);
        if (sim_cmd->parsed()) return run_simulate(sim_opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
