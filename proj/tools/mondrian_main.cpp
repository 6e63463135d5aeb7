// Command line front end: reproducible experiments and file-based workflows
// over the forest, data and verification modules. Every command is a pure
// function of (flags, input files, seed); outputs are JSON plus CSV curves.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mondrian/data.hpp"
#include "mondrian/experiment.hpp"
#include "mondrian/forest.hpp"
#include "mondrian/verify.hpp"

namespace {

using namespace mondrian;

std::vector<std::int64_t> parse_checkpoints(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
    return out;
}

std::string default_csv_path(const std::string& json_path) {
    const auto dot = json_path.rfind('.');
    return (dot == std::string::npos ? json_path : json_path.substr(0, dot)) + ".csv";
}

struct CommonFlags {
    int trees = 10;
    std::uint64_t seed = 42;
    std::int64_t test_size = 10000;
    std::string out;
    std::string csv_out;
    std::string checkpoints;

    void attach(CLI::App* cmd, const char* default_cps) {
        cmd->add_option("--trees", trees, "Number of trees K")->default_val(10);
        cmd->add_option("--seed", seed, "Random seed")->default_val(42);
        cmd->add_option("--test-size", test_size, "Held-out evaluation size")
            ->default_val(10000);
        cmd->add_option("--out", out, "Output JSON path")->required();
        cmd->add_option("--csv-out", csv_out, "Output CSV path (default: <out>.csv)");
        cmd->add_option("--checkpoints", checkpoints, "Comma-separated evaluation sizes")
            ->default_val(default_cps);
    }

    ExperimentOptions options() const {
        ExperimentOptions o;
        o.trees = trees;
        o.seed = seed;
        o.test_size = test_size;
        o.checkpoints = parse_checkpoints(checkpoints);
        return o;
    }
};

void write_result(const ExperimentResult& result, const CommonFlags& flags) {
    result.write(flags.out,
                 flags.csv_out.empty() ? default_csv_path(flags.out) : flags.csv_out);
    std::cout << flags.out << "\n";
}

nlohmann::json echo_config(
    const CommonFlags& flags,
    std::initializer_list<std::pair<std::string, nlohmann::json>> extra) {
    nlohmann::json cfg{{"trees", flags.trees},
                       {"seed", flags.seed},
                       {"test_size", flags.test_size},
                       {"checkpoints", parse_checkpoints(flags.checkpoints)}};
    for (const auto& [k, v] : extra) cfg[k] = v;
    return cfg;
}

int cmd_learning_curve(const CommonFlags& flags, const std::string& synth,
                       const std::string& dataset, bool has_header, int label_col,
                       const std::string& schedule_text, const std::string& rule_name,
                       const std::string& dump) {
    const VoteRule rule = vote_rule_from_string(rule_name);
    SampleStream train, test;
    if (!synth.empty()) {
        const SynthSpec spec = SynthSpec::parse(synth);
        if (spec.task() != Task::classify)
            throw std::invalid_argument("learning-curve expects a classification spec");
        const auto opts = flags.options();
        const std::int64_t n_max = opts.checkpoints.empty() ? 0 : opts.checkpoints.back();
        train = spec.generate(n_max, flags.seed, kTrainDataStream);
        test = spec.generate(flags.test_size, flags.seed, kTestDataStream);
    } else {
        SampleStream all = load_csv(dataset, has_header, label_col, Task::classify);
        if (static_cast<std::int64_t>(all.size()) <= flags.test_size)
            throw std::invalid_argument("dataset smaller than the held-out test size");
        const Normalizer norm = Normalizer::fit(all);
        all = norm.apply(all);
        const std::size_t cut = all.size() - static_cast<std::size_t>(flags.test_size);
        train.task = test.task = all.task;
        train.samples.assign(all.samples.begin(),
                             all.samples.begin() + static_cast<std::ptrdiff_t>(cut));
        test.samples.assign(all.samples.begin() + static_cast<std::ptrdiff_t>(cut),
                            all.samples.end());
    }
    if (!dump.empty()) write_csv(train, dump, true);

    const LifetimeSchedule schedule =
        LifetimeSchedule::parse(schedule_text, train.dimension());
    const ExperimentResult result =
        run_learning_curve(train, test, schedule, rule, flags.options(),
                           echo_config(flags, {{"synth", synth},
                                               {"dataset", dataset},
                                               {"schedule", schedule_text},
                                               {"rule", rule_name}}));
    write_result(result, flags);
    return 0;
}

int cmd_inconsistency_demo(const CommonFlags& flags, double lambda, double power_c) {
    const ExperimentResult result = run_inconsistency_demo(
        lambda, power_c, flags.options(),
        echo_config(flags, {{"lambda", lambda}, {"power_c", power_c}}));
    write_result(result, flags);
    return 0;
}

int cmd_rate_check(const CommonFlags& flags, const std::string& synth) {
    const SynthSpec spec = SynthSpec::parse(synth);
    const ExperimentResult result =
        run_rate_check(spec, flags.options(), echo_config(flags, {{"synth", synth}}));
    write_result(result, flags);
    return 0;
}

int cmd_verify(std::int64_t trials, std::uint64_t seed, const std::string& out) {
    const std::vector<VerifyReport> reports = run_canonical_suite(seed, trials);
    std::ostringstream lines;
    bool all_pass = true;
    for (const VerifyReport& r : reports) {
        lines << r.to_json().dump() << "\n";
        all_pass = all_pass && r.pass;
    }
    std::cout << lines.str();
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot write '" + out + "'");
        f << lines.str();
    }
    return all_pass ? 0 : 1;
}

int cmd_train(const std::string& dataset, bool has_header, int label_col,
              const std::string& task_name, int trees,
              const std::string& schedule_text, std::uint64_t seed,
              const std::string& out) {
    const Task task = task_from_string(task_name);
    const SampleStream raw = load_csv(dataset, has_header, label_col, task);
    if (raw.samples.empty()) throw std::invalid_argument("empty training stream");
    const Normalizer norm = Normalizer::fit(raw);
    const SampleStream train = norm.apply(raw);

    Forest forest(trees, LifetimeSchedule::parse(schedule_text, train.dimension()),
                  train.dimension(), task, seed);
    for (const Sample& s : train.samples) forest.partial_fit(s.x, s.y);

    const nlohmann::json model{{"schema_version", 1},
                               {"normalizer", norm.to_json()},
                               {"forest", forest.to_json()}};
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write '" + out + "'");
    f << model.dump(2) << "\n";
    std::cout << "trained on " << train.size() << " samples, lifetime "
              << forest.lifetime() << ", model written to " << out << "\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& dataset,
                bool has_header, int label_col, const std::string& rule_name,
                const std::string& out) {
    std::ifstream mf(model_path);
    if (!mf) throw std::runtime_error("cannot open '" + model_path + "'");
    nlohmann::json model;
    mf >> model;
    const Normalizer norm = Normalizer::from_json(model.at("normalizer"));
    const Forest forest = Forest::from_json(model.at("forest"));
    const VoteRule rule = vote_rule_from_string(rule_name);

    const SampleStream raw = load_csv(dataset, has_header, label_col, forest.task());

    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write '" + out + "'");
    f.precision(17);
    f << (forest.task() == Task::classify ? "prediction,proba\n" : "prediction\n");
    std::int64_t wrong = 0;
    double sq = 0.0;
    for (const Sample& s : raw.samples) {
        const std::vector<double> x = norm.apply(s.x);
        if (forest.task() == Task::classify) {
            const int label = forest.predict_class(x, rule);
            f << label << "," << forest.predict_proba(x) << "\n";
            if (label != static_cast<int>(s.y)) ++wrong;
        } else {
            const double v = forest.predict_regression(x);
            f << v << "\n";
            sq += (v - s.y) * (v - s.y);
        }
    }
    const double n = static_cast<double>(raw.size());
    if (forest.task() == Task::classify)
        std::cout << "error " << (n > 0 ? static_cast<double>(wrong) / n : 0.0)
                  << " on " << raw.size() << " rows\n";
    else
        std::cout << "mse " << (n > 0 ? sq / n : 0.0) << " on " << raw.size()
                  << " rows\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online Mondrian Forest experiments"};
    app.require_subcommand(1);

    CommonFlags lc_flags;
    std::string lc_synth, lc_dataset, lc_schedule = "power:1";
    std::string lc_rule = "majority", lc_dump;
    bool lc_header = false;
    int lc_label = -1;
    auto* lc = app.add_subcommand("learning-curve",
                                  "Test error vs training size for one forest");
    lc_flags.attach(lc, "1000,10000,100000");
    auto* lc_synth_opt = lc->add_option("--synth", lc_synth, "Synthetic spec");
    lc->add_option("--dataset", lc_dataset, "CSV dataset (classification)")
        ->excludes(lc_synth_opt);
    lc->add_flag("--has-header", lc_header, "CSV has a header row");
    lc->add_option("--label-col", lc_label, "Label column index (default: last)");
    lc->add_option("--schedule", lc_schedule, "fixed:<lambda> | power:<c>")
        ->default_val("power:1");
    lc->add_option("--rule", lc_rule, "majority|plugin")->default_val("majority");
    lc->add_option("--dump", lc_dump, "Dump the training stream to CSV");

    CommonFlags inc_flags;
    double inc_lambda = 2.0, inc_power_c = 1.0;
    auto* inc = app.add_subcommand(
        "inconsistency-demo",
        "Fixed-lifetime vs growing-lifetime forests on the band distribution");
    inc_flags.attach(inc, "0,1000,10000,50000");
    inc->add_option("--lambda", inc_lambda, "Fixed lifetime")->default_val(2.0);
    inc->add_option("--power-c", inc_power_c, "Constant of the growing arm")
        ->default_val(1.0);

    CommonFlags rate_flags;
    std::string rate_synth;
    auto* rate =
        app.add_subcommand("rate-check", "Quadratic-risk decay and log-log slope");
    rate_flags.attach(rate, "1000,4000,16000,64000");
    rate->add_option("--synth", rate_synth, "Synthetic spec")->required();

    std::int64_t v_trials = 10000;
    std::uint64_t v_seed = 42;
    std::string v_out;
    auto* ver =
        app.add_subcommand("verify", "Monte-Carlo checks of the partition laws");
    ver->add_option("--trials", v_trials, "Trees per check")->default_val(10000);
    ver->add_option("--seed", v_seed, "Random seed")->default_val(42);
    ver->add_option("--out", v_out, "Write the JSON-lines report here too");

    std::string tr_dataset, tr_task = "classify", tr_schedule = "power:1", tr_out;
    bool tr_header = false;
    int tr_label = -1, tr_trees = 10;
    std::uint64_t tr_seed = 42;
    auto* tr = app.add_subcommand("train", "Train on a CSV and write a checkpoint");
    tr->add_option("--dataset", tr_dataset)->required();
    tr->add_flag("--has-header", tr_header);
    tr->add_option("--label-col", tr_label);
    tr->add_option("--task", tr_task, "classify|regress");
    tr->add_option("--trees", tr_trees)->default_val(10);
    tr->add_option("--schedule", tr_schedule)->default_val("power:1");
    tr->add_option("--seed", tr_seed)->default_val(42);
    tr->add_option("--out", tr_out, "Model JSON path")->required();

    std::string pr_model, pr_dataset, pr_rule = "plugin", pr_out;
    bool pr_header = false;
    int pr_label = -1;
    auto* pr = app.add_subcommand("predict", "Predict from a checkpoint");
    pr->add_option("--model", pr_model)->required();
    pr->add_option("--dataset", pr_dataset)->required();
    pr->add_flag("--has-header", pr_header);
    pr->add_option("--label-col", pr_label);
    pr->add_option("--rule", pr_rule, "majority|plugin")->default_val("plugin");
    pr->add_option("--out", pr_out, "Predictions CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (lc->parsed()) {
            if (lc_synth.empty() && lc_dataset.empty())
                throw std::invalid_argument("need --synth or --dataset");
            return cmd_learning_curve(lc_flags, lc_synth, lc_dataset, lc_header,
                                      lc_label, lc_schedule, lc_rule, lc_dump);
        }
        if (inc->parsed())
            return cmd_inconsistency_demo(inc_flags, inc_lambda, inc_power_c);
        if (rate->parsed()) return cmd_rate_check(rate_flags, rate_synth);
        if (ver->parsed()) return cmd_verify(v_trials, v_seed, v_out);
        if (tr->parsed())
            return cmd_train(tr_dataset, tr_header, tr_label, tr_task, tr_trees,
                             tr_schedule, tr_seed, tr_out);
        if (pr->parsed())
            return cmd_predict(pr_model, pr_dataset, pr_header, pr_label, pr_rule,
                               pr_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
