#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "psmote/bench.hpp"
#include "psmote/dataset_io.hpp"
#include "psmote/linkability.hpp"
#include "psmote/utility.hpp"

namespace {

using nlohmann::ordered_json;

struct DataOptions {
    std::string input;
    std::string schema_path;
    std::string target;
    std::string qis_spec = "auto";
    std::string format = "json";
};

struct RiskOptions {
    DataOptions data;
    std::uint64_t seed = 42;
    std::size_t threshold = psmote::kHighRiskThreshold;
    std::string output = "-";
};

struct SynthOptions {
    DataOptions data;
    double epsilon = 5.0;
    std::size_t replicates = 1;
    std::size_t knn = 3;
    std::uint64_t seed = 42;
    std::size_t threshold = psmote::kHighRiskThreshold;
    bool per_row_neighbor = false;
    std::size_t workers = 1;
    std::string output;
    std::string provenance_out;
    std::string schema_out;
};

struct EvalOptions {
    DataOptions data;
    std::string variant;
    std::string control;
    std::string provenance;
    std::uint64_t seed = 42;
    std::size_t link_k = 10;
    double holdout_fraction = 0.2;
    std::string output = "-";
};

struct BenchOptions {
    DataOptions data;
    std::vector<std::size_t> replicates = {1};
    std::vector<std::size_t> knns = {3};
    std::vector<double> epsilons = {5.0};
    std::uint64_t seed = 42;
    std::size_t workers = 1;
    std::string output = "-";
};

struct SplitOptions {
    DataOptions data;
    double holdout_fraction = 0.2;
    std::uint64_t seed = 42;
    std::string train_out;
    std::string holdout_out;
};

void add_data_flags(CLI::App* cmd, DataOptions& data, bool with_qis = true) {
    cmd->add_option("--input", data.input, "input CSV with a header row")->required();
    CLI::Option* schema =
        cmd->add_option("--schema", data.schema_path, "schema sidecar JSON (column kinds + target)");
    cmd->add_option("--target", data.target,
                    "target column name used when inferring the schema (default: last column)")
        ->excludes(schema);
    if (with_qis)
        cmd->add_option("--qis", data.qis_spec,
                        "comma-separated quasi-identifier column names, or 'auto' to pick them "
                        "deterministically from the seed")
            ->capture_default_str();
    cmd->add_option("--format", data.format, "output format")
        ->check(CLI::IsMember({"json"}))
        ->capture_default_str();
}

psmote::Schema resolve_schema(const DataOptions& data) {
    if (!data.schema_path.empty()) return psmote::load_schema(data.schema_path);
    std::string target = data.target;
    if (target.empty()) {
        const auto records = psmote::csv::read_file(data.input);
        if (records.empty() || records.front().empty())
            throw psmote::InputError(data.input + ": missing header row");
        target = records.front().back();
    }
    return psmote::infer_schema(data.input, {}, target);
}

psmote::QiSet resolve_qis(const psmote::Schema& schema, const std::string& spec,
                          std::uint64_t seed) {
    if (spec == "auto") return psmote::select_qis(schema, seed);
    std::vector<std::string> names;
    std::string name;
    std::istringstream stream(spec);
    while (std::getline(stream, name, ',')) names.push_back(name);
    return psmote::QiSet(schema, names);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw psmote::InputError("cannot open for writing: " + path);
    out << text;
}

void emit_json(const ordered_json& doc, const std::string& path) {
    const std::string text = doc.dump(2) + "\n";
    if (path == "-")
        std::cout << text;
    else
        write_text(path, text);
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw psmote::InputError("cannot open: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw psmote::InputError(path + ": " + e.what());
    }
}

int run_risk(const RiskOptions& opt) {
    const psmote::Schema schema = resolve_schema(opt.data);
    const psmote::Dataset data = psmote::load_csv(opt.data.input, schema);
    const psmote::QiSet qis = resolve_qis(schema, opt.data.qis_spec, opt.seed);
    const psmote::RiskReport report = psmote::highest_risk(data, qis, opt.threshold);

    ordered_json doc;
    doc["qis"] = qis.names(schema);
    doc["threshold"] = opt.threshold;
    const ordered_json body = report.to_json();
    for (const auto& item : body.items()) doc[item.key()] = item.value();
    emit_json(doc, opt.output);
    return 0;
}

int run_synth(const SynthOptions& opt) {
    const psmote::Schema schema = resolve_schema(opt.data);
    const psmote::Dataset data = psmote::load_csv(opt.data.input, schema);
    const psmote::QiSet qis = resolve_qis(schema, opt.data.qis_spec, opt.seed);

    psmote::SynthesisConfig config;
    config.n_replicates = opt.replicates;
    config.knn = opt.knn;
    config.epsilon = psmote::PrivacyBudget(opt.epsilon);
    config.seed = opt.seed;
    config.per_row_neighbor = opt.per_row_neighbor;
    config.risk_threshold = opt.threshold;
    config.workers = opt.workers;

    const psmote::SyntheticDataset result = psmote::private_smote(data, qis, config);
    psmote::write_csv(result.dataset, opt.output);
    if (!opt.provenance_out.empty())
        write_text(opt.provenance_out,
                   psmote::provenance_to_json(result.provenance).dump(2) + "\n");
    if (!opt.schema_out.empty()) psmote::write_schema(schema, opt.schema_out);

    std::size_t high_risk = 0;
    std::size_t synthetic = 0;
    for (const psmote::Provenance& p : result.provenance)
        if (p.origin == psmote::Origin::Synthetic) {
            ++synthetic;
            if (p.replicate == 0) ++high_risk;
        }

    ordered_json doc;
    doc["rows_in"] = data.n_rows();
    doc["rows_out"] = result.dataset.n_rows();
    doc["high_risk_count"] = high_risk;
    doc["synthetic_rows"] = synthetic;
    doc["qis"] = qis.names(schema);
    doc["epsilon"] = opt.epsilon;
    doc["replicates"] = opt.replicates;
    doc["knn"] = opt.knn;
    doc["seed"] = opt.seed;
    doc["output"] = opt.output;
    doc["provenance_out"] =
        opt.provenance_out.empty() ? ordered_json(nullptr) : ordered_json(opt.provenance_out);
    emit_json(doc, "-");
    return 0;
}

int run_eval(const EvalOptions& opt) {
    const psmote::Schema schema = resolve_schema(opt.data);
    const psmote::Dataset original = psmote::load_csv(opt.data.input, schema);
    const psmote::Dataset variant = psmote::load_csv(opt.variant, schema);
    const psmote::QiSet qis = resolve_qis(schema, opt.data.qis_spec, opt.seed);

    std::optional<std::vector<psmote::Provenance>> provenance;
    if (!opt.provenance.empty())
        provenance = psmote::provenance_from_json(read_json_file(opt.provenance));

    std::optional<psmote::Dataset> control_file;
    std::optional<psmote::HoldoutSplit> split;
    const psmote::Dataset* attacked = &original;
    const psmote::Dataset* control = nullptr;
    if (!opt.control.empty()) {
        control_file = psmote::load_csv(opt.control, schema);
        control = &*control_file;
    } else {
        if (provenance)
            throw psmote::InputError(
                "eval: --provenance requires --control; without one the input is re-split "
                "and provenance row ids no longer match the attacked rows");
        split = psmote::make_holdout(original, opt.holdout_fraction, opt.seed);
        attacked = &split->train;
        control = &split->control;
    }

    const psmote::LinkabilityReport link = psmote::knn_linkability(
        *attacked, variant, *control, qis, opt.link_k, provenance ? &*provenance : nullptr);
    const psmote::UtilityReport util = psmote::evaluate_utility(variant, *attacked, *control);

    ordered_json doc;
    doc["linkability"] = psmote::linkability_to_json(link, qis.names(schema), opt.seed);
    doc["utility"] = psmote::utility_to_json(util);
    emit_json(doc, opt.output);
    return 0;
}

int run_bench(const BenchOptions& opt) {
    const psmote::Schema schema = resolve_schema(opt.data);
    const psmote::Dataset data = psmote::load_csv(opt.data.input, schema);
    const psmote::QiSet qis = resolve_qis(schema, opt.data.qis_spec, opt.seed);

    const psmote::SweepGrid grid{opt.replicates, opt.knns, opt.epsilons};
    const auto [entries, report] = psmote::sweep(data, qis, grid, opt.seed, opt.workers);
    const std::string jsonl = psmote::bench_to_jsonl(entries, report, opt.seed);
    if (opt.output == "-")
        std::cout << jsonl;
    else
        write_text(opt.output, jsonl);
    return 0;
}

int run_split(const SplitOptions& opt) {
    const psmote::Schema schema = resolve_schema(opt.data);
    const psmote::Dataset data = psmote::load_csv(opt.data.input, schema);
    const psmote::HoldoutSplit split =
        psmote::make_holdout(data, opt.holdout_fraction, opt.seed);
    psmote::write_csv(split.train, opt.train_out);
    psmote::write_csv(split.control, opt.holdout_out);

    ordered_json doc;
    doc["rows"] = data.n_rows();
    doc["train_rows"] = split.train.n_rows();
    doc["holdout_rows"] = split.control.n_rows();
    doc["holdout_fraction"] = opt.holdout_fraction;
    doc["seed"] = opt.seed;
    doc["train_out"] = opt.train_out;
    doc["holdout_out"] = opt.holdout_out;
    emit_json(doc, "-");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    psmote::warning_handler() = [](const std::string& msg) {
        std::cerr << ordered_json{{"warning", msg}}.dump() << "\n";
    };

    CLI::App app{
        "psmote: replaces re-identifiable rows of a tabular dataset with "
        "epsilon-PrivateSMOTE synthetic records and evaluates the result"};
    app.require_subcommand(1);

    RiskOptions risk;
    CLI::App* risk_cmd =
        app.add_subcommand("risk", "profile re-identification risk over the QI set");
    add_data_flags(risk_cmd, risk.data);
    risk_cmd->add_option("--seed", risk.seed, "RNG seed (drives 'auto' QI selection)")
        ->capture_default_str();
    risk_cmd->add_option("--risk-threshold", risk.threshold,
                         "a QI combination occurring at most this often is high-risk")
        ->capture_default_str();
    risk_cmd->add_option("--output", risk.output, "report path, '-' for stdout")
        ->capture_default_str();

    SynthOptions synth;
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "replace high-risk rows with synthetic replicas");
    add_data_flags(synth_cmd, synth.data);
    synth_cmd->add_option("--epsilon", synth.epsilon, "privacy budget; Laplace scale is 1/epsilon")
        ->capture_default_str();
    synth_cmd
        ->add_option("--replicates,-N", synth.replicates,
                     "synthetic rows generated per high-risk row")
        ->capture_default_str();
    synth_cmd->add_option("--knn", synth.knn, "nearest neighbors consulted per interpolation")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "RNG seed; all randomness derives from it")
        ->capture_default_str();
    synth_cmd
        ->add_option("--risk-threshold", synth.threshold,
                     "a QI combination occurring at most this often is high-risk")
        ->capture_default_str();
    synth_cmd->add_flag("--per-row-neighbor", synth.per_row_neighbor,
                        "draw one neighbor per row instead of per attribute");
    synth_cmd->add_option("--workers", synth.workers, "synthesis threads")
        ->capture_default_str();
    synth_cmd->add_option("--output", synth.output, "variant CSV path")->required();
    synth_cmd->add_option("--provenance-out", synth.provenance_out,
                          "write per-row provenance JSON here");
    synth_cmd->add_option("--schema-out", synth.schema_out,
                          "write the resolved schema sidecar here");

    EvalOptions eval;
    CLI::App* eval_cmd = app.add_subcommand(
        "eval", "linkability and utility of a released variant against the original");
    add_data_flags(eval_cmd, eval.data);
    eval_cmd->add_option("--variant", eval.variant, "released variant CSV")->required();
    eval_cmd->add_option("--control", eval.control,
                         "control CSV of held-out rows; omitted: split --input via "
                         "--holdout-fraction and attack the train side");
    eval_cmd->add_option("--provenance", eval.provenance,
                         "provenance JSON from synth (requires --control)");
    eval_cmd->add_option("--seed", eval.seed, "RNG seed (auto QI selection and auto split)")
        ->capture_default_str();
    eval_cmd->add_option("--link-k", eval.link_k, "neighbors retrieved per linkage attack query")
        ->capture_default_str();
    eval_cmd
        ->add_option("--holdout-fraction", eval.holdout_fraction,
                     "control share when no --control file is given")
        ->capture_default_str();
    eval_cmd->add_option("--output", eval.output, "report path, '-' for stdout")
        ->capture_default_str();

    BenchOptions bench;
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "time a sweep over a grid of synthesis parameters");
    add_data_flags(bench_cmd, bench.data);
    bench_cmd->add_option("--replicates,-N", bench.replicates, "replicate counts to sweep")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--knn", bench.knns, "neighbor counts to sweep")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--epsilon", bench.epsilons, "privacy budgets to sweep")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "RNG seed shared by every grid point")
        ->capture_default_str();
    bench_cmd->add_option("--workers", bench.workers, "synthesis threads per variant")
        ->capture_default_str();
    bench_cmd->add_option("--output", bench.output, "JSONL path, '-' for stdout")
        ->capture_default_str();

    SplitOptions split;
    CLI::App* split_cmd =
        app.add_subcommand("split", "split a dataset into train and holdout CSVs");
    add_data_flags(split_cmd, split.data, /*with_qis=*/false);
    split_cmd
        ->add_option("--holdout-fraction", split.holdout_fraction, "share of rows held out")
        ->capture_default_str();
    split_cmd->add_option("--seed", split.seed, "RNG seed for the row draw")
        ->capture_default_str();
    split_cmd->add_option("--train-out", split.train_out, "train CSV path")->required();
    split_cmd->add_option("--holdout-out", split.holdout_out, "holdout CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << ordered_json{{"error", std::string(e.what())}}.dump() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(risk_cmd)) return run_risk(risk);
        if (app.got_subcommand(synth_cmd)) return run_synth(synth);
        if (app.got_subcommand(eval_cmd)) return run_eval(eval);
        if (app.got_subcommand(bench_cmd)) return run_bench(bench);
        return run_split(split);
    } catch (const psmote::InputError& e) {
        std::cerr << ordered_json{{"error", std::string(e.what())}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << ordered_json{{"error", std::string(e.what())}}.dump() << "\n";
        return 3;
    }
}
