// sqlfuzz command-line interface: dataset generation, detector training,
// benchmarking, and guided/unguided evasion runs.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sqlfuzz/bench.hpp"
#include "sqlfuzz/dataset.hpp"
#include "sqlfuzz/detector.hpp"
#include "sqlfuzz/engine.hpp"
#include "sqlfuzz/models.hpp"
#include "sqlfuzz/rng.hpp"
#include "sqlfuzz/threads.hpp"

namespace fs = std::filesystem;
using namespace sqlfuzz;

namespace {

#ifndef SQLFUZZ_DEFAULT_CORPUS
#define SQLFUZZ_DEFAULT_CORPUS "data/attack_payloads.txt"
#endif

struct CommonOpts {
    std::uint64_t seed = 1;
    unsigned threads = 0;  // 0 = SQLFUZZ_THREADS env, else hardware
    bool quiet = false;
};

unsigned resolve_threads(const CommonOpts& c) {
    if (c.threads > 0) return c.threads;
    if (const char* env = std::getenv("SQLFUZZ_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

ParallelMap make_pmap(unsigned threads) {
    return threads > 1 ? pooled_map(threads) : serial_map();
}

void log_config(const CommonOpts& c, const std::string& subcommand,
                const std::vector<std::pair<std::string, std::string>>& extras) {
    if (c.quiet) return;
    std::cerr << "config: subcommand=" << subcommand << " seed=" << c.seed
              << " threads=" << resolve_threads(c);
    for (const auto& [k, v] : extras) std::cerr << " " << k << "=" << v;
    std::cerr << "\n";
}

std::unique_ptr<Detector> load_model_arg(const std::string& spec) {
    if (spec.rfind("stub:", 0) == 0) return make_stub(spec);
    return load_detector_file(spec);
}

/// Snapshot timestamps count classifier evaluations instead of wall ms, so
/// repeated runs write byte-identical trace files.
std::function<double(std::uint64_t)> deterministic_trace_time() {
    return [](std::uint64_t evals) { return static_cast<double>(evals); };
}

Dataset load_datasets(const std::vector<std::string>& paths) {
    Dataset ds;
    for (const std::string& p : paths) {
        Dataset part = load_dataset(p);
        ds.records.insert(ds.records.end(), part.records.begin(), part.records.end());
    }
    return ds;
}

// ---------------------------------------------------------------------------

struct GenerateOpts {
    std::size_t benign = 0, malicious = 0;
    std::string out_dir;
    std::string corpus = SQLFUZZ_DEFAULT_CORPUS;
};

int cmd_generate(const CommonOpts& common, const GenerateOpts& opt) {
    log_config(common, "generate",
               {{"benign", std::to_string(opt.benign)},
                {"malicious", std::to_string(opt.malicious)},
                {"corpus", opt.corpus},
                {"out", opt.out_dir}});
    Schema schema = fixture_schema();
    fs::create_directories(opt.out_dir);

    Dataset benign = generate_benign(opt.benign, schema, ValueDictionaries::builtin(),
                                     derive_seed(common.seed, "generate-benign"));
    save_dataset(benign, (fs::path(opt.out_dir) / "benign.tsv").string());

    AttackCorpus corpus = AttackCorpus::load(opt.corpus);
    Dataset malicious = generate_malicious(opt.malicious, schema, corpus,
                                           derive_seed(common.seed, "generate-malicious"));
    save_dataset(malicious, (fs::path(opt.out_dir) / "malicious.tsv").string());

    std::cout << "benign " << benign.size() << " -> " << opt.out_dir << "/benign.tsv\n"
              << "malicious " << malicious.size() << " -> " << opt.out_dir
              << "/malicious.tsv\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct TrainOpts {
    std::string kind;
    std::vector<std::string> datasets;
    std::string output;
    std::string report;  // defaults to <output>.report.csv
    std::string features = "token";
    double C = 0.0;      // 0 = kind default
    double gamma = 0.0;  // 0 = kind default
    int trees = 25;
    int ngram = 5;
    double alpha = 0.1;
    int folds = 5;
    bool dedup = false;
};

FeatureExtractor make_extractor(const std::string& features) {
    FeatureExtractor fx;
    if (features == "token") return fx;
    fx.mode = FeatureExtractor::Mode::Graph;
    if (features == "dir-prop") fx.graph = {Directedness::Directed, Weighting::Proportional};
    else if (features == "dir-unif") fx.graph = {Directedness::Directed, Weighting::Uniform};
    else if (features == "undir-prop")
        fx.graph = {Directedness::Undirected, Weighting::Proportional};
    else if (features == "undir-unif")
        fx.graph = {Directedness::Undirected, Weighting::Uniform};
    else
        throw CLI::ValidationError("--features",
                                   "expected token|dir-prop|dir-unif|undir-prop|undir-unif");
    return fx;
}

int cmd_train(const CommonOpts& common, TrainOpts opt) {
    if (opt.report.empty()) opt.report = opt.output + ".report.csv";
    log_config(common, "train",
               {{"kind", opt.kind},
                {"features", opt.features},
                {"folds", std::to_string(opt.folds)},
                {"out", opt.output}});

    Dataset ds = load_datasets(opt.datasets);
    TokenVocabulary vocab = TokenVocabulary::standard();
    FeatureExtractor fx = make_extractor(opt.features);
    if (opt.dedup) {
        DedupReport d = deduplicate_features(ds, fx);
        if (!common.quiet)
            std::cerr << "dedup: kept " << d.kept_sane << "+" << d.kept_malicious
                      << ", dropped " << d.dropped_sane << "+" << d.dropped_malicious << "\n";
        ds = std::move(d.dataset);
    }

    double C = opt.C, gamma = opt.gamma;
    Trainer trainer;
    std::uint64_t tseed = derive_seed(common.seed, "train");
    if (opt.kind == "naive-bayes") {
        trainer = [&](const Dataset& d) { return train_naive_bayes(d, vocab); };
    } else if (opt.kind == "linear-svm") {
        if (C <= 0.0) C = 19.30;
        trainer = [&](const Dataset& d) { return train_linear_svm(d, vocab, C, tseed); };
    } else if (opt.kind == "gaussian-svm") {
        if (C <= 0.0) C = opt.features == "token" ? 278.25 : 4.64;
        if (gamma <= 0.0) gamma = opt.features == "token" ? 0.013 : 0.71;
        trainer = [&](const Dataset& d) { return train_gaussian_svm(d, fx, C, gamma, tseed); };
    } else if (opt.kind == "random-forest") {
        trainer = [&](const Dataset& d) {
            return train_random_forest(d, vocab, opt.trees, tseed);
        };
    } else if (opt.kind == "char-ngram") {
        trainer = [&](const Dataset& d) { return train_char_ngram(d, opt.ngram, opt.alpha); };
    } else {
        throw CLI::ValidationError("--kind", "unknown model kind \"" + opt.kind + "\"");
    }

    CrossValidation cv = cross_validate(ds, trainer, opt.folds, derive_seed(common.seed, "cv"));
    auto model = trainer(ds);
    save_detector_file(*model, opt.output);

    std::ofstream report(opt.report);
    if (!report) throw std::runtime_error("cannot write report: " + opt.report);
    auto hyper = [](double v) { return v > 0.0 ? std::to_string(v) : std::string("NA"); };
    report << "C,gamma,avg_accuracy,stddev_accuracy\n"
           << hyper(C) << "," << hyper(gamma) << "," << cv.mean_accuracy << ","
           << cv.stddev_accuracy << "\n";

    std::cout << "model " << model->kind() << " -> " << opt.output << "\n"
              << "cv avg(A)=" << cv.mean_accuracy << " sigma=" << cv.stddev_accuracy
              << " -> " << opt.report << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct BenchmarkOpts {
    std::vector<std::string> models;
    std::vector<std::string> datasets;
    std::string output;
    double threshold = 0.5;
    bool measure_wall = false;
};

int cmd_benchmark(const CommonOpts& common, const BenchmarkOpts& opt) {
    log_config(common, "benchmark",
               {{"models", std::to_string(opt.models.size())}, {"out", opt.output}});
    Dataset ds = load_datasets(opt.datasets);

    std::vector<std::unique_ptr<Detector>> owned;
    std::vector<NamedModel> named;
    for (const std::string& spec : opt.models) {
        owned.push_back(load_model_arg(spec));
        named.push_back({spec, owned.back().get()});
    }

    BenchmarkReport report =
        run_benchmark(named, ds, opt.threshold, make_pmap(resolve_threads(common)));
    if (!opt.measure_wall)
        for (BenchmarkRow& row : report.rows) row.wall_ms = 0.0;  // keep runs reproducible

    std::ofstream out(opt.output);
    if (!out) throw std::runtime_error("cannot write report: " + opt.output);
    write_benchmark_csv(report, out);
    write_benchmark_csv(report, std::cout);
    return 0;
}

// ---------------------------------------------------------------------------

struct EvadeOpts {
    std::string model;
    std::string payload = "admin' OR 1=1#";
    double threshold = 0.5;
    std::uint32_t max_rounds = 1000;
    std::uint32_t round_size = 16;
    std::optional<double> time_budget_ms;
    bool unguided = false;
    bool compare = false;
    int unguided_instances = 100;
    std::string trace_path;
};

int cmd_evade(const CommonOpts& common, const EvadeOpts& opt) {
    log_config(common, "evade",
               {{"model", opt.model},
                {"mode", opt.compare ? "compare" : (opt.unguided ? "unguided" : "guided")},
                {"max_rounds", std::to_string(opt.max_rounds)},
                {"round_size", std::to_string(opt.round_size)}});
    auto model = load_model_arg(opt.model);

    EvasionConfig cfg;
    cfg.threshold = opt.threshold;
    cfg.max_rounds = opt.max_rounds;
    cfg.round_size = opt.round_size;
    cfg.time_budget_ms = opt.time_budget_ms;
    cfg.trace_time = deterministic_trace_time();
    ParallelMap pmap = make_pmap(resolve_threads(common));

    auto write_trace = [&](const EvasionExperiment& exp) {
        if (opt.trace_path.empty()) return;
        std::ofstream out(opt.trace_path);
        if (!out) throw std::runtime_error("cannot write trace: " + opt.trace_path);
        write_trace_csv(exp, out);
    };

    if (opt.compare) {
        cfg.seed = common.seed;
        EvasionExperiment exp = run_evasion_experiment(
            *model, opt.payload, cfg, opt.unguided_instances, pmap, &std::cerr);
        write_trace(exp);
        double unguided_final =
            exp.unguided_min.empty() ? 1.0 : exp.unguided_min.back().best_confidence;
        std::cout << "initial confidence " << exp.initial_confidence << "\n"
                  << "guided best " << exp.guided.best_confidence << " after "
                  << exp.guided.evaluations << " evaluations\n"
                  << "unguided min best " << unguided_final << " over "
                  << opt.unguided_instances << " instances\n"
                  << "best payload: " << exp.guided.best_payload << "\n";
        return 0;
    }

    EvasionResult result;
    if (opt.unguided) {
        cfg.seed = derive_seed(common.seed, "evade-unguided");
        result = evade_unguided(*model, opt.payload, cfg);
    } else {
        cfg.seed = derive_seed(common.seed, "evade");
        result = evade(*model, opt.payload, cfg, pmap);
    }

    if (!opt.trace_path.empty()) {
        EvasionExperiment exp;
        exp.guided = result;  // single run emitted as trial 0
        std::ofstream out(opt.trace_path);
        if (!out) throw std::runtime_error("cannot write trace: " + opt.trace_path);
        write_trace_csv(exp, out);
    }

    std::cout << "best payload: " << result.best_payload << "\n"
              << "confidence " << result.best_confidence << " after " << result.rounds_used
              << " rounds, " << result.evaluations << " evaluations\n"
              << (result.success ? "evaded" : "not evaded") << "\n";
    return result.success ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sqlfuzz: train SQL injection detectors and evade them with a "
                 "guided mutational fuzzer"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read option defaults from a TOML file");

    CommonOpts common;
    app.add_option("--seed", common.seed, "Root seed for all randomness")
        ->capture_default_str();
    app.add_option("--threads", common.threads,
                   "Worker threads (0 = $SQLFUZZ_THREADS or hardware)")
        ->capture_default_str();
    app.add_flag("--quiet", common.quiet, "Suppress the resolved-config log line");

    GenerateOpts gen;
    CLI::App* generate = app.add_subcommand("generate", "Generate labeled query datasets");
    generate->fallthrough();
    generate->add_option("--benign", gen.benign, "Benign query count")
        ->required()
        ->check(CLI::PositiveNumber);
    generate->add_option("--malicious", gen.malicious, "Malicious query count")
        ->required()
        ->check(CLI::PositiveNumber);
    generate->add_option("-o,--output", gen.out_dir, "Output directory")->required();
    generate->add_option("--corpus", gen.corpus, "Attack payload corpus file")
        ->capture_default_str();

    TrainOpts tr;
    CLI::App* train = app.add_subcommand("train", "Train a detector with cross-validation");
    train->fallthrough();
    train->add_option("--kind", tr.kind,
                      "naive-bayes|linear-svm|gaussian-svm|random-forest|char-ngram")
        ->required();
    train->add_option("--dataset", tr.datasets, "Dataset file (repeatable)")->required();
    train->add_option("-o,--output", tr.output, "Model file to write")->required();
    train->add_option("--report", tr.report, "Report CSV (default <output>.report.csv)");
    train->add_option("--features", tr.features,
                      "token|dir-prop|dir-unif|undir-prop|undir-unif")
        ->capture_default_str();
    train->add_option("-C", tr.C, "SVM regularization (0 = kind default)");
    train->add_option("--gamma", tr.gamma, "RBF kernel width (0 = kind default)");
    train->add_option("--trees", tr.trees, "Forest size")->capture_default_str();
    train->add_option("--ngram", tr.ngram, "Character n-gram order")->capture_default_str();
    train->add_option("--alpha", tr.alpha, "n-gram Laplace smoothing")->capture_default_str();
    train->add_option("--folds", tr.folds, "Cross-validation folds")->capture_default_str();
    train->add_flag("--dedup", tr.dedup, "Drop duplicate feature vectors before training");

    BenchmarkOpts bm;
    CLI::App* benchmark = app.add_subcommand("benchmark", "Score models on a held-out set");
    benchmark->fallthrough();
    benchmark->add_option("--model", bm.models, "Model file or stub:<name> (repeatable)")
        ->required();
    benchmark->add_option("--dataset", bm.datasets, "Dataset file (repeatable)")->required();
    benchmark->add_option("-o,--output", bm.output, "Report CSV path")->required();
    benchmark->add_option("--threshold", bm.threshold, "Decision threshold")
        ->capture_default_str();
    benchmark->add_flag("--measure-wall", bm.measure_wall,
                        "Fill wall_ms with real timings (not reproducible)");

    EvadeOpts ev;
    CLI::App* evade_cmd = app.add_subcommand("evade", "Run the evasion search");
    evade_cmd->fallthrough();
    evade_cmd->add_option("--model", ev.model, "Model file or stub:<name>")->required();
    evade_cmd->add_option("--payload", ev.payload, "Start payload")->capture_default_str();
    evade_cmd->add_option("--threshold", ev.threshold, "Success threshold")
        ->capture_default_str();
    evade_cmd->add_option("--max-rounds", ev.max_rounds, "Mutation round budget")
        ->capture_default_str();
    evade_cmd->add_option("--round-size", ev.round_size, "Mutants per round")
        ->capture_default_str();
    double budget_ms = 0.0;
    CLI::Option* budget_opt =
        evade_cmd->add_option("--time-budget-ms", budget_ms, "Wall-clock budget");
    evade_cmd->add_flag("--unguided", ev.unguided, "Random-walk baseline instead of guided");
    CLI::Option* compare_opt = evade_cmd->add_flag(
        "--compare", ev.compare, "One guided run vs. many unguided instances");
    evade_cmd->add_option("--unguided-instances", ev.unguided_instances,
                          "Instances for --compare")
        ->capture_default_str();
    evade_cmd->add_option("-o,--trace", ev.trace_path, "Trace CSV path");
    evade_cmd->callback([&] {
        if (*budget_opt) ev.time_budget_ms = budget_ms;
        if (*compare_opt && ev.unguided)
            throw CLI::ValidationError("--compare", "--compare already includes unguided runs");
    });

    CLI11_PARSE(app, argc, argv);

    try {
        if (*generate) return cmd_generate(common, gen);
        if (*train) return cmd_train(common, tr);
        if (*benchmark) return cmd_benchmark(common, bm);
        if (*evade_cmd) return cmd_evade(common, ev);
    } catch (const CLI::Error& e) {
        std::cerr << app.get_name() << ": " << e.what() << "\n";
        return e.get_exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
