#include "cli.hpp"

#include "hybridfpca/config.hpp"
#include "hybridfpca/error.hpp"
#include "hybridfpca/io.hpp"
#include "hybridfpca/parallel.hpp"
#include "hybridfpca/pooling.hpp"
#include "hybridfpca/selection.hpp"
#include "hybridfpca/simgen.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>

namespace hybridfpca::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::shared_ptr<spdlog::logger> logger() {
    static auto log = [] {
        auto l = spdlog::stderr_color_mt("hybridfpca");
        l->set_pattern("[%l] %v");
        return l;
    }();
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("HYBRIDFPCA_LOG")) {
        const std::string v = env;
        if (v == "error") level = spdlog::level::err;
        else if (v == "warn") level = spdlog::level::warn;
        else if (v == "info") level = spdlog::level::info;
        else if (v == "debug") level = spdlog::level::debug;
    }
    log->set_level(level);
    return log;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NumericalFailure:
        case ErrorKind::IllPosedFit:
        case ErrorKind::UndefinedCorrelation:
            return 3;
        default:
            return 2;
    }
}

std::string version_string() { return HYBRIDFPCA_VERSION; }

json run_manifest(const std::string& command, std::uint64_t seed, int threads) {
    return {{"command", command},
            {"seed", seed},
            {"threads", threads},
            {"version", version_string()},
            {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                  std::to_string(EIGEN_MINOR_VERSION)},
            {"format_version", kFormatVersion}};
}

std::vector<FunctionalSample> read_predictors(const std::vector<std::string>& paths,
                                              const std::vector<std::string>& subjects) {
    if (paths.empty()) fail(ErrorKind::InvalidConfig, "at least one --predictor file is required");
    bool missing = false;
    std::string listing;
    for (const auto& p : paths) {
        const bool ok = fs::is_regular_file(p);
        missing = missing || !ok;
        listing += "\n  " + p + (ok ? " (found)" : " (missing)");
    }
    if (missing) fail(ErrorKind::Io, "predictor file(s) not found; expected paths:" + listing);
    std::vector<FunctionalSample> out;
    for (std::size_t j = 0; j < paths.size(); ++j) {
        const LabeledSample s = read_sample_csv(paths[j]);
        out.push_back(align_subjects(s, subjects, "predictor file " + paths[j]));
    }
    return out;
}

void write_labels(const fs::path& dir, const std::vector<std::string>& subjects,
                  const std::vector<std::string>& regions) {
    write_text(dir / "labels.json", json{{"subjects", subjects}, {"regions", regions}}.dump(2) + "\n");
}

std::vector<std::string> read_subject_labels(const fs::path& dir) {
    const fs::path p = dir / "labels.json";
    if (!fs::exists(p)) return {};
    return read_json(p).at("subjects").get<std::vector<std::string>>();
}

SelectionConfig load_selection_config(const std::string& path) {
    if (path.empty()) return {};
    const json j = read_json(path);
    return selection_config_from_json(j);
}

// ---- simulate ---------------------------------------------------------------

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return s;
}

std::string format_records(const std::vector<ReplicateRecord>& records) {
    std::string out = "scenario,replicate,ok,stage,metric,value\n";
    for (const auto& r : records) {
        const std::string head = r.scenario + ',' + std::to_string(r.replicate) + ',' + (r.ok ? "1" : "0") + ',' +
                                 sanitize(r.stage) + ',';
        if (!r.ok) {
            out += head + "error," + "nan\n";
            continue;
        }
        for (const auto& [metric, value] : r.metrics) out += head + metric + ',' + format_double(value) + '\n';
        char digest[32];
        std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(r.construction));
        out += head + "construction_digest," + digest + '\n';
    }
    return out;
}

std::string format_record_timing(const std::vector<ReplicateRecord>& records) {
    std::string out = "scenario,replicate,elapsed,user,system\n";
    for (const auto& r : records) {
        if (!r.ok) continue;
        out += r.scenario + ',' + std::to_string(r.replicate) + ',' + format_double(r.timing.elapsed) + ',' +
               (r.timing.user ? format_double(*r.timing.user) : "nan") + ',' +
               (r.timing.system ? format_double(*r.timing.system) : "nan") + '\n';
    }
    return out;
}

int write_scenario_outputs(const fs::path& out, const ScenarioReport& report, json manifest, double elapsed,
                           std::ostream& err) {
    write_text(out / "report.csv", format_report(report.rows));
    write_text(out / "timing.csv", format_report(report.timing_rows));
    write_text(out / "replicates.csv", format_records(report.records));
    write_text(out / "replicate_timing.csv", format_record_timing(report.records));

    std::map<std::string, std::pair<int, int>> counts;  // completed, attempted
    std::vector<std::string> order;
    json failures = json::array();
    for (const auto& r : report.records) {
        if (!counts.contains(r.scenario)) order.push_back(r.scenario);
        auto& c = counts[r.scenario];
        ++c.second;
        if (r.ok) {
            ++c.first;
        } else {
            failures.push_back({{"scenario", r.scenario}, {"replicate", r.replicate}, {"stage", r.stage},
                                {"error", r.error}});
            logger()->warn("replicate {} of {} failed at {}: {}", r.replicate, r.scenario, r.stage, r.error);
        }
    }
    json cells = json::array();
    for (const auto& s : order) cells.push_back({{"scenario", s}, {"completed", counts[s].first}, {"attempted", counts[s].second}});
    manifest["cells"] = cells;
    manifest["failures"] = failures;
    manifest["elapsed_seconds"] = elapsed;
    write_text(out / "manifest.json", manifest.dump(2) + "\n");

    for (const auto& s : order) {
        if (counts[s].first > 0) continue;
        for (const auto& r : report.records) {
            if (r.scenario == s) {
                err << "error: every replicate of " << s << " failed; stage " << r.stage << ": " << r.error << "\n";
                return 3;
            }
        }
    }
    return 0;
}

int cmd_simulate(int scenario, const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::optional<int> replicates, std::optional<double> fve, int threads, const fs::path& out,
                 std::ostream& os, std::ostream& err) {
    if (scenario != 1 && scenario != 2) fail(ErrorKind::InvalidConfig, "--scenario must be 1 or 2");
    ScenarioConfig config;
    if (scenario == 2) {
        config.sample_sizes = {20};
        config.omega_modes = {OmegaSampling::Complete};
    }
    if (!config_path.empty()) config = scenario_config_from_json(read_json(config_path), config);
    if (seed) config.seed = *seed;
    if (replicates) config.replicates = *replicates;
    if (fve) config.fve_target = *fve;
    config.validate();

    logger()->info("scenario {}: {} replicates, seed {}, {} threads", scenario, config.replicates, config.seed, threads);
    TimingCapture clock;
    const ScenarioReport report = scenario == 1 ? run_scenario1(config, threads) : run_scenario2(config, threads);
    const double elapsed = clock.stop().elapsed;

    json manifest = run_manifest("simulate", config.seed, threads);
    manifest["scenario"] = scenario;
    manifest["config"] = to_json(config);
    const int code = write_scenario_outputs(out, report, manifest, elapsed, err);
    if (code == 0) os << "wrote " << (out / "report.csv").string() << "\n";
    return code;
}

// ---- report -----------------------------------------------------------------

int cmd_report(const std::vector<std::string>& inputs, const fs::path& out, std::ostream& os, std::ostream& err) {
    if (inputs.empty()) fail(ErrorKind::InvalidConfig, "report needs at least one --in directory");
    std::vector<ReplicateRecord> records;
    std::map<std::pair<std::string, int>, std::size_t> index;
    int p = 0;
    for (const auto& dir : inputs) {
        const CsvTable t = read_csv(fs::path(dir) / "replicates.csv");
        const auto cs = t.column("scenario"), cr = t.column("replicate"), co = t.column("ok"), cst = t.column("stage"),
                   cm = t.column("metric"), cv = t.column("value");
        for (const auto& row : t.rows) {
            const auto key = std::pair{row[cs], std::stoi(row[cr])};
            auto it = index.find(key);
            if (it == index.end()) {
                it = index.emplace(key, records.size()).first;
                ReplicateRecord r;
                r.scenario = row[cs];
                r.replicate = key.second;
                r.ok = row[co] == "1";
                r.stage = row[cst];
                records.push_back(std::move(r));
            }
            auto& rec = records[it->second];
            const std::string& metric = row[cm];
            if (!rec.ok || metric == "construction_digest") continue;
            rec.metrics[metric] = std::stod(row[cv]);
            if (metric.rfind("mse_beta_", 0) == 0) p = std::max(p, std::stoi(metric.substr(9)));
        }
        const fs::path timing = fs::path(dir) / "replicate_timing.csv";
        if (fs::exists(timing)) {
            const CsvTable tt = read_csv(timing);
            for (const auto& row : tt.rows) {
                const auto it = index.find({row[tt.column("scenario")], std::stoi(row[tt.column("replicate")])});
                if (it == index.end()) continue;
                auto& tm = records[it->second].timing;
                tm.elapsed = std::stod(row[tt.column("elapsed")]);
                const double u = std::stod(row[tt.column("user")]), s = std::stod(row[tt.column("system")]);
                if (std::isfinite(u)) tm.user = u;
                if (std::isfinite(s)) tm.system = s;
            }
        }
    }
    const ScenarioReport report = summarize_records(std::move(records), p);
    write_text(out / "report.csv", format_report(report.rows));
    write_text(out / "timing.csv", format_report(report.timing_rows));
    os << "wrote " << (out / "report.csv").string() << "\n";
    (void)err;
    return 0;
}

// ---- decompose / pool / fit / select ----------------------------------------

int cmd_decompose(const std::string& tensor_path, const std::string& config_path, std::optional<double> fve,
                  const fs::path& out, std::ostream& os) {
    SelectionConfig config = load_selection_config(config_path);
    if (fve) config.hpca.fve_target = *fve;
    const LabeledTensor t = read_tensor_csv(tensor_path);
    logger()->info("decompose: {} subjects, {} regions, {}x{} grid", t.tensor.subjects(), t.tensor.regions(),
                   t.tensor.omega_size(), t.tensor.s_size());
    const HpcaModel model = fit_hpca(t.tensor, config.hpca);
    write_hpca_model(out, model);
    write_labels(out, t.subjects, t.regions);
    os << "K=" << model.K() << " L=" << model.L() << " M=" << model.M() << " components=" << model.components()
       << "\n";
    return 0;
}

int cmd_pool(const std::string& tensor_path, const std::string& model_dir, std::optional<int> q, bool demean,
             const fs::path& out, std::ostream& os) {
    if (tensor_path.empty() == model_dir.empty()) fail(ErrorKind::InvalidConfig, "pool needs exactly one of --tensor or --model");
    std::optional<FunctionalSample> pooled;
    std::vector<std::string> labels;
    if (!model_dir.empty()) {
        const HpcaModel model = read_hpca_model(model_dir);
        pooled = pool_reconstruction(model, q.value_or(model.components()));
        labels = read_subject_labels(model_dir);
    } else {
        const LabeledTensor t = read_tensor_csv(tensor_path);
        pooled = pool_to_curve(demean ? center(t.tensor).demeaned : t.tensor);
        labels = t.subjects;
    }
    write_sample_csv(out, *pooled, labels);
    os << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_fit(const std::string& response_path, const std::vector<std::string>& predictor_paths,
            const std::string& config_path, std::optional<std::uint64_t> seed, const fs::path& out, std::ostream& os) {
    SelectionConfig config = load_selection_config(config_path);
    if (seed) config.fit.seed = *seed;
    const LabeledSample response = read_sample_csv(response_path);
    const auto predictors = read_predictors(predictor_paths, response.subjects);
    const FofModel model = fit_fof(response.sample, predictors, config.fit);
    write_fof_model(out, model);
    write_sample_csv(out / "fitted.csv", predict(model, predictors), response.subjects);
    json manifest = run_manifest("fit", config.fit.seed, 1);
    manifest["config"] = to_json(config);
    write_text(out / "run.json", manifest.dump(2) + "\n");
    os << "penalty=" << format_double(model.chosen_penalty) << " train_mspe=" << format_double(model.train_mspe)
       << "\n";
    return 0;
}

int cmd_select(const std::string& tensor_path, const std::vector<std::string>& predictor_paths,
               const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<int> resplits,
               std::optional<double> fve, int threads, const fs::path& out, std::ostream& os) {
    SelectionConfig config = load_selection_config(config_path);
    if (seed) config.fit.seed = *seed;
    if (resplits) config.resplits = *resplits;
    if (fve) config.hpca.fve_target = *fve;
    if (config.resplits < 1) fail(ErrorKind::InvalidConfig, "--resplits must be >= 1");
    const LabeledTensor t = read_tensor_csv(tensor_path);
    const auto predictors = read_predictors(predictor_paths, t.subjects);
    logger()->info("select: {} subjects, {} predictors, {} resplits", t.tensor.subjects(), predictors.size(),
                   config.resplits);
    TimingCapture clock;
    const ResplitSummary summary =
        select_resplits(t.tensor, predictors, config.fit, config.hpca, config.resplits, threads);
    write_resplit_summary(out, summary);
    json manifest = run_manifest("select", config.fit.seed, threads);
    manifest["config"] = to_json(config);
    manifest["elapsed_seconds"] = clock.stop().elapsed;
    write_text(out / "manifest.json", manifest.dump(2) + "\n");
    os << "q_min=" << summary.q_min << " components=" << summary.components << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hybrid principal components and function-on-function regression"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    std::string config, tensor, model, response, out_path;
    std::vector<std::string> predictors, inputs;
    std::optional<std::uint64_t> seed;
    std::optional<int> resplits, replicates, q;
    std::optional<double> fve;
    int threads = default_threads();
    int scenario = 0;
    bool demean = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out_path, "Output directory (file for pool)")->required();
        sub->add_option("--threads", threads, "Cap on worker threads")->check(CLI::PositiveNumber);
    };

    auto* simulate = app.add_subcommand("simulate", "Run a simulation scenario");
    simulate->add_option("--scenario", scenario, "1 or 2")->required();
    simulate->add_option("--config", config, "Scenario JSON");
    simulate->add_option("--seed", seed, "Master seed");
    simulate->add_option("--replicates", replicates, "Override the replicate count");
    simulate->add_option("--fve", fve, "FVE target per dimension");
    add_common(simulate);

    auto* decompose = app.add_subcommand("decompose", "Fit HPCA to a tensor CSV");
    decompose->add_option("--tensor", tensor, "Tensor CSV (subject,region,omega,s,value)")->required();
    decompose->add_option("--config", config, "Selection JSON (fve_target, ranking)");
    decompose->add_option("--fve", fve, "FVE target per dimension");
    add_common(decompose);

    auto* pool = app.add_subcommand("pool", "Pool a tensor or a reconstruction to one curve per subject");
    pool->add_option("--tensor", tensor, "Tensor CSV");
    pool->add_option("--model", model, "HPCA model directory");
    pool->add_option("--q", q, "Components in the reconstruction (default: all)");
    pool->add_flag("--demean", demean, "Subtract the across-subject mean before pooling");
    add_common(pool);

    auto* fit = app.add_subcommand("fit", "Fit function-on-function regression");
    fit->add_option("--response", response, "Response CSV (subject,s,value)")->required();
    fit->add_option("--predictor", predictors, "Predictor CSV, repeatable")->required();
    fit->add_option("--config", config, "Selection JSON (fit section)");
    fit->add_option("--seed", seed, "Seed recorded in the manifest");
    add_common(fit);

    auto* select = app.add_subcommand("select", "Choose the number of HPCA components by prediction error");
    select->add_option("--tensor", tensor, "Tensor CSV")->required();
    select->add_option("--predictor", predictors, "Predictor CSV, repeatable")->required();
    select->add_option("--config", config, "Selection JSON");
    select->add_option("--seed", seed, "Split seed");
    select->add_option("--resplits", resplits, "Number of train/test resplits");
    select->add_option("--fve", fve, "FVE target per dimension");
    add_common(select);

    auto* report = app.add_subcommand("report", "Re-aggregate replicate records into report CSVs");
    report->add_option("--in", inputs, "simulate output directory, repeatable")->required();
    add_common(report);

    std::vector<std::string> argv_store{"hybridfpca"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << version_string() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    const fs::path out_dir(out_path);
    try {
        if (*simulate) return cmd_simulate(scenario, config, seed, replicates, fve, threads, out_dir, out, err);
        if (*decompose) return cmd_decompose(tensor, config, fve, out_dir, out);
        if (*pool) return cmd_pool(tensor, model, q, demean, out_dir, out);
        if (*fit) return cmd_fit(response, predictors, config, seed, out_dir, out);
        if (*select) return cmd_select(tensor, predictors, config, seed, resplits, fve, threads, out_dir, out);
        if (*report) return cmd_report(inputs, out_dir, out, err);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error (io): " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "error (invalid data): " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace hybridfpca::cli
