// vbnet: command-line driver for data generation, training, identification
// and the Case A / Case B experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vbnet/ad/grad_check.hpp"
#include "vbnet/checkpoint.hpp"
#include "vbnet/errors.hpp"
#include "vbnet/experiments.hpp"
#include "vbnet/vb_core.hpp"

namespace fs = std::filesystem;
using namespace vbnet;

namespace {

constexpr const char* kOutDirEnv = "VBNET_OUT_DIR";
constexpr double kGradTolerance = 1e-4;

struct Common {
    std::string config_path;
    std::string out;
    std::map<std::string, std::string> overrides;

    ExperimentConfig config() const {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [key, text] : overrides) {
            nlohmann::json v;
            try {
                v = nlohmann::json::parse(text);
            } catch (const nlohmann::json::parse_error&) {
                throw ConfigError(key + ": '" + text + "' is not a number");
            }
            if (!v.is_number()) throw ConfigError(key + ": '" + text + "' is not a number");
            j[key] = v;
        }
        return config_from_json(j, cfg);
    }

    fs::path out_dir(const std::string& fallback) const {
        if (!out.empty()) return out;
        if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
        return fs::path("vbnet_out") / fallback;
    }
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, std::string("output directory (default: $") + kOutDirEnv +
                                        " or ./vbnet_out/<command>)");
    for (const auto& key : config_keys()) {
        sub->add_option_function<std::string>(
            "--" + key, [&c, key](const std::string& v) { c.overrides[key] = v; },
            "config override");
    }
    sub->add_option_function<std::string>(
        "--units", [&c](const std::string& v) { c.overrides["n_units"] = v; },
        "alias for --n_units");
}

std::vector<UnitData> load_or_generate(const std::string& data_dir, ExperimentConfig& cfg) {
    if (data_dir.empty()) {
        return build_fleet_data(default_fleet(cfg.n_units), synth_env(cfg.days, cfg.seed), cfg);
    }
    Dataset ds = read_dataset(data_dir);
    cfg.seq_len = ds.seq_len;
    cfg.rollout_len = ds.rollout_len;
    cfg.n_units = static_cast<int>(ds.fleet.units.size());
    return window_fleet_data(ds.fleet, std::move(ds.trajectories), cfg);
}

std::vector<Sample> training_samples(const std::vector<UnitData>& data) {
    std::vector<Sample> out;
    for (const auto& d : data) out.insert(out.end(), d.train.begin(), d.train.end());
    return out;
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

int cmd_gen_data(const Common& c, const std::string& env_csv) {
    ExperimentConfig cfg = c.config();
    const EnvSeries env = env_csv.empty() ? synth_env(cfg.days, cfg.seed) : import_env_csv(env_csv);
    const auto data = build_fleet_data(default_fleet(cfg.n_units), env, cfg);
    const fs::path dir = c.out_dir("data");
    write_dataset(dir, data, cfg);
    export_env_csv(env, dir / "env.csv");
    std::cout << "gen-data: " << data.size() << " units x " << env.size() << " hours -> "
              << dir.string() << '\n';
    return 0;
}

int cmd_train(const Common& c, const std::string& data_dir, const std::string& model_kind) {
    ExperimentConfig cfg = c.config();
    const auto data = load_or_generate(data_dir, cfg);
    const auto train = training_samples(data);
    const NormStats norm = compute_norm_stats(train);
    auto model = make_model(model_kind, cfg, data.size(), derive_seed(cfg.seed, model_kind));
    TrainOptions opts = TrainOptions::from(cfg);
    opts.seed = derive_seed(cfg.seed, "shuffle/" + model->kind());
    const TrainResult res = train_model(*model, train, norm, opts);
    const fs::path dir = c.out_dir("train");
    fs::create_directories(dir);
    save_checkpoint(dir / "checkpoint.json", *model, cfg, data.size(), norm);
    std::cout << "train: " << model->kind() << " " << res.epochs_run << " epochs, best epoch "
              << res.best_epoch << ", monitor " << fmt(res.best_monitor) << " -> "
              << (dir / "checkpoint.json").string() << '\n';
    return 0;
}

int cmd_eval(const Common& c, const std::string& ckpt_path, const std::string& data_dir) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    ExperimentConfig cfg = ck.config;
    const auto data = load_or_generate(data_dir, cfg);
    if (data.size() != ck.n_units) throw ConfigError("eval: data unit count differs from checkpoint");
    MetricReport report;
    report.config = ck.config;
    report.models.push_back(evaluate_model(*ck.model, data, ck.norm));
    if (const auto* net = dynamic_cast<const VbNet*>(ck.model.get())) {
        const auto rows = rollout_table(*net, data, ck.norm);
        report.physical = physical_analysis(*net, data, rows);
    }
    const fs::path dir = c.out_dir("eval");
    fs::create_directories(dir);
    write_json(dir / "report.json", report.to_json());
    const auto& m = report.models.front();
    std::cout << "eval: " << m.model << " test RMSE " << fmt(m.rmse) << ", R2 " << fmt(m.r2)
              << " over " << m.units.size() << " units\n";
    return 0;
}

int cmd_identify(const Common& c, const std::string& ckpt_path, const std::string& data_dir) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    const auto* net = dynamic_cast<const VbNet*>(ck.model.get());
    if (!net) throw ConfigError("identify: checkpoint does not hold a vbnet model");
    ExperimentConfig cfg = ck.config;
    const auto data = load_or_generate(data_dir, cfg);
    const auto rows = rollout_table(*net, data, ck.norm);
    const auto physical = physical_analysis(*net, data, rows);

    nlohmann::json units = nlohmann::json::array();
    for (const auto& p : physical) {
        VbParams vp;
        vp.unit_id = p.unit_id;
        vp.C_f = p.C_f_hat;
        vp.gamma = p.gamma;
        std::vector<std::int64_t> stamps;
        for (const auto& r : rows) {
            if (r.unit_id != p.unit_id) continue;
            vp.P_loss.push_back(r.P_loss_hat);
            stamps.push_back(r.timestamp);
        }
        nlohmann::json j = to_json(vp);
        j["timestamps"] = stamps;
        j["slope_kw_per_degC"] = p.slope;
        units.push_back(std::move(j));
    }
    const fs::path dir = c.out_dir("identify");
    fs::create_directories(dir);
    write_json(dir / "vb_params.json", nlohmann::json{{"units", units}});
    std::cout << "identify: battery parameters for " << physical.size() << " units -> "
              << (dir / "vb_params.json").string() << '\n';
    return 0;
}

int cmd_case_a(const Common& c) {
    const ExperimentConfig cfg = c.config();
    RunOptions opts;
    opts.out_dir = c.out_dir("case_a");
    opts.log = &std::cerr;
    const MetricReport r = run_case_a(cfg, opts);
    std::cout << "case-a: vbnet RMSE " << fmt(r.model("vbnet").rmse) << ", dense "
              << fmt(r.model("dense").rmse) << ", conv " << fmt(r.model("conv").rmse)
              << ", recurrent " << fmt(r.model("recurrent").rmse) << " -> "
              << opts.out_dir.string() << '\n';
    return 0;
}

int cmd_case_b(const Common& c, int mature, std::vector<double> alphas) {
    const ExperimentConfig cfg = c.config();
    if (alphas.empty()) alphas = kCaseBAlphas;
    RunOptions opts;
    opts.out_dir = c.out_dir("case_b");
    opts.log = &std::cerr;
    const CaseBReport r = run_case_b(cfg, mature, alphas, opts);
    std::cout << "case-b: " << r.cells.size() << " cells for " << mature << "+1 units -> "
              << (opts.out_dir / ("case_b_" + std::to_string(mature) + ".csv")).string() << '\n';
    return 0;
}

int cmd_grad_check(const Common& c, int points, std::size_t coords) {
    ExperimentConfig cfg = c.config();
    cfg.days = std::min(cfg.days, 6);
    const auto data =
        build_fleet_data(default_fleet(cfg.n_units), synth_env(cfg.days, cfg.seed), cfg);
    std::vector<Sample> pool = training_samples(data);
    if (pool.empty()) throw DomainError("grad-check: no samples");
    const NormStats norm = compute_norm_stats(pool);
    if (pool.size() > 4) pool.resize(4);
    const Batch batch = make_batch(pool, norm);

    double worst = 0.0;
    std::size_t checked = 0;
    for (int p = 0; p < points; ++p) {
        VbNet net(cfg, data.size(), derive_seed(cfg.seed, "grad-check/" + std::to_string(p)));
        // move γ off its shared initial value so every unit contributes
        ad::ParamList params = net.parameters();
        for (auto& np : params) {
            if (np.name != "loss.gamma") continue;
            auto g = np.value.mutable_data();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += 0.1 * static_cast<double>(i + p);
        }
        ad::GradCheckOptions opts;
        opts.max_coords = coords;
        opts.seed = derive_seed(cfg.seed, "grad-check/coords/" + std::to_string(p));
        const auto res = ad::grad_check([&] { return net.training_loss(batch); }, params, opts);
        worst = std::max(worst, res.max_rel_error);
        checked += res.checked;
    }
    const bool ok = worst <= kGradTolerance;
    std::cout << "grad-check: max relative error " << std::scientific << std::setprecision(3)
              << worst << " over " << checked << " coordinates at " << points << " points ("
              << (ok ? "ok" : "FAILED") << ")\n";
    return ok ? 0 : 1;
}

int cmd_report(const Common& c, const std::string& in_dir) {
    const fs::path dir = in_dir.empty() ? c.out_dir("case_a") : fs::path(in_dir);
    const fs::path report_path = dir / "report.json";
    std::ifstream in(report_path);
    if (!in) throw IngestionError("report: cannot open " + report_path.string(), 0);
    const nlohmann::json j = nlohmann::json::parse(in);
    const fs::path out_path = dir / "summary.csv";
    std::ofstream out(out_path);
    out << std::setprecision(10) << "model,unit_id,rmse,r2\n";
    std::size_t rows = 0;
    for (const auto& m : j.at("models")) {
        for (const auto& u : m.at("units")) {
            out << m.at("model").get<std::string>() << ',' << u.at("unit_id").get<int>() << ','
                << u.at("rmse").get<double>() << ',';
            if (!u.at("r2").is_null()) out << u.at("r2").get<double>();
            out << '\n';
            ++rows;
        }
    }
    std::cout << "report: " << rows << " rows (config " << j.at("config_hash").get<std::string>()
              << ") -> " << out_path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VB-NET virtual-battery identification for air-conditioning fleets", "vbnet"};
    app.require_subcommand(1);

    Common common;
    std::string data_dir;
    std::string env_csv;
    std::string model_kind = "vbnet";
    std::string checkpoint;
    std::string in_dir;
    int mature = 3;
    std::vector<double> alphas;
    int points = 10;
    std::size_t coords = 6;

    auto* gen = app.add_subcommand("gen-data", "simulate the fleet and write per-unit CSVs");
    add_common(gen, common);
    gen->add_option("--env", env_csv, "weather/price CSV (timestamp,T_out,price)")
        ->check(CLI::ExistingFile);

    auto* train = app.add_subcommand("train", "train one model and write a checkpoint");
    add_common(train, common);
    train->add_option("--data", data_dir, "dataset directory from gen-data");
    train->add_option("--model", model_kind, "vbnet, dense, conv or recurrent")
        ->check(CLI::IsMember({"vbnet", "dense", "conv", "recurrent"}));

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_common(eval, common);
    eval->add_option("--checkpoint", checkpoint, "checkpoint.json")->required();
    eval->add_option("--data", data_dir, "dataset directory from gen-data");

    auto* identify = app.add_subcommand("identify", "export identified battery parameters");
    add_common(identify, common);
    identify->add_option("--checkpoint", checkpoint, "vbnet checkpoint.json")->required();
    identify->add_option("--data", data_dir, "dataset directory from gen-data");

    auto* case_a = app.add_subcommand("case-a", "accuracy and physical-consistency experiment");
    add_common(case_a, common);

    auto* case_b = app.add_subcommand("case-b", "cold-start experiment");
    add_common(case_b, common);
    case_b->add_option("--mature", mature, "number of mature units")
        ->check(CLI::IsMember({3, 7}));
    case_b->add_option("--alphas", alphas, "comma-separated data ratios")->delimiter(',');

    auto* grad = app.add_subcommand("grad-check", "finite-difference check of the VB-NET loss");
    add_common(grad, common);
    grad->add_option("--points", points, "random parameter points")->check(CLI::PositiveNumber);
    grad->add_option("--coords", coords, "coordinates probed per parameter tensor");

    auto* report = app.add_subcommand("report", "summarise a report.json as CSV");
    add_common(report, common);
    report->add_option("--in", in_dir, "directory holding report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "vbnet: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*gen) return cmd_gen_data(common, env_csv);
        if (*train) return cmd_train(common, data_dir, model_kind);
        if (*eval) return cmd_eval(common, checkpoint, data_dir);
        if (*identify) return cmd_identify(common, checkpoint, data_dir);
        if (*case_a) return cmd_case_a(common);
        if (*case_b) return cmd_case_b(common, mature, alphas);
        if (*grad) return cmd_grad_check(common, points, coords);
        if (*report) return cmd_report(common, in_dir);
    } catch (const std::exception& e) {
        std::cerr << "vbnet: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
