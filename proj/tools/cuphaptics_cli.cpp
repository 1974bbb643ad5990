// cuphaptics command-line front end. Talks to the library only through the
// C API. Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or config.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cuphaptics/cuphaptics.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LibraryError : std::runtime_error {
    LibraryError(ch_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
    ch_status status;
};

void check(ch_status s) {
    if (s != CH_OK) throw LibraryError(s, ch_last_error());
}

int exit_code_for(ch_status s) {
    switch (s) {
        case CH_ERR_CONFIG:
        case CH_ERR_INVALID_INPUT: return kExitUsage;
        default: return kExitRuntime;
    }
}

template <typename T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using DatasetPtr = std::unique_ptr<ch_dataset, Deleter<ch_dataset, ch_dataset_free>>;
using ModelPtr = std::unique_ptr<ch_model, Deleter<ch_model, ch_model_free>>;
using ReportPtr = std::unique_ptr<ch_report, Deleter<ch_report, ch_report_free>>;

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size()) throw UsageError(flag + ": '" + cell + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError(flag + ": expected a comma-separated list");
    return out;
}

std::string json_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Globals {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string format = "json";
};

std::filesystem::path out_path(const Globals& g, const std::string& explicit_path, const std::string& name) {
    if (!explicit_path.empty()) return explicit_path;
    std::filesystem::create_directories(g.out_dir);
    return std::filesystem::path(g.out_dir) / name;
}

struct GenerateArgs {
    std::uint64_t n = 25273;
    double delta_min = 7.0;
    double delta_max = 14.0;
    double noise_sigma = 0.3;
    double transition_width = 4.0;
    std::string response = "sigmoid";
    std::string sampling = "random";
    std::string output;
};

int cmd_generate(const Globals& g, const GenerateArgs& a) {
    ch_geometry geom;
    ch_field_params field;
    ch_generation_config cfg;
    ch_geometry_default(&geom);
    ch_field_params_default(&field);
    ch_generation_config_default(&cfg);
    field.noise_sigma_kpa = a.noise_sigma;
    field.transition_width_mm = a.transition_width;
    field.response = a.response == "affine" ? CH_RESPONSE_AFFINE : CH_RESPONSE_SIGMOID;
    cfg.n_samples = a.n;
    cfg.delta_min_mm = a.delta_min;
    cfg.delta_max_mm = a.delta_max;
    cfg.sampling = a.sampling == "grid" ? CH_SAMPLING_GRID : CH_SAMPLING_UNIFORM_RANDOM;
    cfg.seed = g.seed;

    ch_dataset* raw = nullptr;
    check(ch_dataset_generate(&geom, &field, &cfg, &raw));
    DatasetPtr ds(raw);
    const auto path = out_path(g, a.output, "dataset.csv");
    check(ch_dataset_write_csv(ds.get(), path.string().c_str()));
    std::cout << "{\"dataset\": \"" << path.string() << "\", \"rows\": " << ch_dataset_size(ds.get()) << "}\n";
    return kExitOk;
}

struct TrainArgs {
    std::string data;
    double train_fraction = 0.8;
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    std::size_t patience = 20;
    double lr = 1e-3;
    bool raw_inputs = false;
    std::string model_out;
};

ch_train_config train_config(const Globals& g, const TrainArgs& a) {
    ch_train_config cfg;
    ch_train_config_default(&cfg);
    cfg.max_epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.patience = a.patience;
    cfg.lr = a.lr;
    cfg.standardize = a.raw_inputs ? 0 : 1;
    cfg.seed = g.seed;
    return cfg;
}

DatasetPtr load_dataset(const std::string& path) {
    ch_dataset* raw = nullptr;
    check(ch_dataset_read_csv(path.c_str(), &raw));
    return DatasetPtr(raw);
}

int cmd_train(const Globals& g, const TrainArgs& a) {
    if (g.format != "json" && g.format != "csv") throw UsageError("--format must be json or csv");
    DatasetPtr ds = load_dataset(a.data);
    ch_dataset *tr = nullptr, *va = nullptr;
    check(ch_dataset_split(ds.get(), a.train_fraction, g.seed, &tr, &va));
    DatasetPtr train_set(tr), val_set(va);

    const ch_train_config cfg = train_config(g, a);
    ch_model* raw = nullptr;
    check(ch_model_train(train_set.get(), val_set.get(), &cfg, &raw));
    ModelPtr model(raw);

    const auto model_path = out_path(g, a.model_out, "model.cupmlp");
    check(ch_model_save(model.get(), model_path.string().c_str()));
    check(ch_model_save_sidecar(model.get(), (model_path.string() + ".json").c_str()));
    const auto history_path = out_path(g, "", "history." + g.format);
    check(ch_model_history_write(model.get(), history_path.string().c_str(), g.format.c_str()));

    const std::size_t epochs = ch_model_history_epochs(model.get());
    double last_rmse = 0.0;
    if (epochs > 0) check(ch_model_history_get(model.get(), epochs - 1, nullptr, nullptr, &last_rmse));
    std::cout << "{\"model\": \"" << model_path.string() << "\", \"epochs\": " << epochs
              << ", \"train_size\": " << ch_dataset_size(train_set.get())
              << ", \"validation_size\": " << ch_dataset_size(val_set.get())
              << ", \"last_val_rmse_deg\": " << json_number(last_rmse) << "}\n";
    return kExitOk;
}

struct CompareArgs {
    TrainArgs train;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

int cmd_compare(const Globals& g, const CompareArgs& a) {
    if (g.format != "json" && g.format != "csv") throw UsageError("--format must be json or csv");
    DatasetPtr ds = load_dataset(a.train.data);
    const ch_train_config cfg = train_config(g, a.train);
    ch_report* raw = nullptr;
    check(ch_compare(ds.get(), a.train.train_fraction, &cfg, a.seeds.data(), a.seeds.size(), &raw));
    ReportPtr report(raw);

    const auto report_path = out_path(g, "", "report." + g.format);
    if (g.format == "csv")
        check(ch_report_write_csv(report.get(), report_path.string().c_str()));
    else
        check(ch_report_write_json(report.get(), report_path.string().c_str()));
    check(ch_report_write_scatter(report.get(), g.out_dir.c_str()));

    ch_method_summary mlp, model;
    check(ch_report_summary(report.get(), CH_METHOD_MLP, &mlp));
    check(ch_report_summary(report.get(), CH_METHOD_MODEL_BASED, &model));
    std::cout << "{\"report\": \"" << report_path.string() << "\", \"mlp_rmse_deg\": " << json_number(mlp.rmse_mean_deg)
              << ", \"mlp_rmse_std_deg\": " << json_number(mlp.rmse_std_deg)
              << ", \"model_based_rmse_deg\": " << json_number(model.rmse_mean_deg)
              << ", \"model_based_rmse_std_deg\": " << json_number(model.rmse_std_deg) << "}\n";
    return kExitOk;
}

struct SearchArgs {
    std::vector<std::string> estimators{"model_based"};
    std::string model;
    std::vector<double> delta0{14.0};
    std::vector<double> phi0;
    std::vector<double> noise{0.3};
    double step = 2.0;
    std::size_t max_steps = 25;
    double success_delta = 7.0;
    std::size_t reps = 10;
    std::string response = "sigmoid";
    double transition_width = 4.0;
    std::string output;
};

int cmd_search(const Globals& g, SearchArgs a) {
    std::vector<ch_estimator> estimators;
    bool needs_model = false;
    for (const auto& name : a.estimators) {
        ch_estimator e;
        if (ch_parse_estimator(name.c_str(), &e) != CH_OK) throw UsageError("--estimator: " + std::string(ch_last_error()));
        needs_model |= e == CH_ESTIMATOR_MLP;
        estimators.push_back(e);
    }
    if (needs_model && a.model.empty()) throw UsageError("--model is required when --estimator includes mlp");

    ModelPtr model;
    if (!a.model.empty()) {
        ch_model* raw = nullptr;
        check(ch_model_load(a.model.c_str(), &raw));
        model.reset(raw);
    }
    if (a.phi0.empty())
        for (int k = 0; k < 36; ++k) a.phi0.push_back(10.0 * k);

    ch_geometry geom;
    ch_field_params field;
    ch_search_config cfg;
    ch_geometry_default(&geom);
    ch_field_params_default(&field);
    ch_search_config_default(&cfg);
    field.response = a.response == "affine" ? CH_RESPONSE_AFFINE : CH_RESPONSE_SIGMOID;
    field.transition_width_mm = a.transition_width;
    cfg.step_size_mm = a.step;
    cfg.max_steps = a.max_steps;
    cfg.success_delta_mm = a.success_delta;
    cfg.seed = g.seed;

    const ch_search_grid grid{a.delta0.data(), a.delta0.size(), a.phi0.data(),       a.phi0.size(),
                              a.noise.data(),  a.noise.size(),  estimators.data(), estimators.size(),
                              a.reps};
    const auto path = out_path(g, a.output, "search.csv");
    check(ch_batch_search(&grid, &cfg, model.get(), &geom, &field, path.string().c_str()));
    std::cout << "{\"search\": \"" << path.string() << "\", \"cells\": "
              << a.delta0.size() * a.phi0.size() * a.noise.size() * estimators.size() << "}\n";
    return kExitOk;
}

struct PredictArgs {
    std::string p_ch;
    double p_atm = 101.325;
    std::string method = "model";
    std::string model;
};

int cmd_predict(const PredictArgs& a) {
    const std::vector<double> p = parse_doubles(a.p_ch, "--p-ch");
    if (p.size() != 4) throw UsageError("--p-ch: expected 4 chamber pressures, got " + std::to_string(p.size()));

    ch_direction dir;
    if (a.method == "model") {
        check(ch_estimate_frame(p.data(), a.p_atm, &dir));
    } else if (a.method == "mlp") {
        if (a.model.empty()) throw UsageError("--model is required with --method mlp");
        ch_model* raw = nullptr;
        check(ch_model_load(a.model.c_str(), &raw));
        ModelPtr model(raw);
        check(ch_model_predict(model.get(), p.data(), a.p_atm, &dir));
    } else {
        throw UsageError("--method must be model or mlp");
    }
    std::cout << "{\"method\": \"" << a.method << "\", \"v_pred\": [" << json_number(dir.vx) << ", "
              << json_number(dir.vy) << "], \"phi_pred_deg\": " << (dir.has_phi ? json_number(dir.phi_deg) : "null")
              << "}\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Suction-cup yaw estimation: data generation, MLP training, evaluation and haptic search"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Seed for every random choice");
    app.add_option("--out-dir", g.out_dir, "Directory for output files");
    app.add_option("--format", g.format, "Output format for history/report files")
        ->check(CLI::IsMember({"json", "csv"}));

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic plate-edge dataset CSV");
    generate->add_option("--n", gen.n, "Number of samples");
    generate->add_option("--delta-min", gen.delta_min, "Smallest lateral offset, mm");
    generate->add_option("--delta-max", gen.delta_max, "Largest lateral offset, mm");
    generate->add_option("--noise-sigma", gen.noise_sigma, "Chamber noise std, kPa");
    generate->add_option("--transition-width", gen.transition_width, "Partial-seal transition width, mm");
    generate->add_option("--response", gen.response)->check(CLI::IsMember({"affine", "sigmoid"}));
    generate->add_option("--sampling", gen.sampling)->check(CLI::IsMember({"grid", "random"}));
    generate->add_option("--output", gen.output, "Dataset path (default <out-dir>/dataset.csv)");

    TrainArgs tr;
    auto add_train_flags = [](CLI::App* cmd, TrainArgs& t) {
        cmd->add_option("--data", t.data, "Dataset CSV")->required();
        cmd->add_option("--train-fraction", t.train_fraction, "Fraction of samples used for training");
        cmd->add_option("--epochs", t.epochs, "Maximum epochs");
        cmd->add_option("--batch-size", t.batch_size, "Mini-batch size");
        cmd->add_option("--patience", t.patience, "Early-stopping patience, epochs");
        cmd->add_option("--lr", t.lr, "RMSprop learning rate");
        cmd->add_flag("--raw-inputs", t.raw_inputs, "Feed raw kPa instead of standardized inputs");
    };
    auto* train = app.add_subcommand("train", "Train the MLP and save it");
    add_train_flags(train, tr);
    train->add_option("--model-out", tr.model_out, "Model path (default <out-dir>/model.cupmlp)");

    CompareArgs cmp;
    auto* compare = app.add_subcommand("compare", "Compare MLP and model-based estimators over seeds");
    add_train_flags(compare, cmp.train);
    compare->add_option("--seeds", cmp.seeds, "Comma-separated seeds")->delimiter(',');

    SearchArgs sa;
    auto* search = app.add_subcommand("search", "Run closed-loop haptic search over a grid");
    search->add_option("--estimator", sa.estimators, "model_based, mlp or oracle (comma list)")->delimiter(',');
    search->add_option("--model", sa.model, "Model file for the mlp estimator");
    search->add_option("--delta0", sa.delta0, "Initial offsets, mm (comma list)")->delimiter(',');
    search->add_option("--phi0", sa.phi0, "Edge yaws, degrees (comma list; default 0,10,...,350)")->delimiter(',');
    search->add_option("--noise-sigma", sa.noise, "Sensor noise levels, kPa (comma list)")->delimiter(',');
    search->add_option("--step", sa.step, "Step size, mm");
    search->add_option("--max-steps", sa.max_steps, "Step budget");
    search->add_option("--success-delta", sa.success_delta, "Offset counted as a grasp, mm");
    search->add_option("--reps", sa.reps, "Repetitions per cell");
    search->add_option("--response", sa.response)->check(CLI::IsMember({"affine", "sigmoid"}));
    search->add_option("--transition-width", sa.transition_width, "Partial-seal transition width, mm");
    search->add_option("--output", sa.output, "CSV path (default <out-dir>/search.csv)");

    PredictArgs pa;
    auto* predict = app.add_subcommand("predict", "Estimate the direction for one reading");
    predict->add_option("--p-ch", pa.p_ch, "Four chamber pressures, kPa, comma-separated")->required();
    predict->add_option("--p-atm", pa.p_atm, "Atmospheric pressure, kPa");
    predict->add_option("--method", pa.method)->check(CLI::IsMember({"model", "mlp"}));
    predict->add_option("--model", pa.model, "Model file for --method mlp");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*generate) return cmd_generate(g, gen);
        if (*train) return cmd_train(g, tr);
        if (*compare) return cmd_compare(g, cmp);
        if (*search) return cmd_search(g, sa);
        if (*predict) return cmd_predict(pa);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const LibraryError& e) {
        std::cerr << "error: " << ch_status_name(e.status) << ": " << e.what() << '\n';
        return exit_code_for(e.status);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
