#include "eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "parallel.hpp"

namespace cuphaptics {

std::string method_name(Method m) { return m == Method::Mlp ? "mlp" : "model_based"; }

Scores score(std::span<const Prediction> predictions) {
    Scores s;
    s.n_samples = predictions.size();
    double sq = 0.0, abs_sum = 0.0;
    for (const auto& p : predictions) {
        if (!p.phi_pred) {
            ++s.n_undefined;
            continue;
        }
        const double e = angular_error(*p.phi_pred, p.phi_true);
        sq += e * e;
        abs_sum += e;
        ++s.n_scored;
    }
    if (s.n_scored == 0) throw invalid_input("no defined predictions to score");
    s.rmse_deg = std::sqrt(sq / static_cast<double>(s.n_scored));
    s.mae_deg = abs_sum / static_cast<double>(s.n_scored);
    return s;
}

double rmse_deg(std::span<const Prediction> predictions) { return score(predictions).rmse_deg; }
double mae_deg(std::span<const Prediction> predictions) { return score(predictions).mae_deg; }

std::vector<Prediction> evaluate_model_based(std::span<const LabeledSample> samples) {
    std::vector<Prediction> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({model_direction(vacuum_pressures(s.frame)).phi_pred, s.pose.phi});
    return out;
}

std::vector<Prediction> evaluate_mlp(const MlpModel& model, std::span<const LabeledSample> samples) {
    std::vector<Prediction> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({predict_angle(model, s.frame), s.pose.phi});
    return out;
}

namespace {

MethodSummary summarize(const std::vector<SeedRun>& runs, Method m) {
    auto pick = [m](const SeedRun& r) -> const Scores& { return m == Method::Mlp ? r.mlp : r.model_based; };
    const double n = static_cast<double>(runs.size());
    MethodSummary s;
    for (const auto& r : runs) {
        s.rmse_mean += pick(r).rmse_deg / n;
        s.mae_mean += pick(r).mae_deg / n;
    }
    if (runs.size() > 1) {
        double vr = 0.0, va = 0.0;
        for (const auto& r : runs) {
            vr += (pick(r).rmse_deg - s.rmse_mean) * (pick(r).rmse_deg - s.rmse_mean);
            va += (pick(r).mae_deg - s.mae_mean) * (pick(r).mae_deg - s.mae_mean);
        }
        s.rmse_std = std::sqrt(vr / n);
        s.mae_std = std::sqrt(va / n);
    }
    return s;
}

nlohmann::ordered_json scores_json(std::uint64_t seed, const Scores& s) {
    return {{"seed", seed},
            {"rmse_deg", s.rmse_deg},
            {"mae_deg", s.mae_deg},
            {"n_samples", s.n_samples},
            {"n_scored", s.n_scored},
            {"n_undefined", s.n_undefined}};
}

}  // namespace

EvalReport compare(std::span<const LabeledSample> dataset, double train_fraction, const TrainConfig& train_config,
                   std::span<const std::uint64_t> seeds) {
    if (seeds.empty()) throw config_error("compare needs at least one seed");
    train_config.validate();
    SplitSpec{train_fraction, 0}.validate();

    EvalReport report;
    report.n_samples = dataset.size();
    report.train_fraction = train_fraction;
    report.runs.resize(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) {
        const std::uint64_t seed = seeds[k];
        const Split parts = split(dataset, SplitSpec{train_fraction, seed});
        TrainConfig cfg = train_config;
        cfg.seed = seed;
        TrainResult trained = train(parts.train, parts.validation, cfg);

        SeedRun& run = report.runs[k];
        run.seed = seed;
        run.mlp_predictions = evaluate_mlp(trained.model, parts.validation);
        run.model_predictions = evaluate_model_based(parts.validation);
        run.mlp = score(run.mlp_predictions);
        run.model_based = score(run.model_predictions);
        run.history = std::move(trained.history);
    });
    report.mlp = summarize(report.runs, Method::Mlp);
    report.model_based = summarize(report.runs, Method::ModelBased);
    report.single_run = seeds.size() == 1;
    return report;
}

nlohmann::ordered_json report_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["n_samples"] = report.n_samples;
    j["train_fraction"] = report.train_fraction;
    auto seeds = nlohmann::ordered_json::array();
    for (const auto& r : report.runs) seeds.push_back(r.seed);
    j["seeds"] = seeds;
    j["single_run"] = report.single_run;
    for (Method m : {Method::Mlp, Method::ModelBased}) {
        const auto& s = report.summary(m);
        nlohmann::ordered_json mj;
        mj["rmse_deg_mean"] = s.rmse_mean;
        mj["rmse_deg_std"] = s.rmse_std;
        mj["mae_deg_mean"] = s.mae_mean;
        mj["mae_deg_std"] = s.mae_std;
        auto per_seed = nlohmann::ordered_json::array();
        for (const auto& r : report.runs) per_seed.push_back(scores_json(r.seed, m == Method::Mlp ? r.mlp : r.model_based));
        mj["per_seed"] = per_seed;
        j["methods"][method_name(m)] = mj;
    }
    return j;
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out << report_json(report).dump(2) << '\n';
    if (!out) throw io_error("write to '" + path.string() + "' failed");
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out << "method,seed,rmse_deg,mae_deg,n_samples,n_scored,n_undefined\n";
    char buf[64];
    for (Method m : {Method::Mlp, Method::ModelBased}) {
        for (const auto& r : report.runs) {
            const Scores& s = m == Method::Mlp ? r.mlp : r.model_based;
            out << method_name(m) << ',' << r.seed << ',';
            std::snprintf(buf, sizeof buf, "%.9g,%.9g,", s.rmse_deg, s.mae_deg);
            out << buf << s.n_samples << ',' << s.n_scored << ',' << s.n_undefined << '\n';
        }
    }
    if (!out) throw io_error("write to '" + path.string() + "' failed");
}

void export_scatter(std::span<const Prediction> predictions, Method method, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out << kScatterCsvHeader << '\n';
    const std::string name = method_name(method);
    char buf[64];
    for (const auto& p : predictions) {
        if (!p.phi_pred) continue;
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,", p.phi_true.degrees(), p.phi_pred->degrees());
        out << buf << name << '\n';
    }
    if (!out) throw io_error("write to '" + path.string() + "' failed");
}

std::vector<ScatterRow> read_scatter(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != kScatterCsvHeader) throw parse_error("line 1: scatter header mismatch");
    std::vector<ScatterRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        ScatterRow row;
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, row.method))
            throw parse_error("line " + std::to_string(line_no) + ": expected 3 columns");
        try {
            row.phi_true_deg = std::stod(a);
            row.phi_pred_deg = std::stod(b);
        } catch (const std::exception&) {
            throw parse_error("line " + std::to_string(line_no) + ": non-numeric angle");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace cuphaptics
