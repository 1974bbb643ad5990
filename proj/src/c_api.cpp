#include "cuphaptics/cuphaptics.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "dataset.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "haptic_core.hpp"
#include "mlp.hpp"
#include "search.hpp"
#include "synth.hpp"

using namespace cuphaptics;

struct ch_dataset {
    std::vector<LabeledSample> samples;
};

struct ch_model {
    std::shared_ptr<const MlpModel> model;
    std::optional<TrainConfig> config;
    TrainHistory history;
};

struct ch_report {
    EvalReport report;
};

namespace {

thread_local std::string g_last_error;

ch_status fail(ch_status status, const std::string& msg) {
    g_last_error = msg;
    return status;
}

ch_status to_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidInput: return CH_ERR_INVALID_INPUT;
        case ErrorCode::Config: return CH_ERR_CONFIG;
        case ErrorCode::Parse: return CH_ERR_PARSE;
        case ErrorCode::Io: return CH_ERR_IO;
        case ErrorCode::DegenerateChannel: return CH_ERR_DEGENERATE_CHANNEL;
        case ErrorCode::ModelLoad: return CH_ERR_MODEL_LOAD;
    }
    return CH_ERR_INTERNAL;
}

template <typename F>
ch_status guarded(F&& body) {
    try {
        body();
        return CH_OK;
    } catch (const Error& e) {
        return fail(to_status(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(CH_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(CH_ERR_INTERNAL, e.what());
    }
}

void require(const void* p, const char* what) {
    if (!p) throw invalid_input(std::string(what) + " must not be NULL");
}

CupGeometry to_cpp(const ch_geometry* g) {
    CupGeometry out;
    if (g) {
        out.r_cup_mm = g->r_cup_mm;
        out.r_chamber_mm = g->r_chamber_mm;
    }
    return out;
}

PressureFieldParams to_cpp(const ch_field_params* p) {
    PressureFieldParams out;
    if (p) {
        out.p_max_kpa = p->p_max_kpa;
        out.transition_width_mm = p->transition_width_mm;
        out.response = p->response == CH_RESPONSE_AFFINE ? Response::Affine : Response::Sigmoid;
        out.noise_sigma_kpa = p->noise_sigma_kpa;
        out.p_atm_kpa = p->p_atm_kpa;
    }
    return out;
}

TrainConfig to_cpp(const ch_train_config* c) {
    TrainConfig out;
    if (c) {
        out.batch_size = c->batch_size;
        out.max_epochs = c->max_epochs;
        out.patience = c->patience;
        out.seed = c->seed;
        out.optimizer = {c->lr, c->rho, c->eps};
        out.input_mode = c->standardize ? InputMode::Standardized : InputMode::Raw;
    }
    return out;
}

SearchConfig to_cpp(const ch_search_config* c) {
    SearchConfig out;
    if (c) {
        out.step_size_mm = c->step_size_mm;
        out.max_steps = c->max_steps;
        out.success_delta_mm = c->success_delta_mm;
        out.seed = c->seed;
    }
    return out;
}

SensorFrame frame_of(const double p_ch[4], double p_atm) {
    require(p_ch, "p_ch");
    SensorFrame f;
    for (int i = 0; i < kChambers; ++i) f.p_ch[i] = p_ch[i];
    f.p_atm = p_atm;
    return f;
}

void fill(const DirectionEstimate& est, ch_direction* out) {
    out->vx = est.v_pred.x;
    out->vy = est.v_pred.y;
    out->has_phi = est.phi_pred ? 1 : 0;
    out->phi_deg = est.phi_pred ? est.phi_pred->degrees() : 0.0;
}

ch_sample to_c(const LabeledSample& s) {
    ch_sample out{};
    for (int i = 0; i < kChambers; ++i) out.p_ch[i] = s.frame.p_ch[i];
    out.p_atm = s.frame.p_atm;
    out.delta_mm = s.pose.delta_mm;
    out.phi_deg = s.pose.phi.degrees();
    return out;
}

EstimatorKind to_cpp(ch_estimator e) {
    switch (e) {
        case CH_ESTIMATOR_MODEL_BASED: return EstimatorKind::ModelBased;
        case CH_ESTIMATOR_MLP: return EstimatorKind::Mlp;
        case CH_ESTIMATOR_ORACLE: return EstimatorKind::Oracle;
    }
    throw config_error("unknown estimator");
}

Estimator estimator_of(ch_estimator e, const ch_model* model) {
    Estimator est{to_cpp(e), nullptr};
    if (est.kind == EstimatorKind::Mlp) {
        if (!model) throw config_error("the mlp estimator needs a model");
        est.model = model->model;
    }
    return est;
}

const Scores& scores_of(const SeedRun& run, ch_method m) { return m == CH_METHOD_MLP ? run.mlp : run.model_based; }

}  // namespace

extern "C" {

const char* ch_version(void) { return "1.0.0"; }

const char* ch_last_error(void) { return g_last_error.c_str(); }

const char* ch_status_name(ch_status status) {
    switch (status) {
        case CH_OK: return "ok";
        case CH_ERR_INVALID_INPUT: return "invalid input";
        case CH_ERR_CONFIG: return "configuration error";
        case CH_ERR_PARSE: return "parse error";
        case CH_ERR_IO: return "I/O error";
        case CH_ERR_DEGENERATE_CHANNEL: return "degenerate channel";
        case CH_ERR_MODEL_LOAD: return "model load error";
        case CH_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

ch_status ch_wrap_angle(double raw_degrees, double* out_degrees) {
    return guarded([&] {
        require(out_degrees, "out_degrees");
        *out_degrees = wrap_angle(raw_degrees).degrees();
    });
}

ch_status ch_angular_error(double a_degrees, double b_degrees, double* out_degrees) {
    return guarded([&] {
        require(out_degrees, "out_degrees");
        *out_degrees = angular_error(wrap_angle(a_degrees), wrap_angle(b_degrees));
    });
}

ch_status ch_vacuum_pressures(const double p_ch[4], double p_atm, double out_vacuum[4]) {
    return guarded([&] {
        require(out_vacuum, "out_vacuum");
        const auto vp = vacuum_pressures(frame_of(p_ch, p_atm));
        for (int i = 0; i < kChambers; ++i) out_vacuum[i] = vp.p[i];
    });
}

ch_status ch_model_direction(const double vacuum[4], ch_direction* out) {
    return guarded([&] {
        require(vacuum, "vacuum");
        require(out, "out");
        VacuumPressures vp;
        for (int i = 0; i < kChambers; ++i) {
            if (!std::isfinite(vacuum[i]) || vacuum[i] < -kPressureNoiseTolerance)
                throw invalid_input("vacuum pressures must be finite and >= -0.5 kPa");
            vp.p[i] = vacuum[i];
        }
        fill(model_direction(vp), out);
    });
}

ch_status ch_estimate_frame(const double p_ch[4], double p_atm, ch_direction* out) {
    return guarded([&] {
        require(out, "out");
        fill(model_direction(vacuum_pressures(frame_of(p_ch, p_atm))), out);
    });
}

void ch_geometry_default(ch_geometry* out) {
    if (!out) return;
    const CupGeometry g;
    *out = {g.r_cup_mm, g.r_chamber_mm};
}

void ch_field_params_default(ch_field_params* out) {
    if (!out) return;
    const PressureFieldParams p;
    *out = {p.p_max_kpa, p.transition_width_mm, CH_RESPONSE_SIGMOID, p.noise_sigma_kpa, p.p_atm_kpa};
}

void ch_generation_config_default(ch_generation_config* out) {
    if (!out) return;
    const GenerationConfig c;
    *out = {c.n_samples, c.delta_min_mm, c.delta_max_mm, c.phi_min_deg, c.phi_max_deg, CH_SAMPLING_UNIFORM_RANDOM,
            c.seed};
}

ch_status ch_synth_frame(const ch_geometry* geom, const ch_field_params* params, double delta_mm, double phi_deg,
                         uint64_t seed, ch_sample* out) {
    return guarded([&] {
        require(out, "out");
        const CupGeometry g = to_cpp(geom);
        const PressureFieldParams p = to_cpp(params);
        g.validate();
        p.validate();
        if (!(delta_mm >= 0.0) || !std::isfinite(delta_mm)) throw invalid_input("delta must be finite and >= 0");
        const GroundTruthPose pose{delta_mm, wrap_angle(phi_deg)};
        Rng rng(seed);
        *out = to_c({synth_frame(g, p, pose, rng), pose});
    });
}

ch_status ch_dataset_generate(const ch_geometry* geom, const ch_field_params* params,
                              const ch_generation_config* config, ch_dataset** out) {
    return guarded([&] {
        require(out, "out");
        GenerationConfig cfg;
        if (config) {
            cfg.n_samples = config->n_samples;
            cfg.delta_min_mm = config->delta_min_mm;
            cfg.delta_max_mm = config->delta_max_mm;
            cfg.phi_min_deg = config->phi_min_deg;
            cfg.phi_max_deg = config->phi_max_deg;
            cfg.sampling = config->sampling == CH_SAMPLING_GRID ? Sampling::Grid : Sampling::UniformRandom;
            cfg.seed = config->seed;
        }
        auto ds = std::make_unique<ch_dataset>();
        ds->samples = generate_dataset(to_cpp(geom), to_cpp(params), cfg);
        *out = ds.release();
    });
}

ch_status ch_dataset_read_csv(const char* path, ch_dataset** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto ds = std::make_unique<ch_dataset>();
        ds->samples = read_csv(path);
        *out = ds.release();
    });
}

ch_status ch_dataset_write_csv(const ch_dataset* dataset, const char* path) {
    return guarded([&] {
        require(dataset, "dataset");
        require(path, "path");
        write_csv(dataset->samples, path);
    });
}

size_t ch_dataset_size(const ch_dataset* dataset) { return dataset ? dataset->samples.size() : 0; }

ch_status ch_dataset_get(const ch_dataset* dataset, size_t index, ch_sample* out) {
    return guarded([&] {
        require(dataset, "dataset");
        require(out, "out");
        if (index >= dataset->samples.size()) throw invalid_input("sample index out of range");
        *out = to_c(dataset->samples[index]);
    });
}

ch_status ch_dataset_split(const ch_dataset* dataset, double train_fraction, uint64_t seed, ch_dataset** out_train,
                           ch_dataset** out_validation) {
    return guarded([&] {
        require(dataset, "dataset");
        require(out_train, "out_train");
        require(out_validation, "out_validation");
        Split parts = split(dataset->samples, SplitSpec{train_fraction, seed});
        auto tr = std::make_unique<ch_dataset>();
        auto va = std::make_unique<ch_dataset>();
        tr->samples = std::move(parts.train);
        va->samples = std::move(parts.validation);
        *out_train = tr.release();
        *out_validation = va.release();
    });
}

void ch_dataset_free(ch_dataset* dataset) { delete dataset; }

void ch_train_config_default(ch_train_config* out) {
    if (!out) return;
    const TrainConfig c;
    *out = {c.batch_size, c.max_epochs, c.patience, c.seed, c.optimizer.lr, c.optimizer.rho, c.optimizer.eps, 1};
}

ch_status ch_model_train(const ch_dataset* train_set, const ch_dataset* validation, const ch_train_config* config,
                         ch_model** out) {
    return guarded([&] {
        require(train_set, "train");
        require(validation, "validation");
        require(out, "out");
        const TrainConfig cfg = to_cpp(config);
        TrainResult res = train(train_set->samples, validation->samples, cfg);
        auto m = std::make_unique<ch_model>();
        m->model = std::make_shared<const MlpModel>(std::move(res.model));
        m->config = cfg;
        m->history = std::move(res.history);
        *out = m.release();
    });
}

ch_status ch_model_save(const ch_model* model, const char* path) {
    return guarded([&] {
        require(model, "model");
        require(path, "path");
        save_model(*model->model, path);
    });
}

ch_status ch_model_save_sidecar(const ch_model* model, const char* path) {
    return guarded([&] {
        require(model, "model");
        require(path, "path");
        if (!model->config) throw invalid_input("model carries no training metadata");
        write_model_sidecar(path, *model->model, *model->config, model->history);
    });
}

ch_status ch_model_load(const char* path, ch_model** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto m = std::make_unique<ch_model>();
        m->model = std::make_shared<const MlpModel>(load_model(path));
        *out = m.release();
    });
}

size_t ch_model_parameter_count(const ch_model* model) { return model ? model->model->parameter_count() : 0; }

ch_status ch_model_predict(const ch_model* model, const double p_ch[4], double p_atm, ch_direction* out) {
    return guarded([&] {
        require(model, "model");
        require(out, "out");
        const auto v = predict_vector(*model->model, frame_of(p_ch, p_atm));
        DirectionEstimate est{{v[0], v[1]}, decode_angle(v)};
        fill(est, out);
    });
}

size_t ch_model_history_epochs(const ch_model* model) { return model ? model->history.epochs() : 0; }

ch_status ch_model_history_get(const ch_model* model, size_t epoch, double* train_loss, double* val_loss,
                               double* val_rmse_deg) {
    return guarded([&] {
        require(model, "model");
        const auto& h = model->history;
        if (epoch >= h.epochs()) throw invalid_input("epoch index out of range");
        if (train_loss) *train_loss = h.train_loss[epoch];
        if (val_loss) *val_loss = h.val_loss[epoch];
        if (val_rmse_deg) *val_rmse_deg = h.val_rmse_deg[epoch];
    });
}

ch_status ch_model_history_write(const ch_model* model, const char* path, const char* format) {
    return guarded([&] {
        require(model, "model");
        require(path, "path");
        const std::string fmt = format ? format : "json";
        if (fmt != "json" && fmt != "csv") throw config_error("history format must be json or csv");
        const auto& h = model->history;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error(std::string("cannot open '") + path + "' for writing");
        if (fmt == "csv") {
            out << "epoch,train_loss,val_loss,val_rmse_deg\n";
            char buf[128];
            for (std::size_t e = 0; e < h.epochs(); ++e) {
                std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g\n", e, h.train_loss[e], h.val_loss[e],
                              h.val_rmse_deg[e]);
                out << buf;
            }
        } else {
            nlohmann::ordered_json j;
            j["epochs"] = h.epochs();
            j["best_epoch"] = h.best_epoch;
            j["initial_val_loss"] = h.initial_val_loss;
            j["best_val_loss"] = h.best_val_loss;
            j["stopped_early"] = h.stopped_early;
            j["train_loss"] = h.train_loss;
            j["val_loss"] = h.val_loss;
            j["val_rmse_deg"] = h.val_rmse_deg;
            out << j.dump(2) << '\n';
        }
        if (!out) throw io_error(std::string("write to '") + path + "' failed");
    });
}

void ch_model_free(ch_model* model) { delete model; }

ch_status ch_compare(const ch_dataset* dataset, double train_fraction, const ch_train_config* config,
                     const uint64_t* seeds, size_t n_seeds, ch_report** out) {
    return guarded([&] {
        require(dataset, "dataset");
        require(out, "out");
        if (n_seeds > 0) require(seeds, "seeds");
        auto r = std::make_unique<ch_report>();
        r->report = compare(dataset->samples, train_fraction, to_cpp(config), std::span(seeds, n_seeds));
        *out = r.release();
    });
}

size_t ch_report_seed_count(const ch_report* report) { return report ? report->report.runs.size() : 0; }

ch_status ch_report_summary(const ch_report* report, ch_method method, ch_method_summary* out) {
    return guarded([&] {
        require(report, "report");
        require(out, "out");
        const auto& s = report->report.summary(method == CH_METHOD_MLP ? Method::Mlp : Method::ModelBased);
        *out = {s.rmse_mean, s.rmse_std, s.mae_mean, s.mae_std};
    });
}

ch_status ch_report_seed_scores(const ch_report* report, ch_method method, size_t seed_index, ch_seed_scores* out) {
    return guarded([&] {
        require(report, "report");
        require(out, "out");
        if (seed_index >= report->report.runs.size()) throw invalid_input("seed index out of range");
        const SeedRun& run = report->report.runs[seed_index];
        const Scores& s = scores_of(run, method);
        *out = {run.seed, s.rmse_deg, s.mae_deg, s.n_samples, s.n_scored, s.n_undefined};
    });
}

ch_status ch_report_write_json(const ch_report* report, const char* path) {
    return guarded([&] {
        require(report, "report");
        require(path, "path");
        write_report_json(report->report, path);
    });
}

ch_status ch_report_write_csv(const ch_report* report, const char* path) {
    return guarded([&] {
        require(report, "report");
        require(path, "path");
        write_report_csv(report->report, path);
    });
}

ch_status ch_report_write_scatter(const ch_report* report, const char* dir) {
    return guarded([&] {
        require(report, "report");
        require(dir, "dir");
        const std::filesystem::path base(dir);
        for (const auto& run : report->report.runs) {
            const std::string suffix = "_seed" + std::to_string(run.seed) + ".csv";
            export_scatter(run.mlp_predictions, Method::Mlp, base / ("scatter_mlp" + suffix));
            export_scatter(run.model_predictions, Method::ModelBased, base / ("scatter_model_based" + suffix));
        }
    });
}

void ch_report_free(ch_report* report) { delete report; }

void ch_search_config_default(ch_search_config* out) {
    if (!out) return;
    const SearchConfig c;
    *out = {c.step_size_mm, c.max_steps, c.success_delta_mm, c.seed};
}

ch_status ch_parse_estimator(const char* name, ch_estimator* out) {
    return guarded([&] {
        require(name, "name");
        require(out, "out");
        const auto kind = parse_estimator(name);
        if (!kind) throw config_error(std::string("unknown estimator '") + name + "'");
        switch (*kind) {
            case EstimatorKind::ModelBased: *out = CH_ESTIMATOR_MODEL_BASED; break;
            case EstimatorKind::Mlp: *out = CH_ESTIMATOR_MLP; break;
            case EstimatorKind::Oracle: *out = CH_ESTIMATOR_ORACLE; break;
        }
    });
}

ch_status ch_search_run(double delta0_mm, double phi0_deg, const ch_search_config* config, ch_estimator estimator,
                        const ch_model* model, const ch_geometry* geom, const ch_field_params* params,
                        ch_search_outcome* out, double* trajectory_delta, size_t trajectory_capacity) {
    return guarded([&] {
        require(out, "out");
        if (!(delta0_mm >= 0.0) || !std::isfinite(delta0_mm)) throw invalid_input("delta0 must be finite and >= 0");
        SearchConfig cfg = to_cpp(config);
        cfg.estimator = estimator_of(estimator, model);
        const SearchResult res = run_search({delta0_mm, wrap_angle(phi0_deg)}, cfg, to_cpp(geom), to_cpp(params));
        out->success = res.success ? 1 : 0;
        out->steps = res.steps;
        out->reason = res.reason == Termination::Success      ? CH_TERMINATION_SUCCESS
                      : res.reason == Termination::NoGradient ? CH_TERMINATION_NO_GRADIENT
                                                              : CH_TERMINATION_BUDGET_EXHAUSTED;
        out->final_delta_mm = res.trajectory.back().delta_mm;
        if (trajectory_delta)
            for (std::size_t i = 0; i < res.trajectory.size() && i < trajectory_capacity; ++i)
                trajectory_delta[i] = res.trajectory[i].delta_mm;
    });
}

ch_status ch_batch_search(const ch_search_grid* grid, const ch_search_config* config, const ch_model* model,
                          const ch_geometry* geom, const ch_field_params* params, const char* csv_path) {
    return guarded([&] {
        require(grid, "grid");
        require(csv_path, "csv_path");
        SearchGrid g;
        auto copy = [](const double* p, std::size_t n, const char* what) {
            if (n > 0) require(p, what);
            return std::vector<double>(p, p + n);
        };
        g.delta0_mm = copy(grid->delta0_mm, grid->n_delta0, "delta0_mm");
        g.phi0_deg = copy(grid->phi0_deg, grid->n_phi0, "phi0_deg");
        g.noise_sigma_kpa = copy(grid->noise_sigma_kpa, grid->n_noise, "noise_sigma_kpa");
        if (grid->n_estimators > 0) require(grid->estimators, "estimators");
        for (std::size_t i = 0; i < grid->n_estimators; ++i)
            g.estimators.push_back(estimator_of(grid->estimators[i], model));
        g.reps = grid->reps;
        g.base = to_cpp(config);
        g.geom = to_cpp(geom);
        g.field = to_cpp(params);
        write_search_csv(batch_search(g), csv_path);
    });
}

}  // extern "C"
