#include "search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace cuphaptics {

std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::ModelBased: return "model_based";
        case EstimatorKind::Mlp: return "mlp";
        case EstimatorKind::Oracle: return "oracle";
    }
    return "unknown";
}

std::optional<EstimatorKind> parse_estimator(std::string_view name) {
    if (name == "model_based" || name == "model") return EstimatorKind::ModelBased;
    if (name == "mlp") return EstimatorKind::Mlp;
    if (name == "oracle") return EstimatorKind::Oracle;
    return std::nullopt;
}

void SearchConfig::validate() const {
    if (!(step_size_mm > 0.0) || !std::isfinite(step_size_mm)) throw config_error("step size must be positive");
    if (max_steps < 1) throw config_error("max steps must be at least 1");
    if (!(success_delta_mm >= 0.0)) throw config_error("success delta must be non-negative");
    if (estimator.kind == EstimatorKind::Mlp && !estimator.model)
        throw config_error("the mlp estimator needs a model");
}

DirectionEstimate estimate_direction(const Estimator& estimator, const SensorFrame& frame,
                                     const GroundTruthPose& truth) {
    switch (estimator.kind) {
        case EstimatorKind::ModelBased:
            return model_direction(vacuum_pressures(frame));
        case EstimatorKind::Mlp: {
            const auto out = predict_vector(*estimator.model, frame);
            DirectionEstimate est{{out[0], out[1]}, std::nullopt};
            est.phi_pred = decode_angle(out);
            return est;
        }
        case EstimatorKind::Oracle:
            return {{std::cos(truth.phi.radians()), std::sin(truth.phi.radians())}, truth.phi};
    }
    throw invalid_input("unknown estimator");
}

GroundTruthPose search_step(const GroundTruthPose& pose, const DirectionEstimate& estimate, double step_size_mm) {
    if (!estimate.phi_pred) throw invalid_input("search step needs a defined direction");
    // m.n as the cosine of the angle between them: exactly 1 when aligned.
    const double cos_between =
        std::cos((estimate.phi_pred->degrees() - pose.phi.degrees()) * std::numbers::pi / 180.0);
    return {std::max(0.0, pose.delta_mm - step_size_mm * cos_between), pose.phi};
}

SearchResult run_search(const GroundTruthPose& initial, const SearchConfig& config, const CupGeometry& geom,
                        const PressureFieldParams& params) {
    config.validate();
    geom.validate();
    params.validate();

    SearchResult result;
    GroundTruthPose pose = initial;
    result.trajectory.push_back(pose);
    for (;;) {
        if (pose.delta_mm <= config.success_delta_mm) {
            result.success = true;
            result.reason = Termination::Success;
            break;
        }
        if (result.steps >= config.max_steps) {
            result.reason = Termination::BudgetExhausted;
            break;
        }
        Rng rng = substream(config.seed, result.steps);
        const SensorFrame frame = synth_frame(geom, params, pose, rng);
        const DirectionEstimate est = estimate_direction(config.estimator, frame, pose);
        result.estimates.push_back(est);
        if (!est.phi_pred) {
            result.reason = Termination::NoGradient;
            break;
        }
        pose = search_step(pose, est, config.step_size_mm);
        result.trajectory.push_back(pose);
        ++result.steps;
    }
    return result;
}

std::vector<SearchCell> batch_search(const SearchGrid& grid) {
    if (grid.delta0_mm.empty() || grid.phi0_deg.empty() || grid.noise_sigma_kpa.empty() || grid.estimators.empty())
        throw config_error("search grid must be non-empty in every dimension");
    if (grid.reps < 1) throw config_error("reps must be at least 1");
    for (const auto& e : grid.estimators) {
        SearchConfig c = grid.base;
        c.estimator = e;
        c.validate();
    }

    struct CellSpec {
        std::size_t estimator;
        double noise, delta0, phi0;
    };
    std::vector<CellSpec> specs;
    for (std::size_t e = 0; e < grid.estimators.size(); ++e)
        for (double noise : grid.noise_sigma_kpa)
            for (double d0 : grid.delta0_mm)
                for (double p0 : grid.phi0_deg) specs.push_back({e, noise, d0, p0});

    std::vector<SearchCell> cells(specs.size());
    parallel_for(specs.size(), [&](std::size_t k) {
        const CellSpec& spec = specs[k];
        SearchConfig cfg = grid.base;
        cfg.estimator = grid.estimators[spec.estimator];
        PressureFieldParams field = grid.field;
        field.noise_sigma_kpa = spec.noise;
        const GroundTruthPose start{spec.delta0, wrap_angle(spec.phi0)};

        std::size_t successes = 0, steps = 0;
        for (std::size_t r = 0; r < grid.reps; ++r) {
            cfg.seed = mix_seed(grid.base.seed + r);
            const SearchResult res = run_search(start, cfg, grid.geom, field);
            successes += res.success ? 1 : 0;
            steps += res.steps;
        }
        const double reps = static_cast<double>(grid.reps);
        cells[k] = {spec.delta0,
                    spec.phi0,
                    spec.noise,
                    estimator_name(cfg.estimator.kind),
                    static_cast<double>(successes) / reps,
                    static_cast<double>(steps) / reps};
    });
    return cells;
}

void write_search_csv(const std::vector<SearchCell>& cells, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out << kSearchCsvHeader << '\n';
    char buf[128];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,", c.delta0_mm, c.phi0_deg, c.noise_sigma_kpa);
        out << buf << c.estimator;
        std::snprintf(buf, sizeof buf, ",%.9g,%.9g\n", c.success_rate, c.mean_steps);
        out << buf;
    }
    if (!out) throw io_error("write to '" + path.string() + "' failed");
}

}  // namespace cuphaptics
