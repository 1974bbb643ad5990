#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "eval.hpp"
#include "support.hpp"
#include "synth.hpp"

using namespace cuphaptics;
using testsupport::TempDir;

namespace {

Prediction pred(double p, double t) { return {wrap_angle(p), wrap_angle(t)}; }

std::vector<LabeledSample> synthetic(std::size_t n, std::uint64_t seed, double noise, Response r, double width,
                                     Sampling sampling = Sampling::UniformRandom) {
    PressureFieldParams p;
    p.noise_sigma_kpa = noise;
    p.response = r;
    p.transition_width_mm = width;
    GenerationConfig cfg;
    cfg.n_samples = n;
    cfg.seed = seed;
    cfg.sampling = sampling;
    return generate_dataset(CupGeometry{}, p, cfg);
}

TrainConfig quick(std::size_t epochs) {
    TrainConfig cfg;
    cfg.max_epochs = epochs;
    return cfg;
}

}  // namespace

TEST_CASE("rmse_deg") {
    const std::vector<Prediction> exact{pred(10, 10), pred(200, 200), pred(0, 360)};
    CHECK(rmse_deg(exact) == 0.0);
    CHECK(rmse_deg(std::vector<Prediction>{pred(30, 10), pred(0, 20)}) == doctest::Approx(20.0));
    CHECK(rmse_deg(std::vector<Prediction>{pred(350, 10)}) == doctest::Approx(20.0));
    CHECK(rmse_deg(std::vector<Prediction>{pred(0, 30), pred(0, 40)}) == doctest::Approx(std::sqrt((900 + 1600) / 2.0)));
    CHECK_THROWS_AS(rmse_deg(std::vector<Prediction>{}), Error);
    CHECK_THROWS_AS(rmse_deg(std::vector<Prediction>{{std::nullopt, wrap_angle(3)}}), Error);
}

TEST_CASE("score excludes undefined predictions and counts them") {
    const std::vector<Prediction> mixed{pred(10, 20), {std::nullopt, wrap_angle(5)}, pred(40, 20)};
    const Scores s = score(mixed);
    CHECK(s.n_samples == 3);
    CHECK(s.n_scored == 2);
    CHECK(s.n_undefined == 1);
    CHECK(s.rmse_deg == doctest::Approx(std::sqrt((100.0 + 400.0) / 2)));
    CHECK(s.mae_deg == doctest::Approx(15.0));
}

TEST_CASE("property: rmse >= mae, both within [0, 180]") {
    Rng rng(1);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Prediction> ps;
        const std::size_t n = 1 + uniform_index(rng, 50);
        for (std::size_t i = 0; i < n; ++i) ps.push_back(pred(uniform(rng, 0, 360), uniform(rng, 0, 360)));
        const Scores s = score(ps);
        CHECK(s.rmse_deg >= s.mae_deg - 1e-12);
        CHECK(s.mae_deg >= 0.0);
        CHECK(s.rmse_deg <= 180.0);
        CHECK(s.n_scored + s.n_undefined == s.n_samples);
    }
}

TEST_CASE("evaluate_model_based") {
    SUBCASE("exact on the unclamped affine field") {
        const auto set = synthetic(2000, 1, 0.0, Response::Affine, 25.0);
        CHECK(rmse_deg(evaluate_model_based(set)) < 1e-6);
    }
    SUBCASE("exact on the sigmoid field at multiples of 45 degrees") {
        std::vector<LabeledSample> set;
        Rng rng(0);
        PressureFieldParams p;
        p.noise_sigma_kpa = 0.0;
        for (int k = 0; k < 8; ++k)
            for (double d = 7.0; d <= 14.0; d += 0.5) {
                const GroundTruthPose pose{d, wrap_angle(45.0 * k)};
                set.push_back({synth_frame(CupGeometry{}, p, pose, rng), pose});
            }
        CHECK(rmse_deg(evaluate_model_based(set)) < 1e-6);
    }
    SUBCASE("noisy default field: regression snapshot") {
        const auto set = synthetic(5000, 3, 0.3, Response::Sigmoid, 4.0);
        const Scores s = score(evaluate_model_based(set));
        CHECK(s.n_undefined == 0);
        CHECK(std::isfinite(s.rmse_deg));
        CHECK(s.rmse_deg > 0.0);
        CHECK(s.rmse_deg == doctest::Approx(3.97).epsilon(0.05));
    }
}

TEST_CASE("evaluate_mlp on a memorized toy set") {
    const auto set = synthetic(16, 2, 0.0, Response::Sigmoid, 4.0);
    TrainConfig cfg = quick(500);
    cfg.patience = 500;
    const auto res = train(set, set, cfg);
    const Scores s = score(evaluate_mlp(res.model, set));
    CHECK(s.rmse_deg < 5.0);
    CHECK(s.n_undefined == 0);
    CHECK(s.n_scored == 16);
}

TEST_CASE("compare structure and conventions") {
    const auto set = synthetic(600, 4, 0.3, Response::Sigmoid, 4.0);
    SUBCASE("single seed") {
        const std::vector<std::uint64_t> seeds{7};
        const auto r = compare(set, 0.8, quick(5), seeds);
        CHECK(r.single_run);
        CHECK(r.mlp.rmse_std == 0.0);
        CHECK(r.model_based.rmse_std == 0.0);
        REQUIRE(r.runs.size() == 1);
        CHECK(r.mlp.rmse_mean == r.runs[0].mlp.rmse_deg);
    }
    SUBCASE("several seeds") {
        const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
        const auto r = compare(set, 0.8, quick(5), seeds);
        CHECK_FALSE(r.single_run);
        REQUIRE(r.runs.size() == 5);
        double mean = 0.0;
        for (std::size_t k = 0; k < 5; ++k) {
            CHECK(r.runs[k].seed == seeds[k]);
            CHECK(r.runs[k].mlp.n_samples == 120);
            CHECK(r.runs[k].model_based.n_samples == 120);
            CHECK(r.runs[k].mlp_predictions.size() == 120);
            mean += r.runs[k].model_based.rmse_deg / 5;
        }
        CHECK(r.model_based.rmse_mean == doctest::Approx(mean));
        const auto j = report_json(r);
        CHECK(j["methods"]["mlp"]["per_seed"].size() == 5);
        CHECK(j["methods"]["model_based"]["per_seed"].size() == 5);
        CHECK(j.begin().key() == "n_samples");
    }
    SUBCASE("identical seeds give identical reports") {
        const std::vector<std::uint64_t> seeds{3, 9};
        CHECK(report_json(compare(set, 0.8, quick(4), seeds)).dump() ==
              report_json(compare(set, 0.8, quick(4), seeds)).dump());
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(compare(set, 0.8, quick(1), std::vector<std::uint64_t>{}), Error);
        CHECK_THROWS_AS(compare(set, 1.5, quick(1), std::vector<std::uint64_t>{1}), Error);
    }
}

TEST_CASE("scatter export") {
    TempDir dir("scatter");
    SUBCASE("empty results give a header-only file") {
        export_scatter(std::vector<Prediction>{}, Method::Mlp, dir / "empty.csv");
        CHECK(testsupport::slurp(dir / "empty.csv") == std::string(kScatterCsvHeader) + "\n");
        CHECK(read_scatter(dir / "empty.csv").empty());
    }
    SUBCASE("one row per defined prediction, parseable back") {
        Rng rng(5);
        std::vector<Prediction> ps;
        for (int i = 0; i < 500; ++i) {
            if (i % 50 == 0)
                ps.push_back({std::nullopt, wrap_angle(uniform(rng, 0, 360))});
            else
                ps.push_back(pred(uniform(rng, 0, 360), uniform(rng, 0, 360)));
        }
        export_scatter(ps, Method::ModelBased, dir / "s.csv");
        const auto rows = read_scatter(dir / "s.csv");
        CHECK(rows.size() == 490);
        std::size_t k = 0;
        for (const auto& p : ps) {
            if (!p.phi_pred) continue;
            CHECK(rows[k].method == "model_based");
            CHECK(rows[k].phi_true_deg == doctest::Approx(p.phi_true.degrees()).epsilon(1e-8));
            CHECK(rows[k].phi_pred_deg == doctest::Approx(p.phi_pred->degrees()).epsilon(1e-8));
            ++k;
        }
    }
}
