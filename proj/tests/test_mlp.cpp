#include <doctest.h>

#include <cmath>
#include <random>

#include "error.hpp"
#include "mlp.hpp"
#include "support.hpp"
#include "synth.hpp"

using namespace cuphaptics;

namespace {

std::vector<LabeledSample> synthetic(std::size_t n, std::uint64_t seed, double noise, Response r = Response::Sigmoid,
                                     double width = 4.0) {
    PressureFieldParams p;
    p.noise_sigma_kpa = noise;
    p.response = r;
    p.transition_width_mm = width;
    GenerationConfig cfg;
    cfg.n_samples = n;
    cfg.seed = seed;
    return generate_dataset(CupGeometry{}, p, cfg);
}

double train_rmse(const MlpModel& m, const std::vector<LabeledSample>& set) {
    double sq = 0.0;
    for (const auto& s : set) {
        const auto phi = predict_angle(m, s.frame);
        REQUIRE(phi);
        const double e = angular_error(*phi, s.pose.phi);
        sq += e * e;
    }
    return std::sqrt(sq / set.size());
}

}  // namespace

TEST_CASE("init_model shapes and parameter count") {
    const MlpModel m = init_model(1);
    CHECK(m.layer_sizes() == std::vector<std::size_t>{4, 16, 32, 16, 2});
    CHECK(m.parameter_count() == (4 * 16 + 16) + (16 * 32 + 32) + (32 * 16 + 16) + (16 * 2 + 2));
    CHECK(m.parameter_count() == 1186);
    const std::size_t expected[4][2] = {{16, 4}, {32, 16}, {16, 32}, {2, 16}};
    for (std::size_t l = 0; l < 4; ++l) {
        CHECK(m.weights(l).size() == expected[l][0] * expected[l][1]);
        CHECK(m.biases(l).size() == expected[l][0]);
        for (double b : m.biases(l)) CHECK(b == 0.0);
        const double bound = std::sqrt(6.0 / (expected[l][0] + expected[l][1]));
        for (double w : m.weights(l)) {
            CHECK(w >= -bound);
            CHECK(w < bound);
        }
    }
}

TEST_CASE("init_model is deterministic in the seed") {
    const auto a = init_model(9), b = init_model(9), c = init_model(10);
    CHECK(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
    CHECK_FALSE(std::equal(a.params().begin(), a.params().end(), c.params().begin()));
}

TEST_CASE("forward") {
    SUBCASE("all-zero parameters give a zero output") {
        const MlpModel zero;
        const auto out = forward(zero, std::vector<double>{1, -2, 3, 100});
        CHECK(out == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("ReLU gates a negative input in a 1x1 chain") {
        MlpModel chain({1, 1, 1, 1});
        for (std::size_t l = 0; l < chain.layer_count(); ++l) chain.weights(l)[0] = 1.0;
        CHECK(forward(chain, std::vector<double>{-3.0})[0] == 0.0);
        CHECK(forward(chain, std::vector<double>{3.0})[0] == 3.0);
    }
    SUBCASE("matches the straight-line reference network") {
        std::mt19937_64 gen(3);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            MlpModel m = init_model(seed);
            for (std::size_t l = 0; l < m.layer_count(); ++l)
                for (double& b : m.biases(l)) b = 0.1 * nd(gen);
            const auto ref = testsupport::unpack(m.layer_sizes(), m.params());
            for (int k = 0; k < 10; ++k) {
                std::vector<double> x{nd(gen), nd(gen), nd(gen), nd(gen)};
                const auto y = forward(m, x);
                const auto y_ref = testsupport::ref_forward(ref, x);
                CHECK(std::abs(y[0] - y_ref[0]) < 1e-12);
                CHECK(std::abs(y[1] - y_ref[1]) < 1e-12);
            }
        }
    }
    SUBCASE("bad inputs") {
        const MlpModel m = init_model(0);
        CHECK_THROWS_AS(forward(m, std::vector<double>{1, 2, 3}), Error);
        CHECK_THROWS_AS(forward(m, std::vector<double>{1, 2, NAN, 4}), Error);
    }
}

TEST_CASE("target encoding and angle decoding") {
    const auto e0 = target_encoding(wrap_angle(0));
    CHECK(e0[0] == 1.0);
    CHECK(e0[1] == 0.0);
    const auto e90 = target_encoding(wrap_angle(90));
    CHECK(e90[0] == doctest::Approx(0.0));
    CHECK(e90[1] == 1.0);
    CHECK(decode_angle(std::vector<double>{1, 0})->degrees() == 0.0);
    CHECK(decode_angle(std::vector<double>{0, 1})->degrees() == doctest::Approx(90));
    CHECK(decode_angle(std::vector<double>{-0.7071, -0.7071})->degrees() == doctest::Approx(225));
    CHECK_FALSE(decode_angle(std::vector<double>{0, 0}).has_value());
}

TEST_CASE("property: decoding an encoded angle returns it") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> any(0.0, 360.0);
    for (int i = 0; i < 20000; ++i) {
        const Angle phi = wrap_angle(any(gen));
        const auto enc = target_encoding(phi);
        CHECK(angular_error(*decode_angle(enc), phi) < 1e-9);
    }
}

TEST_CASE("loss") {
    const std::vector<double> a{0.3, -0.2};
    CHECK(loss(a, a) == 0.0);
    CHECK(loss(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 1.0);
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 1000; ++i)
        CHECK(loss(std::vector<double>{nd(gen), nd(gen)}, std::vector<double>{nd(gen), nd(gen)}) >= 0.0);
}

TEST_CASE("backward") {
    SUBCASE("zero model with zero targets has zero gradient") {
        const MlpModel zero;
        const std::vector<double> inputs{1, 2, 3, 4, -1, 0, 2, 5};
        const std::vector<double> targets(4, 0.0);
        const auto g = backward(zero, {inputs, targets, 2});
        CHECK(std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; }));
    }
    SUBCASE("duplicating a sample leaves the mean gradient unchanged") {
        MlpModel m = init_model(21);
        const std::vector<double> x{0.3, -1.2, 0.8, 0.1}, t{0.6, 0.8};
        const auto g1 = backward(m, {x, t, 1});
        std::vector<double> xs, ts;
        for (int k = 0; k < 5; ++k) {
            xs.insert(xs.end(), x.begin(), x.end());
            ts.insert(ts.end(), t.begin(), t.end());
        }
        const auto g5 = backward(m, {xs, ts, 5});
        for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g5[i] == doctest::Approx(g1[i]).epsilon(1e-12));
    }
    SUBCASE("returned loss equals the reference batch loss") {
        MlpModel m = init_model(22);
        const std::vector<double> xs{0.3, -1.2, 0.8, 0.1, 1, 1, -1, 0}, ts{0.6, 0.8, -1, 0};
        std::vector<double> g(m.parameter_count());
        const double l = backward(m, {xs, ts, 2}, g);
        CHECK(l == doctest::Approx(testsupport::ref_batch_loss(m.layer_sizes(), m.params(), xs, ts, 2)).epsilon(1e-12));
    }
    SUBCASE("empty batch") {
        const MlpModel m;
        CHECK_THROWS_AS(backward(m, {{}, {}, 0}), Error);
    }
}

TEST_CASE("property: backward agrees with central finite differences") {
    std::mt19937_64 gen(6);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_int_distribution<int> width(1, 6), depth(1, 3), bsize(1, 5);
    std::size_t checked = 0;
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::size_t> sizes{static_cast<std::size_t>(width(gen))};
        const int hidden = depth(gen);
        for (int h = 0; h < hidden; ++h) sizes.push_back(static_cast<std::size_t>(width(gen)));
        sizes.push_back(static_cast<std::size_t>(1 + width(gen) % 3));
        MlpModel m(sizes);
        for (double& p : m.params()) p = 0.7 * nd(gen);
        const std::size_t b = static_cast<std::size_t>(bsize(gen));
        std::vector<double> xs(b * sizes.front()), ts(b * sizes.back());
        for (double& x : xs) x = nd(gen);
        for (double& t : ts) t = nd(gen);
        const auto g = backward(m, {xs, ts, b});
        const auto st = testsupport::finite_difference_check(
            sizes, std::vector<double>(m.params().begin(), m.params().end()), g, xs, ts, b);
        CHECK(st.failed == 0);
        checked += st.checked;
    }
    CHECK(checked > 500);
}

TEST_CASE("rmsprop_step") {
    SUBCASE("closed-form first step") {
        std::vector<double> theta{0.0}, g{1.0};
        RmspropState st({0.01, 0.9, 1e-8}, 1);
        rmsprop_step(theta, g, st);
        CHECK(st.v[0] == doctest::Approx(0.1).epsilon(1e-15));
        const double expected = -0.01 / (std::sqrt((1.0 - 0.9) * 1.0) + 1e-8);
        CHECK(theta[0] == expected);
        CHECK(theta[0] == doctest::Approx(-0.0316228).epsilon(5e-7));
    }
    SUBCASE("zero gradient only decays the running mean") {
        std::vector<double> theta{1.5}, g{0.0};
        RmspropState st({0.01, 0.9, 1e-8}, 1);
        st.v[0] = 0.4;
        rmsprop_step(theta, g, st);
        CHECK(theta[0] == 1.5);
        CHECK(st.v[0] == 0.9 * 0.4);
    }
    SUBCASE("constant gradient steps converge to lr") {
        std::vector<double> theta{0.0}, g{-2.5};
        RmspropState st({0.01, 0.9, 1e-8}, 1);
        double prev = 0.0, step = 0.0;
        for (int k = 0; k < 200; ++k) {
            rmsprop_step(theta, g, st);
            step = std::abs(theta[0] - prev);
            prev = theta[0];
        }
        CHECK(std::abs(step - 0.01) < 0.01 * 0.01);
    }
    SUBCASE("shape mismatch") {
        std::vector<double> theta{0.0, 1.0}, g{1.0};
        RmspropState st({}, 2);
        CHECK_THROWS_AS(rmsprop_step(theta, g, st), Error);
    }
    SUBCASE("hyperparameter validation") {
        CHECK_THROWS_AS((RmspropParams{0.0, 0.9, 1e-8}.validate()), Error);
        CHECK_THROWS_AS((RmspropParams{1e-3, 1.0, 1e-8}.validate()), Error);
        CHECK_THROWS_AS((RmspropParams{1e-3, 0.9, 0.0}.validate()), Error);
    }
}

TEST_CASE("training memorizes a small noiseless set") {
    const auto set = synthetic(16, 2, 0.0);
    TrainConfig cfg;
    cfg.max_epochs = 500;
    cfg.patience = 500;
    cfg.seed = 3;
    const auto res = train(set, set, cfg);
    CHECK(res.history.epochs() == 500);
    CHECK(train_rmse(res.model, set) < 5.0);
}

TEST_CASE("training is deterministic and respects the schedule") {
    const auto set = synthetic(300, 4, 0.3);
    const auto parts = split(set, SplitSpec{0.8, 4});
    TrainConfig cfg;
    cfg.max_epochs = 15;
    cfg.seed = 11;
    const auto a = train(parts.train, parts.validation, cfg);
    const auto b = train(parts.train, parts.validation, cfg);
    CHECK(a.history == b.history);
    CHECK(std::equal(a.model.params().begin(), a.model.params().end(), b.model.params().begin()));
    CHECK(a.history.epochs() == 15);
    CHECK(a.history.best_val_loss <= a.history.initial_val_loss);
    CHECK(a.history.val_loss.size() == a.history.epochs());
    CHECK(a.history.val_rmse_deg.size() == a.history.epochs());

    cfg.max_epochs = 1;
    cfg.patience = 0;
    CHECK(train(parts.train, parts.validation, cfg).history.epochs() == 1);
}

TEST_CASE("early stopping and best-checkpoint restore") {
    const auto set = synthetic(200, 5, 0.3);
    const auto parts = split(set, SplitSpec{0.8, 5});
    TrainConfig cfg;
    cfg.max_epochs = 400;
    cfg.patience = 3;
    cfg.optimizer.lr = 0.05;  // noisy enough to plateau quickly
    cfg.seed = 2;
    const auto res = train(parts.train, parts.validation, cfg);
    CHECK(res.history.stopped_early);
    CHECK(res.history.epochs() < 400);
    REQUIRE(res.history.best_epoch >= 0);
    CHECK(res.history.epochs() == static_cast<std::size_t>(res.history.best_epoch) + 1 + 3);

    // Restored parameters reproduce the best validation loss.
    double val_loss = 0.0;
    for (const auto& s : parts.validation) {
        const auto out = predict_vector(res.model, s.frame);
        val_loss += loss(out, target_encoding(s.pose.phi));
    }
    val_loss /= parts.validation.size();
    CHECK(val_loss == doctest::Approx(res.history.best_val_loss).epsilon(1e-12));
}

TEST_CASE("raw input mode trains without feature statistics") {
    const auto set = synthetic(200, 6, 0.0);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.input_mode = InputMode::Raw;
    const auto res = train(set, set, cfg);
    CHECK(res.model.input_mode == InputMode::Raw);
    CHECK_FALSE(res.model.stats.has_value());
}

TEST_CASE("train rejects bad configuration") {
    const auto set = synthetic(20, 7, 0.0);
    TrainConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train(set, set, cfg), Error);
    cfg = {};
    cfg.max_epochs = 0;
    CHECK_THROWS_AS(train(set, set, cfg), Error);
    CHECK_THROWS_AS(train(set, std::vector<LabeledSample>{}, TrainConfig{}), Error);
}

TEST_CASE("predict_angle") {
    SUBCASE("all-zero model has no direction") {
        const MlpModel zero;
        SensorFrame f;
        f.p_ch = {95, 96, 97, 98};
        CHECK_FALSE(predict_angle(zero, f).has_value());
    }
    SUBCASE("a model trained on noiseless affine data recovers training poses") {
        const auto set = synthetic(400, 8, 0.0, Response::Affine, 25.0);
        TrainConfig cfg;
        cfg.max_epochs = 150;
        cfg.patience = 150;
        cfg.seed = 8;
        const auto res = train(set, set, cfg);
        for (std::size_t i = 0; i < set.size(); i += 40) {
            const auto phi = predict_angle(res.model, set[i].frame);
            REQUIRE(phi);
            CHECK(angular_error(*phi, set[i].pose.phi) < 5.0);
        }
    }
}

TEST_CASE("offset-augmented standardized model is insensitive to uniform chamber offsets") {
    // Baseline snapshot: with this seed and schedule the largest shift over
    // the probe set was 2.69 degrees.
    constexpr double kMaxShiftDeg = 4.0;

    auto set = synthetic(3000, 9, 0.2);
    Rng rng(90);
    for (auto& s : set) {
        const double c = uniform(rng, -2.0, 2.0);
        for (double& p : s.frame.p_ch) p += c;
        s.frame.p_atm += c;
    }
    const auto parts = split(set, SplitSpec{0.8, 9});
    TrainConfig cfg;
    cfg.max_epochs = 60;
    cfg.seed = 9;
    const auto res = train(parts.train, parts.validation, cfg);

    double worst = 0.0;
    for (std::size_t i = 0; i < parts.validation.size(); i += 25) {
        SensorFrame a = parts.validation[i].frame;
        SensorFrame b = a;
        for (double& p : b.p_ch) p += 1.0;
        b.p_atm += 1.0;
        const auto pa = predict_angle(res.model, a), pb = predict_angle(res.model, b);
        REQUIRE(pa);
        REQUIRE(pb);
        worst = std::max(worst, angular_error(*pa, *pb));
    }
    MESSAGE("largest offset-induced shift: " << worst << " deg");
    CHECK(worst < kMaxShiftDeg);
}
