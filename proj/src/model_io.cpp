#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "error.hpp"
#include "mlp.hpp"

namespace cuphaptics {

namespace {

constexpr std::size_t kMagicLen = sizeof(kModelMagic) - 1;

class Writer {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) { le(v); }
    void u64(std::uint64_t v) { le(v); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
    const std::vector<unsigned char>& data() const { return buf_; }

private:
    template <typename U>
    void le(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    std::vector<unsigned char> buf_;
};

class Reader {
public:
    explicit Reader(std::vector<unsigned char> data) : buf_(std::move(data)) {}

    std::string bytes(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::uint8_t u8() {
        need(1);
        return buf_[pos_++];
    }
    std::uint32_t u32() { return le<std::uint32_t>(); }
    std::uint64_t u64() { return le<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (buf_.size() - pos_ < n) throw Error(ErrorCode::ModelLoad, "model file is truncated");
    }
    template <typename U>
    U le() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf_[pos_ + i]) << (8 * i);
        pos_ += sizeof(U);
        return v;
    }
    std::vector<unsigned char> buf_;
    std::size_t pos_ = 0;
};

Error load_error(const std::string& msg) { return {ErrorCode::ModelLoad, msg}; }

}  // namespace

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    model.validate();
    Writer w;
    w.bytes(kModelMagic, kMagicLen);
    w.u32(static_cast<std::uint32_t>(model.layer_sizes().size()));
    for (auto s : model.layer_sizes()) w.u32(static_cast<std::uint32_t>(s));
    w.u8(static_cast<std::uint8_t>(model.input_mode));
    if (model.stats) {
        for (double m : model.stats->mean) w.f64(m);
        for (double s : model.stats->std) w.f64(s);
    }
    w.u64(model.parameter_count());
    for (double p : model.params()) w.f64(p);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(w.data().data()), static_cast<std::streamsize>(w.data().size()));
    if (!out) throw io_error("write to '" + path.string() + "' failed");
}

MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open model file '" + path.string() + "'");
    Reader r(std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {}));

    const std::string magic = r.bytes(kMagicLen);
    if (magic.compare(0, 6, kModelMagic, 6) != 0) throw load_error("not a model file (bad magic)");
    if (magic != kModelMagic) throw load_error("unsupported model format version '" + magic + "'");

    const std::uint32_t n_sizes = r.u32();
    if (n_sizes < 2 || n_sizes > 64) throw load_error("implausible layer count " + std::to_string(n_sizes));
    std::vector<std::size_t> sizes;
    for (std::uint32_t i = 0; i < n_sizes; ++i) {
        const std::uint32_t s = r.u32();
        if (s == 0 || s > (1u << 20)) throw load_error("implausible layer size " + std::to_string(s));
        sizes.push_back(s);
    }
    if (sizes.front() != kChambers || sizes.back() != 2)
        throw load_error("shape mismatch: direction models map 4 inputs to 2 outputs");

    MlpModel model(sizes);
    const std::uint8_t mode = r.u8();
    if (mode > 1) throw load_error("unknown input mode " + std::to_string(mode));
    model.input_mode = static_cast<InputMode>(mode);
    if (model.input_mode == InputMode::Standardized) {
        FeatureStats stats;
        for (double& m : stats.mean) m = r.f64();
        for (double& s : stats.std) s = r.f64();
        model.stats = stats;
    }
    const std::uint64_t count = r.u64();
    if (count != model.parameter_count())
        throw load_error("shape mismatch: header declares " + std::to_string(count) + " parameters, layer sizes need " +
                         std::to_string(model.parameter_count()));
    for (double& p : model.params()) p = r.f64();
    if (r.remaining() != 0) throw load_error("trailing bytes after parameters");
    try {
        model.validate();
    } catch (const Error& e) {
        throw load_error(std::string("corrupt model: ") + e.what());
    }
    return model;
}

void write_model_sidecar(const std::filesystem::path& path, const MlpModel& model, const TrainConfig& config,
                         const TrainHistory& history) {
    using nlohmann::ordered_json;
    auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };

    ordered_json j;
    j["format"] = kModelMagic;
    j["layer_sizes"] = model.layer_sizes();
    j["input_mode"] = model.input_mode == InputMode::Standardized ? "standardized" : "raw";
    j["train_config"] = {{"batch_size", config.batch_size},
                         {"max_epochs", config.max_epochs},
                         {"patience", config.patience},
                         {"seed", config.seed},
                         {"optimizer", {{"name", "rmsprop"},
                                        {"lr", config.optimizer.lr},
                                        {"rho", config.optimizer.rho},
                                        {"eps", config.optimizer.eps}}}};
    const bool has_best = history.best_epoch >= 0;
    const auto best = static_cast<std::size_t>(history.best_epoch);
    j["metrics"] = {{"epochs_run", history.epochs()},
                    {"stopped_early", history.stopped_early},
                    {"best_epoch", has_best ? ordered_json(history.best_epoch) : ordered_json(nullptr)},
                    {"initial_val_loss", num(history.initial_val_loss)},
                    {"best_val_loss", num(history.best_val_loss)},
                    {"best_val_rmse_deg", has_best ? num(history.val_rmse_deg[best]) : ordered_json(nullptr)},
                    {"final_train_loss", history.epochs() ? num(history.train_loss.back()) : ordered_json(nullptr)}};

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw io_error("write to '" + path.string() + "' failed");
}

}  // namespace cuphaptics
