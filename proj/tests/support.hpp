#pragma once

// Test-only helpers: temp directories and reference implementations that the
// library code is checked against. Nothing here calls into the code under test
// except to read a model's flat parameter buffer.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace testsupport {

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("cuphaptics_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::size_t count_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

// Reference network with explicit per-layer matrices, unpacked from the
// documented flat layout: per layer, weights (out x in, row-major) then biases.
struct RefLayer {
    std::vector<std::vector<double>> w;
    std::vector<double> b;
};

inline std::vector<RefLayer> unpack(const std::vector<std::size_t>& sizes, std::span<const double> flat) {
    std::vector<RefLayer> layers;
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        RefLayer layer;
        layer.w.assign(sizes[l + 1], std::vector<double>(sizes[l]));
        for (std::size_t r = 0; r < sizes[l + 1]; ++r)
            for (std::size_t c = 0; c < sizes[l]; ++c) layer.w[r][c] = flat[pos++];
        layer.b.assign(flat.begin() + static_cast<std::ptrdiff_t>(pos),
                       flat.begin() + static_cast<std::ptrdiff_t>(pos + sizes[l + 1]));
        pos += sizes[l + 1];
        layers.push_back(std::move(layer));
    }
    return layers;
}

// Pre-activations of every hidden unit are appended to `hidden_pre` if given.
inline std::vector<double> ref_forward(const std::vector<RefLayer>& layers, std::vector<double> x,
                                       std::vector<double>* hidden_pre = nullptr) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::vector<double> z(layers[l].b);
        for (std::size_t r = 0; r < z.size(); ++r)
            for (std::size_t c = 0; c < x.size(); ++c) z[r] += layers[l].w[r][c] * x[c];
        if (l + 1 < layers.size()) {
            if (hidden_pre) hidden_pre->insert(hidden_pre->end(), z.begin(), z.end());
            for (double& v : z) v = v > 0.0 ? v : 0.0;
        }
        x = std::move(z);
    }
    return x;
}

// Mean over the batch of the mean squared error over output components.
inline double ref_batch_loss(const std::vector<std::size_t>& sizes, std::span<const double> flat,
                             std::span<const double> inputs, std::span<const double> targets, std::size_t batch,
                             std::vector<double>* hidden_pre = nullptr) {
    const auto layers = unpack(sizes, flat);
    const std::size_t n_in = sizes.front(), n_out = sizes.back();
    double total = 0.0;
    for (std::size_t s = 0; s < batch; ++s) {
        std::vector<double> x(inputs.begin() + static_cast<std::ptrdiff_t>(s * n_in),
                              inputs.begin() + static_cast<std::ptrdiff_t>((s + 1) * n_in));
        const auto y = ref_forward(layers, x, hidden_pre);
        double l = 0.0;
        for (std::size_t k = 0; k < n_out; ++k) l += (y[k] - targets[s * n_out + k]) * (y[k] - targets[s * n_out + k]);
        total += l / static_cast<double>(n_out);
    }
    return total / static_cast<double>(batch);
}

struct GradCheckStats {
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
    double worst_rel = 0.0;
};

// Central differences (step h) of the reference loss, compared with `grad`.
// Components whose perturbation moves any hidden pre-activation across or
// within kink_tol of zero are skipped.
inline GradCheckStats finite_difference_check(const std::vector<std::size_t>& sizes, std::vector<double> params,
                                              std::span<const double> grad, std::span<const double> inputs,
                                              std::span<const double> targets, std::size_t batch, double h = 1e-6,
                                              double rel_tol = 1e-4, double abs_floor = 1e-6,
                                              double kink_tol = 1e-7) {
    GradCheckStats st;
    std::vector<double> pre0;
    ref_batch_loss(sizes, params, inputs, targets, batch, &pre0);
    // Only units the perturbation actually moves can introduce a kink.
    auto near_kink = [&](const std::vector<double>& pre) {
        for (std::size_t i = 0; i < pre.size(); ++i) {
            if (pre[i] == pre0[i]) continue;
            if (std::abs(pre[i]) < kink_tol || std::abs(pre0[i]) < kink_tol) return true;
            if ((pre[i] > 0.0) != (pre0[i] > 0.0)) return true;
        }
        return false;
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = params[i];
        std::vector<double> pre_p, pre_m;
        params[i] = orig + h;
        const double lp = ref_batch_loss(sizes, params, inputs, targets, batch, &pre_p);
        params[i] = orig - h;
        const double lm = ref_batch_loss(sizes, params, inputs, targets, batch, &pre_m);
        params[i] = orig;
        if (near_kink(pre_p) || near_kink(pre_m)) {
            ++st.skipped;
            continue;
        }
        const double fd = (lp - lm) / (2.0 * h);
        const double diff = std::abs(fd - grad[i]);
        const double scale = std::max(std::abs(fd), std::abs(grad[i]));
        ++st.checked;
        if (diff > std::max(abs_floor, rel_tol * scale)) ++st.failed;
        if (scale > 0.0 && diff > abs_floor) st.worst_rel = std::max(st.worst_rel, diff / scale);
    }
    return st;
}

}  // namespace testsupport
