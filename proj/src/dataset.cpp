#include "dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

#include "error.hpp"
#include "rng.hpp"

namespace cuphaptics {

namespace {

constexpr std::array<std::string_view, 7> kColumns{"p_ch1_kpa", "p_ch2_kpa", "p_ch3_kpa", "p_ch4_kpa",
                                                   "p_atm_kpa", "delta_mm",  "phi_deg"};

std::string format9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

double parse_cell(std::string_view cell, std::size_t line, std::size_t column) {
    auto where = [&] { return "line " + std::to_string(line) + ", column " + std::string(kColumns[column]); };
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.remove_suffix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size())
        throw parse_error(where() + ": not a number: '" + std::string(cell) + "'");
    if (!std::isfinite(value)) throw parse_error(where() + ": value must be finite");
    return value;
}

}  // namespace

void write_csv(std::span<const LabeledSample> samples, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path.string() + "' for writing");
    out << kDatasetCsvHeader << '\n';
    for (const auto& s : samples) {
        for (double p : s.frame.p_ch) out << format9(p) << ',';
        out << format9(s.frame.p_atm) << ',' << format9(s.pose.delta_mm) << ',';
        // 359.9999999... would print as 360
        const std::string phi = format9(s.pose.phi.degrees());
        out << (std::stod(phi) >= 360.0 ? std::string("0") : phi) << '\n';
    }
    if (!out) throw io_error("write to '" + path.string() + "' failed");
}

std::vector<LabeledSample> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw parse_error("line 1: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kDatasetCsvHeader)
        throw parse_error("line 1: header mismatch, expected '" + std::string(kDatasetCsvHeader) + "'");

    std::vector<LabeledSample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;

        std::array<double, kColumns.size()> v{};
        std::string_view rest(line);
        std::size_t col = 0;
        while (true) {
            const auto comma = rest.find(',');
            if (col >= kColumns.size())
                throw parse_error("line " + std::to_string(line_no) + ": too many columns");
            v[col] = parse_cell(rest.substr(0, comma), line_no, col);
            ++col;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (col != kColumns.size())
            throw parse_error("line " + std::to_string(line_no) + ": missing column " + std::string(kColumns[col]));

        LabeledSample s;
        s.frame.p_ch = {v[0], v[1], v[2], v[3]};
        s.frame.p_atm = v[4];
        try {
            s.frame.validate();
        } catch (const Error& e) {
            throw parse_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (v[5] < 0.0) throw parse_error("line " + std::to_string(line_no) + ", column delta_mm: must be >= 0");
        if (v[6] < 0.0 || v[6] >= 360.0)
            throw parse_error("line " + std::to_string(line_no) + ", column phi_deg: must lie in [0, 360)");
        s.pose.delta_mm = v[5];
        s.pose.phi = wrap_angle(v[6]);
        samples.push_back(s);
    }
    return samples;
}

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw config_error("train fraction must lie in (0, 1)");
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
    spec.validate();
    if (n < 2) throw config_error("split needs at least 2 samples");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(spec.seed));
    shuffle(std::span(order), rng);

    const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train_fraction));
    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return out;
}

Split split(std::span<const LabeledSample> samples, const SplitSpec& spec) {
    const SplitIndices idx = split_indices(samples.size(), spec);
    Split out;
    out.train.reserve(idx.train.size());
    out.validation.reserve(idx.validation.size());
    for (auto i : idx.train) out.train.push_back(samples[i]);
    for (auto i : idx.validation) out.validation.push_back(samples[i]);
    return out;
}

FeatureStats feature_stats(std::span<const LabeledSample> train) {
    if (train.empty()) throw config_error("feature statistics need at least one sample");
    FeatureStats stats;
    const double n = static_cast<double>(train.size());
    for (int c = 0; c < kChambers; ++c) {
        double sum = 0.0;
        for (const auto& s : train) sum += s.frame.p_ch[c];
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& s : train) ss += (s.frame.p_ch[c] - mean) * (s.frame.p_ch[c] - mean);
        const double sd = std::sqrt(ss / n);
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))))
            throw Error(ErrorCode::DegenerateChannel,
                        "chamber " + std::to_string(c + 1) + " is constant over the training set");
        stats.mean[c] = mean;
        stats.std[c] = sd;
    }
    return stats;
}

std::array<double, kChambers> standardize(const SensorFrame& frame, const FeatureStats& stats) {
    std::array<double, kChambers> out{};
    for (int c = 0; c < kChambers; ++c) out[c] = (frame.p_ch[c] - stats.mean[c]) / stats.std[c];
    return out;
}

}  // namespace cuphaptics
