#include "socfno/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace socfno {

std::string to_string(Split split) {
    switch (split) {
        case Split::Train:
            return "train";
        case Split::Validation:
            return "val";
        case Split::Test:
            return "test";
    }
    return "train";
}

Split parse_split(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val" || name == "validation") return Split::Validation;
    if (name == "test") return Split::Test;
    throw InvalidArgument("unknown split '" + name + "' (expected train|val|test)");
}

Tensor BandStats::standardize(const Tensor& input) const {
    if (input.rank() != 3 || input.dim(0) != mean.size())
        throw InvalidArgument("BandStats: input " + shape_string(input.shape()) + " does not have " +
                              std::to_string(mean.size()) + " bands");
    Tensor out = input;
    const std::size_t plane = input.dim(1) * input.dim(2);
    for (std::size_t c = 0; c < mean.size(); ++c) {
        double* p = out.channel(c);
        for (std::size_t i = 0; i < plane; ++i) p[i] = (p[i] - mean[c]) / stddev[c];
    }
    return out;
}

nlohmann::json to_json(const BandStats& stats) { return {{"mean", stats.mean}, {"std", stats.stddev}}; }

BandStats band_stats_from_json(const nlohmann::json& j) {
    BandStats s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("std").get<std::vector<double>>();
    if (s.mean.size() != s.stddev.size()) throw InvalidArgument("normalization: mean/std length mismatch");
    return s;
}

nlohmann::json to_json(const DatasetManifest& m) {
    std::vector<std::string> splits;
    splits.reserve(m.splits.size());
    for (auto s : m.splits) splits.push_back(to_string(s));
    return {{"format", "nras"},
            {"version", m.version},
            {"samples", m.samples},
            {"channels", m.channels},
            {"height", m.height},
            {"width", m.width},
            {"band_names", m.band_names},
            {"dtype", m.dtype},
            {"target_unit", m.target_unit},
            {"layout", "sample-major; input bands then target; row-major"},
            {"ids", m.ids},
            {"split_seed", m.split_seed},
            {"splits", splits},
            {"normalization", to_json(m.normalization)},
            {"target_max", m.target_max}};
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
    DatasetManifest m;
    try {
        m.version = j.at("version").get<int>();
        if (m.version != kDatasetVersion)
            throw InvalidArgument("unsupported dataset version " + std::to_string(m.version));
        m.samples = j.at("samples").get<std::size_t>();
        m.channels = j.at("channels").get<std::size_t>();
        m.height = j.at("height").get<std::size_t>();
        m.width = j.at("width").get<std::size_t>();
        m.band_names = j.at("band_names").get<std::vector<std::string>>();
        m.dtype = j.at("dtype").get<std::string>();
        if (m.dtype != "float32-le") throw InvalidArgument("unsupported dataset dtype '" + m.dtype + "'");
        m.target_unit = j.value("target_unit", m.target_unit);
        m.ids = j.at("ids").get<std::vector<std::string>>();
        m.split_seed = j.at("split_seed").get<std::uint64_t>();
        for (const auto& s : j.at("splits")) m.splits.push_back(parse_split(s.get<std::string>()));
        m.normalization = band_stats_from_json(j.at("normalization"));
        m.target_max = j.at("target_max").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed dataset manifest: ") + e.what());
    }
    if (m.ids.size() != m.samples || m.splits.size() != m.samples)
        throw InvalidArgument("dataset manifest: ids/splits do not match the sample count");
    return m;
}

std::vector<std::size_t> Dataset::indices(Split which) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < manifest.splits.size(); ++i)
        if (manifest.splits[i] == which) out.push_back(i);
    return out;
}

std::size_t Dataset::find(const std::string& id) const {
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (samples[i].id == id) return i;
    throw NotFound("sample id '" + id + "' not found in dataset");
}

SplitSizes split_sizes(std::size_t n) {
    const std::size_t train_end = (5 * n + 5) / 10;
    const std::size_t val_end = (7 * n + 5) / 10;
    return {train_end, val_end - train_end, n - val_end};
}

std::vector<Split> split(std::size_t n, std::uint64_t seed) {
    if (n < 10) throw InvalidArgument("split: need at least 10 samples, got " + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, 0x5));
    shuffle(order, rng);
    const SplitSizes sizes = split_sizes(n);
    std::vector<Split> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        const Split s = r < sizes.train ? Split::Train
                        : r < sizes.train + sizes.validation ? Split::Validation
                                                             : Split::Test;
        out[order[r]] = s;
    }
    return out;
}

void refresh_manifest(Dataset& dataset) {
    auto& m = dataset.manifest;
    if (dataset.samples.empty()) throw InvalidArgument("dataset has no samples");
    const auto& first = dataset.samples.front();
    m.samples = dataset.samples.size();
    m.channels = first.input.dim(0);
    m.height = first.input.dim(1);
    m.width = first.input.dim(2);
    if (m.band_names.size() != m.channels) {
        m.band_names.clear();
        for (std::size_t c = 0; c < m.channels; ++c)
            m.band_names.push_back(c < kBandNames.size() ? kBandNames[c] : "band" + std::to_string(c));
    }
    m.ids.clear();
    for (const auto& s : dataset.samples) {
        if (s.input.shape() != first.input.shape() || s.target.shape() != Shape{1, m.height, m.width})
            throw InvalidArgument("dataset sample '" + s.id + "' does not match the raster shape");
        m.ids.push_back(s.id);
    }
    if (m.splits.size() != m.samples) throw InvalidArgument("dataset splits are not assigned");

    const std::size_t plane = m.height * m.width;
    std::vector<double> sum(m.channels, 0.0), sq(m.channels, 0.0);
    std::size_t count = 0;
    double target_max = 0.0;
    for (std::size_t i = 0; i < m.samples; ++i) {
        if (m.splits[i] != Split::Train) continue;
        const auto& s = dataset.samples[i];
        for (std::size_t c = 0; c < m.channels; ++c) {
            const double* p = s.input.channel(c);
            for (std::size_t k = 0; k < plane; ++k) sum[c] += p[k];
        }
        for (double v : s.target.values()) target_max = std::max(target_max, v);
        count += plane;
    }
    BandStats stats;
    stats.mean.resize(m.channels);
    stats.stddev.resize(m.channels);
    for (std::size_t c = 0; c < m.channels; ++c) stats.mean[c] = count ? sum[c] / static_cast<double>(count) : 0.0;
    for (std::size_t i = 0; i < m.samples; ++i) {
        if (m.splits[i] != Split::Train) continue;
        for (std::size_t c = 0; c < m.channels; ++c) {
            const double* p = dataset.samples[i].input.channel(c);
            for (std::size_t k = 0; k < plane; ++k) sq[c] += (p[k] - stats.mean[c]) * (p[k] - stats.mean[c]);
        }
    }
    for (std::size_t c = 0; c < m.channels; ++c) {
        const double sd = count ? std::sqrt(sq[c] / static_cast<double>(count)) : 0.0;
        stats.stddev[c] = sd > 0.0 ? sd : 1.0;
    }
    m.normalization = std::move(stats);
    m.target_max = target_max;
}

void assign_splits(Dataset& dataset, std::uint64_t seed) {
    dataset.manifest.split_seed = seed;
    dataset.manifest.splits = split(dataset.samples.size(), seed);
    refresh_manifest(dataset);
}

std::string manifest_path(const std::string& path) { return path + ".json"; }

void append_f32le(std::string& out, double value) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

float read_f32le(const unsigned char* bytes) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[b]) << (8 * b);
    return std::bit_cast<float>(bits);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InvalidArgument("write failed for '" + path + "'");
}

void save_dataset(const std::string& path, const Dataset& dataset) {
    const auto& m = dataset.manifest;
    if (m.samples != dataset.samples.size() || m.splits.size() != m.samples)
        throw InvalidArgument("save_dataset: manifest is out of date; call refresh_manifest first");
    std::string blob(kNrasMagic, kNrasMagicSize);
    blob.reserve(kNrasMagicSize + m.samples * (m.channels + 1) * m.height * m.width * 4);
    for (const auto& s : dataset.samples) {
        for (double v : s.input.values()) append_f32le(blob, v);
        for (double v : s.target.values()) append_f32le(blob, v);
    }
    write_file(path, blob);
    write_file(manifest_path(path), to_json(m).dump(2) + "\n");
}

Dataset load_dataset(const std::string& path) {
    Dataset dataset;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(manifest_path(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("dataset manifest is not valid JSON: ") + e.what(), e.byte);
    }
    dataset.manifest = manifest_from_json(j);
    const auto& m = dataset.manifest;

    const std::string blob = read_file(path);
    if (blob.size() < kNrasMagicSize || blob.compare(0, kNrasMagicSize, kNrasMagic) != 0)
        throw FormatError("'" + path + "' does not start with the NRAS1 magic", 0);
    const std::size_t plane = m.height * m.width;
    const std::uint64_t expected = kNrasMagicSize + static_cast<std::uint64_t>(m.samples) * (m.channels + 1) * plane * 4;
    if (blob.size() != expected)
        throw FormatError("'" + path + "' blob length mismatch: expected " + std::to_string(expected) +
                              " bytes, found " + std::to_string(blob.size()),
                          std::min<std::uint64_t>(blob.size(), expected));

    const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data()) + kNrasMagicSize;
    dataset.samples.reserve(m.samples);
    for (std::size_t i = 0; i < m.samples; ++i) {
        RasterSample s;
        s.id = m.ids[i];
        std::vector<double> input(m.channels * plane), target(plane);
        for (auto& v : input) {
            v = read_f32le(bytes);
            bytes += 4;
        }
        for (auto& v : target) {
            v = read_f32le(bytes);
            bytes += 4;
        }
        s.input = Tensor({m.channels, m.height, m.width}, std::move(input));
        s.target = Tensor({1, m.height, m.width}, std::move(target));
        dataset.samples.push_back(std::move(s));
    }
    return dataset;
}

}  // namespace socfno
