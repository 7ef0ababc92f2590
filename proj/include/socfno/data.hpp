#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "socfno/tensor.hpp"

namespace socfno {

/// Input band order of every raster.
inline const std::array<std::string, 6> kBandNames = {"blue", "green", "red", "nir", "swir1", "swir3"};

inline constexpr char kNrasMagic[] = "NRAS1";
inline constexpr std::size_t kNrasMagicSize = 5;
inline constexpr int kDatasetVersion = 1;

enum class Split : std::uint8_t { Train, Validation, Test };

std::string to_string(Split split);
Split parse_split(const std::string& name);

/// One multispectral input raster [C,H,W] with its SOC target [1,H,W] in g/kg.
struct RasterSample {
    std::string id;
    Tensor input;
    Tensor target;
};

/// Per-band standardization statistics.
struct BandStats {
    std::vector<double> mean;
    std::vector<double> stddev;

    Tensor standardize(const Tensor& input) const;
    bool empty() const { return mean.empty(); }
};

nlohmann::json to_json(const BandStats& stats);
BandStats band_stats_from_json(const nlohmann::json& j);

struct DatasetManifest {
    int version = kDatasetVersion;
    std::size_t samples = 0;
    std::size_t channels = 6;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::string> band_names;
    std::string dtype = "float32-le";
    std::string target_unit = "g/kg";
    std::vector<std::string> ids;
    std::uint64_t split_seed = 0;
    std::vector<Split> splits;
    BandStats normalization;  // training split only
    double target_max = 0.0;  // training split only
};

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

struct Dataset {
    DatasetManifest manifest;
    std::vector<RasterSample> samples;

    std::vector<std::size_t> indices(Split split) const;
    std::size_t find(const std::string& id) const;  // throws NotFound
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

/// 50/20/30 partition sizes with cut points at round-half-up(0.5 n) and
/// round-half-up(0.7 n).
SplitSizes split_sizes(std::size_t n);

/// Seeded shuffle followed by contiguous train/validation/test assignment.
std::vector<Split> split(std::size_t n, std::uint64_t seed);

/// Assign splits and recompute the training-split statistics of the manifest.
void assign_splits(Dataset& dataset, std::uint64_t seed);

/// Fill manifest extents, ids and statistics from the samples (splits must be set).
void refresh_manifest(Dataset& dataset);

/// Manifest of a dataset or checkpoint lives next to its blob as <path>.json.
std::string manifest_path(const std::string& path);

/// Writes <path> (magic + float blob) and <path>.json (manifest).
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

// Little-endian binary32 helpers shared by the file formats.
void append_f32le(std::string& out, double value);
float read_f32le(const unsigned char* bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace socfno
