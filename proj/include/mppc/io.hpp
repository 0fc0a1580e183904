#pragma once

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "mppc/detector.hpp"
#include "mppc/estimator.hpp"
#include "mppc/fitting.hpp"
#include "mppc/histogram.hpp"
#include "mppc/sources.hpp"

namespace mppc {

using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);
double parse_number(const std::string& text);

// Histogram CSV: header `k,count`, one row per bin from k = 0.
void write_histogram_csv(std::ostream& out, const CountHistogram& hist);
/// Without metadata the histogram is raw and S is the tally sum.
CountHistogram read_histogram_csv(std::istream& in, const json& metadata = json::object());

std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Writes `path` and its `.meta.json` sidecar. The sidecar always records
/// trials and the signed flag; `metadata` adds config, seed and the like.
void save_histogram(const std::filesystem::path& path, const CountHistogram& hist, json metadata = json::object());
CountHistogram load_histogram(const std::filesystem::path& path);

// Curve CSV: header `mu,g,sigma,corrected`.
void write_curve_csv(std::ostream& out, const Curve& curve);
Curve read_curve_csv(std::istream& in);

/// Amplitude CSV: header `amplitude`, one value per line.
std::vector<double> read_amplitude_csv(std::istream& in);

json to_json(const PhotonSourceSpec& spec);
PhotonSourceSpec source_from_json(const json& j);
json to_json(const DetectorConfig& config);
DetectorConfig detector_from_json(const json& j);
json to_json(const CorrelationEstimate& estimate);
json to_json(const FitResult& fit);
json to_json(const HbtCounts& counts);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mppc
