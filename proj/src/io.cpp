#include "mppc/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mppc/error.hpp"

namespace mppc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  return fields;
}

void expect_header(std::istream& in, const std::string& header) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    throw IngestionError("expected CSV header '" + header + "'");
  }
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || end != t.data() + t.size()) throw IngestionError("not a number: '" + text + "'");
  return value;
}

void write_histogram_csv(std::ostream& out, const CountHistogram& hist) {
  out << "k,count\n";
  for (int k = 0; k <= hist.max_k(); ++k) {
    out << k << ',';
    if (hist.is_signed()) {
      out << format_number(hist.tally(k));
    } else {
      out << static_cast<long long>(hist.tally(k));
    }
    out << '\n';
  }
}

CountHistogram read_histogram_csv(std::istream& in, const json& metadata) {
  expect_header(in, "k,count");
  std::vector<double> tallies;
  std::string line;
  long long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != 2) throw IngestionError("histogram rows need two fields", row);
    const double k = parse_number(fields[0]);
    if (k < 0 || k != static_cast<int>(k)) throw IngestionError("bin index must be a non-negative integer", row);
    const auto idx = static_cast<std::size_t>(k);
    if (tallies.size() <= idx) tallies.resize(idx + 1, 0.0);
    tallies[idx] += parse_number(fields[1]);
  }

  const bool is_signed = metadata.value("signed", false);
  std::int64_t trials = 0;
  if (metadata.contains("trials")) {
    trials = metadata.at("trials").get<std::int64_t>();
    // Files may list only the k >= 1 bins; the rest of the trials fired nothing.
    if (!is_signed) {
      double listed = 0.0;
      for (double t : tallies) listed += t;
      if (listed < static_cast<double>(trials)) {
        if (tallies.empty()) tallies.push_back(0.0);
        tallies[0] += static_cast<double>(trials) - listed;
      }
    }
  } else {
    double total = 0.0;
    for (double t : tallies) total += t;
    trials = static_cast<std::int64_t>(total);
  }
  return is_signed ? CountHistogram::signed_difference(std::move(tallies), trials)
                   : CountHistogram::raw(std::move(tallies), trials);
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p += ".meta.json";
  return p;
}

void save_histogram(const std::filesystem::path& path, const CountHistogram& hist, json metadata) {
  std::ostringstream csv;
  write_histogram_csv(csv, hist);
  write_text_file(path, csv.str());
  metadata["trials"] = hist.trials();
  metadata["signed"] = hist.is_signed();
  write_text_file(sidecar_path(path), metadata.dump(2) + "\n");
}

CountHistogram load_histogram(const std::filesystem::path& path) {
  json metadata = json::object();
  const auto meta_path = sidecar_path(path);
  if (std::filesystem::exists(meta_path)) {
    try {
      metadata = json::parse(read_text_file(meta_path));
    } catch (const json::exception& e) {
      throw IngestionError("bad histogram sidecar " + meta_path.string() + ": " + e.what());
    }
  }
  std::istringstream in(read_text_file(path));
  return read_histogram_csv(in, metadata);
}

void write_curve_csv(std::ostream& out, const Curve& curve) {
  out << "mu,g,sigma,corrected\n";
  for (const CurvePoint& pt : curve) {
    out << format_number(pt.mu) << ',' << format_number(pt.g) << ',' << format_number(pt.sigma) << ','
        << (pt.corrected ? 1 : 0) << '\n';
  }
}

Curve read_curve_csv(std::istream& in) {
  expect_header(in, "mu,g,sigma,corrected");
  Curve curve;
  std::string line;
  long long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != 4) throw IngestionError("curve rows need four fields", row);
    CurvePoint pt;
    pt.mu = parse_number(fields[0]);
    pt.g = parse_number(fields[1]);
    pt.sigma = parse_number(fields[2]);
    if (fields[3] != "0" && fields[3] != "1") throw IngestionError("corrected flag must be 0 or 1", row);
    pt.corrected = fields[3] == "1";
    curve.push_back(pt);
  }
  return curve;
}

std::vector<double> read_amplitude_csv(std::istream& in) {
  expect_header(in, "amplitude");
  std::vector<double> amplitudes;
  std::string line;
  long long row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      amplitudes.push_back(parse_number(line));
    } catch (const IngestionError&) {
      throw IngestionError("bad amplitude '" + trim(line) + "'", row);
    }
    ++row;
  }
  return amplitudes;
}

json to_json(const PhotonSourceSpec& spec) {
  json j;
  j["kind"] = source_kind(spec);
  if (auto s = std::get_if<Coherent>(&spec)) j["mu"] = s->mu;
  if (auto s = std::get_if<TwinBeamSignal>(&spec)) j["mu_pairs"] = s->mu_pairs;
  if (auto s = std::get_if<DegenerateSqueezedSupermode>(&spec)) j["mu_pairs"] = s->mu_pairs;
  if (auto s = std::get_if<SingleModeSqueezedExact>(&spec)) j["r"] = s->r;
  if (auto s = std::get_if<Thermal>(&spec)) {
    j["mu"] = s->mu;
    j["modes"] = s->modes;
  }
  return j;
}

PhotonSourceSpec source_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  PhotonSourceSpec spec;
  if (kind == "coherent") {
    spec = Coherent{j.at("mu").get<double>()};
  } else if (kind == "twin_beam_signal") {
    spec = TwinBeamSignal{j.at("mu_pairs").get<double>()};
  } else if (kind == "squeezed_supermode") {
    spec = DegenerateSqueezedSupermode{j.at("mu_pairs").get<double>()};
  } else if (kind == "squeezed_exact") {
    spec = SingleModeSqueezedExact{j.at("r").get<double>()};
  } else if (kind == "thermal") {
    spec = Thermal{j.at("mu").get<double>(), j.value("modes", 1)};
  } else {
    throw ConfigError("unknown source kind '" + kind + "'");
  }
  validate(spec);
  return spec;
}

json to_json(const DetectorConfig& config) {
  return {{"pixels", config.pixels},
          {"efficiency", config.efficiency},
          {"dark_mean", config.dark_mean},
          {"crosstalk_p", config.crosstalk_p},
          {"crosstalk_mode", to_string(config.crosstalk_mode)}};
}

DetectorConfig detector_from_json(const json& j) {
  DetectorConfig c;
  c.pixels = j.at("pixels").get<int>();
  c.efficiency = j.at("efficiency").get<double>();
  c.dark_mean = j.at("dark_mean").get<double>();
  c.crosstalk_p = j.at("crosstalk_p").get<double>();
  c.crosstalk_mode = crosstalk_mode_from_string(j.at("crosstalk_mode").get<std::string>());
  c.validate();
  return c;
}

json to_json(const CorrelationEstimate& e) {
  json j;
  j["l"] = e.order;
  j["g"] = e.value;
  j["std_error"] = e.std_error;
  j["mu"] = e.mean_counts;
  j["mode"] = to_string(e.mode);
  j["corrected"] = e.corrected;
  j["P_used"] = e.crosstalk_p ? json(*e.crosstalk_p) : json(nullptr);
  if (e.unphysical) j["unphysical"] = true;
  return j;
}

json to_json(const FitResult& fit) {
  json j;
  j["model"] = to_string(fit.model);
  j["params"] = std::vector<double>(fit.params.data(), fit.params.data() + fit.params.size());
  j["std_errors"] = std::vector<double>(fit.std_errors.data(), fit.std_errors.data() + fit.std_errors.size());
  json cov = json::array();
  for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < fit.covariance.cols(); ++c) row.push_back(fit.covariance(r, c));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["cod_r2"] = fit.cod_r2;
  j["chi2"] = fit.chi2;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  return j;
}

json to_json(const HbtCounts& c) {
  return {{"singles_1", c.singles_1}, {"singles_2", c.singles_2}, {"coincidences", c.coincidences},
          {"trials", c.trials}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mppc
