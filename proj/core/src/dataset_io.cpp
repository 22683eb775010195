#include "bgvcf/dataset_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bgvcf/config.hpp"
#include "bgvcf/csv.hpp"

namespace bgvcf::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary CPI files assume a little-endian host");

constexpr std::size_t kSampleBytes = 2 * sizeof(double);

bool is_text(const std::filesystem::path& path) { return path.extension() == ".csv"; }

std::vector<cplx> read_binary(const std::filesystem::path& path, std::size_t snapshot_len) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  const std::size_t snapshot_bytes = snapshot_len * kSampleBytes;
  if (bytes % snapshot_bytes != 0) {
    const std::size_t offset = bytes - bytes % snapshot_bytes;
    throw InputError(path.string() + ": dimension mismatch: " + std::to_string(bytes) +
                     " bytes is not a multiple of the " + std::to_string(snapshot_bytes) +
                     "-byte snapshot; incomplete snapshot starts at byte offset " +
                     std::to_string(offset));
  }
  std::vector<cplx> samples(bytes / kSampleBytes);
  std::vector<double> raw(2 * samples.size());
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw InputError(path.string() + ": short read");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double re = raw[2 * i];
    const double im = raw[2 * i + 1];
    if (!std::isfinite(re) || !std::isfinite(im)) {
      throw InputError(path.string() + ": non-finite sample at byte offset " +
                       std::to_string(i * kSampleBytes));
    }
    samples[i] = {re, im};
  }
  return samples;
}

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::vector<cplx> read_text(const std::filesystem::path& path, std::size_t snapshot_len) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<cplx> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("re,im", 0) == 0) continue;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    double re = 0.0;
    double im = 0.0;
    if (comma == std::string::npos || !parse_double(std::string_view(line).substr(0, comma), re) ||
        !parse_double(std::string_view(line).substr(comma + 1), im)) {
      throw InputError(path.string() + ": malformed row at line " + std::to_string(line_no));
    }
    if (!std::isfinite(re) || !std::isfinite(im)) {
      throw InputError(path.string() + ": non-finite sample at line " + std::to_string(line_no));
    }
    samples.emplace_back(re, im);
  }
  if (samples.size() % snapshot_len != 0) {
    throw InputError(path.string() + ": dimension mismatch: " + std::to_string(samples.size()) +
                     " rows is not a multiple of the snapshot length " + std::to_string(snapshot_len));
  }
  return samples;
}

void write_samples(const std::filesystem::path& path, const std::vector<cplx>& samples) {
  if (is_text(path)) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << "re,im\n";
    for (const auto& s : samples) out << csv::format_double(s.real()) << ',' << csv::format_double(s.imag()) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& s : samples) {
    const std::array<double, 2> pair{s.real(), s.imag()};
    out.write(reinterpret_cast<const char*>(pair.data()), kSampleBytes);
  }
}

std::vector<cplx> flatten(const sim::SpaceTimeDataset& dataset) {
  std::vector<cplx> samples;
  for (const auto& s : dataset.snapshots) samples.insert(samples.end(), s.data.data(), s.data.data() + s.data.size());
  return samples;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

void write_cpi_file(const std::filesystem::path& path, const sim::SpaceTimeDataset& dataset) {
  write_samples(path, flatten(dataset));
  nlohmann::json meta = {{"format", "bgvcf-cpi"},
                         {"version", 1},
                         {"encoding", is_text(path) ? "csv re,im" : "float64-le interleaved re,im"},
                         {"num_elements", dataset.config.num_elements},
                         {"num_pulses", dataset.config.num_pulses},
                         {"num_cells", dataset.snapshots.size()},
                         {"layout", "cell-major; pulse-major, element-minor within a snapshot"}};
  if (dataset.ideal_clutter_covariance) {
    nlohmann::json targets = nlohmann::json::array();
    for (const auto& t : dataset.targets) targets.push_back(to_json(t));
    meta["scenario"] = to_json(dataset.config);
    meta["targets"] = targets;
    meta["textures"] = dataset.textures;
  }
  std::ofstream out(sidecar_path(path));
  if (!out) throw InputError("cannot write " + sidecar_path(path).string());
  out << meta.dump(2) << '\n';
}

sim::SpaceTimeDataset load_cpi_file(const std::filesystem::path& path, int num_elements, int num_pulses) {
  if (num_elements < 1 || num_pulses < 1) throw InputError("load_cpi_file: dimensions must be positive");
  const auto snapshot_len = static_cast<std::size_t>(num_elements) * static_cast<std::size_t>(num_pulses);
  const auto samples = is_text(path) ? read_text(path, snapshot_len) : read_binary(path, snapshot_len);

  sim::SpaceTimeDataset dataset;
  dataset.config.num_elements = num_elements;
  dataset.config.num_pulses = num_pulses;
  dataset.config.num_range_cells = static_cast<int>(samples.size() / snapshot_len);
  for (std::size_t cell = 0; cell * snapshot_len < samples.size(); ++cell) {
    sim::SpaceTimeSnapshot s;
    s.cell_index = static_cast<int>(cell);
    s.data = Eigen::Map<const CVector>(samples.data() + cell * snapshot_len,
                                       static_cast<Eigen::Index>(snapshot_len));
    dataset.snapshots.push_back(std::move(s));
  }
  return dataset;
}

sim::SpaceTimeDataset load_dataset(const std::filesystem::path& path) {
  const auto meta_path = sidecar_path(path);
  std::ifstream in(meta_path);
  if (!in) throw InputError("missing sidecar " + meta_path.string() + "; use load_cpi_file with dimensions");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(meta_path.string() + ": " + e.what());
  }
  const int elements = meta.value("num_elements", 0);
  const int pulses = meta.value("num_pulses", 0);
  auto dataset = load_cpi_file(path, elements, pulses);
  if (meta.contains("scenario")) {
    auto scenario = scenario_from_json(meta.at("scenario"));
    if (scenario.num_elements != elements || scenario.num_pulses != pulses ||
        scenario.num_range_cells != static_cast<int>(dataset.snapshots.size())) {
      throw InputError(meta_path.string() + ": scenario does not match the sample file");
    }
    dataset.config = scenario;
    for (const auto& t : meta.at("targets")) dataset.targets.push_back(target_from_json(t, scenario.noise_variance));
    dataset.textures = meta.at("textures").get<std::vector<double>>();
    if (dataset.textures.size() != dataset.snapshots.size()) {
      throw InputError(meta_path.string() + ": texture count does not match cell count");
    }
    dataset.ideal_clutter_covariance = sim::clutter_covariance(scenario);
  }
  return dataset;
}

void convert_cpi_file(const std::filesystem::path& in, const std::filesystem::path& out,
                      int num_elements, int num_pulses) {
  if (is_text(in) == is_text(out)) throw InputError("convert: input and output use the same encoding");
  const auto dataset = load_cpi_file(in, num_elements, num_pulses);
  write_samples(out, flatten(dataset));
}

}  // namespace bgvcf::io
