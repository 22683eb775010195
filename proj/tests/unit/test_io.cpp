#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bgvcf/config.hpp"
#include "bgvcf/dataset_io.hpp"
#include "bgvcf/sim.hpp"

using namespace bgvcf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bgvcf_unit";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

sim::ScenarioConfig small() {
  sim::ScenarioConfig c;
  c.num_elements = 3;
  c.num_pulses = 4;
  c.num_clutter_patches = 9;
  c.num_range_cells = 6;
  c.rng_seed = 99;
  return c;
}

}  // namespace

TEST_CASE("CPI binary round trip is bit exact and restores the scenario") {
  const auto c = small();
  const std::vector<sim::TargetSpec> targets{sim::TargetSpec::from_snr({2}, 0.25, 0.0, 5.0, 1.0)};
  const auto d = sim::simulate(c, targets);
  const auto path = scratch("rt.bin");
  io::write_cpi_file(path, d);
  CHECK(fs::file_size(path) == 6u * 12u * 16u);
  const auto back = io::load_dataset(path);
  REQUIRE(back.snapshots.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(back.snapshots[i].data == d.snapshots[i].data);
  CHECK(back.textures == d.textures);
  CHECK(back.targets.size() == 1);
  CHECK(back.config.rng_seed == 99);
  REQUIRE(back.ideal_clutter_covariance);
  CHECK(*back.ideal_clutter_covariance == *d.ideal_clutter_covariance);
}

TEST_CASE("CPI text round trip is bit exact") {
  const auto d = sim::simulate(small(), {});
  const auto path = scratch("rt.csv");
  io::write_cpi_file(path, d);
  const auto back = io::load_cpi_file(path, 3, 4);
  for (std::size_t i = 0; i < 6; ++i) CHECK(back.snapshots[i].data == d.snapshots[i].data);
}

TEST_CASE("convert between encodings") {
  const auto d = sim::simulate(small(), {});
  const auto bin = scratch("conv.bin");
  const auto csv = scratch("conv.csv");
  io::write_cpi_file(bin, d);
  io::convert_cpi_file(bin, csv, 3, 4);
  const auto back = io::load_cpi_file(csv, 3, 4);
  CHECK(back.snapshots.back().data == d.snapshots.back().data);
  CHECK_THROWS_AS(io::convert_cpi_file(bin, scratch("x.bin"), 3, 4), InputError);
}

TEST_CASE("truncated binary names the byte offset") {
  const auto d = sim::simulate(small(), {});
  const auto path = scratch("trunc.bin");
  io::write_cpi_file(path, d);
  fs::resize_file(path, fs::file_size(path) - 8);
  try {
    (void)io::load_cpi_file(path, 3, 4);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dimension mismatch") != std::string::npos);
    CHECK(msg.find("byte offset 960") != std::string::npos);
  }
}

TEST_CASE("malformed and non-finite text rows are rejected with line numbers") {
  const auto path = scratch("bad.csv");
  write_text(path, "re,im\n1,2\n3,x\n");
  try {
    (void)io::load_cpi_file(path, 1, 2);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  write_text(path, "1,2\nnan,0\n");
  CHECK_THROWS_AS(io::load_cpi_file(path, 1, 2), InputError);
  write_text(path, "1,2\n3,4\n5,6\n");
  CHECK_THROWS_AS(io::load_cpi_file(path, 1, 2), InputError);
  CHECK_THROWS_AS(io::load_cpi_file(scratch("missing.bin"), 1, 2), InputError);
}

TEST_CASE("403-cell file with 14 elements and 16 pulses") {
  sim::ScenarioConfig c;
  c.num_elements = 14;
  c.num_pulses = 16;
  c.num_range_cells = 403;
  c.num_clutter_patches = 21;
  const auto d = sim::simulate(c, {});
  const auto path = scratch("mt.bin");
  io::write_cpi_file(path, d);
  const auto back = io::load_cpi_file(path, 14, 16);
  CHECK(back.snapshots.size() == 403);
  CHECK(back.snapshots.front().data.size() == 224);
  CHECK(back.snapshots[402].cell_index == 402);
}

TEST_CASE("config: JSON and TOML parse to the same canonical form") {
  const auto json_path = scratch("cfg.json");
  const auto toml_path = scratch("cfg.toml");
  write_text(json_path, R"({"scenario": {"rng_seed": 5, "texture_db": 1.5},
    "window": {"num_training": 30, "cut_index": 40},
    "burg": {"psi1": 0.02},
    "estimators": ["bgvcf", "lsmi"],
    "targets": [{"range_cells": [40], "normalized_doppler": 0.2, "normalized_spatial": 0.0, "snr_db": 3.0}]})");
  write_text(toml_path, R"(estimators = ["bgvcf", "lsmi"]
[scenario]
rng_seed = 5
texture_db = 1.5
[window]
num_training = 30
cut_index = 40
[burg]
psi1 = 0.02
[[targets]]
range_cells = [40]
normalized_doppler = 0.2
normalized_spatial = 0.0
snr_db = 3.0
)");
  const auto a = load_config(json_path);
  const auto b = load_config(toml_path);
  CHECK(to_json(a) == to_json(b));
  CHECK(config_hash(a) == config_hash(b));
  CHECK(a.scenario.rng_seed == 5);
  CHECK(a.window.num_training == 30);
  CHECK(std::abs(a.targets.at(0).amplitude) == doctest::Approx(std::sqrt(std::pow(10.0, 0.3))));
}

TEST_CASE("config: round trip, hash stability and output_dir independence") {
  PipelineConfig c;
  c.window.sweep_first = 10;
  c.window.sweep_last = 20;
  const auto back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  auto moved = c;
  moved.output_dir = "elsewhere";
  CHECK(config_hash(moved) == config_hash(c));
  auto changed = c;
  changed.scenario.rng_seed = 1;
  CHECK(config_hash(changed) != config_hash(c));
  CHECK(config_hash(c).size() == 64);
}

TEST_CASE("config: rejects unknown keys and invalid values") {
  using nlohmann::json;
  CHECK_THROWS_AS(config_from_json(json{{"bogus", 1}}), InputError);
  CHECK_THROWS_AS(config_from_json(json{{"window", {{"nope", 1}}}}), InputError);
  CHECK_THROWS_AS(config_from_json(json{{"window", {{"num_training", "x"}}}}), InputError);
  auto c = config_from_json(json{{"estimators", {"bgvcf", "magic"}}});
  CHECK_THROWS_AS(c.validate(), InputError);
  c = config_from_json(json{{"window", {{"num_training", 0}}}});
  CHECK_THROWS_AS(c.validate(), InputError);
  c = config_from_json(json{{"window", {{"num_guard", -1}}}});
  CHECK_THROWS_AS(c.validate(), InputError);
  const auto bad = scratch("bad.toml");
  write_text(bad, "[scenario\n");
  CHECK_THROWS_AS(load_config(bad), InputError);
}

TEST_CASE("config: defaults follow the reference experiment") {
  const PipelineConfig c;
  CHECK(c.resolved_subspace_dim() == 21);
  REQUIRE(c.targets.size() == 2);
  CHECK(c.targets[0].range_cells == std::vector<int>{30, 31, 32});
  CHECK(c.targets[1].normalized_doppler == -0.1);
  CHECK(c.resolved_look_doppler() == 0.25);
  CHECK_NOTHROW(c.validate());
}
