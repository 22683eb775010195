#include "bgvcf/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>

#include "bgvcf/csv.hpp"
#include "bgvcf/dataset_io.hpp"

namespace bgvcf::pipeline {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kOutputFiles = {
    "screening.csv", "convergence.csv", "weights.csv", "output.csv",  "if_curve.csv",
    "beampattern.csv", "scnr_curve.csv", "capon.csv",  "power.csv", "manifest.json"};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Rethrows `e` with a stage prefix, keeping its category.
[[noreturn]] void rethrow_in_stage(const std::string& stage, const Error& e) {
  const std::string what = "stage '" + stage + "': " + e.what();
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) throw NumericalError(what);
  if (dynamic_cast<const InputError*>(&e) != nullptr) throw InputError(what);
  throw Error(what);
}

std::vector<double> renormalized_subset(const std::vector<double>& weights, std::span<const int> all,
                                        std::span<const int> subset) {
  if (weights.empty()) return {};
  if (weights.size() != all.size()) {
    throw InputError("optimizer.weights: " + std::to_string(weights.size()) + " weights for " +
                     std::to_string(all.size()) + " training cells");
  }
  std::vector<double> out;
  for (int cell : subset) {
    const auto it = std::find(all.begin(), all.end(), cell);
    out.push_back(weights[static_cast<std::size_t>(it - all.begin())]);
  }
  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& w : out) w /= sum;
  return out;
}

CovarianceEstimate grassmann_estimate(const std::string& label, const TrainingSet& training,
                                      std::span<const int> cells, const PipelineConfig& config) {
  const int s = config.resolved_subspace_dim();
  std::vector<grassmann::GrassmannPoint> points;
  for (const auto& m : training.thpd) {
    if (std::find(cells.begin(), cells.end(), m.cell_index) != cells.end()) {
      points.push_back(grassmann::extract_subspace(m, s));
    }
  }
  auto optimizer = config.optimizer;
  optimizer.subspace_dim = s;
  optimizer.weights = renormalized_subset(config.optimizer.weights, training.cells, cells);
  auto ccm = grassmann::estimate_ccm(points, optimizer);
  CovarianceEstimate out;
  out.estimator = label;
  out.covariance = ccm.covariance;
  out.ccm = std::move(ccm);
  out.used_cells.assign(cells.begin(), cells.end());
  return out;
}

struct EstimatorRun {
  CovarianceEstimate estimate;
  stap::StapWeights weights;
};

class Recorder {
 public:
  explicit Recorder(RunManifest& manifest) : manifest_(manifest) {}

  template <class Fn>
  auto stage(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      manifest_.timings.push_back({name, elapsed.count()});
    };
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        finish();
      } else {
        auto result = fn();
        finish();
        return result;
      }
    } catch (const Error& e) {
      finish();
      rethrow_in_stage(name, e);
    }
  }

  void failure(const std::string& label, const std::string& reason) {
    const std::pair<std::string, std::string> entry{label, reason};
    if (std::find(manifest_.estimator_failures.begin(), manifest_.estimator_failures.end(), entry) ==
        manifest_.estimator_failures.end()) {
      manifest_.estimator_failures.push_back(entry);
    }
    manifest_.partial = true;
  }

  void file(const std::string& name) { manifest_.files.push_back(name); }

 private:
  RunManifest& manifest_;
};

void write_manifest(const fs::path& dir, RunManifest& manifest) {
  manifest.finished = utc_now();
  if (std::find(manifest.files.begin(), manifest.files.end(), "manifest.json") == manifest.files.end()) {
    manifest.files.push_back("manifest.json");
  }
  std::sort(manifest.files.begin(), manifest.files.end());
  std::ofstream out(dir / "manifest.json");
  if (!out) throw InputError("cannot write " + (dir / "manifest.json").string());
  out << manifest.to_json().dump(2) << '\n';
}

void write_curves(const fs::path& path, const std::vector<stap::MetricCurve>& curves) {
  csv::Writer out(path, {"metric_kind", "estimator", "abscissa", "value_db"});
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.values.size(); ++i) {
      out.row(std::string(stap::to_string(c.kind)), c.estimator, c.abscissa[i], c.values[i]);
    }
  }
}

stap::SteeringGeometry geometry_of(const sim::ScenarioConfig& s) {
  return {s.temporal_len(), s.spatial_len()};
}

double input_scnr_amplitude(const CMatrix& truth, double scnr_db) {
  const double mean_power = truth.diagonal().real().mean();
  return std::sqrt(mean_power * std::pow(10.0, scnr_db / 10.0));
}

}  // namespace

std::vector<int> select_training_window(int num_cells, int cut, int q, int guard) {
  if (num_cells < 1 || q < 1 || guard < 0) throw InputError("training window: invalid arguments");
  if (cut < 0 || cut >= num_cells) {
    throw InputError("training window: CUT " + std::to_string(cut) + " outside dataset of " +
                     std::to_string(num_cells) + " cells");
  }
  std::vector<int> cells;
  for (int d = guard + 1; static_cast<int>(cells.size()) < q; ++d) {
    const int left = cut - d;
    const int right = cut + d;
    if (left < 0 && right >= num_cells) {
      throw InputError("training window: " + std::to_string(q) + " cells with " + std::to_string(guard) +
                       " guard cells do not fit around CUT " + std::to_string(cut) + " in " +
                       std::to_string(num_cells) + " cells");
    }
    if (left >= 0) cells.push_back(left);
    if (static_cast<int>(cells.size()) < q && right < num_cells) cells.push_back(right);
  }
  std::sort(cells.begin(), cells.end());
  return cells;
}

std::vector<int> select_training_range(int num_cells, int cut, int first, int last, int guard) {
  if (first < 0 || last >= num_cells || first > last) {
    throw InputError("training range [" + std::to_string(first) + ", " + std::to_string(last) +
                     "] outside dataset of " + std::to_string(num_cells) + " cells");
  }
  std::vector<int> cells;
  for (int c = first; c <= last; ++c) {
    if (std::abs(c - cut) > guard) cells.push_back(c);
  }
  if (cells.empty()) throw InputError("training range holds no cells outside the CUT guard band");
  return cells;
}

std::vector<int> training_cells(const PipelineConfig& config, int num_cells, int cut) {
  const auto& w = config.window;
  if (w.training_first) return select_training_range(num_cells, cut, *w.training_first, *w.training_last, w.num_guard);
  return select_training_window(num_cells, cut, w.num_training, w.num_guard);
}

TrainingSet prepare_training(const sim::SpaceTimeDataset& dataset, std::span<const int> cells,
                             const PipelineConfig& config) {
  TrainingSet out;
  out.cells.assign(cells.begin(), cells.end());
  for (int c : cells) out.snapshots.push_back(dataset.at(c));
  out.thpd = thpd::thpd_covariances(out.snapshots, config.burg);
  if (out.thpd.size() >= 2) {
    out.screening = screening::screen(out.thpd);
  } else {
    for (const auto& m : out.thpd) {
      const auto disc = screening::brauer_radius(m);
      out.screening.summaries.push_back({m.cell_index, disc.center, disc.radius, true, 0.0, 0.0});
      out.screening.clutter_cells.push_back(m.cell_index);
    }
  }
  return out;
}

CovarianceEstimate estimate_covariance(const std::string& label, const TrainingSet& training,
                                       const sim::SpaceTimeDataset& dataset, int cut,
                                       const PipelineConfig& config) {
  CovarianceEstimate out;
  out.estimator = label;
  if (label == "bgvcf") return grassmann_estimate(label, training, training.screening.clutter_cells, config);
  if (label == "gvcf") return grassmann_estimate(label, training, training.cells, config);
  if (label == "scm") {
    out.covariance = stap::scm(training.snapshots);
    out.used_cells = training.cells;
  } else if (label == "lsmi") {
    out.covariance = stap::lsmi(training.snapshots, config.lsmi_loading);
    out.used_cells = training.cells;
  } else if (label == "gip") {
    auto selection = stap::gip_select(training.snapshots, std::nullopt, config.gip_keep, config.lsmi_loading);
    out.covariance = stap::lsmi(selection.kept, config.lsmi_loading);
    out.used_cells = std::move(selection.kept_cells);
  } else if (label == "euclidean_mean") {
    const auto& keep = training.screening.clutter_cells;
    std::vector<thpd::ThpdCovariance> matrices;
    for (const auto& m : training.thpd) {
      if (std::find(keep.begin(), keep.end(), m.cell_index) != keep.end()) matrices.push_back(m);
    }
    out.covariance = stap::euclidean_mean_ccm(matrices, renormalized_subset(config.optimizer.weights, training.cells, keep));
    out.used_cells = keep;
  } else if (label == "optimal") {
    out.covariance = dataset.cell_covariance(cut);
  } else {
    throw InputError("unsupported estimator '" + label + "'");
  }
  return out;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json timing = nlohmann::json::array();
  for (const auto& t : timings) timing.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& [label, reason] : estimator_failures) failures.push_back({{"estimator", label}, {"reason", reason}});
  nlohmann::json j = {{"config_hash", config_hash},
                      {"seed", seed},
                      {"started", started},
                      {"finished", finished},
                      {"files", files},
                      {"stage_timings", timing},
                      {"estimator_failures", failures},
                      {"partial", partial}};
  if (!error.empty()) j["error"] = error;
  return j;
}

sim::SpaceTimeDataset load_or_simulate(const PipelineConfig& config) {
  if (config.input) {
    auto dataset = io::load_dataset(*config.input);
    if (dataset.config.num_elements != config.scenario.num_elements ||
        dataset.config.num_pulses != config.scenario.num_pulses) {
      throw InputError("input " + config.input->string() + " does not match the configured array dimensions");
    }
    return dataset;
  }
  return sim::simulate(config.scenario, config.targets);
}

std::vector<stap::MetricCurve> output_scnr_curves(std::span<const std::string> labels,
                                                  const PipelineConfig& config,
                                                  std::span<const double> input_scnr_db,
                                                  std::vector<std::pair<std::string, std::string>>* failures) {
  if (config.targets.empty()) throw InputError("output SCNR: no targets configured");
  const auto clutter = sim::generate_clutter(config.scenario);
  sim::SpaceTimeDataset base;
  base.config = config.scenario;
  base.snapshots = clutter.snapshots;
  base.textures = clutter.textures;
  base.ideal_clutter_covariance = clutter.ideal_covariance;

  const int cut = config.window.cut_index;
  const CMatrix truth = base.cell_covariance(cut);
  const auto geometry = geometry_of(config.scenario);
  const CVector look = sim::steering_vector(config.resolved_look_doppler(), config.resolved_look_spatial(),
                                            geometry.temporal_len, geometry.spatial_len);
  const auto& first = config.targets.front();
  const CVector target_direction = sim::steering_vector(first.normalized_doppler, first.normalized_spatial,
                                                        geometry.temporal_len, geometry.spatial_len);
  const double first_amplitude = std::abs(first.amplitude);
  const auto cells = training_cells(config, static_cast<int>(base.snapshots.size()), cut);

  std::vector<stap::MetricCurve> curves(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    curves[i].kind = stap::MetricKind::output_scnr;
    curves[i].estimator = labels[i];
  }
  for (double scnr : input_scnr_db) {
    const double amplitude = input_scnr_amplitude(truth, scnr);
    auto targets = config.targets;
    for (auto& t : targets) {
      // Keep relative target strengths and phases; the first target sets the scale.
      t.amplitude = first_amplitude > 0.0 ? t.amplitude * (amplitude / first_amplitude) : cplx{amplitude, 0.0};
    }
    const auto dataset = sim::inject_targets(base, targets);
    const auto training = prepare_training(dataset, cells, config);
    const CVector signal = targets.front().amplitude * target_direction;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      try {
        const auto estimate = estimate_covariance(labels[i], training, dataset, cut, config);
        const auto weights = stap::stap_weights(estimate.covariance, look, labels[i]);
        curves[i].abscissa.push_back(scnr);
        curves[i].values.push_back(stap::output_scnr_db(weights, signal, truth));
      } catch (const NumericalError& e) {
        if (failures != nullptr) failures->emplace_back(labels[i], e.what());
      }
    }
  }
  return curves;
}

RunManifest run_pipeline(const PipelineConfig& config, Outputs outputs) {
  config.validate();
  const fs::path dir = config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& name : kOutputFiles) fs::remove(dir / name, ec);

  RunManifest manifest;
  manifest.config_hash = config_hash(config);
  manifest.seed = config.scenario.rng_seed;
  manifest.started = utc_now();
  Recorder rec(manifest);

  try {
    const auto dataset = rec.stage("load", [&] { return load_or_simulate(config); });
    const bool has_truth = dataset.ideal_clutter_covariance.has_value();
    const int num_cells = static_cast<int>(dataset.snapshots.size());
    const int cut = config.window.cut_index;
    const auto geometry = geometry_of(dataset.config);
    const CVector look = sim::steering_vector(config.resolved_look_doppler(), config.resolved_look_spatial(),
                                              geometry.temporal_len, geometry.spatial_len);

    const auto training = rec.stage("training", [&] {
      const auto cells = training_cells(config, num_cells, cut);
      return prepare_training(dataset, cells, config);
    });

    if (outputs.screening) {
      rec.stage("write_screening", [&] {
        csv::Writer out(dir / "screening.csv", {"cell_index", "center", "radius", "T_B", "is_clutter"});
        for (const auto& s : training.screening.summaries) {
          out.row(s.cell_index, s.center, s.radius, training.screening.threshold, s.is_clutter);
        }
        rec.file("screening.csv");
      });
    }

    const bool need_estimators = outputs.convergence || outputs.weights || outputs.improvement_factor ||
                                 outputs.beampattern || outputs.capon;
    std::vector<std::string> labels = config.estimators;
    std::vector<EstimatorRun> runs;
    if (need_estimators) {
      rec.stage("estimate", [&] {
        for (const auto& label : labels) {
          try {
            auto estimate = estimate_covariance(label, training, dataset, cut, config);
            auto weights = stap::stap_weights(estimate.covariance, look, label);
            if (weights.ill_conditioned) {
              std::cerr << "warning: " << label << " covariance is ill-conditioned\n";
            }
            runs.push_back({std::move(estimate), std::move(weights)});
          } catch (const NumericalError& e) {
            rec.failure(label, e.what());
          }
        }
      });
    }

    if (outputs.convergence) {
      rec.stage("write_convergence", [&] {
        csv::Writer out(dir / "convergence.csv", {"estimator", "iteration", "objective"});
        for (const auto& r : runs) {
          if (!r.estimate.ccm) continue;
          const auto& trace = r.estimate.ccm->objective_trace;
          for (std::size_t i = 0; i < trace.size(); ++i) out.row(r.estimate.estimator, i, trace[i]);
        }
        rec.file("convergence.csv");
      });
    }

    if (outputs.weights) {
      rec.stage("write_weights", [&] {
        csv::Writer w(dir / "weights.csv", {"estimator", "index", "re", "im"});
        csv::Writer y(dir / "output.csv", {"estimator", "cell_index", "re", "im", "power_db"});
        for (const auto& r : runs) {
          for (Eigen::Index i = 0; i < r.weights.w.size(); ++i) {
            w.row(r.estimate.estimator, static_cast<int>(i), r.weights.w(i).real(), r.weights.w(i).imag());
          }
          const cplx out = stap::apply_filter(r.weights, dataset.at(cut).data);
          y.row(r.estimate.estimator, cut, out.real(), out.imag(), stap::to_db(std::norm(out)));
        }
        rec.file("weights.csv");
        rec.file("output.csv");
      });
    }

    std::optional<CMatrix> truth;
    if (has_truth) truth = dataset.cell_covariance(cut);

    // Metric curves always carry the optimal reference when truth exists.
    std::vector<std::pair<std::string, const CMatrix*>> metric_set;
    for (const auto& r : runs) metric_set.emplace_back(r.estimate.estimator, &r.estimate.covariance);
    if (truth && std::find(labels.begin(), labels.end(), "optimal") == labels.end()) {
      metric_set.emplace_back("optimal", &*truth);
    }

    if (outputs.improvement_factor && has_truth) {
      rec.stage("improvement_factor", [&] {
        const auto grid = sim::linear_grid(config.grid_points);
        std::vector<stap::MetricCurve> curves;
        for (const auto& [label, covariance] : metric_set) {
          try {
            curves.push_back(stap::improvement_factor(*covariance, *truth, grid, config.resolved_look_spatial(),
                                                      geometry, label));
          } catch (const NumericalError& e) {
            rec.failure(label, e.what());
          }
        }
        write_curves(dir / "if_curve.csv", curves);
        rec.file("if_curve.csv");
      });
    }

    if (outputs.beampattern) {
      rec.stage("beampattern", [&] {
        const auto grid = sim::linear_grid(config.grid_points);
        std::vector<stap::MetricCurve> curves;
        std::vector<stap::StapWeights> all;
        for (const auto& r : runs) all.push_back(r.weights);
        if (truth && std::find(labels.begin(), labels.end(), "optimal") == labels.end()) {
          all.push_back(stap::stap_weights(*truth, look, "optimal"));
        }
        for (const auto& w : all) {
          curves.push_back(stap::beampattern_slice(w, grid, stap::MetricKind::beampattern_doppler,
                                                   config.resolved_look_spatial(), geometry));
          curves.push_back(stap::beampattern_slice(w, grid, stap::MetricKind::beampattern_spatial,
                                                   config.resolved_look_doppler(), geometry));
        }
        write_curves(dir / "beampattern.csv", curves);
        rec.file("beampattern.csv");
      });
    }

    if (outputs.scnr && has_truth && !config.input && !config.targets.empty()) {
      rec.stage("output_scnr", [&] {
        std::vector<std::string> scnr_labels = labels;
        if (std::find(labels.begin(), labels.end(), "optimal") == labels.end()) scnr_labels.push_back("optimal");
        std::vector<std::pair<std::string, std::string>> failures;
        auto curves = output_scnr_curves(scnr_labels, config, config.input_scnr_db, &failures);
        for (const auto& [label, reason] : failures) rec.failure(label, reason);
        write_curves(dir / "scnr_curve.csv", curves);
        rec.file("scnr_curve.csv");
      });
    }

    if (outputs.capon) {
      rec.stage("capon", [&] {
        const auto grid = sim::linear_grid(config.grid_points);
        csv::Writer out(dir / "capon.csv", {"estimator", "doppler", "spatial", "value_db"});
        for (const auto& [label, covariance] : metric_set) {
          Eigen::MatrixXd spectrum;
          try {
            spectrum = sim::capon_spectrum(*covariance, grid, grid, geometry.temporal_len, geometry.spatial_len);
          } catch (const NumericalError& e) {
            rec.failure(label, e.what());
            continue;
          }
          for (Eigen::Index i = 0; i < spectrum.rows(); ++i) {
            for (Eigen::Index j = 0; j < spectrum.cols(); ++j) {
              out.row(label, grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)],
                      stap::to_db(spectrum(i, j)));
            }
          }
        }
        rec.file("capon.csv");
      });
    }

    if (outputs.power && config.window.sweep_first) {
      rec.stage("output_power", [&] {
        std::vector<stap::MetricCurve> curves(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
          curves[i].kind = stap::MetricKind::output_power;
          curves[i].estimator = labels[i];
        }
        for (int c = *config.window.sweep_first; c <= *config.window.sweep_last; ++c) {
          const auto cells = select_training_window(num_cells, c, config.window.num_training, config.window.num_guard);
          const auto set = prepare_training(dataset, cells, config);
          for (std::size_t i = 0; i < labels.size(); ++i) {
            try {
              const auto estimate = estimate_covariance(labels[i], set, dataset, c, config);
              const auto weights = stap::stap_weights(estimate.covariance, look, labels[i]);
              curves[i].abscissa.push_back(c);
              curves[i].values.push_back(stap::to_db(std::norm(stap::apply_filter(weights, dataset.at(c).data))));
            } catch (const NumericalError& e) {
              rec.failure(labels[i], e.what());
            }
          }
        }
        write_curves(dir / "power.csv", curves);
        rec.file("power.csv");
      });
    }
  } catch (const Error& e) {
    manifest.partial = true;
    manifest.error = e.what();
    for (const auto& name : kOutputFiles) {
      if (fs::exists(dir / name) &&
          std::find(manifest.files.begin(), manifest.files.end(), name) == manifest.files.end()) {
        manifest.files.push_back(name);
      }
    }
    write_manifest(dir, manifest);
    throw;
  }
  write_manifest(dir, manifest);
  return manifest;
}

}  // namespace bgvcf::pipeline
