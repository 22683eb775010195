#pragma once

#include <filesystem>

#include "bgvcf/sim.hpp"

namespace bgvcf::io {

/// CPI sample files hold one complex sample per "row", cell-major, and in
/// snapshot order within a cell (pulse-major, element-minor).
///
///  * binary (any extension but .csv): little-endian IEEE-754 float64 pairs
///    (re, im), 16 bytes per sample, no header;
///  * text (.csv): one "re,im" line per sample, an optional "re,im" header.
///
/// A JSON sidecar (<file>.json) carries the dimensions and, for simulated
/// data, the scenario, targets and per-cell textures.
void write_cpi_file(const std::filesystem::path& path, const sim::SpaceTimeDataset& dataset);

/// Parses a CPI file into num_elements * num_pulses snapshots. Throws
/// InputError naming the byte offset (binary) or line (text) of the defect.
sim::SpaceTimeDataset load_cpi_file(const std::filesystem::path& path, int num_elements,
                                    int num_pulses);

/// Loads a file written by write_cpi_file, restoring the scenario, targets,
/// textures and ideal covariance from the sidecar when present.
sim::SpaceTimeDataset load_dataset(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// Rewrites a CPI file in the other encoding (chosen by `out`'s extension).
void convert_cpi_file(const std::filesystem::path& in, const std::filesystem::path& out,
                      int num_elements, int num_pulses);

}  // namespace bgvcf::io
