#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ehe/core.hpp"
#include "ehe/mcmc.hpp"
#include "ehe/model.hpp"

namespace ehe {

/// Parsed station + observation tables. Stations are held sorted by id and
/// each series covers its full observed date range with explicit missing days,
/// which makes the canonical serialization a fixed point of parse/serialize.
struct Dataset {
    std::vector<Station> stations;
    std::vector<StationSeries> series;  // aligned with stations
    std::vector<std::string> provenance;
};

Dataset load_dataset(const std::string& stations_csv_path, const std::string& obs_csv_path);

std::string canonical_stations_csv(const Dataset& ds);
std::string canonical_obs_csv(const Dataset& ds);

std::vector<Threshold> load_thresholds(const std::string& path);
std::string thresholds_csv(const std::vector<Threshold>& thresholds);

/// Shortest round-trip decimal form (to_chars); the one number format used in
/// all emitted files so byte-identical outputs follow from identical values.
std::string fmt_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);
std::uint64_t fnv1a64(const std::string& bytes);

/// Minimal CSV line splitter with double-quote support.
std::vector<std::string> split_csv_line(const std::string& line);
std::vector<std::string> read_lines(const std::string& content);

// --- Flat key=value run configuration ---------------------------------------

struct RunConfig {
    ModelConfig model;
    SamplerConfig sampler;
};

/// Parse `key = value` lines ('#' comments); unknown keys are errors.
RunConfig parse_run_config(const std::string& content, const RunConfig& base = {});
RunConfig load_run_config(const std::string& path, const RunConfig& base = {});
std::string run_config_text(const RunConfig& cfg);  // canonical echo, reload-safe

// --- Chain persistence --------------------------------------------------------

/// Columnar text files per parameter block (scalars, annual effects, one file
/// per GP field); binary_fields switches the field matrices to raw doubles.
void save_chain(const std::string& dir, const PosteriorChain& chain, bool binary_fields = false);
PosteriorChain load_chain(const std::string& dir);

void save_baseline_chain(const std::string& dir, const BaselineChain& chain);

// --- Run manifest -------------------------------------------------------------

struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config;  // full key=value echo
    std::map<std::string, std::string> input_checksums;
    int threads = 1;
    double timing_seconds = 0;
};

void write_manifest(const std::string& dir, const RunManifest& manifest);

}  // namespace ehe
