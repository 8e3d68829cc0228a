#pragma once

#include <map>
#include <string>
#include <vector>

#include "proxbridge/dataset.hpp"
#include "proxbridge/sieve_basis.hpp"
#include "proxbridge/simulation.hpp"

namespace proxbridge::cli {

// Flat key = value configuration with dotted section keys. Typed getters
// write resolved defaults back into `values` so every artifact can echo the
// full effective configuration.
struct RunConfig {
  std::string command;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback, double lo, double hi);
  long get_long(const std::string& key, long fallback, long lo, long hi);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<long> get_long_list(const std::string& key, const std::string& fallback);
  std::vector<int> get_int_list(const std::string& key, const std::string& fallback);
};

// Reads the optional file, applies `key=value` overrides in order, rejects
// unrecognized keys. Seed resolution falls back to PROXBRIDGE_SEED.
RunConfig parse_config(const std::string& command, const std::string& config_path,
                       const std::vector<std::string>& overrides);

// CSV with header columns y, a, z, w, x1..xd; '#' lines are comments.
// Unrecognized columns are ignored and reported through `warnings`.
Dataset load_dataset(const std::string& path, std::vector<std::string>* warnings = nullptr);

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::map<std::string, std::string>& config_echo);

// Executes one command and writes its artifacts. Returns the process exit
// status; failures are reported as machine-readable JSON on stderr.
int run(const std::string& command, RunConfig& config);

// argv-level entry point used by the binary.
int main_entry(int argc, char** argv);

// shared with tests
sim::DgpSpec dgp_from_config(RunConfig& config);
basis::BasisSpec basis_spec_from_config(RunConfig& config, const Dataset& data);

}  // namespace proxbridge::cli
