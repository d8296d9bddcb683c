#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbmreg/validation.hpp"

namespace sbmreg {

// Dense CSV (n rows of n integer counts) or edge-list TSV ("n=<count>" header
// then "i<TAB>j<TAB>count", 1-based).  Symmetry is asserted, not repaired;
// diagnostics carry line/column positions.
ObservedNetwork load_network(const std::string& path);

// Long CSV "i,j,x1,...,xd": exactly one row per unordered pair i<j (1-based),
// all pairs required, d inferred from the header.
MatrixXd load_covariates(const std::string& path, int n);

void save_network_dense(const std::string& path, const ObservedNetwork& net);
void save_network_edge_list(const std::string& path, const ObservedNetwork& net);
void save_covariates(const std::string& path, const MatrixXd& X, int n);

ModelParams load_theta(const std::string& path);
void save_theta(const std::string& path, const ModelParams& theta);

PriorHyper load_hyper(const std::string& path);
void save_hyper(const std::string& path, const PriorHyper& hyper);

ProxyPosterior load_proxy(const std::string& path);
void save_proxy(const std::string& path, const ProxyPosterior& proxy);

// JSONL, one particle per line: {"z": [...1-based...], "nu": [...],
// "alpha": [[...]], "beta": [...], "W": w}.  Floats carry 17 significant
// digits so a reload is bit-faithful.
std::vector<Particle> load_particles(const std::string& path);
void save_particles(const std::string& path, const std::vector<Particle>& particles);

void save_trace(const std::string& path, const TemperTrace& trace);

void save_assignment(const std::string& path, const LatentAssignment& z);
LatentAssignment load_assignment(const std::string& path);

// FNV-1a 64-bit over the raw bytes, rendered as 16 hex digits.
std::uint64_t fnv1a_file(const std::string& path);
std::string fnv1a_hex(std::uint64_t h);

struct ManifestEntry {
    std::string path;
    std::string hash;
};

// Reproducibility record: tool version, command line, seed, input hashes.
void save_manifest(const std::string& path, const std::string& command,
                   const std::vector<std::string>& args,
                   const std::vector<ManifestEntry>& inputs);

// 17-significant-digit float formatting used by every text artifact.
std::string format_double(double x);

}  // namespace sbmreg
