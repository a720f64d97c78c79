#ifndef HOMOG_DATASET_HPP
#define HOMOG_DATASET_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "homog/micro.hpp"
#include "homog/tensor.hpp"

namespace homog {

/// Componentwise sampling bounds for macroscopic deformation gradients.
struct SamplingBox {
  FlatVec4 lower;
  FlatVec4 upper;

  SamplingBox(const FlatVec4& lo, const FlatVec4& hi);

  /// Smallest det over the 16 box corners; a cheap posedness diagnostic
  /// (the sampler additionally rejects det <= 0.05 pointwise).
  double min_corner_det() const;
};

/// One training record: sampled input (dimension 1 for the bar problem,
/// 4 for plane-strain RVEs) and the resulting macro energy density.
struct EnergyRecord {
  std::vector<double> input;
  double psi = 0.0;
};

struct Dataset {
  int input_dim = 4;
  std::vector<double> box_lower;
  std::vector<double> box_upper;
  std::uint64_t seed = 0;
  std::string rve_descriptor;
  int grid_n1 = 0;
  int grid_n2 = 0;
  std::vector<EnergyRecord> records;
};

/// A micro solve that failed during batch generation; excluded from the
/// dataset and reported separately.
struct RejectedSample {
  FlatVec4 Fbar;
  std::string error;
};

struct BuildResult {
  Dataset dataset;
  std::vector<RejectedSample> rejects;
};

/// n i.i.d. uniform points in the box; draws with det <= 0.05 are rejected
/// and redrawn. Deterministic for a fixed seed.
std::vector<FlatVec4> sample_box(const SamplingBox& box, int n,
                                 std::uint64_t seed);

/// Offline-stage sweep: one record per sampled point via the spectral
/// solver. Solves run cold-started and may execute concurrently; record
/// order always matches sampling order.
BuildResult build_dataset(const RveProblem& problem, const SamplingBox& box,
                          int n, std::uint64_t seed, const SolverOptions& opts,
                          int threads = 1,
                          const std::function<void(int, int)>& progress = {});

/// Deterministic disjoint partition; proportions within one record.
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed);

/// Text format: line 1 is a JSON header (format version, seed, box bounds,
/// RVE descriptor, grid size), then one CSV line per record at 17
/// significant digits. Round-trips bit-exactly.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

void save_reject_log(const std::vector<RejectedSample>& rejects,
                     const std::string& path);

}  // namespace homog

#endif
