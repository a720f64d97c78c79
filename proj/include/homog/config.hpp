#ifndef HOMOG_CONFIG_HPP
#define HOMOG_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "homog/dataset.hpp"
#include "homog/fem.hpp"
#include "homog/micro.hpp"
#include "homog/surrogate.hpp"

namespace homog {

/// Mesh selection for the macro stage: an external mesh file or one of the
/// built-in generators.
struct MeshSpec {
  enum class Kind { File, Cook, Beam } kind = Kind::File;
  std::string file;
  int nx = 8, ny = 8;                  // cook
  int ncellx = 20, ncelly = 5;         // beam
  int elems_per_cell = 8;              // beam
  double cell = 0.2;                   // beam
  double inclusion_fraction = 0.0;     // beam; 0 = homogenized tags
  double q0 = 0.0;

  std::pair<MacroMesh, BoundaryConditions> realize() const;
};

struct MacroConfig {
  MeshSpec mesh;
  std::string provider = "surrogate";  // surrogate | nested | direct
  std::string model_file;
  FemOptions fem;
};

/// Parsed problem-definition file. The schema is strict: unknown keys are
/// rejected before any computation runs.
struct ProblemConfig {
  std::uint64_t seed = 0;
  std::optional<RveProblem> rve;
  std::string rve_descriptor;
  std::optional<SamplingBox> sampling_box;
  int sample_count = 0;
  std::optional<HdmrArch> architecture;
  TrainOptions training;
  SolverOptions solver;
  std::optional<MacroConfig> macro;
};

ProblemConfig parse_problem_config(const std::string& path);

}  // namespace homog

#endif
