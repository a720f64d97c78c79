#include "homog/config.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "homog/errors.hpp"

namespace homog {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object())
    throw ParseError("config: " + where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ParseError("config: unknown key '" + it.key() + "' in " + where);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError("config: missing key '" + std::string(key) + "' in " +
                     where);
  return *it;
}

Material parse_material(const json& j, const std::string& where) {
  check_keys(j, {"type", "mu", "beta", "nu", "E"}, where);
  const std::string type = require(j, "type", where).get<std::string>();
  if (type == "neo_hookean_a") {
    const double mu = require(j, "mu", where).get<double>();
    if (j.contains("beta")) {
      if (j.contains("nu"))
        throw ParseError("config: give either beta or nu in " + where);
      return NeoHookeanA(mu, j.at("beta").get<double>());
    }
    if (j.contains("nu"))
      return NeoHookeanA::from_poisson(mu, j.at("nu").get<double>());
    throw ParseError("config: neo_hookean_a needs beta or nu in " + where);
  }
  if (type == "neo_hookean_b") {
    return NeoHookeanB(require(j, "E", where).get<double>(),
                       require(j, "nu", where).get<double>());
  }
  throw ParseError("config: unknown material type '" + type + "' in " + where);
}

RveProblem parse_rve(const json& j, std::string& descriptor) {
  check_keys(j, {"grid", "phases", "materials"}, "rve");
  const json& gj = require(j, "grid", "rve");
  check_keys(gj, {"n1", "n2", "L1", "L2"}, "rve.grid");
  const RveGrid grid(require(gj, "n1", "rve.grid").get<int>(),
                     require(gj, "n2", "rve.grid").get<int>(),
                     require(gj, "L1", "rve.grid").get<double>(),
                     require(gj, "L2", "rve.grid").get<double>());

  std::vector<Material> materials;
  const json& mats = require(j, "materials", "rve");
  if (!mats.is_array() || mats.empty())
    throw ParseError("config: rve.materials must be a nonempty array");
  for (std::size_t i = 0; i < mats.size(); ++i)
    materials.push_back(
        parse_material(mats.at(i), "rve.materials[" + std::to_string(i) + "]"));

  const json& pj = require(j, "phases", "rve");
  check_keys(pj, {"type", "volume_fraction"}, "rve.phases");
  const std::string type = require(pj, "type", "rve.phases").get<std::string>();
  PhaseMap phases;
  if (type == "homogeneous") {
    phases = rasterize_homogeneous(grid);
    descriptor = "homogeneous";
  } else if (type == "laminate") {
    phases = rasterize_laminate(grid);
    descriptor = "laminate";
  } else if (type == "inclusion") {
    const double f =
        require(pj, "volume_fraction", "rve.phases").get<double>();
    phases = rasterize_inclusion(grid, f);
    std::ostringstream os;
    os << "inclusion f=" << f;
    descriptor = os.str();
  } else {
    throw ParseError("config: unknown phase type '" + type + "'");
  }
  return RveProblem(grid, std::move(phases), std::move(materials));
}

MeshSpec parse_mesh_spec(const json& j) {
  MeshSpec spec;
  check_keys(j, {"file", "cook", "beam"}, "macro.mesh");
  if (j.size() != 1)
    throw ParseError("config: macro.mesh needs exactly one of file/cook/beam");
  if (j.contains("file")) {
    spec.kind = MeshSpec::Kind::File;
    spec.file = j.at("file").get<std::string>();
  } else if (j.contains("cook")) {
    const json& c = j.at("cook");
    check_keys(c, {"nx", "ny", "q0"}, "macro.mesh.cook");
    spec.kind = MeshSpec::Kind::Cook;
    spec.nx = require(c, "nx", "cook").get<int>();
    spec.ny = require(c, "ny", "cook").get<int>();
    spec.q0 = require(c, "q0", "cook").get<double>();
  } else {
    const json& b = j.at("beam");
    check_keys(b,
               {"ncellx", "ncelly", "cell", "elems_per_cell",
                "inclusion_fraction", "q0"},
               "macro.mesh.beam");
    spec.kind = MeshSpec::Kind::Beam;
    spec.ncellx = require(b, "ncellx", "beam").get<int>();
    spec.ncelly = require(b, "ncelly", "beam").get<int>();
    spec.cell = require(b, "cell", "beam").get<double>();
    spec.elems_per_cell = require(b, "elems_per_cell", "beam").get<int>();
    spec.inclusion_fraction =
        b.contains("inclusion_fraction") ? b.at("inclusion_fraction").get<double>() : 0.0;
    spec.q0 = require(b, "q0", "beam").get<double>();
  }
  return spec;
}

}  // namespace

std::pair<MacroMesh, BoundaryConditions> MeshSpec::realize() const {
  switch (kind) {
    case Kind::File:
      return read_mesh_file(file);
    case Kind::Cook:
      return build_cook_problem(nx, ny, q0);
    case Kind::Beam:
      return build_beam_problem(ncellx, ncelly, cell, elems_per_cell,
                                inclusion_fraction, q0);
  }
  throw std::logic_error("MeshSpec: bad kind");
}

ProblemConfig parse_problem_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("config: " + path + ": " + e.what());
  }
  check_keys(root,
             {"seed", "rve", "sampling", "architecture", "training", "solver",
              "macro"},
             "top level");

  ProblemConfig cfg;
  try {
    if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();
    if (root.contains("rve"))
      cfg.rve = parse_rve(root.at("rve"), cfg.rve_descriptor);
    if (root.contains("sampling")) {
      const json& s = root.at("sampling");
      check_keys(s, {"box_lower", "box_upper", "count"}, "sampling");
      const auto lo = require(s, "box_lower", "sampling").get<std::vector<double>>();
      const auto hi = require(s, "box_upper", "sampling").get<std::vector<double>>();
      if (lo.size() != 4 || hi.size() != 4)
        throw ParseError("config: sampling box bounds need 4 components");
      cfg.sampling_box = SamplingBox({lo[0], lo[1], lo[2], lo[3]},
                                     {hi[0], hi[1], hi[2], hi[3]});
      cfg.sample_count = require(s, "count", "sampling").get<int>();
    }
    if (root.contains("architecture")) {
      const json& a = root.at("architecture");
      check_keys(a, {"L", "d", "N"}, "architecture");
      cfg.architecture = HdmrArch{require(a, "L", "architecture").get<int>(),
                                  require(a, "d", "architecture").get<int>(),
                                  require(a, "N", "architecture").get<int>()};
    }
    if (root.contains("training")) {
      const json& t = root.at("training");
      check_keys(t,
                 {"lm_max_iter", "lm_restarts", "finetune_epochs",
                  "val_fraction", "val_rmse_tol"},
                 "training");
      if (t.contains("lm_max_iter"))
        cfg.training.lm_max_iter = t.at("lm_max_iter").get<int>();
      if (t.contains("lm_restarts"))
        cfg.training.lm_restarts = t.at("lm_restarts").get<int>();
      if (t.contains("finetune_epochs"))
        cfg.training.finetune_epochs = t.at("finetune_epochs").get<int>();
      if (t.contains("val_fraction"))
        cfg.training.val_fraction = t.at("val_fraction").get<double>();
      if (t.contains("val_rmse_tol"))
        cfg.training.val_rmse_tol = t.at("val_rmse_tol").get<double>();
    }
    if (root.contains("solver")) {
      const json& s = root.at("solver");
      check_keys(s, {"newton_tol", "newton_max_iter", "cg_tol", "cg_max_iter"},
                 "solver");
      if (s.contains("newton_tol"))
        cfg.solver.newton_tol = s.at("newton_tol").get<double>();
      if (s.contains("newton_max_iter"))
        cfg.solver.newton_max_iter = s.at("newton_max_iter").get<int>();
      if (s.contains("cg_tol")) cfg.solver.cg_tol = s.at("cg_tol").get<double>();
      if (s.contains("cg_max_iter"))
        cfg.solver.cg_max_iter = s.at("cg_max_iter").get<int>();
    }
    if (root.contains("macro")) {
      const json& m = root.at("macro");
      check_keys(m,
                 {"mesh", "provider", "model_file", "load_steps", "newton_tol",
                  "newton_max_iter"},
                 "macro");
      MacroConfig mc;
      mc.mesh = parse_mesh_spec(require(m, "mesh", "macro"));
      if (m.contains("provider"))
        mc.provider = m.at("provider").get<std::string>();
      if (mc.provider != "surrogate" && mc.provider != "nested" &&
          mc.provider != "direct")
        throw ParseError("config: macro.provider must be surrogate|nested|direct");
      if (m.contains("model_file"))
        mc.model_file = m.at("model_file").get<std::string>();
      if (m.contains("load_steps"))
        mc.fem.load_steps = m.at("load_steps").get<int>();
      if (m.contains("newton_tol"))
        mc.fem.newton_tol = m.at("newton_tol").get<double>();
      if (m.contains("newton_max_iter"))
        mc.fem.newton_max_iter = m.at("newton_max_iter").get<int>();
      cfg.macro = std::move(mc);
    }
  } catch (const json::exception& e) {
    throw ParseError("config: " + path + ": " + e.what());
  }
  return cfg;
}

}  // namespace homog
