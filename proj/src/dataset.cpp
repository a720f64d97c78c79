#include "homog/dataset.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "homog/errors.hpp"
#include "homog/parallel.hpp"
#include "homog/rng.hpp"

namespace homog {

using nlohmann::json;

SamplingBox::SamplingBox(const FlatVec4& lo, const FlatVec4& hi)
    : lower(lo), upper(hi) {
  for (int i = 0; i < 4; ++i)
    if (!(lower[i] < upper[i]))
      throw std::invalid_argument("SamplingBox: lower < upper required");
}

double SamplingBox::min_corner_det() const {
  double best = 1e300;
  for (int mask = 0; mask < 16; ++mask) {
    FlatVec4 c;
    for (int i = 0; i < 4; ++i)
      c[i] = (mask >> i) & 1 ? upper[i] : lower[i];
    best = std::min(best, det2(c));
  }
  return best;
}

std::vector<FlatVec4> sample_box(const SamplingBox& box, int n,
                                 std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_box: n >= 1 required");
  Rng rng(seed);
  std::vector<FlatVec4> points;
  points.reserve(n);
  long draws = 0, rejections = 0;
  while (static_cast<int>(points.size()) < n) {
    FlatVec4 p;
    for (int i = 0; i < 4; ++i) p[i] = rng.uniform(box.lower[i], box.upper[i]);
    ++draws;
    if (det2(p) <= 0.05) {
      ++rejections;
      if (draws >= 64 && 2 * rejections > draws)
        throw RejectionOverflow(
            "sample_box: more than half of all draws rejected (" +
            std::to_string(rejections) + "/" + std::to_string(draws) + ")");
      continue;
    }
    points.push_back(p);
  }
  return points;
}

BuildResult build_dataset(const RveProblem& problem, const SamplingBox& box,
                          int n, std::uint64_t seed, const SolverOptions& opts,
                          int threads,
                          const std::function<void(int, int)>& progress) {
  const std::vector<FlatVec4> points =
      sample_box(box, n, derive_seed(seed, "sample"));

  struct Slot {
    bool ok = false;
    double psi = 0.0;
    std::string error;
  };
  std::vector<Slot> slots(points.size());

  // One solver (and one set of FFT plans) per worker; every sample is
  // cold-started so the result does not depend on the schedule.
  std::vector<std::unique_ptr<SpectralSolver>> solvers(
      std::max(1, threads));
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  parallel_for(points.size(), threads, [&](std::size_t i, int worker) {
    auto& solver = solvers[worker];
    if (!solver) solver = std::make_unique<SpectralSolver>(problem, opts);
    try {
      const MicroSolution sol = solver->solve(unflatten(points[i]));
      slots[i].psi = sol.psi_bar;
      slots[i].ok = true;
    } catch (const SolverError& e) {
      slots[i].error = e.what();
    }
    if (progress) {
      const int d = done.fetch_add(1) + 1;
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(d, static_cast<int>(points.size()));
    }
  });

  BuildResult out;
  out.dataset.input_dim = 4;
  out.dataset.box_lower.assign(box.lower.begin(), box.lower.end());
  out.dataset.box_upper.assign(box.upper.begin(), box.upper.end());
  out.dataset.seed = seed;
  out.dataset.grid_n1 = problem.grid.n1;
  out.dataset.grid_n2 = problem.grid.n2;
  out.dataset.records.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (slots[i].ok) {
      EnergyRecord rec;
      rec.input.assign(points[i].begin(), points[i].end());
      rec.psi = slots[i].psi;
      out.dataset.records.push_back(std::move(rec));
    } else {
      out.rejects.push_back({points[i], slots[i].error});
    }
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw std::invalid_argument("split: fraction in (0,1)");
  const std::size_t n = data.records.size();
  const std::size_t n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, "split"));
  for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
    const std::size_t j = rng.index(i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<bool> in_train(n, false);
  for (std::size_t i = 0; i < n_train && i < n; ++i) in_train[order[i]] = true;

  Dataset train = data, val = data;
  train.records.clear();
  val.records.clear();
  for (std::size_t i = 0; i < n; ++i)
    (in_train[i] ? train : val).records.push_back(data.records[i]);
  return {std::move(train), std::move(val)};
}

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  json header = {
      {"format_version", 1},
      {"input_dim", data.input_dim},
      {"seed", data.seed},
      {"box_lower", data.box_lower},
      {"box_upper", data.box_upper},
      {"rve", data.rve_descriptor},
      {"grid", {data.grid_n1, data.grid_n2}},
  };
  out << header.dump() << '\n';
  for (const auto& rec : data.records) {
    for (double x : rec.input) out << fmt17(x) << ',';
    out << fmt17(rec.psi) << '\n';
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("load_dataset: empty file " + path);
  Dataset data;
  try {
    const json header = json::parse(line);
    if (header.at("format_version").get<int>() != 1)
      throw ParseError("load_dataset: unsupported format version");
    data.input_dim = header.at("input_dim").get<int>();
    data.seed = header.at("seed").get<std::uint64_t>();
    data.box_lower = header.at("box_lower").get<std::vector<double>>();
    data.box_upper = header.at("box_upper").get<std::vector<double>>();
    data.rve_descriptor = header.at("rve").get<std::string>();
    const auto grid = header.at("grid");
    data.grid_n1 = grid.at(0).get<int>();
    data.grid_n2 = grid.at(1).get<int>();
  } catch (const json::exception& e) {
    throw ParseError("load_dataset: bad header in " + path + ": " + e.what());
  }
  if (data.input_dim < 1)
    throw ParseError("load_dataset: bad input_dim");

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    EnergyRecord rec;
    std::size_t pos = 0;
    for (int i = 0; i <= data.input_dim; ++i) {
      const char* start = line.c_str() + pos;
      char* end = nullptr;
      const double x = std::strtod(start, &end);
      if (end == start)
        throw ParseError("load_dataset: malformed record at " + path + ":" +
                         std::to_string(lineno));
      pos += static_cast<std::size_t>(end - start);
      if (i < data.input_dim) {
        if (pos >= line.size() || line[pos] != ',')
          throw ParseError("load_dataset: expected ',' at " + path + ":" +
                           std::to_string(lineno));
        ++pos;
        rec.input.push_back(x);
      } else {
        rec.psi = x;
      }
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

void save_reject_log(const std::vector<RejectedSample>& rejects,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_reject_log: cannot open " + path);
  out << "F11,F12,F21,F22,error\n";
  for (const auto& r : rejects) {
    for (double x : r.Fbar) out << fmt17(x) << ',';
    std::string msg = r.error;
    for (char& c : msg)
      if (c == ',' || c == '\n') c = ';';
    out << msg << '\n';
  }
}

}  // namespace homog
