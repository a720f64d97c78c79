#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "homog/dataset.hpp"
#include "homog/rng.hpp"

using namespace homog;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const SamplingBox kInclusionBox({0.8, -0.5, -0.5, 0.8}, {1.2, 0.5, 0.5, 1.2});
const SamplingBox kLaminateBox({0.7, -0.3, -0.3, 0.7}, {1.3, 0.3, 0.3, 1.3});

RveProblem tiny_homogeneous() {
  const RveGrid grid(7, 7, 1.0, 1.0);
  return RveProblem(grid, rasterize_homogeneous(grid),
                    {Material(NeoHookeanA(100.0, 1.0))});
}

}  // namespace

TEST_CASE("sampling box validation and corner determinant") {
  CHECK(kInclusionBox.min_corner_det() == doctest::Approx(0.39));
  CHECK_THROWS_AS(SamplingBox({1, 0, 0, 1}, {1, 1, 1, 2}),
                  std::invalid_argument);
}

TEST_CASE("sample_box determinism and bounds") {
  const auto a = sample_box(kInclusionBox, 500, 42);
  const auto b = sample_box(kInclusionBox, 500, 42);
  REQUIRE(a.size() == 500);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int c = 0; c < 4; ++c) CHECK(a[i][c] == b[i][c]);
  for (const auto& p : a) {
    for (int c = 0; c < 4; ++c) {
      CHECK(p[c] >= kInclusionBox.lower[c]);
      CHECK(p[c] < kInclusionBox.upper[c]);
    }
    CHECK(det2(p) > 0.05);
  }
  const auto c = sample_box(kInclusionBox, 500, 43);
  bool any_diff = false;
  for (std::size_t i = 0; i < c.size(); ++i) any_diff |= (c[i][0] != a[i][0]);
  CHECK(any_diff);
}

TEST_CASE("sample_box rejection overflow on a degenerate box") {
  const SamplingBox bad({-0.1, -0.1, -0.1, -0.1}, {0.1, 0.1, 0.1, 0.1});
  CHECK_THROWS_AS(sample_box(bad, 100, 1), RejectionOverflow);
}

TEST_CASE("per-component histogram is uniform (chi-square at 1%)") {
  const int n = 100000, bins = 20;
  const auto pts = sample_box(kInclusionBox, n, 2024);
  for (int c = 0; c < 4; ++c) {
    std::vector<int> hist(bins, 0);
    for (const auto& p : pts) {
      const double t = (p[c] - kInclusionBox.lower[c]) /
                       (kInclusionBox.upper[c] - kInclusionBox.lower[c]);
      ++hist[std::min(bins - 1, static_cast<int>(t * bins))];
    }
    double chi2 = 0.0;
    const double expected = static_cast<double>(n) / bins;
    for (int k = 0; k < bins; ++k)
      chi2 += (hist[k] - expected) * (hist[k] - expected) / expected;
    CHECK(chi2 < 36.1909);  // chi-square critical value, 19 dof, 1%
  }
}

TEST_CASE("build_dataset on a homogeneous RVE reproduces the material") {
  const RveProblem problem = tiny_homogeneous();
  const Material m = problem.materials[0];
  const BuildResult result =
      build_dataset(problem, kLaminateBox, 25, 7, SolverOptions{});
  CHECK(result.rejects.empty());
  REQUIRE(result.dataset.records.size() == 25);
  for (const auto& rec : result.dataset.records) {
    const Tensor2 F = unflatten(
        {rec.input[0], rec.input[1], rec.input[2], rec.input[3]});
    CHECK(rec.psi == doctest::Approx(energy(m, F)).epsilon(1e-10));
  }
}

TEST_CASE("build_dataset is schedule independent") {
  const RveProblem problem = tiny_homogeneous();
  const BuildResult serial =
      build_dataset(problem, kLaminateBox, 30, 99, SolverOptions{}, 1);
  const BuildResult parallel =
      build_dataset(problem, kLaminateBox, 30, 99, SolverOptions{}, 4);
  REQUIRE(serial.dataset.records.size() == parallel.dataset.records.size());
  for (std::size_t i = 0; i < serial.dataset.records.size(); ++i) {
    CHECK(serial.dataset.records[i].psi == parallel.dataset.records[i].psi);
    for (int c = 0; c < 4; ++c)
      CHECK(serial.dataset.records[i].input[c] ==
            parallel.dataset.records[i].input[c]);
  }
}

TEST_CASE("split is a deterministic partition") {
  Dataset data;
  data.input_dim = 1;
  data.box_lower = {0.0};
  data.box_upper = {2.0};
  for (int i = 0; i < 10; ++i)
    data.records.push_back({{0.1 * i}, 1.0 * i});

  const auto [train, val] = split(data, 0.1, 5);
  CHECK(train.records.size() == 1);
  CHECK(val.records.size() == 9);

  const auto [train2, val2] = split(data, 0.1, 5);
  CHECK(train2.records[0].psi == train.records[0].psi);

  // fraction 0.5 on 2 records -> 1 and 1
  Dataset two = data;
  two.records.resize(2);
  const auto [t2, v2] = split(two, 0.5, 1);
  CHECK(t2.records.size() == 1);
  CHECK(v2.records.size() == 1);

  // union preserves the multiset
  double sum = 0.0;
  for (const auto& r : train.records) sum += r.psi;
  for (const auto& r : val.records) sum += r.psi;
  CHECK(sum == doctest::Approx(45.0));
}

TEST_CASE("dataset files round-trip bit-exactly") {
  const RveProblem problem = tiny_homogeneous();
  BuildResult result =
      build_dataset(problem, kLaminateBox, 12, 2718, SolverOptions{});
  result.dataset.rve_descriptor = "homogeneous";

  const std::string p1 = "dataset_rt_1.txt", p2 = "dataset_rt_2.txt";
  save_dataset(result.dataset, p1);
  const Dataset loaded = load_dataset(p1);
  CHECK(loaded.seed == result.dataset.seed);
  CHECK(loaded.input_dim == 4);
  CHECK(loaded.grid_n1 == 7);
  CHECK(loaded.rve_descriptor == "homogeneous");
  REQUIRE(loaded.records.size() == result.dataset.records.size());
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    CHECK(loaded.records[i].psi == result.dataset.records[i].psi);
    for (int c = 0; c < 4; ++c)
      CHECK(loaded.records[i].input[c] == result.dataset.records[i].input[c]);
  }
  save_dataset(loaded, p2);
  CHECK(slurp(p1) == slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("malformed dataset lines are reported with their location") {
  const std::string path = "dataset_bad.txt";
  {
    std::ofstream out(path);
    out << R"({"format_version":1,"input_dim":4,"seed":0,"box_lower":[0,0,0,0],)"
        << R"("box_upper":[1,1,1,1],"rve":"x","grid":[7,7]})" << "\n";
    out << "1.0,0.0,0.0,1.0,0.5\n";
    out << "1.0,0.0,zzz\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains(":3"),
                       ParseError);
  std::remove(path.c_str());
}

TEST_CASE("reject log lists failed samples") {
  std::vector<RejectedSample> rejects = {
      {{1.0, 0.0, 0.0, 1.0}, "NewtonDiverged: testing, with comma"}};
  const std::string path = "rejects_test.csv";
  save_reject_log(rejects, path);
  const std::string text = slurp(path);
  CHECK(text.find("F11,F12,F21,F22,error") == 0);
  CHECK(text.find("NewtonDiverged") != std::string::npos);
  CHECK(text.find("testing; with comma") != std::string::npos);
  std::remove(path.c_str());
}
