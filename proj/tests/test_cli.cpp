#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using std::string;

namespace {

string slurp(const string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run(const string& args, const string& log = "cli_out.txt") {
  const string cmd = string(HOMOG_CLI_PATH) + " " + args + " > " + log +
                     " 2> cli_err.txt";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

void write_laminate_config(const string& path) {
  std::ofstream out(path);
  out << R"({
  "seed": 31,
  "rve": {
    "grid": {"n1": 11, "n2": 11, "L1": 1.0, "L2": 1.0},
    "phases": {"type": "laminate"},
    "materials": [
      {"type": "neo_hookean_a", "mu": 100.0, "beta": 1.0},
      {"type": "neo_hookean_a", "mu": 1000.0, "beta": 1.0}
    ]
  },
  "sampling": {
    "box_lower": [0.7, -0.3, -0.3, 0.7],
    "box_upper": [1.3, 0.3, 0.3, 1.3],
    "count": 40
  }
})";
}

}  // namespace

TEST_CASE("cli usage errors exit with code 2") {
  CHECK(run("definitely-not-a-command") == 2);
  CHECK(run("sample") == 2);  // missing required flags

  write_laminate_config("cli_lam.json");
  CHECK(run("sample cli_lam.json --count 0 --out d.txt") == 2);

  // unknown config keys are rejected
  {
    std::ofstream out("cli_bad.json");
    out << R"({"seed": 1, "surprise": true})";
  }
  CHECK(run("micro cli_bad.json --Fbar 1,0,0,1") == 2);
  std::remove("cli_bad.json");
}

TEST_CASE("cli sample is deterministic and honors the header contract") {
  write_laminate_config("cli_lam.json");
  REQUIRE(run("sample cli_lam.json --count 15 --seed 5 --out cli_d1.txt") == 0);
  REQUIRE(run("sample cli_lam.json --count 15 --seed 5 --out cli_d2.txt") == 0);
  const string d1 = slurp("cli_d1.txt"), d2 = slurp("cli_d2.txt");
  CHECK(d1 == d2);
  CHECK(d1.find("\"seed\":5") != string::npos);
  int lines = 0;
  for (char c : d1) lines += (c == '\n');
  CHECK(lines == 16);  // header + 15 records
  std::remove("cli_d2.txt");
}

TEST_CASE("cli micro prints the stress-free reference state") {
  write_laminate_config("cli_lam.json");
  REQUIRE(run("micro cli_lam.json --Fbar 1,0,0,1") == 0);
  const string out = slurp("cli_out.txt");
  CHECK(out.find("psi_bar = 0") != string::npos);

  CHECK(run("micro cli_lam.json --Fbar 1,0,0,-1") == 1);  // non-invertible
  CHECK(run("micro cli_lam.json --Fbar 1,0,0") == 2);     // malformed flag
}

TEST_CASE("cli micro --verify agrees with the laminate oracle") {
  write_laminate_config("cli_lam.json");
  REQUIRE(run("micro cli_lam.json --Fbar 1.2,0.1,-0.2,1.2 --verify") == 0);
  const string out = slurp("cli_out.txt");
  CHECK(out.find("VERIFY PASS") != string::npos);
}

TEST_CASE("cli train fits the sampled laminate data") {
  write_laminate_config("cli_lam.json");
  REQUIRE(run("sample cli_lam.json --count 300 --seed 6 --out cli_d3.txt") == 0);
  REQUIRE(run("train --data cli_d3.txt --arch 2,4,6 --seed 7 --out cli_m.json "
              "--epochs 200") == 0);
  const string out = slurp("cli_out.txt");
  CHECK(out.find("validation RMSE") != string::npos);
  CHECK(slurp("cli_m.json").find("\"format_version\"") != string::npos);

  // malformed data file: parse error names the line, exit 1
  {
    std::ofstream bad("cli_baddata.txt");
    bad << R"({"format_version":1,"input_dim":4,"seed":0,"box_lower":[0,0,0,0],)"
        << R"("box_upper":[1,1,1,1],"rve":"x","grid":[3,3]})" << "\n";
    bad << "not,a,number,line,x\n";
  }
  CHECK(run("train --data cli_baddata.txt --arch 2,4,6 --out m2.json") == 2);

  // d > D is a usage error
  CHECK(run("train --data cli_d3.txt --arch 2,5,6 --out m3.json") == 2);
  std::remove("cli_baddata.txt");
}

TEST_CASE("cli validate projection suite passes") {
  REQUIRE(run("validate projection") == 0);
  const string out = slurp("cli_out.txt");
  CHECK(out.find("[PASS]") != string::npos);
  CHECK(out.find("[FAIL]") == string::npos);
  CHECK(run("validate nonsense") == 2);
}

TEST_CASE("cli macro needs a model file for the surrogate provider") {
  std::ofstream out("cli_macro.json");
  out << R"({
  "seed": 1,
  "macro": {
    "mesh": {"cook": {"nx": 2, "ny": 2, "q0": 1.0}},
    "provider": "surrogate",
    "model_file": "missing_model.json",
    "load_steps": 2
  }
})";
  out.close();
  CHECK(run("macro cli_macro.json") == 1);
  const string err = slurp("cli_err.txt");
  CHECK(err.find("missing_model.json") != string::npos);
  std::remove("cli_macro.json");
}
