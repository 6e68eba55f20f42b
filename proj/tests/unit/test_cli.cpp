#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI, capturing stdout; stderr is discarded.
Run run(const std::string& args) {
  const std::string cmd = std::string("\"") + MISCLASSIT_CLI + "\" " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string data(const std::string& name) { return std::string(MISCLASSIT_TEST_DATA) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "misclassit_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("fit on the tiny fixture matches the golden report") {
  const Run r = run("fit --data " + data("tiny.csv") + " --no-timing");
  REQUIRE(r.code == 0);
  CHECK(r.out == slurp(data("golden/fit_tiny.json")));
}

TEST_CASE("bootstrap on the tiny fixture matches the golden report") {
  const std::string args = "bootstrap --data " + data("tiny.csv") + " --B 200 --seed 17 --no-timing";
  const Run r = run(args);
  REQUIRE(r.code == 0);
  CHECK(r.out == slurp(data("golden/bootstrap_tiny.json")));
  CHECK(run(args + " --threads 3").out == r.out);
}

TEST_CASE("bootstrap with a single replicate") {
  const Run r = run("bootstrap --data " + data("tiny.csv") + " --B 1 --seed 3 --no-timing");
  CHECK(r.code == 0);
  CHECK(r.out.find("\"B\": 1") != std::string::npos);
}

TEST_CASE("a missing ytilde column is a schema error naming the column") {
  const fs::path bad = scratch("no_ytilde.csv");
  std::ofstream(bad) << "y,x1\n1,0.5\n0,1.5\n";
  const Run r = run("fit --data " + bad.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("ytilde") != std::string::npos);
}

TEST_CASE("pmle without validation rows is a schema error") {
  const fs::path f = scratch("no_validation.csv");
  std::ofstream(f) << "y,ytilde,x1\n,1,0.5\n,0,1.5\n,1,-0.5\n";
  CHECK(run("fit --data " + f.string()).code == 2);
}

TEST_CASE("unknown options and designs exit with 2") {
  CHECK(run("fit --data " + data("tiny.csv") + " --bogus").code == 2);
  CHECK(run("simulate --design table9 --out " + scratch("x.csv").string()).code == 2);
}

TEST_CASE("simulate table5 writes one row per eta, method and parameter") {
  const fs::path a = scratch("t5a.csv");
  const fs::path b = scratch("t5b.csv");
  const Run ra = run("simulate --design table5 --reps 2 --seed 5 --no-timing --out " + a.string());
  REQUIRE(ra.code == 0);
  const std::string csv = slurp(a);
  CHECK(count_lines(csv) == 1 + 4 * 4 * 2);
  CHECK(csv.rfind("eta,sigma,method,parameter,bias,mse,used,failures\n", 0) == 0);
  CHECK(fs::exists(a.string() + ".json"));

  REQUIRE(run("simulate --design table5 --reps 2 --seed 5 --no-timing --out " + b.string()).code == 0);
  CHECK(slurp(b) == csv);
}
