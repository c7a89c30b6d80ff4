// Drives the installed binary end to end through a shell. Each case pins the
// exit code contract: 0 pass, 1 failed check, 2 usage or schema, 3 operator
// restriction.

#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run(const std::string& cmd) {
  RunResult r;
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// strips any ambient seed override so runs are reproducible
std::string tool() { return std::string("env -u GUP_SEED ") + GUP_TOOL_PATH; }

std::string model(const std::string& name) {
  return std::string(GUP_MODELS_DIR) + "/" + name;
}

std::string write_temp(const std::string& name, const std::string& body) {
  std::string path = std::string(P_tmpdir) + "/" + name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("check passes a sound model and repeats byte for byte") {
  auto first = run(tool() + " check " + model("kmm3d.json"));
  CHECK(first.code == 0);
  CHECK(first.out.find("\"pass\": true") != std::string::npos);
  auto second = run(tool() + " check " + model("kmm3d.json"));
  CHECK(first.out == second.out);
}

TEST_CASE("--out mirrors stdout exactly") {
  std::string out_path = std::string(P_tmpdir) + "/gup-cli-report.json";
  auto r = run(tool() + " check " + model("kmm2d.json") + " --out " + out_path);
  CHECK(r.code == 0);
  std::ifstream in(out_path, std::ios::binary);
  std::string file_bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(file_bytes == r.out);
  std::remove(out_path.c_str());
}

TEST_CASE("check flags a broken model with exit 1") {
  std::string path = write_temp("gup-cli-broken.json", R"json({
    "name": "broken",
    "dimension": 2,
    "parameters": {"beta": "1/10"},
    "f": "1 + beta*(p1^2 + p2^2)",
    "L": ["0"]
  })json");
  auto r = run(tool() + " check " + path);
  CHECK(r.code == 1);
  CHECK(r.out.find("\"pass\": false") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("schema and usage problems exit 2") {
  std::string path = write_temp("gup-cli-malformed.json", "{ not json at all");
  CHECK(run(tool() + " check " + path).code == 2);
  std::remove(path.c_str());

  CHECK(run(tool() + " check /nonexistent/gup-no-such-model.json").code == 2);
  CHECK(run(tool() + " check " + model("kmm3d.json") + " --no-such-flag").code == 2);
  CHECK(run(tool() + " simulate " + model("kmm3d.json") + " --dt -1").code == 2);
  CHECK(run(tool()).code == 2);
  CHECK(run(tool() + " solve-f --a \"-1\" --g \"p1,p2\" --target-rho 0.5").code == 2);
}

TEST_CASE("quantum rejects non-polynomial structure with exit 3") {
  auto r = run(tool() + " quantum " + model("maggiore-sqrt.json"));
  CHECK(r.code == 3);
  auto alias = run(tool() + " quantum-jacobi " + model("maggiore-sqrt.json"));
  CHECK(alias.code == 3);
}

TEST_CASE("quantum certifies the exact cubic model") {
  auto r = run(tool() + " quantum " + model("kmm3d.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("solve-f radial evaluation") {
  auto r = run(tool() + " solve-f --a \"-1\" --target-rho 0.6");
  CHECK(r.code == 0);
  CHECK(r.out.find("1.16619") != std::string::npos);
}

TEST_CASE("GUP_SEED overrides the sampling seed") {
  auto r = run(std::string("env GUP_SEED=777 ") + GUP_TOOL_PATH + " check " +
               model("kmm3d.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("\"seed\": 777") != std::string::npos);
}

TEST_CASE("simulate reports conservation on a bundled model") {
  auto r = run(tool() + " simulate " + model("kmm3d.json") + " --t-end 1 --dt 0.001");
  CHECK(r.code == 0);
  CHECK(r.out.find("\"energy_drift\"") != std::string::npos);
  CHECK(r.out.find("\"j_drift\"") != std::string::npos);
}
