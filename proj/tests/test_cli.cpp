#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace {

struct Run {
  int rc = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" FREEWALK_CLI "\" " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::map<std::string, std::string> keyvals(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

std::string sample(const std::string& name) { return std::string(FREEWALK_SAMPLES) + "/" + name; }

}  // namespace

TEST(Cli, SolveSample) {
  auto r = run(sample("z4z4-simple.json"));
  EXPECT_EQ(r.rc, 2);  // subcommand required
  r = run("solve " + sample("z4z4-simple.json"));
  ASSERT_EQ(r.rc, 0);
  auto kv = keyvals(r.out);
  EXPECT_NEAR(std::stod(kv.at("gamma")), (std::sqrt(5.0) - 1) / 4, 1e-12);
  EXPECT_NEAR(std::stod(kv.at("gamma_s")), (3 - std::sqrt(5.0)) / 2, 1e-12);
  EXPECT_NEAR(std::stod(kv.at("quality")), 0.987686, 1e-6);
  EXPECT_EQ(kv.at("stationary"), "true");
  EXPECT_LE(std::stod(kv.at("tau2_residual")), 1e-12);
}

TEST(Cli, SolveFamilyFlags) {
  auto r = run("solve --family hecke-simple --param k=4");
  ASSERT_EQ(r.rc, 0);
  EXPECT_NEAR(std::stod(keyvals(r.out).at("gamma")), (std::sqrt(7.0) - 1) / 9, 1e-12);
  r = run("solve --family uniform --orders 3,3,3");
  ASSERT_EQ(r.rc, 0);
  EXPECT_EQ(keyvals(r.out).count("two_factor_identity"), 0u);
}

TEST(Cli, ErrorExitCodes) {
  EXPECT_EQ(run("solve " + sample("z2z2.json")).rc, 7);
  EXPECT_EQ(run("solve /nonexistent.json").rc, 11);
  EXPECT_EQ(run("solve --family zkzk-simple --param k=4 --param z=1").rc, 11);
  EXPECT_EQ(run("closed-form z2z3-r --p 0.3 --q 0.3").rc, 12);
  EXPECT_EQ(run("closed-form zkzk --k 2").rc, 3);
  EXPECT_EQ(run("bogus").rc, 2);
  EXPECT_EQ(run("solve --family zkzk-simple --param k=4 --frobnicate").rc, 2);
}

TEST(Cli, ToleranceFromEnvironment) {
  auto loose = run("solve --family z2z3 --param p=0.3 --param q=0.1", "FREEWALK_TOL=1e-4");
  auto tight = run("solve --family z2z3 --param p=0.3 --param q=0.1");
  ASSERT_EQ(loose.rc, 0);
  ASSERT_EQ(tight.rc, 0);
  EXPECT_LT(std::stoul(keyvals(loose.out).at("iterations")), std::stoul(keyvals(tight.out).at("iterations")));
  EXPECT_EQ(run("solve --family z2z3 --param p=0.3 --param q=0.1", "FREEWALK_TOL=abc").rc, 3);
}

TEST(Cli, ClosedForm) {
  auto r = run("closed-form zkzk --k-range 3:5");
  ASSERT_EQ(r.rc, 0);
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("family,k", 0), 0u);
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
  r = run("closed-form z2z3-max");
  ASSERT_EQ(r.rc, 0);
  EXPECT_NE(r.out.find("0.4902753547"), std::string::npos);
}

TEST(Cli, Sweep) {
  const auto csv = std::filesystem::temp_directory_path() / "freewalk_cli_sweep.csv";
  auto r = run("sweep --family z2z3 --param q=0.1 --grid p=0.1:0.3:0.1 -o " + csv.string());
  ASSERT_EQ(r.rc, 0);
  std::ifstream in(csv);
  std::string header, line;
  std::getline(in, header);
  EXPECT_NE(header.find("gamma"), std::string::npos);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
  std::filesystem::remove(csv);
}

TEST(Cli, SimulateAndCylinder) {
  auto r = run("simulate --family zkzk-simple --param k=4 --steps 200 --reps 20 --seed 3");
  ASSERT_EQ(r.rc, 0);
  EXPECT_EQ(r.out.rfind("quantity,estimate", 0), 0u);
  EXPECT_EQ(r.out, run("--threads 1 simulate --family zkzk-simple --param k=4 --steps 200 --reps 20 --seed 3").out);
  r = run("cylinder --family zkzk-simple --param k=4 --word 0:1,1:1");
  ASSERT_EQ(r.rc, 0);
  EXPECT_NEAR(std::stod(keyvals(r.out).at("probability")), 0.072949, 1e-6);
  EXPECT_EQ(run("cylinder --family zkzk-simple --param k=4 --word 0:1,0:1").rc, 3);
}

TEST(Cli, Verify) {
  auto r = run("verify --list");
  ASSERT_EQ(r.rc, 0);
  int lines = 0;
  std::istringstream in(r.out);
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 13);
  r = run("verify --only 1 --only 3");
  EXPECT_EQ(r.rc, 0);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  r = run("verify --only 4 --inject-fault");
  EXPECT_EQ(r.rc, 1);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, Quality) {
  auto r = run("quality --family zkzk-simple --param k=4 --generators minimal");
  ASSERT_EQ(r.rc, 0);
  EXPECT_NEAR(std::stod(keyvals(r.out).at("quality")), 0.987686, 1e-6);
}
