#include "linchoice/io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using linchoice::json;

namespace {

struct Result {
  int status = -1;
  std::string out;
  json parsed() const { return json::parse(out); }
};

Result run(const std::string& args) {
  const std::string cmd = std::string(LINCHOICE_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  std::filesystem::path dir;
  void SetUp() override {
    dir = std::filesystem::temp_directory_path() /
          ("linchoice_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
  }
  void TearDown() override { std::filesystem::remove_all(dir); }
  std::string file(const std::string& name, const std::string& content) const {
    const auto p = (dir / name).string();
    std::ofstream(p) << content;
    return p;
  }
  std::string basis2() const { return file("basis.csv", "f1,f2\n1,0\n0,1\n"); }
};

}  // namespace

TEST_F(Cli, ElectPlurality) {
  const auto p = file("p.jsonl", "{\"ranking\":[0,1,2]}\n{\"ranking\":[0,2,1]}\n{\"ranking\":[1,0,2]}\n");
  Result r = run("elect --rule plurality --profile " + p);
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.parsed()["winner"], 0);
}

TEST_F(Cli, ExitCodes) {
  const auto p = file("p.jsonl", "{\"ranking\":[0,1]}\n");
  EXPECT_EQ(run("elect --rule mcp --profile " + p).status, 2);
  EXPECT_EQ(run("elect --profile " + file("bad.jsonl", "{\"ranking\":[0,1]}\n{\"ranking\":[0\n")).status, 2);
  EXPECT_EQ(run("elect --profile " + (dir / "missing.jsonl").string()).status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("elect --profile " + file("cyc.jsonl", "{\"pairs\":[[0,1],[1,0]]}\n")).status, 1);
  EXPECT_EQ(run("validate --candidates " + file("c.csv", "f1,f2\n0.5,0.6\n")).status, 1);
  EXPECT_EQ(run("validate --candidates " + file("c2.csv", "f1,f2\n0.5,0.5\n")).status, 0);
}

TEST_F(Cli, MalformedProfileNamesLine) {
  const auto p = file("bad.jsonl", "{\"ranking\":[0,1]}\n{\"ranking\":[0\n");
  const std::string cmd = std::string(LINCHOICE_CLI) + " elect --profile " + p + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::array<char, 4096> buf{};
  std::string out(buf.data(), std::fread(buf.data(), 1, buf.size(), pipe));
  ::pclose(pipe);
  EXPECT_NE(out.find("bad.jsonl:2"), std::string::npos) << out;
}

TEST_F(Cli, Lotteries) {
  const auto p4 = file("p4.jsonl", "{\"ranking\":[0,1,2,3]}\n{\"ranking\":[3,2,1,0]}\n");
  Result u = run("lottery --rule uniform --profile " + p4);
  ASSERT_EQ(u.status, 0);
  for (double x : u.parsed()["lottery"].get<std::vector<double>>()) EXPECT_DOUBLE_EQ(x, 0.25);

  const auto b3 = file("b3.csv", "f1,f2,f3\n1,0,0\n0,1,0\n0,0,1\n");
  Result up = run("lottery --rule uproj --candidates " + b3);
  ASSERT_EQ(up.status, 0);
  for (double x : up.parsed()["lottery"].get<std::vector<double>>()) EXPECT_NEAR(x, 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(up.parsed()["kl"].get<double>(), 0.0, 1e-9);

  const auto p2 = file("p2.jsonl", "{\"ranking\":[0,1]}\n{\"ranking\":[0,1]}\n");
  Result ps = run("lottery --rule pslr --d 1 --profile " + p2);
  ASSERT_EQ(ps.status, 0);
  EXPECT_NEAR(ps.parsed()["lottery"][0].get<double>(), 0.5, 1e-9);
  EXPECT_NEAR(ps.parsed()["lottery"][1].get<double>(), 0.5, 1e-9);
}

TEST_F(Cli, OptimalOnFixtures) {
  const auto c = basis2();
  Result det = run("optimal --mode det --candidates " + c + " --profile " + file("one.jsonl", "{\"ranking\":[0,1]}\n"));
  ASSERT_EQ(det.status, 0);
  EXPECT_EQ(det.parsed()["winner"], 0);
  EXPECT_NEAR(det.parsed()["report"]["value"].get<double>(), 1.0, 1e-6);

  const auto sym = file("sym.jsonl", "{\"ranking\":[0,1]}\n{\"ranking\":[1,0]}\n");
  Result rnd = run("optimal --mode rand --candidates " + c + " --profile " + sym);
  ASSERT_EQ(rnd.status, 0);
  const json j = rnd.parsed();
  EXPECT_NEAR(j["report"]["value"].get<double>(), 1.5, 1e-3);
  EXPECT_TRUE(j["report"].contains("witness"));
  EXPECT_TRUE(j["report"].contains("iterations"));

  Result d = run("distortion --winner 0 --candidates " + c + " --profile " + sym + " --epsilon 1e-8");
  ASSERT_EQ(d.status, 0);
  EXPECT_NEAR(d.parsed()["report"]["value"].get<double>(), 3.0, 1e-3);

  Result inf = run("distortion --winner 1 --candidates " + c + " --profile " + file("one2.jsonl", "{\"ranking\":[0,1]}\n"));
  ASSERT_EQ(inf.status, 0);
  EXPECT_EQ(inf.parsed()["report"]["value"], "inf");
}

TEST_F(Cli, EmpiricalZeroWelfareIsInf) {
  const auto u = file("u.csv", "c0,c1\n1,0\n1,0\n");
  Result r = run("empirical --winner 1 --utilities " + u);
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(r.parsed()["value"], "inf");
  EXPECT_TRUE(r.parsed().contains("note"));
  Result ok = run("empirical --lottery " + file("l.json", "[0.5,0.5]") + " --utilities " + u);
  ASSERT_EQ(ok.status, 0);
  EXPECT_NEAR(ok.parsed()["value"].get<double>(), 2.0, 1e-12);
}

TEST_F(Cli, GenValidateIngest) {
  const auto out = (dir / "inst").string();
  ASSERT_EQ(run("gen --family plurality-worst --n 10 --m 5 --d 5 --out " + out).status, 0);
  for (const char* f : {"candidates.csv", "voters.csv", "utilities.csv", "profile.jsonl", "meta.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "inst" / f)) << f;
  }
  const std::string files = " --candidates " + out + "/candidates.csv --voters " + out + "/voters.csv --utilities " +
                            out + "/utilities.csv --profile " + out + "/profile.jsonl";
  EXPECT_EQ(run("validate --check-hull" + files).status, 0);
  Result e = run("empirical --rule plurality" + files);
  ASSERT_EQ(e.status, 0);
  EXPECT_NEAR(e.parsed()["value"].get<double>(), 21.0, 1e-6);

  const auto ratings = file("r.csv", "c0,c1,c2,c3\n5,4,,1\n4,,1,1\n1,1,5,\n,1,4,5\n");
  ASSERT_EQ(run("ingest --ratings " + ratings + " --d 2 --out " + (dir / "ing").string()).status, 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "ing" / "profile.jsonl"));
  EXPECT_EQ(run("validate --candidates " + (dir / "ing" / "candidates.csv").string()).status, 0);
}

TEST_F(Cli, BenchIsReproducible) {
  const std::string args = "bench --vary d --values 2,3 --n 10 --m 5 --trials 2 --rules plurality,rd,optimal-det --seed 4 --no-timing";
  Result a = run(args + " --threads 1");
  Result b = run(args + " --threads 2");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 1 + 4 * 3);
  EXPECT_EQ(run("bench --rules borda").status, 1);
  EXPECT_EQ(run("bench --values 2,x").status, 2);
}
