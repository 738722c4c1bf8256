#include <rw/cli.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace rw;
using namespace rw::cli;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run_tool(const std::string& args) {
  std::string cmd = std::string(RW_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST(Cli, ClassifyExamples) {
  auto r = cmd_classify("2^1:2,3^1:2", 3);
  EXPECT_EQ(r.exit_code, kOk);
  EXPECT_EQ(r.output["cases"][0]["applicable"], true);
  EXPECT_EQ(r.output["default_case"], 1);
  r = cmd_classify("", 1);
  EXPECT_EQ(r.exit_code, kInputError);
  EXPECT_EQ(r.output["error"]["kind"], "parse");
  r = cmd_classify("2^1:1", 2);
  EXPECT_EQ(r.exit_code, kOk);
  EXPECT_TRUE(r.output["default_case"].is_null());
}

TEST(Cli, ConstructAndVerifyRoundTrip) {
  auto c = cmd_construct("2^2:2,3^1:3,5^1:1", 2, std::nullopt);
  ASSERT_EQ(c.exit_code, kOk);
  EXPECT_EQ(c.output["case"], 1);
  EXPECT_EQ(c.output["M"], "-1,0;0,-1");
  auto back = construction_from_json(c.output);
  EXPECT_EQ(to_json(back), c.output);
  auto v = cmd_verify(c.output);
  EXPECT_EQ(v.exit_code, kOk);
  EXPECT_EQ(v.output["r_total"], 4);
  EXPECT_EQ(v.output["representatives"].size(), 4u);
}

TEST(Cli, ConstructWithoutApplicableCase) {
  auto c = cmd_construct("2^1:1", 2, std::nullopt);
  EXPECT_EQ(c.exit_code, kInputError);
  c = cmd_construct("2^1:1", 2, 2);
  EXPECT_EQ(c.exit_code, kInputError);
  EXPECT_EQ(c.output["error"]["stage"], "construct");
}

TEST(Cli, VerifyRejectsCorruptedConstruction) {
  auto c = cmd_construct("5^1:1", 2, 1).output;
  auto bad = c;
  bad["M"] = "2,0;0,1";
  auto v = cmd_verify(bad);
  EXPECT_EQ(v.exit_code, kInputError);
  EXPECT_EQ(v.output["error"]["kind"], "validation");
  bad = c;
  bad["F"][0]["matrix"] = "0";
  EXPECT_EQ(cmd_verify(bad).exit_code, kInputError);
  bad = c;
  bad.erase("group");
  EXPECT_EQ(cmd_verify(bad).exit_code, kInputError);
  bad = c;
  bad["M"] = "1,0;0,1";  // unimodular but R(phi-bar) infinite: verdict mismatch
  auto mismatch = cmd_verify(bad);
  EXPECT_EQ(mismatch.exit_code, kAssertionFailure);
  EXPECT_EQ(mismatch.output["r_total"], "infinite");
}

TEST(Cli, ReportExamples) {
  ReportOptions o;
  o.group = "5^1:1";
  o.k = 1;
  o.case_no = 1;
  o.ns = {3};
  auto r = cmd_report(o);
  ASSERT_EQ(r.exit_code, kOk) << r.output.dump(2);
  EXPECT_EQ(r.output["verification"]["r_total"], 2);
  EXPECT_EQ(r.output["oracle"][0]["agree"], true);
  EXPECT_EQ(r.output["oracle"][0]["counts"]["union_find"], 1);

  o.group = "7^1:1";
  o.k = 2;
  o.case_no = 2;
  o.ns = {2};
  r = cmd_report(o);
  ASSERT_EQ(r.exit_code, kOk);
  EXPECT_EQ(r.output["verification"]["r_total"], 3);
}

TEST(Cli, ReportIsDeterministic) {
  ReportOptions o;
  o.group = "2^1:2,3^1:2";
  o.k = 1;
  o.ns = {2, 3};
  o.seed = 7;
  EXPECT_EQ(cmd_report(o).output.dump(), cmd_report(o).output.dump());
}

TEST(Cli, OracleCommand) {
  OracleOptions o;
  o.group = "2^1:1";
  o.k = 1;
  o.n = 2;
  o.psi_identity = true;
  auto r = cmd_oracle(o);
  EXPECT_EQ(r.exit_code, kOk);
  EXPECT_EQ(r.output["counts"]["burnside"], 5);
  EXPECT_EQ(r.output["pullback"]["verdict"], "inconclusive");
  EXPECT_TRUE(r.output.contains("timing_ms"));
  o.group = "5^1:1";
  o.k = 2;
  o.n = 4;
  o.psi_identity = false;
  EXPECT_EQ(cmd_oracle(o).exit_code, kResourceCap);
}

TEST(Cli, BinaryExitCodes) {
  EXPECT_EQ(run_tool("classify --group 2^1:2 --k 1").code, 0);
  EXPECT_EQ(run_tool("classify --group 2^x --k 1").code, 2);
  EXPECT_EQ(run_tool("construct --group 2^1:1 --k 2").code, 2);
  EXPECT_EQ(run_tool("oracle --group 5^1:1 --k 2 --n 4").code, 3);
  EXPECT_EQ(run_tool("bogus").code, 2);
  auto rep = run_tool("report --group 5^1:1 --k 1 --case 1 --n 3");
  EXPECT_EQ(rep.code, 0);
  EXPECT_EQ(nlohmann::json::parse(rep.out)["verification"]["r_total"], 2);
  EXPECT_EQ(run_tool("report --group 5^1:1 --k 1 --case 1 --n 3").out, rep.out);
  EXPECT_EQ(run_tool("report --group 5^1:1 --k 1 --quiet").out, "");
}

TEST(Cli, BinaryVerifyFromFile) {
  auto dir = std::filesystem::temp_directory_path() / "rw_cli_test";
  std::filesystem::create_directories(dir);
  auto path = (dir / "c.json").string();
  EXPECT_EQ(run_tool("construct --group 7^1:1 --k 2 --case 2 --quiet --json-out " + path).code, 0);
  auto v = run_tool("verify --construction " + path);
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(nlohmann::json::parse(v.out)["r_total"], 3);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_EQ(run_tool("verify --construction " + (dir / "bad.json").string()).code, 2);
  std::filesystem::remove_all(dir);
}
