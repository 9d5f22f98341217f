#ifdef BPPLAB_HAVE_CLI

#include "cli/commands.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace bpplab::cli;

namespace {

RunOutcome run_command(const std::string& command, nlohmann::json params,
                       std::uint64_t seed = 0) {
  RunConfig c;
  c.command = command;
  c.parameters = std::move(params);
  c.seed = seed;
  return run(c);
}

}  // namespace

TEST(Cli, BarrierExample) {
  const auto r = run_command("barrier", {{"n", 2}, {"R", 2.0}, {"weight", "constant:1"}, {"m", 1}});
  EXPECT_EQ(r.exit_code, 0);
  const auto& b = r.report.at("result").at("barrier");
  EXPECT_EQ(b.at("k").get<double>(), 11.0);
  const double eps = b.at("eps").get<double>();
  EXPECT_NEAR(b.at("f_eps").get<double>(), eps + 5.5 * eps * eps, 1e-15);
  EXPECT_NEAR(b.at("normal_derivative").get<double>(), -1.0 / b.at("f_eps").get<double>(),
              1e-12);
}

TEST(Cli, OrderExample) {
  const auto r = run_command("order", {{"kappa", 0.8}, {"C", 100}, {"n", 2}});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report.at("result").at("m_star").get<int>(), 26);
  const auto t = run_command("order", {{"theta", 1.5707963267948966}, {"C", 100}, {"n", 2}});
  EXPECT_EQ(t.report.at("result").at("m_star").get<int>(), 26);
}

TEST(Cli, CaseExitCodes) {
  EXPECT_EQ(run_command("case", {{"id", "ex2_12"}}).exit_code, 0);
  EXPECT_THROW(run_command("case", {{"id", "ex0"}}), bpplab::ParseError);
}

TEST(Cli, VerificationFailureExitsOne) {
  const auto r = run_command(
      "verify-operator", {{"weight", "power:2,0.5"},
                          {"coeffs", {{"family", "singular_c"}, {"power", 1.5}}},
                          {"samples", 2000}});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.report.at("status"), "fail");
}

TEST(Cli, UsageErrorsExitTwo) {
  std::ostringstream out, err;
  RunConfig c;
  c.command = "barrier";
  c.parameters = {{"bogus", 1}};
  EXPECT_EQ(execute(c, out, err), 2);
  EXPECT_NE(err.str().find("bogus"), std::string::npos);
  c.command = "nonsense";
  c.parameters = nlohmann::json::object();
  EXPECT_EQ(execute(c, out, err), 2);
  EXPECT_THROW(RunConfig::from_json({{"command", "case"}, {"colour", "red"}}), UsageError);
}

TEST(Cli, OutwardBallExpectations) {
  EXPECT_EQ(run_command("outward-ball", {{"scene", "axis_cross"}, {"expect", "falsified"}})
                .exit_code,
            0);
  EXPECT_EQ(run_command("outward-ball", {{"scene", "axis_cross"}, {"expect", "found"}}).exit_code,
            1);
}

TEST(Cli, FiniteDifferenceCommands) {
  EXPECT_EQ(run_command("csmp", nlohmann::json::object()).exit_code, 0);
  const auto h = run_command("hopf", nlohmann::json::object());
  EXPECT_EQ(h.exit_code, 0);
  EXPECT_TRUE(h.report.at("result").at("hopf").at("positive").get<bool>());
}

TEST(Cli, ReportsAreReproducible) {
  const nlohmann::json p = {{"samples", 3000}};
  EXPECT_EQ(render_report(run_command("barrier", p, 5).report),
            render_report(run_command("barrier", p, 5).report));
  EXPECT_NE(render_report(run_command("barrier", p, 5).report),
            render_report(run_command("barrier", p, 6).report));
}

TEST(Cli, NumberLists) {
  EXPECT_EQ(parse_number_list("0.1,0.05, 0.025"), (std::vector<double>{0.1, 0.05, 0.025}));
  EXPECT_THROW(parse_number_list("0.1,x"), UsageError);
  EXPECT_EQ(json_or_file("{\"a\": 1}").at("a"), 1);
  EXPECT_EQ(json_or_file("laplacian"), "laplacian");
}

#endif
