#include "sysid_data.hpp"

#include "hvac/config.hpp"
#include "hvac/model_io.hpp"
#include "hvac/trace.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace hvac;

namespace {

const std::string kCli = HVAC_CLI_PATH;
const std::string kReference = std::string(HVAC_FIXTURE_DIR) + "/reference/config.json";

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("hvac_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string &args) const {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = kCli + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  std::string path(const std::string &name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string day_file(const std::string &dir, const std::string &ctrl, int d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_day%03d.csv", d);
  return dir + "/" + ctrl + buf;
}

double mean_energy(const std::string &dir, const std::string &ctrl, int days) {
  double s = 0.0;
  for (int d = 0; d < days; ++d)
    s += read_trace_csv(day_file(dir, ctrl, d)).total_energy();
  return s / days;
}

// One-zone config whose plant is exactly the cycling model with weak priors.
Json cycling_config() {
  using namespace hvac::testing;
  const auto m = cycling_model();
  const auto v = cycling_vav();
  Json zone{{"a", m.zones[0].a},
            {"b", m.zones[0].b},
            {"c", m.zones[0].c},
            {"d", 0.0},
            {"alpha", v.alpha},
            {"omega", v.omega},
            {"setpoint", v.setpoint},
            {"band", v.band},
            {"flow_pi", {{"kp", v.omega - v.alpha}, {"ki", 0.0}}},
            {"reheat_pi", {{"kp", 100.0}, {"ki", 0.0}}},
            {"load", {{"base", m.q[0]}}},
            {"initial_offset", 1.5}};
  Json plant{{"anchor_sats", three_sats()},
             {"zones", Json::array({zone})},
             {"oat", {{"mean", 80.0}, {"amplitude", 5.0}}},
             {"energy", {{"kappa1", 1e-9}, {"kappa2", 1e-3}, {"kappa3", 1e-2}}},
             {"noise_sigma", 0.0}};
  const auto p = weak_prior();
  Json prior{{"a_mean", p.a_mean}, {"a_var", p.a_var}, {"b_mean", p.b_mean},
             {"b_var", p.b_var},   {"c_mean", p.c_mean}, {"c_var", p.c_var}};
  return Json{{"modes", three_sats()}, {"prior", prior}, {"seed", 5}, {"plant", plant}};
}

} // namespace

TEST_F(Cli, ScheduleListsTwentyFourCommands) {
  const auto r = run("schedule --date 2024-07-01");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line))
    lines.push_back(line);
  ASSERT_EQ(lines.size(), 26u);
  EXPECT_EQ(lines[0].rfind("# manifest: ", 0), 0u);
  EXPECT_EQ(lines[1], "timestamp,mode,SAT");
  EXPECT_EQ(lines[2], "2024-07-01T00:00:00Z,1,52");
  EXPECT_EQ(lines[10], "2024-07-01T02:00:00Z,2,58");
  EXPECT_EQ(lines[25], "2024-07-01T05:45:00Z,3,62");
}

TEST_F(Cli, ScheduleRejectsUnalignedDwell) {
  EXPECT_EQ(run("schedule --dwell 20").code, 2);
}

TEST_F(Cli, ParseErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("simulate --days 1").code, 2); // missing --config
  EXPECT_EQ(run("simulate -c " + kReference + " --controller bogus").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, SimulateZeroDaysWritesNothing) {
  const auto r = run("simulate -c " + kReference + " --days 0 -o " + path("out"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(fs::exists(path("out")));
}

TEST_F(Cli, SameSeedGivesByteIdenticalTraces) {
  ASSERT_EQ(run("simulate -c " + kReference + " --days 1 --seed 9 -o " + path("a")).code, 0);
  ASSERT_EQ(run("simulate -c " + kReference + " --days 1 --seed 9 -o " + path("b")).code, 0);
  ASSERT_EQ(run("simulate -c " + kReference + " --days 1 --seed 10 -o " + path("c")).code, 0);
  const auto a = slurp(day_file(path("a"), "default", 0));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(day_file(path("b"), "default", 0)));
  EXPECT_NE(a, slurp(day_file(path("c"), "default", 0)));
  EXPECT_NE(a.find("\"config_hash\""), std::string::npos);
}

TEST_F(Cli, LbmpcNeedsModelFile) {
  auto r = run("simulate -c " + kReference + " --controller lbmpc --days 1 -o " + path("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--model"), std::string::npos) << r.err;
  r = run("simulate -c " + kReference + " --controller lbmpc --days 1 -m " + path("none.json") +
          " -o " + path("x"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("not found"), std::string::npos) << r.err;
}

TEST_F(Cli, IdentifyRecoversCyclingPlant) {
  write_json_file(path("cfg.json"), cycling_config());
  const std::string cfg = " -c " + path("cfg.json");
  ASSERT_EQ(run("simulate" + cfg + " --controller experiment --days 1 -o " + path("exp")).code, 0);
  const auto r = run("identify" + cfg + " -t " + day_file(path("exp"), "experiment", 0) + " -o " +
                     path("model.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto model = load_model(path("model.json"));
  const auto truth = hvac::testing::cycling_model();
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_NEAR(model.zones[0].a[m], truth.zones[0].a[m], 1e-6);
    EXPECT_NEAR(model.zones[0].b[m], truth.zones[0].b[m], 1e-6);
    EXPECT_NEAR(model.zones[0].c[m], truth.zones[0].c[m], 1e-6);
  }
  EXPECT_NEAR(model.q[0], truth.q[0], 1e-6);
  EXPECT_TRUE(read_json_file(path("model.json")).contains("manifest"));
}

TEST_F(Cli, IdentifyReportsMissingColumn) {
  write_json_file(path("cfg.json"), cycling_config());
  const std::string cfg = " -c " + path("cfg.json");
  ASSERT_EQ(run("simulate" + cfg + " --controller experiment --days 1 -o " + path("exp")).code, 0);
  std::string csv = slurp(day_file(path("exp"), "experiment", 0));
  const auto pos = csv.find(",R_1");
  ASSERT_NE(pos, std::string::npos);
  csv.replace(pos, 4, ",X_1");
  std::ofstream(path("bad.csv")) << csv;
  const auto r = run("identify" + cfg + " -t " + path("bad.csv") + " -o " + path("m.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("R_1"), std::string::npos) << r.err;
}

TEST_F(Cli, IdentifyRejectsThirtyMinuteGaps) {
  write_json_file(path("cfg.json"), cycling_config());
  std::ofstream f(path("gappy.csv"));
  f << "timestamp,T_o,SAT,mode,T_1,F_1,R_1,S_1,E_kWh\n";
  for (int k = 0; k < 40; ++k) {
    const auto t = parse_date("2024-07-01") + std::chrono::minutes{30 * k};
    f << format_timestamp(t) << ",80,52,1,72,300,0,72,1\n";
  }
  f.close();
  const auto r = run("identify -c " + path("cfg.json") + " -t " + path("gappy.csv") + " -o " +
                     path("m.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("15 minutes"), std::string::npos) << r.err;
}

TEST_F(Cli, LbmpcUsesLessEnergyThanDefault) {
  const std::string cfg = " -c " + kReference;
  ASSERT_EQ(run("simulate" + cfg + " --controller experiment --days 1 -o " + path("exp")).code, 0);
  ASSERT_EQ(run("identify" + cfg + " -t " + day_file(path("exp"), "experiment", 0) + " -o " +
                path("model.json"))
                .code,
            0);
  ASSERT_EQ(run("simulate" + cfg + " --days 3 -o " + path("def")).code, 0);
  const auto r = run("simulate" + cfg + " --controller lbmpc --days 3 -m " + path("model.json") +
                     " -o " + path("mpc"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(mean_energy(path("mpc"), "lbmpc", 3), mean_energy(path("def"), "default", 3));
}

TEST_F(Cli, CompareIdenticalSets) {
  ASSERT_EQ(run("simulate -c " + kReference + " --days 2 -o " + path("d")).code, 0);
  const std::string files = day_file(path("d"), "default", 0) + " " + day_file(path("d"), "default", 1);
  const auto r = run("compare -a " + files + " -b " + files + " --resamples 1000 -o " + path("cmp"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rep = read_json_file(path("cmp") + "/report.json");
  EXPECT_EQ(rep["energy"]["delta"].get<double>(), 0.0);
  EXPECT_GT(rep["energy"]["p_value"].get<double>(), 0.5);
  EXPECT_TRUE(rep.contains("manifest"));
  const auto curve = slurp(path("cmp") + "/energy_curve.csv");
  EXPECT_EQ(curve.rfind("T_o,A,B,count_A,count_B\n", 0), 0u);
}

TEST_F(Cli, CompareDisjointOatRangesFails) {
  ASSERT_EQ(run("simulate -c " + kReference + " --days 1 -o " + path("d")).code, 0);
  auto t = read_trace_csv(day_file(path("d"), "default", 0));
  for (auto &row : t.rows)
    row.oat += 60.0;
  write_trace_csv(path("hot.csv"), t);
  const auto r = run("compare -a " + day_file(path("d"), "default", 0) + " -b " + path("hot.csv") +
                     " --resamples 1000 -o " + path("cmp"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("no overlapping OAT support"), std::string::npos) << r.err;
}

TEST_F(Cli, PipelineReproducesEnergySavings) {
  const auto r = run("pipeline -c " + kReference + " -o " + path("run"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json rep = read_json_file(path("run") + "/report.json");
  EXPECT_LT(rep["energy"]["delta"].get<double>(), 0.0);
  EXPECT_LT(rep["energy"]["p_value"].get<double>(), 0.05);
  EXPECT_TRUE(fs::exists(path("run") + "/model.json"));
  EXPECT_TRUE(fs::exists(day_file(path("run"), "lbmpc", 7)));
  EXPECT_TRUE(fs::exists(day_file(path("run"), "default", 21)));
}

TEST_F(Cli, ControlStepRoundTripsPlannerState) {
  const std::string cfg = " -c " + kReference;
  ASSERT_EQ(run("simulate" + cfg + " --controller experiment --days 1 -o " + path("exp")).code, 0);
  ASSERT_EQ(run("identify" + cfg + " -t " + day_file(path("exp"), "experiment", 0) + " -o " +
                path("model.json"))
                .code,
            0);
  const auto trace = read_trace_csv(day_file(path("exp"), "experiment", 0));
  Json state{{"step", 40},
             {"measured", zone_states_to_json(trace.rows[40].zones)},
             {"oat", std::vector<double>(16, 85.0)}};
  write_json_file(path("s0.json"), state);
  auto r = run("control-step" + cfg + " -m " + path("model.json") + " -s " + path("s0.json") +
               " --table -o " + path("o0.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json o0 = read_json_file(path("o0.json"));
  EXPECT_EQ(o0["plan"]["table"].size(), 81u);
  const double sat = o0["plan"]["sat"].get<double>();
  EXPECT_TRUE(sat == 52.0 || sat == 58.0 || sat == 62.0);
  EXPECT_EQ(o0["planner"]["last_step"], 40);

  state["step"] = 41;
  state["measured"] = zone_states_to_json(trace.rows[41].zones);
  state["planner"] = o0["planner"];
  write_json_file(path("s1.json"), state);
  r = run("control-step" + cfg + " -m " + path("model.json") + " -s " + path("s1.json") + " -o " +
          path("o1.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const Json o1 = read_json_file(path("o1.json"));
  // Mid-hour: the first block is pinned to the previous command.
  EXPECT_EQ(o1["plan"]["mode"], o0["plan"]["mode"]);
  EXPECT_NE(o1["planner"]["corrections"]["q_hat"][0].get<double>(), 0.0);

  state.erase("oat");
  write_json_file(path("s2.json"), state);
  EXPECT_EQ(run("control-step" + cfg + " -m " + path("model.json") + " -s " + path("s2.json")).code, 2);
}
