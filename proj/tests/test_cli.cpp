#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = DRONECELL_CLI;
const std::string kConfig = DRONECELL_SAMPLE_CONFIG;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dronecell_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(Cli, SweepWritesCsv) {
  const fs::path dir = temp_dir("sweep");
  const fs::path out = dir / "a.csv";
  ASSERT_EQ(run("sweep --config " + kConfig + " --metric tbs_ul --metric asd_dl --from 200 --to 1000 "
                "--step 25 --no-timing --out " + out.string()),
            0);
  const std::string csv = slurp(out);
  EXPECT_EQ(count_lines(csv), 1 + 33 * 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "h_m,d_m,env,metric,analytic,analytic_err,mc_mean,mc_ci95,regime,wall_ms");
}

TEST(Cli, DeterministicBytesWithSeed) {
  const fs::path dir = temp_dir("det");
  const std::string args = "sweep --config " + kConfig +
                           " --metric tsue_dl --from 300 --to 500 --step 100 --mc-trials 5000 "
                           "--seed 7 --no-timing --out ";
  ASSERT_EQ(run(args + (dir / "1.csv").string()), 0);
  ASSERT_EQ(run(args + (dir / "2.csv").string() + " --workers 2"), 0);
  EXPECT_EQ(slurp(dir / "1.csv"), slurp(dir / "2.csv"));
  EXPECT_EQ(count_lines(slurp(dir / "1.csv")), 4);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path dir = temp_dir("cfg");
  {
    std::ofstream f(dir / "broken.cfg");
    f << "r1_m = 500\n";
  }
  EXPECT_EQ(run("sweep --config " + (dir / "broken.cfg").string()), 2);
  EXPECT_EQ(run("sweep --config " + (dir / "nope.cfg").string()), 2);
  EXPECT_EQ(run("sweep --config " + kConfig + " --metric bogus"), 2);
  EXPECT_EQ(run("sweep --config " + kConfig + " --env moon"), 2);
  EXPECT_EQ(run("sweep --config " + kConfig + " --from 500 --to 100"), 2);
  EXPECT_EQ(run("sweep --config " + kConfig + " --var d --from 300 --to 600 --step 100"), 2);
  EXPECT_EQ(run("sweep"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, QuadratureFailureExitsThreeWithPartialCsv) {
  const fs::path dir = temp_dir("quad");
  const fs::path out = dir / "q.csv";
  // An unreachable tolerance forces the adaptive rule to give up.
  EXPECT_EQ(run("sweep --config " + kConfig + " --metric tsue_dl --from 300 --to 400 --step 100 "
                "--rel-tol 1e-300 --abs-tol 1e-300 --no-timing --out " + out.string()),
            3);
  const std::string csv = slurp(out);
  EXPECT_EQ(count_lines(csv), 3);
  EXPECT_NE(csv.find(",NA,NA,NA,NA,"), std::string::npos);
}

TEST(Cli, OptimizeReportsHeights) {
  const fs::path dir = temp_dir("opt");
  const fs::path out = dir / "o.csv";
  ASSERT_EQ(run("optimize --config " + kConfig + " --metric tbs_ul --out " + out.string()), 0);
  const std::string csv = slurp(out);
  EXPECT_NE(csv.find("tbs_ul,urban,200,200,"), std::string::npos) << csv;
}

TEST(Cli, PlotDataFanOut) {
  const fs::path dir = temp_dir("plot");
  ASSERT_EQ(run("sweep --config " + kConfig + " --from 200 --to 1000 --step 400 --no-timing --out " +
                (dir / "s.csv").string()),
            0);
  ASSERT_EQ(run("plotdata --csv " + (dir / "s.csv").string() + " --out " + (dir / "p").string()), 0);
  int dat = 0;
  for (const auto& e : fs::directory_iterator(dir / "p")) dat += e.path().extension() == ".dat";
  EXPECT_EQ(dat, 4);
  EXPECT_EQ(count_lines(slurp(dir / "p" / "manifest.txt")), 5);
  { std::ofstream f(dir / "empty.csv"); }
  EXPECT_EQ(run("plotdata --csv " + (dir / "empty.csv").string() + " --out " + (dir / "q").string()), 2);
}

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(run("validate --metric tsue_dl --from 400 --to 600 --step 200 --mc-trials 200000"), 0);
  // With a zero tolerance and few trials the simulation cannot match.
  EXPECT_EQ(run("validate --metric tsue_dl --from 400 --to 600 --step 200 --mc-trials 100 --tol 0"), 1);
}
