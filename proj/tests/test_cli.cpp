#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "itsurv/serialize.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = ITSURV_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("itsurv_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli end-to-end: simulate, fit, predict, contrast, bootstrap") {
  TempDir tmp;
  const fs::path data = tmp.path / "data.csv";
  const fs::path fit_dir = tmp.path / "fit";
  const fs::path pred_dir = tmp.path / "pred";

  // Emit one simulated dataset (small smoke scenario).
  REQUIRE(run("simulate --scenario 1 --runs 2 --replicates 5 --seed 7 --out " +
              (tmp.path / "sim").string() + " --emit-data " + data.string()) == 0);
  REQUIRE(fs::exists(data));
  REQUIRE(fs::exists(tmp.path / "sim" / "scenario1.csv"));
  REQUIRE(fs::exists(tmp.path / "sim" / "simulation_summary.json"));

  // Fit on the emitted dataset.
  REQUIRE(run("fit --data " + data.string() +
              " --schema covariates=L --seed 3 --out " + fit_dir.string()) == 0);
  REQUIRE(fs::exists(fit_dir / "fit.json"));
  REQUIRE(fs::exists(fit_dir / "weights_report.csv"));
  REQUIRE(fs::exists(fit_dir / "manifest.json"));

  const itsurv::FitDocument doc =
      itsurv::read_fit_document(slurp(fit_dir / "fit.json"));
  REQUIRE(doc.strata.size() == 1);
  CHECK(doc.strata[0].diagnostics.converged);

  // Predict curves, a theta grid and interval mortalities.
  REQUIRE(run("predict --fit " + (fit_dir / "fit.json").string() +
              " --a-list 0,8,24,inf --t0 52 --interval 0:4 --interval 8:12" +
              " --theta-grid 0:1:20 --out " + pred_dir.string()) == 0);
  const auto curves_text = slurp(pred_dir / "curves.csv");
  std::stringstream curves_ss(curves_text);
  const auto curves = itsurv::read_curve_table(curves_ss);
  REQUIRE(curves.size() == 4);  // one block per requested initiation time
  CHECK(std::isinf(curves.back().a));
  for (const auto& c : curves) {
    REQUIRE(!c.survival.empty());
    CHECK(c.survival.front() <= 1.0);
    for (std::size_t k = 1; k < c.survival.size(); ++k) {
      CHECK(c.survival[k] <= c.survival[k - 1]);
      CHECK(c.survival[k] > 0.0);
    }
  }
  REQUIRE(fs::exists(pred_dir / "theta.csv"));
  REQUIRE(fs::exists(pred_dir / "intervals.csv"));
  const std::string intervals = slurp(pred_dir / "intervals.csv");
  CHECK(intervals.find("t1,t2,t0,mortality") == 0);

  // Contrast two regimes.
  REQUIRE(run("contrast --fit " + (fit_dir / "fit.json").string() +
              " --a 0 --a-prime 8 --t0 52 --out " + pred_dir.string()) == 0);
  REQUIRE(fs::exists(pred_dir / "contrast.csv"));

  // Bootstrap a couple of functionals with a tiny replicate count.
  REQUIRE(run("bootstrap --data " + data.string() +
              " --schema covariates=L --replicates 8 --seed 5 --a-list 0,8" +
              " --t0 52 --out " + (tmp.path / "boot").string()) == 0);
  const std::string boot = slurp(tmp.path / "boot" / "bootstrap.csv");
  CHECK(boot.find("functional,estimate,se,ci_lo,ci_hi,n_failed") == 0);
}

TEST_CASE("cli reads curve tables back exactly") {
  TempDir tmp;
  const fs::path data = tmp.path / "d.csv";
  REQUIRE(run("simulate --scenario 1 --runs 1 --replicates 2 --seed 11 --out " +
              (tmp.path / "s").string() + " --emit-data " + data.string()) == 0);
  REQUIRE(run("fit --data " + data.string() + " --schema covariates=L --out " +
              (tmp.path / "f").string()) == 0);
  REQUIRE(run("predict --fit " + (tmp.path / "f" / "fit.json").string() +
              " --a-list 4 --out " + (tmp.path / "p1").string()) == 0);
  REQUIRE(run("predict --fit " + (tmp.path / "f" / "fit.json").string() +
              " --a-list 4 --out " + (tmp.path / "p2").string()) == 0);
  CHECK(slurp(tmp.path / "p1" / "curves.csv") == slurp(tmp.path / "p2" / "curves.csv"));
}

TEST_CASE("cli exit codes") {
  TempDir tmp;
  // Missing data file: configuration/IO error.
  CHECK(run("fit --data " + (tmp.path / "missing.csv").string() + " --out " +
            tmp.path.string()) == 2);
  // Invalid scenario name.
  CHECK(run("simulate --scenario 9 --runs 1 --out " + tmp.path.string()) == 2);
  // Unknown flag.
  CHECK(run("fit --definitely-not-a-flag") == 2);
}

TEST_CASE("cli simulate is deterministic for a fixed seed") {
  TempDir tmp;
  REQUIRE(run("simulate --scenario 1 --runs 3 --replicates 4 --seed 99 --out " +
              (tmp.path / "a").string()) == 0);
  REQUIRE(run("simulate --scenario 1 --runs 3 --replicates 4 --seed 99 --out " +
              (tmp.path / "b").string()) == 0);
  CHECK(slurp(tmp.path / "a" / "scenario1.csv") ==
        slurp(tmp.path / "b" / "scenario1.csv"));
  CHECK(slurp(tmp.path / "a" / "simulation_summary.json") ==
        slurp(tmp.path / "b" / "simulation_summary.json"));
}

TEST_CASE("cli stratified fit emits one block per stratum") {
  TempDir tmp;
  // Build a small stratified dataset by hand.
  const fs::path data = tmp.path / "strat.csv";
  {
    std::ofstream out(data);
    out << "id,start,stop,initiation,initiation_event,death,death_event,group\n";
    int id = 0;
    for (const char* g : {"g1", "g2", "g3"}) {
      for (int i = 0; i < 40; ++i) {
        const double ainit = 0.5 + (i % 12);
        const double death = ainit + 1.0 + (i % 23) + (g[1] - '0');
        out << "s" << id++ << ",0," << death << "," << ainit << ",1," << death
            << ",1," << g << "\n";
      }
    }
  }
  REQUIRE(run("fit --data " + data.string() +
              " --schema stratum=group --out " + (tmp.path / "f").string()) == 0);
  const itsurv::FitDocument doc =
      itsurv::read_fit_document(slurp(tmp.path / "f" / "fit.json"));
  REQUIRE(doc.strata.size() == 3);
  CHECK(doc.strata[0].stratum.has_value());
}
