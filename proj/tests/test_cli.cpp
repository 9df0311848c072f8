#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "sparsenet/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string err;
};

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "sparsenet_test_cli";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Run run_cli(const std::string& args) {
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string("\"") + SPARSENET_CLI + "\" " + args + " > /dev/null 2> \"" + err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = slurp(err);
  return r;
}

std::size_t line_count(const fs::path& path) {
  std::ifstream in(path);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

// Small 1D dataset written by the generator subcommand.
fs::path tiny_data() {
  const fs::path path = work_dir() / "tiny.csv";
  const Run r = run_cli("generate-data --target gauss_sin --sampling grid_1d --size 60 --out \"" + path.string() + "\"");
  REQUIRE(r.status == 0);
  return path;
}

std::string train_args(const fs::path& data, const fs::path& out) {
  return "train --data \"" + data.string() + "\" --out \"" + out.string() +
         "\" --penalty log --gamma 1 --alpha 1e-3 --T 3 --n-trial 8 --seed 4";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("train writes its artifacts") {
    const fs::path data = tiny_data();
    const fs::path out = work_dir() / "train_out";
    fs::remove_all(out);
    const Run r = run_cli(train_args(data, out));
    CHECK(r.status == 0);
    CHECK(fs::exists(out / "network.csv"));
    CHECK(fs::exists(out / "predictions.csv"));
    CHECK(fs::exists(out / "network.json"));
    CHECK(fs::exists(out / "report.json"));
    CHECK(line_count(out / "predictions.csv") == 61);
    const auto report = sparsenet::read_json_file((out / "report.json").string());
    CHECK(report.at("K") == 60);
    CHECK(report.at("config").at("algorithm").at("penalty").at("kind") == "log");
  }

  TEST_CASE("train is deterministic") {
    const fs::path data = tiny_data();
    const fs::path a = work_dir() / "det_a";
    const fs::path b = work_dir() / "det_b";
    REQUIRE(run_cli(train_args(data, a)).status == 0);
    REQUIRE(run_cli(train_args(data, b)).status == 0);
    CHECK(slurp(a / "network.csv") == slurp(b / "network.csv"));
  }

  TEST_CASE("a missing data file is reported by path") {
    const fs::path missing = work_dir() / "no_such_file.csv";
    const Run r = run_cli("train --data \"" + missing.string() + "\" --out \"" + (work_dir() / "x").string() + "\"");
    CHECK(r.status != 0);
    CHECK(r.err.find(missing.string()) != std::string::npos);
  }

  TEST_CASE("unknown preset and bad arguments fail") {
    CHECK(run_cli("experiment no-such-preset --out \"" + (work_dir() / "exp").string() + "\"").status != 0);
    CHECK(run_cli("train --bogus-flag").status != 0);
    CHECK(run_cli("").status != 0);
    const fs::path data = tiny_data();
    const Run r = run_cli("train --data \"" + data.string() + "\" --out \"" + (work_dir() / "y").string() +
                          "\" --penalty log");
    CHECK(r.status != 0);
    CHECK(r.err.find("--gamma") != std::string::npos);
  }

  TEST_CASE("check rejects a random network") {
    const fs::path data = tiny_data();
    const fs::path net = work_dir() / "random_net.csv";
    std::ofstream(net) << "a_1,b,c\n0.6,0.8,2.5\n-0.8,0.6,-1.25\n";
    const Run bad = run_cli("check --network \"" + net.string() + "\" --data \"" + data.string() +
                            "\" --alpha 1e-3 --samples 500");
    CHECK(bad.status == 1);

    const fs::path out = work_dir() / "check_out";
    REQUIRE(run_cli(train_args(data, out)).status == 0);
    const Run trained = run_cli("check --network \"" + (out / "network.csv").string() + "\" --data \"" +
                                data.string() + "\" --alpha 1e-3 --penalty log --gamma 1 --samples 2000");
    CHECK(trained.status == 0);
  }

  TEST_CASE("export-dual in one dimension") {
    const fs::path data = tiny_data();
    const fs::path out = work_dir() / "train_for_dual";
    REQUIRE(run_cli(train_args(data, out)).status == 0);
    const fs::path dual = work_dir() / "dual";
    const Run r = run_cli("export-dual --network \"" + (out / "network.csv").string() + "\" --data \"" +
                          data.string() + "\" --out \"" + dual.string() + "\"");
    CHECK(r.status == 0);
    CHECK(line_count(dual / "dual.csv") == 361);
    CHECK(line_count(dual / "nodes.csv") == line_count(out / "network.csv"));
  }
}
