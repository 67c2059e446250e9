#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("mvdisp_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& tag = "run") {
  const fs::path err = scratch_dir() / (tag + ".err");
  const std::string cmd = std::string(MVDISP_CLI) + " " + args + " > " + (scratch_dir() / (tag + ".out")).string() +
                          " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write(const std::string& name, const std::string& content) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("ats output is identical across thread counts") {
    const fs::path a = scratch_dir() / "a.json", b = scratch_dir() / "b.json";
    const std::string base = "ats --chart otcc --p 2 --n 10 --delta 1.4 --reps 400 --seed 3 ";
    REQUIRE(run(base + "--threads 1 --out " + a.string()) == 0);
    REQUIRE(run(base + "--threads 4 --out " + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).find("\"ats\"") != std::string::npos);
    // The resolved configuration, including limits, goes to stderr.
    CHECK(slurp(scratch_dir() / "run.err").find("resolved_ucl") != std::string::npos);
  }

  TEST_CASE("exit codes distinguish error classes") {
    CHECK(run("ats --chart nope --p 2") == 2);
    CHECK(run("ats --chart gvc --p 2 --n 2 --L 3") == 2);
    CHECK(run("ats --bogus-flag") == 2);
    CHECK(run("calibrate --chart mewms --p 2 --target 10000000 --reps 2") == 4);

    const fs::path model = write("model.json", R"({"p": 2, "mu0": [0, 0], "sigma0": [[1, 0], [0, 1]]})");
    const fs::path bad = write("bad.csv", "t,x1,x2\n1,0.1,0.2\n2,0.3\n");
    CHECK(run("monitor " + bad.string() + " --model " + model.string() + " --chart ntcc --n 5", "bad") == 3);
    CHECK(slurp(scratch_dir() / "bad.err").find("bad.csv:3") != std::string::npos);
    CHECK(run("monitor " + bad.string() + " --model /nonexistent.json --chart ntcc --n 5") == 3);
  }

  TEST_CASE("monitor on constant data flags every NTCC window") {
    std::string csv = "t,x1,x2\n";
    for (int t = 1; t <= 20; ++t) csv += std::to_string(t) + ",1.5,-2\n";
    const fs::path data = write("const.csv", csv);
    const fs::path model = write("model2.json", R"({"p": 2, "mu0": [0, 0], "sigma0": [[1, 0], [0, 1]]})");
    const fs::path out = scratch_dir() / "const_out.csv";
    REQUIRE(run("monitor " + data.string() + " --model " + model.string() + " --chart ntcc --n 5 --out " +
                out.string()) == 0);
    std::istringstream in(slurp(out));
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,statistic,lcl,ucl,signal");
    int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      CHECK(line.substr(line.size() - 2) == ",1");
    }
    CHECK(rows == 4);
  }

  TEST_CASE("monitor state save and resume matches a single run") {
    std::string head = "t,x1,x2\n", tail = "t,x1,x2\n", all = "t,x1,x2\n";
    for (int t = 1; t <= 30; ++t) {
      const std::string row = std::to_string(t) + "," + std::to_string(0.1 * (t % 7)) + "," +
                              std::to_string(-0.3 * (t % 5)) + "\n";
      (t <= 13 ? head : tail) += row;
      all += row;
    }
    const fs::path model = write("model3.json", R"({"p": 2, "mu0": [0.2, -0.5], "sigma0": [[0.5, 0.1], [0.1, 0.8]]})");
    const fs::path st = scratch_dir() / "state.json";
    const fs::path o1 = scratch_dir() / "o1.csv", o2 = scratch_dir() / "o2.csv", o3 = scratch_dir() / "o3.csv";
    const std::string chart = " --chart mewms --omega 0.2 --model " + model.string();
    REQUIRE(run("monitor " + write("all.csv", all).string() + chart + " --out " + o1.string()) == 0);
    REQUIRE(run("monitor " + write("head.csv", head).string() + chart + " --state-out " + st.string() + " --out " +
                o2.string()) == 0);
    REQUIRE(run("monitor " + write("tail.csv", tail).string() + " --model " + model.string() + " --state-in " +
                st.string() + " --out " + o3.string()) == 0);
    const std::string joined = slurp(o2) + slurp(o3).substr(std::string("t,statistic,lcl,ucl,signal\n").size());
    CHECK(joined == slurp(o1));
  }

  TEST_CASE("phase1 on the shipped fixture") {
    const fs::path out = scratch_dir() / "model_fx.json";
    REQUIRE(run(std::string("phase1 ") + MVDISP_SOURCE_DIR + "/data/phase1_fixture.csv --out " + out.string()) == 0);
    const std::string s = slurp(out);
    CHECK(s.find("4.0495") != std::string::npos);
    CHECK(s.find("7.0886") != std::string::npos);
  }
}
