#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(KAHLER_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

const std::string kSmall = "--rule 8 8 8 8";

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run("--help").code == 0);
  CHECK(run("").code == 2);
  CHECK(run("toy --no-such-flag").code == 2);
  CHECK(run("--reference-table nope k3-volume " + kSmall).code == 2);
  CHECK(run("--reference-table toy_t k3-volume " + kSmall).code == 2);
  CHECK(run("--reference-file /nonexistent.json --reference-table toy_t toy").code == 2);
  CHECK(run("k3-balance --k 4").code == 2);
  CHECK(run("k3-balance --k 3 --rule 3 8 8 8").code == 2);
  CHECK(run("k3-refine --k 3 " + kSmall + " --kappa 6").code == 2);
  CHECK(run("k3-balance --k 6 " + kSmall + " --tol 1e-14 --max-steps 1").code == 3);
  CHECK(run("toy --k 7").code == 2);
}

TEST_CASE("tables are deterministic and independent of the thread count") {
  const Run a = run("--threads 1 k3-balance --k 3 " + kSmall);
  const Run b = run("--threads 3 k3-balance --k 3 " + kSmall);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("r,a_I,a_II,a_III,b_I,psi,trace,step\n", 0) == 0);
}

TEST_CASE("JSON report") {
  const Run r = run("--report - toy --variant t_nu --steps 20");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["sigma"].get<double>() == doctest::Approx(5.0 / 12.0).epsilon(1e-3));
  CHECK(j["variant"] == "t_nu");
}

TEST_CASE("side-by-side reference columns") {
  const Run r = run("--reference-table toy_t toy --steps 5");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("row,column,computed,reference,rel_diff\n1,a_0,", 0) == 0);
}

TEST_CASE("config file supplies subcommand options") {
  const auto path = std::filesystem::temp_directory_path() / "kahler_cli_test.ini";
  {
    std::ofstream f(path);
    f << "threads=1\n[k3-balance]\nk=3\nrule=8 8 8 8\n";
  }
  const Run a = run("--config " + path.string() + " k3-balance");
  const Run b = run("k3-balance --k 3 " + kSmall);
  std::filesystem::remove(path);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}
