#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "fklab/config.hpp"

namespace fs = std::filesystem;

namespace {

int sh(const std::string& args, const std::string& capture = "") {
  std::string cmd = std::string(FKLAB_CLI_PATH) + " " + args;
  cmd += capture.empty() ? " >/dev/null 2>&1" : " >" + capture + " 2>/dev/null";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fklab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

const char* kRef =
    "space.kind = line\nkernel.kind = metric\nkernel.beta = 3\npotential.profile = poly\npotential.rho = 1\n"
    "truncation.N = 20\nheat.nmax = 8\nmc.paths = 20000\n";

}  // namespace

TEST_CASE("config parsing and hashing") {
  const auto c = fklab::Config::parse("a.b = 1\n# note\nc = x\n");
  CHECK(c.integer("a.b") == 1);
  CHECK(c.str("c") == "x");
  const auto j = fklab::Config::parse(R"({"a": {"b": 1}, "c": "x"})");
  CHECK(j.canonical() == c.canonical());
  CHECK(j.hash() == c.hash());
  CHECK(fklab::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fklab::Config m = fklab::Config::parse("x = 1\n");
  (void)m.str("space.kind");
  (void)m.num("truncation.N");
  try {
    m.check();
    FAIL("missing keys not reported");
  } catch (const fklab::MissingKeys& e) {
    CHECK(e.keys.size() == 2);
  }
}

TEST_CASE("exit codes") {
  const auto d = scratch("codes");
  write(d / "ref.conf", kRef);
  write(d / "bad.conf", "space.kind = line\n");
  write(d / "nn.conf",
        "space.kind = line\nkernel.kind = nn\nkernel.a0 = 0.5\npotential.profile = poly\npotential.rho = 1\n"
        "truncation.N = 20\n");
  CHECK(sh("audit --config " + (d / "ref.conf").string() + " --out " + (d / "o1").string()) == 0);
  CHECK(sh("audit --config " + (d / "bad.conf").string() + " --out " + (d / "o2").string()) == 1);
  CHECK(sh("audit --config " + (d / "nn.conf").string() + " --out " + (d / "o3").string()) == 2);
  CHECK(sh("nonsense") != 0);
}

TEST_CASE("table1 subcommand") {
  const auto d = scratch("table1");
  REQUIRE(sh("table1 --cell exp-log --n 10", (d / "t.txt").string()) == 0);
  std::istringstream in(slurp(d / "t.txt"));
  std::string line, last;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) {
      ++rows;
      last = line;
    }
  CHECK(rows == 10);
  CHECK(last == "10,3");
  REQUIRE(sh("table1 --cell poly-poly --n 5", (d / "u.txt").string()) == 0);
  CHECK(slurp(d / "u.txt").find("trivial exhaustion") != std::string::npos);
}

TEST_CASE("reruns are byte-identical") {
  const auto d = scratch("rerun");
  write(d / "ref.conf", kRef);
  setenv("FKLAB_CACHE_DIR", (d / "cache").c_str(), 1);
  REQUIRE(sh("full --config " + (d / "ref.conf").string() + " --out " + (d / "a").string()) == 0);
  REQUIRE(sh("full --config " + (d / "ref.conf").string() + " --out " + (d / "b").string()) == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(d / "a")) {
    const auto name = e.path().filename();
    if (name == "run.log") continue;
    ++files;
    CHECK_MESSAGE(slurp(e.path()) == slurp(d / "b" / name), name.string());
  }
  CHECK(files >= 8);
}
