#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mkthe/cli.hpp"

using namespace mkthe;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::cli_main(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mkthe_cli_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

// Drops the timing lines, which legitimately vary run to run.
std::string without_timings(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line))
    if (line.find(" ms: ") == std::string::npos) out << line << '\n';
  return out.str();
}

}  // namespace

TEST_CASE("demo runs and reports the interaction counts") {
  const CliResult r = run({"demo", "--preset", "toy", "--owners", "3", "--seed", "7"});
  CHECK(r.code == cli::ok);
  CHECK(r.out.find("decrypt messages: 6") != std::string::npos);
  CHECK(r.out.find("setup interactions: 3") != std::string::npos);
  CHECK(r.out.find("extended ciphertext dimension: 2x2") != std::string::npos);
  CHECK(r.out.find("encrypted model copies per owner: 1") != std::string::npos);
  CHECK(r.out.find("plaintext oracle match: yes") != std::string::npos);
  CHECK(r.out.find("noise overflow events: 0") != std::string::npos);
}

TEST_CASE("demo is deterministic given the seed") {
  TempDir d1, d2;
  const CliResult r1 = run({"demo", "--preset", "toy", "--owners", "2", "--seed", "21",
                            "--out", d1.str(), "--dump-transcript"});
  const CliResult r2 = run({"demo", "--preset", "toy", "--owners", "2", "--seed", "21",
                            "--out", d2.str(), "--dump-transcript"});
  REQUIRE(r1.code == cli::ok);
  REQUIRE(r2.code == cli::ok);
  CHECK(without_timings(r1.out) == without_timings(r2.out));
  CHECK(read_file(d1.str() + "/transcript.mkth") == read_file(d2.str() + "/transcript.mkth"));
  // Payload dumps exist alongside the transcript.
  CHECK(fs::exists(d1.path / "payload_0.bin"));
}

TEST_CASE("the file-based phases round a full protocol run") {
  TempDir dir;
  CHECK(run({"setup", "--preset", "toy", "--owners", "3", "--seed", "7", "--out", dir.str()})
            .code == cli::ok);
  CHECK(run({"keygen", "--seed", "8", "--out", dir.str()}).code == cli::ok);
  CHECK(run({"encrypt", "--seed", "9", "--x", "1", "--stumps", "0,1,0;1,1,0;0,1,1",
             "--out", dir.str()})
            .code == cli::ok);
  CHECK(run({"evaluate", "--seed", "10", "--out", dir.str()}).code == cli::ok);
  const CliResult dec = run({"decrypt", "--seed", "11", "--out", dir.str()});
  CHECK(dec.code == cli::ok);
  // x = 1 against stumps (0,1,0), (1,1,0), (0,1,1): votes 1, 0, 1.
  CHECK(dec.out.find("tally: 2") != std::string::npos);
  CHECK(dec.out.find("majority bit: 1") != std::string::npos);
  // Shares are separate per-owner artifacts.
  CHECK(fs::exists(dir.path / "owner_share_0.mkth"));
  CHECK(fs::exists(dir.path / "owner_share_2.mkth"));
  SUBCASE("every written object round-trips through its loader") {
    const Ring ring(resolve_preset("toy").params);
    CHECK_NOTHROW((void)deserialize_public_key(ring, "toy",
                                               read_file(dir.str() + "/joint_pk.mkth")));
    CHECK_NOTHROW((void)deserialize_ciphertext(ring, "toy",
                                               read_file(dir.str() + "/result.mkth")));
  }
  SUBCASE("a truncated file is a bad-file error") {
    const auto bytes = read_file(dir.str() + "/result.mkth");
    std::vector<uint8_t> cut(bytes.begin(), bytes.begin() + bytes.size() / 2);
    write_file(dir.str() + "/result.mkth", cut);
    const CliResult r = run({"decrypt", "--seed", "11", "--out", dir.str()});
    CHECK(r.code == cli::bad_file);
    CHECK(r.err.find("error-category: bad-file") != std::string::npos);
  }
}

TEST_CASE("argument and protocol errors map to their categories") {
  SUBCASE("non-bit client input") {
    TempDir dir;
    REQUIRE(run({"setup", "--preset", "toy", "--owners", "1", "--seed", "1", "--out",
                 dir.str()})
                .code == cli::ok);
    REQUIRE(run({"keygen", "--seed", "2", "--out", dir.str()}).code == cli::ok);
    const CliResult r = run({"encrypt", "--seed", "3", "--x", "2", "--out", dir.str()});
    CHECK(r.code == cli::bad_args);
    CHECK(r.err.find("error-category: bad-args") != std::string::npos);
  }
  SUBCASE("unknown preset") {
    const CliResult r = run({"demo", "--preset", "nope", "--seed", "1"});
    CHECK(r.code == cli::bad_args);
  }
  SUBCASE("unknown flag") {
    const CliResult r = run({"demo", "--frobnicate"});
    CHECK(r.code == cli::bad_args);
  }
  SUBCASE("missing workspace is a bad-file error") {
    const CliResult r = run({"evaluate", "--out", "/tmp/mkthe_no_such_dir_123"});
    CHECK(r.code == cli::bad_file);
  }
  SUBCASE("a tally that cannot fit the plaintext modulus is a crypto failure") {
    const CliResult r = run({"demo", "--preset", "stump", "--owners", "2", "--seed", "4"});
    CHECK(r.code == cli::crypto_failure);
    CHECK(r.err.find("error-category: crypto-failure") != std::string::npos);
  }
}

TEST_CASE("file commands are deterministic given their seeds") {
  TempDir d1, d2;
  for (const TempDir* d : {&d1, &d2}) {
    REQUIRE(run({"setup", "--preset", "toy", "--owners", "2", "--seed", "5", "--out",
                 d->str()})
                .code == cli::ok);
    REQUIRE(run({"keygen", "--seed", "6", "--out", d->str()}).code == cli::ok);
    REQUIRE(run({"encrypt", "--seed", "7", "--x", "1", "--stumps", "1,0,1;0,1,0",
                 "--out", d->str()})
                .code == cli::ok);
  }
  for (const char* name : {"joint_pk.mkth", "owner_share_0.mkth", "owner_share_1.mkth",
                           "client_sk.mkth", "ct_x.mkth", "stump_1_y.mkth"}) {
    CHECK(read_file(d1.str() + "/" + name) == read_file(d2.str() + "/" + name));
  }
}

TEST_CASE("MKTHE_PRESET_PATH supplies preset files by name") {
  TempDir dir;
  {
    std::ofstream preset(dir.path / "mini.preset");
    preset << "degree=16\nmoduli_bits=62,56,50,46\nplain_modulus=7\n"
           << "noise_bound=1\nnoise_stddev=0.8\nsmudging_shift=20\nintended_use=tally\n";
  }
  ::setenv("MKTHE_PRESET_PATH", dir.str().c_str(), 1);
  const CliResult r = run({"demo", "--preset", "mini", "--owners", "1", "--seed", "2"});
  ::unsetenv("MKTHE_PRESET_PATH");
  CHECK(r.code == cli::ok);
  CHECK(r.out.find("preset: mini") != std::string::npos);
  CHECK(r.out.find("plaintext oracle match: yes") != std::string::npos);
  // Without the environment variable the name is unknown.
  const CliResult missing = run({"demo", "--preset", "mini", "--seed", "2"});
  CHECK(missing.code == cli::bad_args);
}

TEST_CASE("config files provide defaults and flags win") {
  TempDir dir;
  const std::string cfg_path = dir.str() + "/demo.cfg";
  {
    std::ofstream cfg(cfg_path);
    cfg << "preset=toy\nowners=2\nseed=33\n";
  }
  const CliResult from_cfg = run({"demo", "--config", cfg_path});
  CHECK(from_cfg.code == cli::ok);
  CHECK(from_cfg.out.find("owners: 2") != std::string::npos);
  CHECK(from_cfg.out.find("seed: 33") != std::string::npos);
  const CliResult overridden = run({"demo", "--config", cfg_path, "--owners", "1"});
  CHECK(overridden.code == cli::ok);
  CHECK(overridden.out.find("owners: 1") != std::string::npos);
}
