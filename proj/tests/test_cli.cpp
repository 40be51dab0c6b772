#include <doctest.h>

#include <clocale>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli/config_io.hpp"
#include "cli/output.hpp"
#include "cli/run.hpp"

namespace fs = std::filesystem;
using namespace gaplab;
using namespace gaplab::cli;

namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gaplab_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream(path) << j.dump(2);
  return path;
}

std::vector<std::string> tail_args(const fs::path& out, const std::string& threads) {
  return {"tail", "--config", GAPLAB_DEFAULT_CONFIG, "--out", out.string(), "--n", "16",
          "--trials", "20", "--threads", threads};
}

}  // namespace

TEST_CASE("config round trip through JSON") {
  RunConfig cfg = load_config(GAPLAB_DEFAULT_CONFIG);
  cfg.experiment.eta = 0.25;
  cfg.experiment.beta_override = 0.1;
  cfg.experiment.dist = DistributionSpec::lazy_rademacher(0.3);
  cfg.experiment.perturbation.kind = PerturbationKind::rank_one;
  cfg.experiment.perturbation.scale = 2.5;
  cfg.experiment.constants.C_36 = 3.0;
  cfg.counting.thresholds = {0.1};
  const RunConfig back = from_json(nlohmann::json::parse(to_json(cfg).dump()));
  CHECK(back == cfg);
  CHECK(manifest_hash(back, "tail") == manifest_hash(cfg, "tail"));
  CHECK(manifest_hash(cfg, "tail") != manifest_hash(cfg, "gaps"));
  CHECK(manifest_hash(cfg, "tail").size() == 16);

  RunConfig threaded = cfg;
  threaded.experiment.threads = 8;
  CHECK(manifest_hash(threaded, "tail") == manifest_hash(cfg, "tail"));
}

TEST_CASE("config round trip through the run manifest") {
  const fs::path dir = scratch_dir("manifest");
  const RunResult r = invoke({"gaps", "--config", GAPLAB_DEFAULT_CONFIG, "--out", dir.string(), "--n", "8",
                              "--trials", "3"});
  REQUIRE(r.code == kExitOk);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  const RunConfig snap = from_json(manifest.at("config"));
  CHECK(snap.experiment.n == 8);
  CHECK(snap.experiment.trials == 3);
  CHECK(manifest.at("hash").get<std::string>() == manifest_hash(snap, "gaps"));
  CHECK(manifest.at("subcommand") == "gaps");
  CHECK(manifest.at("status").at("failed") == 0);
}

TEST_CASE("unknown and mistyped config keys are rejected by name") {
  const fs::path dir = scratch_dir("badkey");
  nlohmann::json j = to_json(RunConfig{});
  j["dist"]["qq"] = 0.5;
  const fs::path cfg = write_json(dir / "bad.json", j);
  const RunResult r = invoke({"gaps", "--config", cfg.string(), "--out", (dir / "out").string()});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("qq") != std::string::npos);

  nlohmann::json typed = to_json(RunConfig{});
  typed["trials"] = "many";
  CHECK_THROWS_AS(from_json(typed), ConfigError);
  typed["trials"] = -3;
  CHECK_THROWS_AS(from_json(typed), ConfigError);
  nlohmann::json invalid = to_json(RunConfig{});
  invalid["alpha"] = -1.0;
  try {
    from_json(invalid);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }
}

TEST_CASE("usage errors exit 1") {
  const RunResult unknown = invoke({"frobnicate"});
  CHECK(unknown.code == kExitConfig);
  CHECK(unknown.err.find("gaplab") != std::string::npos);
  CHECK(invoke({}).code == kExitConfig);
  CHECK(invoke({"tail", "--n", "abc"}).code == kExitConfig);
  CHECK(invoke({"tail", "--config", "/nonexistent/gaplab.json"}).code == kExitConfig);
}

TEST_CASE("infeasible structure experiments exit 1 before any trial") {
  const fs::path dir = scratch_dir("feasible");
  const RunResult r = invoke({"eigvec", "--out", dir.string(), "--n", "50", "--trials", "1"});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("'n'") != std::string::npos);
}

TEST_CASE("verify passes with the default config") {
  const fs::path dir = scratch_dir("verify");
  const RunResult r = invoke({"verify", "--config", GAPLAB_DEFAULT_CONFIG, "--out", dir.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS") != std::string::npos);
  CHECK(fs::exists(dir / "verify.csv"));
}

TEST_CASE("tail output is byte-identical across runs and thread counts") {
  const fs::path a = scratch_dir("tail_a");
  const fs::path b = scratch_dir("tail_b");
  const fs::path c = scratch_dir("tail_c");
  REQUIRE(invoke(tail_args(a, "1")).code == kExitOk);
  REQUIRE(invoke(tail_args(b, "1")).code == kExitOk);
  REQUIRE(invoke(tail_args(c, "8")).code == kExitOk);
  for (const char* name : {"tail.csv", "gaps.csv", "trials.csv", "delta_min_hist.svg"}) {
    CAPTURE(name);
    CHECK(slurp(a / name) == slurp(b / name));
    CHECK(slurp(a / name) == slurp(c / name));
  }
}

TEST_CASE("CSV headers and manifest references") {
  const fs::path dir = scratch_dir("headers");
  REQUIRE(invoke(tail_args(dir, "2")).code == kExitOk);
  const std::string tail = slurp(dir / "tail.csv");
  const std::string gaps = slurp(dir / "gaps.csv");
  CHECK(tail.rfind("threshold,count,total,fraction,wilson_lo,wilson_hi\n", 0) == 0);
  CHECK(gaps.rfind("trial,delta_min,argmin,simple_spectrum\n", 0) == 0);

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  const std::string hash = manifest.at("hash");
  REQUIRE_FALSE(manifest.at("files").empty());
  for (const auto& f : manifest.at("files")) {
    const std::string name = f.get<std::string>();
    CAPTURE(name);
    REQUIRE(fs::exists(dir / name));
    CHECK(slurp(dir / name).find(hash) != std::string::npos);
  }
  // Four default thresholds, plus the header and manifest lines.
  std::size_t lines = 0;
  for (char ch : tail) lines += ch == '\n';
  CHECK(lines == 4 + 2);
}

TEST_CASE("empty results still carry the header") {
  const fs::path dir = scratch_dir("empty");
  nlohmann::json j = to_json(RunConfig{});
  j["counting"]["thresholds"] = nlohmann::json::array();
  const fs::path cfg = write_json(dir / "cfg.json", j);
  const fs::path out = dir / "out";
  REQUIRE(invoke({"counting", "--config", cfg.string(), "--out", out.string()}).code == kExitOk);
  const std::string csv = slurp(out / "counting.csv");
  CHECK(csv.rfind("n,p,threshold,image_size,residue_count\n# manifest=", 0) == 0);
}

TEST_CASE("every subcommand writes its files") {
  const fs::path dir = scratch_dir("all");
  const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
      {"rho", {"rho.csv", "rho_scan.svg"}},
      {"lattice", {"lattice.csv", "lattice_scan.csv", "lattice_scan.svg"}},
      {"counting", {"counting.csv", "counting_bound.csv"}},
  };
  for (const auto& [sub, files] : runs) {
    const fs::path out = dir / sub;
    REQUIRE(invoke({sub, "--config", GAPLAB_DEFAULT_CONFIG, "--out", out.string()}).code == kExitOk);
    for (const auto& f : files) CHECK(fs::exists(out / f));
    CHECK(fs::exists(out / "manifest.json"));
  }
  const fs::path nv = dir / "nullvec";
  CHECK(invoke({"nullvec", "--out", nv.string(), "--n", "12", "--trials", "2", "--beta", "0.17",
                "--lambda-grid-cap", "100"})
            .code == kExitOk);
  CHECK(fs::exists(nv / "nullvec_summary.csv"));
  const fs::path ev = dir / "eigvec";
  CHECK(invoke({"eigvec", "--out", ev.string(), "--n", "12", "--trials", "2", "--beta", "0.17"}).code ==
        kExitOk);
  CHECK(fs::exists(ev / "eigvec_rich.svg"));
}

TEST_CASE("number formatting ignores the C locale") {
  const char* previous = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = previous ? previous : "C";
  std::setlocale(LC_NUMERIC, "de_DE.UTF-8");  // may be unavailable; the checks hold either way
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("CSV field quoting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("CsvWriter rejects rows of the wrong width") {
  const fs::path dir = scratch_dir("writer");
  CsvWriter w(dir / "t.csv", {"a", "b"}, "0123456789abcdef");
  w.row({"1", "2"});
  CHECK_THROWS(w.row({"1"}));
  w.close();
  CHECK(slurp(dir / "t.csv") == "a,b\n1,2\n# manifest=0123456789abcdef\n");
}
