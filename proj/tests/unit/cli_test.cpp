#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "output.hpp"
#include "svg.hpp"

using namespace varbif::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("varbif_cli_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("grid parsing") {
  const auto a = parse_grid("0:1:0.25");
  REQUIRE(a.size() == 5);
  CHECK(a.back() == 1.0);
  CHECK(parse_grid("1, 2.5,pi").size() == 3);
  std::ostringstream out, err;
  RunConfig rc;
  rc.problem = "pitchfork";
  rc.grid = "1:0:0.1";
  CHECK(run("sweep", rc, out, err) == 2);
}

TEST_CASE("invalid config key exits 2 and names the key") {
  const auto dir = scratch("badkey");
  std::filesystem::create_directories(dir);
  {
    std::ofstream cfg(dir / "p.cfg");
    cfg << "problem = pitchfork\nfrobnicate = 1\n";
  }
  RunConfig rc;
  rc.config_path = (dir / "p.cfg").string();
  rc.out = (dir / "out").string();
  std::ostringstream out, err;
  CHECK(run("detect", rc, out, err) == 2);
  CHECK(err.str().find("frobnicate") != std::string::npos);
  CHECK(err.str().find(":2") != std::string::npos);
}

TEST_CASE("unknown format and bad workers are configuration errors") {
  RunConfig rc;
  rc.problem = "pitchfork";
  rc.format = "csv,png";
  std::ostringstream out, err;
  CHECK(run("detect", rc, out, err) == 2);
  rc.format = "csv";
  rc.workers = 0;
  CHECK(run("detect", rc, out, err) == 2);
}

TEST_CASE("domain errors exit 1") {
  RunConfig rc;
  rc.problem = "pitchfork";
  rc.resolution = "64";
  rc.lambda_star = 2.5;
  rc.out = scratch("domain").string();
  std::ostringstream out, err;
  CHECK(run("reduce", rc, out, err) == 1);
  CHECK(err.str().find("2%") != std::string::npos);
}

TEST_CASE("detect on pitchfork lists 1, 4, 9 as confirmed") {
  RunConfig rc;
  rc.problem = "pitchfork";
  rc.resolution = "128";
  rc.window = "0,10";
  rc.out = scratch("detect").string();
  rc.format = "csv,json";
  std::ostringstream out, err;
  REQUIRE(run("detect", rc, out, err) == 0);
  const std::string csv = slurp(std::filesystem::path(rc.out) / "candidates.csv");
  int confirmed = 0;
  for (std::size_t p = csv.find("confirmed_sufficient"); p != std::string::npos;
       p = csv.find("confirmed_sufficient", p + 1))
    ++confirmed;
  CHECK(confirmed == 3);
  CHECK(csv.find("# problem=pitchfork resolution=128 seed=1") != std::string::npos);
  const std::string json = slurp(std::filesystem::path(rc.out) / "candidates.json");
  CHECK(json.find("\"schema_version\": 1") != std::string::npos);
}

TEST_CASE("branch output is byte-identical across runs and worker counts") {
  RunConfig rc;
  rc.problem = "pitchfork";
  rc.resolution = "96";
  rc.lambda_star = 1.0;
  rc.format = "csv,json,svg";
  std::ostringstream out, err;
  rc.out = scratch("branch_a").string();
  REQUIRE(run("branch", rc, out, err) == 0);
  rc.out = scratch("branch_b").string();
  rc.workers = 3;
  REQUIRE(run("branch", rc, out, err) == 0);
  for (const char* f : {"branch_0.csv", "branch_1.csv", "branches.json", "diagram.svg"}) {
    CAPTURE(f);
    const std::string a = slurp(scratch("").parent_path() / "varbif_cli_test_branch_a" / f);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(std::filesystem::path(rc.out) / f));
  }
  const std::string svg = slurp(std::filesystem::path(rc.out) / "diagram.svg");
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(out.str().find("one_sided_pair") != std::string::npos);
}

TEST_CASE("sweep rows carry Morse data") {
  RunConfig rc;
  rc.problem = "linear_dirichlet";
  rc.resolution = "64";
  rc.window = "0,5";
  rc.grid = "0.5,2.5,4.5";
  rc.out = scratch("sweep").string();
  std::ostringstream out, err;
  REQUIRE(run("sweep", rc, out, err) == 0);
  const std::string csv = slurp(std::filesystem::path(rc.out) / "sweep.csv");
  CHECK(csv.find("lambda,mu,nu,eig_1,eig_2\n") != std::string::npos);
  CHECK(csv.find("\n2.5,1,0,") != std::string::npos);
  CHECK(csv.find("\n4.5,2,0,") != std::string::npos);
}

TEST_CASE("list-problems names every builtin") {
  RunConfig rc;
  std::ostringstream out, err;
  REQUIRE(run("list-problems", rc, out, err) == 0);
  CHECK(out.str().find("scaled_pendulum") != std::string::npos);
  CHECK(out.str().find("param lambda0") != std::string::npos);
}

TEST_CASE("text table and csv helpers") {
  Csv csv;
  csv.comment("x");
  csv.header({"a", "b"});
  csv.row(std::vector<double>{0.1, 2.0});
  CHECK(csv.text() == "# x\na,b\n0.1,2\n");
  const std::string t = text_table({"k", "value"}, {{"1", "abc"}});
  CHECK(t == "k  value\n-  -----\n1  abc\n");
}

TEST_CASE("svg escapes labels and draws every series") {
  Figure fig;
  fig.title = "a < b & c";
  fig.series.push_back({"s", "", {{0.0, 1.0}, {1.0, 2.0}}, false, false});
  fig.series.push_back({"p", "", {{0.5, 0.0}}, true, false});
  const std::string svg = render_svg(fig);
  CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("<circle") != std::string::npos);
  CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}

}
