#include <doctest.h>

#include <sys/wait.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "iirl/cli/dispatch.hpp"
#include "iirl/cli/output.hpp"

using namespace iirl;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "iirl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::string line, body;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') body += line + "\n";
  return body;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"mask", "--scenario", "x.json", "--out", "y.csv"}).code == 2);
    CHECK(run({"mask", "--scenario", "x.json", "--eta-grid", "a:b", "--out", "y.csv"}).code == 2);
    CHECK(run({"generate", "--kind", "nonsense", "--seed", "1", "--out", "y.json"}).code == 2);
    CHECK(run({"--version"}).code == 0);
  }

  TEST_CASE("domain errors exit with 1") {
    const auto dir = iirl::test::scratch_dir("cli_domain");
    {
      std::ofstream f(dir / "k0.json");
      f << R"({"schema": "iirl-dataset", "version": 1, "mode": "utility-test", "K": 0, "m": 2, "entries": []})";
    }
    const Run r = run({"validate", "--dataset", (dir / "k0.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(run({"validate", "--dataset", (dir / "missing.json").string()}).code == 1);
  }

  TEST_CASE("generate, validate and test a rational utility dataset") {
    const auto dir = iirl::test::scratch_dir("cli_utility");
    const auto data = (dir / "d.json").string();
    const auto truth = (dir / "u.json").string();
    REQUIRE(run({"generate", "--kind", "utility-rational", "--k", "6", "--m", "2", "--seed", "3", "--out", data,
                 "--truth-out", truth}).code == 0);
    CHECK(run({"validate", "--dataset", data}).code == 0);
    const Run r = run({"irl-utility", "--dataset", data, "--u-true", truth, "--out", (dir / "r.csv").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("GARP: pass") != std::string::npos);
    const std::string csv = slurp(dir / "r.csv");
    CHECK(csv.rfind("# iirl ", 0) == 0);
    CHECK(csv.find("# command: irl-utility") != std::string::npos);
    CHECK(csv.find("# config: ") != std::string::npos);
  }

  TEST_CASE("mask at eta = 0 has zero violation; reruns are byte-identical") {
    const auto dir = iirl::test::scratch_dir("cli_mask");
    const auto scen = (dir / "s.json").string();
    REQUIRE(run({"generate", "--kind", "scenario-cobb-douglas", "--k", "4", "--m", "2", "--seed", "9", "--out",
                 scen}).code == 0);
    CHECK(run({"validate", "--scenario", scen}).code == 0);
    REQUIRE(run({"mask", "--scenario", scen, "--eta", "0", "--out", (dir / "a.csv").string()}).code == 0);
    const std::string a = slurp(dir / "a.csv");
    CHECK(a.find("# seed: ") != std::string::npos);
    std::istringstream rows(strip_comments(a));
    std::string line;
    std::getline(rows, line);
    CHECK(line == "eta,t,gamma,gamma_star,violation_norm,psi_true,psi_masked,feasible");
    int n = 0;
    while (std::getline(rows, line)) {
      std::vector<std::string> fields;
      std::istringstream cells(line);
      for (std::string c; std::getline(cells, c, ',');) fields.push_back(c);
      REQUIRE(fields.size() == 8);
      CHECK(fields[4] == "0");
      CHECK(fields[2] == fields[3]);
      ++n;
    }
    CHECK(n == 4);
    REQUIRE(run({"mask", "--scenario", scen, "--eta-grid", "0.2:0.6:0.2", "--out", (dir / "b.csv").string()}).code ==
            0);
    REQUIRE(run({"mask", "--scenario", scen, "--eta-grid", "0.2:0.6:0.2", "--out", (dir / "c.csv").string()}).code ==
            0);
    CHECK(slurp(dir / "b.csv") == slurp(dir / "c.csv"));
    CHECK(run({"mask", "--scenario", scen, "--eta", "1.5", "--out", (dir / "d.csv").string()}).code == 1);
  }

  TEST_CASE("radar-fig2 writes a CSV and an SVG with one marker per point") {
    const auto dir = iirl::test::scratch_dir("cli_radar");
    const Run r = run({"radar-fig2", "--k", "4", "--m", "2", "--seed", "2", "--eta-grid", "0.25:0.75:0.25",
                       "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("spearman") != std::string::npos);
    const std::string csv = slurp(dir / "curve.csv");
    CHECK(csv.find("# command: radar-fig2") != std::string::npos);
    CHECK(count(strip_comments(csv), "\n") == 5);
    const std::string svg = slurp(dir / "curve.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(count(svg, "<circle") == 4);
    CHECK(count(svg, "<polyline") >= 1);
  }

  TEST_CASE("SVG rendering is deterministic and breaks at gaps") {
    cli::PlotSeries s;
    s.title = "t";
    s.x_label = "x";
    s.y_label = "y";
    for (int i = 0; i < 19; ++i) {
      s.x.push_back(0.05 * (i + 1));
      s.y.push_back(0.1 * i * i);
    }
    const std::string a = cli::render_svg_plot(s);
    CHECK(a == cli::render_svg_plot(s));
    CHECK(count(a, "<circle") == 19);
    CHECK(count(a, "<polyline") == 1);
    s.y[9] = std::nan("");
    const std::string b = cli::render_svg_plot(s);
    CHECK(count(b, "<circle") == 18);
    CHECK(count(b, "<polyline") == 2);
  }

  TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(cli::format_number(v)) == v);
    CHECK(cli::format_number(std::nan("")) == "nan");
    CHECK(cli::format_number(std::numeric_limits<double>::infinity()) == "inf");
  }

  TEST_CASE("the installed tool returns the same exit codes") {
    const std::string tool = IIRL_TOOL_PATH;
    CHECK(WEXITSTATUS(std::system((tool + " frobnicate >/dev/null 2>&1").c_str())) == 2);
    CHECK(WEXITSTATUS(std::system((tool + " --version >/dev/null 2>&1").c_str())) == 0);
  }
}
