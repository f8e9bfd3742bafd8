#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <unistd.h>

#include "semisar/cli.hpp"
#include "semisar/io.hpp"

using namespace semisar;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("semisar_cli_" + std::to_string(::getpid())) / name;
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("simulate twice gives identical files") {
  const auto a = dir("sim_a") / "d.csv", b = dir("sim_b") / "d.csv";
  CHECK(cli({"simulate", "--design", "regular", "--n", "100", "--rho", "0", "--seed", "1", "--out", a.string()}).code == 0);
  CHECK(cli({"--seed", "1", "simulate", "--design", "regular", "--n", "100", "--rho", "0", "--out", b.string()}).code == 0);
  CHECK(io::read_file(a) == io::read_file(b));
  CHECK(io::read_file(fs::path(a).replace_extension(".json")) == io::read_file(fs::path(b).replace_extension(".json")));
}

TEST_CASE("fit with cross-validation selects from the search space") {
  const auto d = dir("fit");
  REQUIRE(cli({"simulate", "--n", "100", "--rho", "0.6", "--out", (d / "d.csv").string()}).code == 0);
  const Run r = cli({"fit", "--data", (d / "d.csv").string(), "--cv", "--variant", "K1S", "--h1-set", "0.2,0.5",
                     "--k-set", "4,8", "--out", (d / "fit.json").string(), "--scores", (d / "scores.csv").string(),
                     "--dump-weights", (d / "w.csv").string()});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(io::read_file(d / "fit.json"));
  const double h1 = j["cfg"]["h1"].get<double>();
  const int k = j["cfg"]["k"].get<int>();
  CHECK((h1 == 0.2 || h1 == 0.5));
  CHECK((k == 4 || k == 8));
  CHECK(j["beta_hat"].size() == 8);
  CHECK(j["r_hat"].size() == 100);
  const auto scores = io::read_csv(d / "scores.csv");
  CHECK(scores.rows.size() == 4);
  const auto w = io::read_csv(d / "w.csv");
  CHECK(w.rows.size() == 99);  // first row is read as the header

  // explicit configuration and prediction
  CHECK(cli({"fit", "--data", (d / "d.csv").string(), "--variant", "K2ME", "--h1", "0.3", "--h2", "1.5", "--k", "4",
             "--out", (d / "fit2.json").string()})
            .code == 0);
  REQUIRE(cli({"simulate", "--n", "100", "--design", "irregular", "--seed", "9", "--out", (d / "new.csv").string()}).code == 0);
  CHECK(cli({"predict", "--fit", (d / "fit2.json").string(), "--data", (d / "d.csv").string(), "--sites",
             (d / "new.csv").string(), "--out", (d / "pred.csv").string()})
            .code == 0);
  const auto pred = io::read_csv(d / "pred.csv");
  CHECK(pred.header == std::vector<std::string>{"site_id", "prediction"});
  CHECK(pred.rows.size() == 100);
}

TEST_CASE("evaluate and reproduce write their tables") {
  const auto d = dir("eval");
  const Run r = cli({"evaluate", "--n", "100", "--reps", "2", "--methods", "K1S,OLS", "--k-set", "4", "--h1-set", "0.2,0.5",
                     "--out-dir", d.string()});
  CHECK(r.code == 0);
  const auto s = io::read_csv(d / "summary.csv");
  CHECK(s.header.size() == 8);
  CHECK(s.rows.size() == 2);
  CHECK(io::read_csv(d / "replications.csv").rows.size() == 4);
  CHECK(io::read_csv(d / "boxplot.csv").rows.size() == 8);
  const Run t = cli({"reproduce", "table1", "--rho", "0", "--design", "regular", "--n", "100", "--reps", "2", "--method", "OLS"});
  CHECK(t.code == 0);
  CHECK(t.out.rfind("method,mae_mean,mae_sd,rmse_mean,rmse_sd\nOLS,", 0) == 0);
}

TEST_CASE("json configuration with flag overrides") {
  const auto d = dir("config");
  io::write_file_atomic(d / "c.json", R"({"seed": 5, "simulate": {"n": 64, "design": "irregular", "rho": 0.3, "out": ")" +
                                          (d / "from_config.csv").string() + R"("}})");
  CHECK(cli({"--config", (d / "c.json").string(), "simulate"}).code == 0);
  CHECK(io::read_csv(d / "from_config.csv").rows.size() == 64);
  CHECK(cli({"--config", (d / "c.json").string(), "simulate", "--n", "36", "--out", (d / "override.csv").string()}).code == 0);
  CHECK(io::read_csv(d / "override.csv").rows.size() == 36);
  const auto side = nlohmann::json::parse(io::read_file(d / "override.json"));
  CHECK(side["seed"] == 5);
  CHECK(side["design"] == "irregular");

  io::write_file_atomic(d / "bad.json", R"({"simulate": {"n": 64, "colour": "red"}})");
  const Run bad = cli({"--config", (d / "bad.json").string(), "simulate", "--out", (d / "x.csv").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("colour") != std::string::npos);
  io::write_file_atomic(d / "broken.json", "{not json");
  CHECK(cli({"--config", (d / "broken.json").string(), "simulate", "--out", (d / "x.csv").string()}).code == 1);
}

TEST_CASE("exit codes") {
  const auto d = dir("codes");
  Run r = cli({"simulate", "--n", "99", "--out", (d / "x.csv").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("invalid regular count") != std::string::npos);
  r = cli({"simulate", "--rho", "1.0", "--out", (d / "x.csv").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("rho") != std::string::npos);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({}).code == 1);
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"fit", "--data", (d / "missing.csv").string(), "--out", (d / "f.json").string()}).code == 1);
  CHECK(cli({"--threads", "-1", "simulate", "--out", (d / "x.csv").string()}).code == 1);

  // constant covariate: the fit is numerically impossible
  io::write_file_atomic(d / "const.csv", "x,y,Y,X1\n0.1,0.1,1,1\n0.5,0.2,2,1\n0.9,0.1,0,1\n0.2,0.8,5,1\n0.6,0.6,3,1\n0.8,0.9,1,1\n");
  r = cli({"fit", "--data", (d / "const.csv").string(), "--variant", "K1S", "--h1", "1", "--k", "2", "--out",
           (d / "f.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("ill-conditioned") != std::string::npos);
  // strict weights turn an empty neighbourhood into a numerical failure
  io::write_file_atomic(d / "far.csv", "x,y,Y,X1\n0,0,1,1\n0.01,0,2,3\n1,1,0,2\n0.99,1,5,1\n0.5,0.5,3,0\n");
  r = cli({"--strict-weights", "fit", "--data", (d / "far.csv").string(), "--variant", "K1S", "--h1", "0.05", "--k",
           "2", "--out", (d / "f.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("empty neighborhood") != std::string::npos);
}
