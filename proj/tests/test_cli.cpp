#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "drosc/cli.hpp"

using drosc::run_cli;
using nlohmann::json;

namespace {

const std::string kBasque = std::string(DROSC_DATA_DIR) + "/basque.csv";

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Minimal structural validator for the schema subset used in docs/schema.json:
// type, required, properties, items, enum.
bool validates(const json& schema, const json& value, std::string* why) {
  if (schema.contains("type")) {
    const std::string t = schema["type"];
    const bool ok = (t == "object" && value.is_object()) || (t == "array" && value.is_array()) ||
                    (t == "string" && value.is_string()) ||
                    (t == "number" && value.is_number()) ||
                    (t == "integer" && value.is_number_integer()) ||
                    (t == "boolean" && value.is_boolean());
    if (!ok) {
      *why = "type mismatch: expected " + t + " got " + value.dump().substr(0, 40);
      return false;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"])
      if (e == value) found = true;
    if (!found) {
      *why = "enum mismatch: " + value.dump();
      return false;
    }
  }
  if (schema.contains("required"))
    for (const auto& key : schema["required"])
      if (!value.contains(key.get<std::string>())) {
        *why = "missing required key " + key.get<std::string>();
        return false;
      }
  if (schema.contains("properties"))
    for (const auto& [key, sub] : schema["properties"].items())
      if (value.contains(key) && !validates(sub, value[key], why)) return false;
  if (schema.contains("items") && value.is_array())
    for (const auto& item : value)
      if (!validates(schema["items"], item, why)) return false;
  return true;
}

json load_schema() {
  std::ifstream in(std::string(DROSC_DOCS_DIR) + "/schema.json");
  REQUIRE(in.good());
  json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("cli estimate: case-study record with the documented values") {
  const CliRun r = cli({"estimate", "--panel", kBasque, "--t0", "15", "--lambda", "0"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(std::fabs(j["tau_hat"].get<double>() - (-0.76)) <= 0.02);
  CHECK(std::fabs(j["sc"]["tau_sc"].get<double>() - (-0.89)) <= 0.02);
  CHECK(j["case"] == "negative-interval");
  CHECK(j["beta_hat"].size() == 16);
  std::string why;
  CHECK_MESSAGE(validates(load_schema()["definitions"]["estimate"], j, &why), why);
}

TEST_CASE("cli estimate: huge lambda clamps to zero-inside") {
  const CliRun r = cli({"estimate", "--panel", kBasque, "--t0", "15", "--lambda", "10"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["tau_hat"].get<double>() == 0.0);
  CHECK(j["case"] == "zero-inside");
}

TEST_CASE("cli estimate: malformed CSV exits 1 naming the cell") {
  std::ofstream bad("cli_bad.csv");
  bad << "time,t,c1\n1,1.0,2.0\n2,oops,3.0\n";
  bad.close();
  const CliRun r = cli({"estimate", "--panel", "cli_bad.csv", "--t0", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("row") != std::string::npos);
}

TEST_CASE("cli infer: alpha <= alpha0 is a usage error") {
  const CliRun r = cli({"infer", "--panel", kBasque, "--t0", "15", "--alpha", "0.01",
                        "--alpha0", "0.01", "--draws", "10"});
  CHECK(r.code != 0);
  CHECK(r.code != 2);
  CHECK(r.code != 3);
}

TEST_CASE("cli infer: fixed seed gives byte-identical output and the schema validates") {
  const std::vector<std::string> args{"infer", "--panel", kBasque, "--t0", "15", "--lambda",
                                      "0.02", "--draws", "80", "--seed", "31"};
  const CliRun a = cli(args);
  const CliRun b = cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const json j = json::parse(a.out);
  CHECK(j["seed"] == 31);
  std::string why;
  CHECK_MESSAGE(validates(load_schema()["definitions"]["infer"], j, &why), why);
  // union contains zero on the bundled data
  bool has_zero = false;
  for (const auto& c : j["ci"]["components"])
    if (c[0].get<double>() <= 0.0 && 0.0 <= c[1].get<double>()) has_zero = true;
  CHECK(has_zero);
}

TEST_CASE("cli infer: DROSC_SEED environment fallback") {
  setenv("DROSC_SEED", "77", 1);
  const CliRun a = cli({"infer", "--panel", kBasque, "--t0", "15", "--draws", "60"});
  const CliRun b = cli({"infer", "--panel", kBasque, "--t0", "15", "--draws", "60",
                        "--seed", "77"});
  unsetenv("DROSC_SEED");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("cli sweep: single-point grid equals the estimate + infer composition") {
  const CliRun s = cli({"sweep", "--panel", kBasque, "--t0", "15", "--lambda-grid",
                        "0.01:0.01:0.01", "--draws", "60", "--seed", "5"});
  REQUIRE(s.code == 0);
  std::istringstream in(s.out);
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "lambda,tau_hat,ci_lo_hull,ci_hi_hull,union_measure,status");
  REQUIRE(static_cast<bool>(std::getline(in, row)));
  CHECK(row.find(",ok") != std::string::npos);
  const CliRun e = cli({"estimate", "--panel", kBasque, "--t0", "15", "--lambda", "0.01"});
  const json je = json::parse(e.out);
  std::istringstream cells(row);
  std::string lam, tau;
  std::getline(cells, lam, ',');
  std::getline(cells, tau, ',');
  CHECK(std::stod(tau) == doctest::Approx(je["tau_hat"].get<double>()).epsilon(1e-9));
  const CliRun i = cli({"infer", "--panel", kBasque, "--t0", "15", "--lambda", "0.01",
                        "--draws", "60", "--seed", "5"});
  const json ji = json::parse(i.out);
  std::string lo, hi, meas;
  std::getline(cells, lo, ',');
  std::getline(cells, hi, ',');
  std::getline(cells, meas, ',');
  CHECK(std::stod(lo) == doctest::Approx(ji["ci"]["hull"][0].get<double>()).epsilon(1e-9));
  CHECK(std::stod(hi) == doctest::Approx(ji["ci"]["hull"][1].get<double>()).epsilon(1e-9));
  CHECK(std::stod(meas) ==
        doctest::Approx(ji["ci"]["total_measure"].get<double>()).epsilon(1e-9));
}

TEST_CASE("cli sweep: union measure trends down in lambda (negative Spearman)") {
  const CliRun r = cli({"sweep", "--panel", kBasque, "--t0", "15", "--lambda-grid",
                        "0:0.06:0.005", "--draws", "200", "--seed", "8"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  std::vector<double> measures;
  while (std::getline(in, line)) {
    REQUIRE(line.find(",ok") != std::string::npos);
    const auto pos = line.rfind(",ok");
    const auto prev = line.rfind(',', pos - 1);
    measures.push_back(std::stod(line.substr(prev + 1, pos - prev - 1)));
  }
  REQUIRE(measures.size() == 13);
  // Spearman rank correlation of measure against the grid index
  std::vector<int> rank(measures.size());
  for (std::size_t i = 0; i < measures.size(); ++i)
    for (std::size_t j = 0; j < measures.size(); ++j)
      if (measures[j] < measures[i] || (measures[j] == measures[i] && j < i)) ++rank[i];
  double d2 = 0.0;
  const double n = static_cast<double>(measures.size());
  for (std::size_t i = 0; i < measures.size(); ++i) {
    const double d = static_cast<double>(rank[i]) - static_cast<double>(i);
    d2 += d * d;
  }
  const double spearman = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
  CHECK(spearman < 0.0);
}

TEST_CASE("cli simulate: smoke run emits all columns; unknown setting is a usage error") {
  const CliRun r = cli({"simulate", "--setting", "S1", "--tau-grid", "0.5:0.5:0.5",
                        "--replicates", "8", "--draws", "30", "--seed", "2",
                        "--out-prefix", "cli_mc_smoke"});
  REQUIRE(r.code == 0);
  std::ifstream csv("cli_mc_smoke.csv");
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header.find("coverage") != std::string::npos);
  const CliRun bad = cli({"simulate", "--setting", "S9"});
  CHECK(bad.code != 0);
  CHECK((bad.err + bad.out).find("S1") != std::string::npos);
}

TEST_CASE("cli experiment: stability indicators at c = 0 and missing-unit error") {
  const CliRun r = cli({"experiment", "--panel", kBasque, "--t0", "15", "--type", "stability",
                        "--noise-cs", "0", "--replicates", "1"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "unit,c,frequency");
  int ones = 0, rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find(",1") != std::string::npos && line.back() == '1') ++ones;
  }
  CHECK(rows == 16);
  CHECK(ones == 3);  // Madrid, Baleares, Rioja
  // weight-shift on a panel without the named units exits 1 naming the unit
  std::ofstream small("cli_small.csv");
  small << "time,t,c1,c2\n";
  for (int i = 1; i <= 10; ++i)
    small << i << ',' << i * 1.0 << ',' << i * 0.9 << ',' << i * 1.1 << "\n";
  small.close();
  const CliRun w = cli({"experiment", "--panel", "cli_small.csv", "--t0", "5", "--type",
                        "weight-shift", "--replicates", "2"});
  CHECK(w.code == 1);
  CHECK(w.err.find("Baleares") != std::string::npos);
}

TEST_CASE("cli experiment: weight-shift table has one row per kappa") {
  const CliRun r = cli({"experiment", "--panel", kBasque, "--t0", "15", "--type", "weight-shift",
                        "--kappas", "0.05,0.1,0.2,0.3,0.4", "--replicates", "10", "--seed", "3"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "kappa,mean_tau_sc,sd_tau_sc,bias");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
}
