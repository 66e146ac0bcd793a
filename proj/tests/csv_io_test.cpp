#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "doctest.h"
#include "sfreg/csv.hpp"
#include "sfreg/io.hpp"

using namespace sfreg;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "sfreg_tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream out(p);
  out << content;
  return p;
}

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("format_full round-trips doubles exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1e6, 1e6);
  for (int i = 0; i < 500; ++i) {
    const double x = unif(rng) * std::pow(10.0, int(unif(rng)) % 20);
    CHECK(std::strtod(format_full(x).c_str(), nullptr) == x);
  }
  CHECK(format_full(0.0) == "0");
}

TEST_CASE("read_csv handles trimming, blank lines and width errors") {
  const fs::path p = temp_file("basic.csv",
                               "a, b ,c\n"
                               "1, 2 ,3\n"
                               "\n"
                               "4,5,6\n");
  const CsvTable t = read_csv(p.string());
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "2");
  CHECK(t.line_numbers[1] == 4);
  CHECK(t.column("c") == 2);
  CHECK_THROWS_AS(t.column("nope"), IngestError);

  const fs::path bad = temp_file("ragged.csv", "a,b\n1,2\n3\n");
  const std::string msg = error_text([&] { read_csv(bad.string()); });
  CHECK(msg.find(":3:") != std::string::npos);

  CHECK_THROWS_AS(read_csv((temp_file("empty.csv", "")).string()), IngestError);
  CHECK_THROWS_AS(read_csv("/nonexistent/nowhere.csv"), IngestError);
}

TEST_CASE("parse_double reports file, line and column") {
  const fs::path p = temp_file("nums.csv", "x,y\n1.5,barley\n");
  const CsvTable t = read_csv(p.string());
  CHECK(parse_double(t, 0, 0) == 1.5);
  const std::string msg = error_text([&] { parse_double(t, 0, 1); });
  CHECK(msg.find(":2:") != std::string::npos);
  CHECK(msg.find("y") != std::string::npos);
}

TEST_CASE("write_csv then read_csv round-trips") {
  const fs::path dir = fs::temp_directory_path() / "sfreg_tests";
  fs::create_directories(dir);
  const fs::path p = dir / "roundtrip.csv";
  write_csv(p.string(), {"u", "v"}, {{format_full(0.1), "alpha"}, {format_full(-3e-7), "beta"}});
  const CsvTable t = read_csv(p.string());
  CHECK(t.header == std::vector<std::string>{"u", "v"});
  CHECK(parse_double(t, 0, 0) == 0.1);
  CHECK(parse_double(t, 1, 0) == -3e-7);
  CHECK(t.rows[1][1] == "beta");
}

TEST_CASE("climate ingestion maps ages and counts drops") {
  const fs::path p = temp_file("climate.csv",
                               "site_id,lon,lat,age_kyr_bp,temperature,precipitation\n"
                               "A,2.0,48.0,0.5,10.5,600\n"
                               "A,2.0,48.0,14.0,2.25,450\n"
                               "B,12.0,52.0,16.2,1.0,400\n"
                               "B,12.0,52.0,3.0,,500\n");
  const ClimateData cd = read_climate_csv(p.string(), {0.0, 15.0});
  CHECK(cd.sites.size() == 2);
  CHECK(cd.dropped_rows == 1);  // age 16.2 maps below t_min
  REQUIRE(cd.temperature.size() == 2);
  REQUIRE(cd.precipitation.size() == 3);
  CHECK(cd.temperature[0].time == doctest::Approx(14.5));  // t = 15 - age
  CHECK(cd.temperature[1].time == doctest::Approx(1.0));
  CHECK(cd.precipitation[2].value == 500.0);
}

TEST_CASE("climate ingestion rejects malformed rows") {
  const TimeDomain dom{0.0, 15.0};
  const fs::path both = temp_file("climate_both.csv",
                                  "site_id,lon,lat,age_kyr_bp,temperature,precipitation\n"
                                  "A,2.0,48.0,1.0,,\n");
  CHECK_THROWS_AS(read_climate_csv(both.string(), dom), IngestError);

  const fs::path neg = temp_file("climate_neg.csv",
                                 "site_id,lon,lat,age_kyr_bp,temperature,precipitation\n"
                                 "A,2.0,48.0,-1.0,5,500\n");
  CHECK_THROWS_AS(read_climate_csv(neg.string(), dom), IngestError);

  const fs::path moved = temp_file("climate_moved.csv",
                                   "site_id,lon,lat,age_kyr_bp,temperature,precipitation\n"
                                   "A,2.0,48.0,1.0,5,500\n"
                                   "A,2.5,48.0,2.0,5,500\n");
  const std::string msg = error_text([&] { read_climate_csv(moved.string(), dom); });
  CHECK(msg.find("different coordinates") != std::string::npos);
  CHECK(msg.find(":3:") != std::string::npos);

  const fs::path badcoord = temp_file("climate_coord.csv",
                                      "site_id,lon,lat,age_kyr_bp,temperature,precipitation\n"
                                      "A,200.0,48.0,1.0,5,500\n");
  CHECK_THROWS_AS(read_climate_csv(badcoord.string(), dom), IngestError);
}

TEST_CASE("response ingestion validates h_index and duplicates") {
  const fs::path ok = temp_file("resp.csv",
                                "site_id,lon,lat,h_index\n"
                                "R1,5.0,45.0,0.25\n"
                                "R2,6.0,46.0,0.31\n"
                                "R3,7.0,47.0,1.0\n");
  const ResponseData rd = read_response_csv(ok.string());
  CHECK(rd.sites.size() == 3);
  CHECK(rd.h_index[1] == 0.31);

  const fs::path out = temp_file("resp_out.csv",
                                 "site_id,lon,lat,h_index\n"
                                 "R1,5.0,45.0,0.25\n"
                                 "R2,6.0,46.0,1.3\n");
  const std::string msg = error_text([&] { read_response_csv(out.string()); });
  CHECK(msg.find(":3:") != std::string::npos);
  CHECK(msg.find("[0,1]") != std::string::npos);

  const fs::path dup = temp_file("resp_dup.csv",
                                 "site_id,lon,lat,h_index\n"
                                 "R1,5.0,45.0,0.25\n"
                                 "R1,5.0,45.0,0.26\n");
  CHECK_THROWS_AS(read_response_csv(dup.string()), IngestError);
}

TEST_CASE("model json carries the row-major interaction block") {
  const fs::path dir = fs::temp_directory_path() / "sfreg_tests";
  fs::create_directories(dir);
  const fs::path p = dir / "model.json";

  FittedModel m;
  m.model_id = ModelId::M1_full;
  m.basis = make_basis({BasisFamily::fourier, 1, {0.0, 15.0}});
  const int K = m.basis->K();
  m.mu = 0.25;
  m.a = Eigen::VectorXd::LinSpaced(K, 1.0, 3.0);
  m.b = Eigen::VectorXd::LinSpaced(K, -1.0, 1.0);
  m.c = Eigen::MatrixXd::Zero(K, K);
  m.c(0, 1) = 42.0;  // row-major flat index 1
  m.rss = 0.5;
  m.r2 = 0.75;
  write_model_json(p.string(), m, 37);

  std::ifstream in(p);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"model_id\": \"M1\"") != std::string::npos);
  CHECK(text.find("\"n\": 37") != std::string::npos);
  // c must be row-major: flat[1] = c(0,1)
  const auto cpos = text.find("\"c\": [");
  REQUIRE(cpos != std::string::npos);
  const auto first_comma = text.find(',', cpos);
  const auto second = text.find(',', first_comma + 1);
  const std::string flat1 = text.substr(first_comma + 1, second - first_comma - 1);
  CHECK(flat1.find("42") != std::string::npos);
}
