#include <doctest.h>

#include <json.hpp>

#include "drpm/errors.hpp"
#include "drpm/params_io.hpp"

using namespace drpm;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_params_json(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("params file parsing") {
  const auto p = parse_params_json(R"({"K": 2, "n": 3, "omega": [1, 2], "scores": [1, 1, 0.5]})");
  CHECK(p.mvhg.m == std::vector<int>{3, 3});
  CHECK(p.mvhg.omega == std::vector<double>{1, 2});
  CHECK(p.scores.s == std::vector<double>{1, 1, 0.5});
  CHECK(p.scores.beta == 1.0);
  const auto q = parse_params_json(R"({"K": 2, "n": 3, "m": [2, 1], "omega": [1, 2], "scores": [1, 1, 0.5], "beta": 2})");
  CHECK(q.mvhg.m == std::vector<int>{2, 1});
  CHECK(q.scores.beta == 2.0);
}

TEST_CASE("params file errors name the offending field") {
  CHECK(error_of("{").find("document") == 0);
  CHECK(error_of("[1]").find("document") == 0);
  CHECK(error_of(R"({"n": 3, "omega": [1], "scores": [1, 1, 1]})").find("K") == 0);
  CHECK(error_of(R"({"K": 2, "n": 3, "omega": [1], "scores": [1, 1, 1]})").find("omega") == 0);
  CHECK(error_of(R"({"K": 1, "n": 3, "omega": [-1], "scores": [1, 1, 1]})").find("omega") == 0);
  CHECK(error_of(R"({"K": 1, "n": 3, "omega": [1], "scores": [1, 1]})").find("scores") == 0);
  CHECK(error_of(R"({"K": 1, "n": 3, "omega": [1], "scores": [1, "a", 1]})").find("scores[1]") == 0);
  CHECK(error_of(R"({"K": 2, "n": 3, "m": [1, 1], "omega": [1, 1], "scores": [1, 1, 1]})").find("n") == 0);
  CHECK(error_of(R"({"K": 1, "n": 1.5, "omega": [1], "scores": [1]})").find("n") == 0);
  CHECK(error_of(R"({"K": 1, "n": 1, "omega": [1], "scores": [1], "beta": 0})").find("beta") == 0);
}

TEST_CASE("fit target parsing") {
  const auto t = parse_target_json(R"({"n": 3, "K": 2, "partition": "110,001"})");
  CHECK(t.partition.to_string() == "110,001");
  CHECK_THROWS_AS(parse_target_json(R"({"n": 4, "K": 2, "partition": "110,001"})"), ValidationError);
  CHECK_THROWS_AS(parse_target_json(R"({"n": 3, "K": 2, "partition": "110,011"})"), ValidationError);
  CHECK_THROWS_AS(parse_target_json(R"({"n": 3, "K": 2, "partition": 5})"), ValidationError);
}

TEST_CASE("params round trip through json") {
  ParamPoint point{{0.0, 0.5}, {-1.0, 0.0, 2.0}};
  const auto text = params_to_json(point, {3, 3}, 1.0);
  const auto p = parse_params_json(text);
  CHECK(p.mvhg.omega[1] == doctest::Approx(std::exp(0.5)));
  CHECK(p.scores.s[2] == doctest::Approx(std::exp(2.0)));
  const auto doc = nlohmann::json::parse(text);
  CHECK(doc["log_scores"][0].get<double>() == -1.0);
}

TEST_CASE("file io errors") {
  CHECK_THROWS_AS(read_file("/nonexistent/dir/params.json"), IoError);
  CHECK_THROWS_AS(write_file("/nonexistent/dir/out.csv", "x"), IoError);
}
