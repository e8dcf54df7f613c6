#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Workspace {
 public:
  Workspace() : dir_(fs::temp_directory_path() / ("drpm_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }
  fs::path path(const std::string& name) const { return dir_ / name; }
  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(path(name), std::ios::binary) << content;
    return path(name).string();
  }
  Run run(const std::string& args, const std::string& env = "") const {
    const auto out = path("stdout.txt");
    const auto err = path("stderr.txt");
    const std::string cmd = env + " " + DRPM_CLI_PATH + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

 private:
  fs::path dir_;
};

const char* kEqual3 = R"({"K": 2, "n": 3, "omega": [1, 1], "scores": [1, 1, 1]})";
const char* kRandom4 = R"({"K": 3, "n": 4, "omega": [0.4, 1.3, 2.2], "scores": [1.5, 0.3, 0.8, 2.1]})";

}  // namespace

TEST_CASE("sample command") {
  const Workspace ws;
  const auto params = ws.write("p.json", kEqual3);

  SUBCASE("K=1 params give the full set on every row") {
    const auto one = ws.write("one.json", R"({"K": 1, "n": 3, "omega": [2], "scores": [1, 2, 3]})");
    const auto r = ws.run("sample --params " + one + " --num 50 --seed 4 --out " + ws.path("a.csv").string());
    REQUIRE(r.code == 0);
    std::istringstream in(slurp(ws.path("a.csv")));
    std::string line;
    std::getline(in, line);
    CHECK(line == "partition");
    int rows = 0;
    while (std::getline(in, line)) {
      CHECK(line == "\"111\"");
      ++rows;
    }
    CHECK(rows == 50);
  }
  SUBCASE("n=3 equal params: frequency of 110,001 at 10^6 draws") {
    REQUIRE(ws.run("sample --params " + params + " --num 1000000 --seed 8 --out " + ws.path("b.csv").string()).code == 0);
    std::istringstream in(slurp(ws.path("b.csv")));
    std::string line;
    std::getline(in, line);
    long hits = 0;
    long rows = 0;
    while (std::getline(in, line)) {
      hits += line == "\"110,001\"";
      ++rows;
    }
    CHECK(rows == 1'000'000);
    CHECK(std::abs(hits / 1e6 - 0.15) < 0.002);
  }
  SUBCASE("relaxed mode writes the hard twin and the flattened matrix") {
    REQUIRE(ws.run("sample --params " + params + " --num 5 --seed 1 --mode relaxed --tau 0.5 --out " +
                   ws.path("c.csv").string()).code == 0);
    std::istringstream in(slurp(ws.path("c.csv")));
    std::string line;
    std::getline(in, line);
    CHECK(line == "sample,hard,y1_1,y1_2,y1_3,y2_1,y2_2,y2_3");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5);
  }
  SUBCASE("tau is required iff relaxed") {
    CHECK(ws.run("sample --params " + params + " --mode relaxed --out " + ws.path("d.csv").string()).code == 2);
    CHECK(ws.run("sample --params " + params + " --tau 0.5 --out " + ws.path("d.csv").string()).code == 2);
  }
  SUBCASE("error exits") {
    const auto bad = ws.write("bad.json", R"({"K": 2, "n": 3, "omega": [1], "scores": [1, 1, 1]})");
    const auto r = ws.run("sample --params " + bad + " --out " + ws.path("e.csv").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("omega") != std::string::npos);
    CHECK(ws.run("sample --params " + ws.path("missing.json").string() + " --out x.csv").code == 1);
    CHECK(ws.run("sample --params " + params + " --out /nonexistent/dir/x.csv").code == 1);
    CHECK(ws.run("sample --params " + params + " --mode sideways --out x.csv").code == 2);
  }
}

TEST_CASE("pmf command") {
  const Workspace ws;
  const auto params = ws.write("p.json", kEqual3);
  auto json_of = [&](const std::string& args) {
    const auto r = ws.run("pmf --params " + params + " --partition 110,001 " + args);
    REQUIRE(r.code == 0);
    return nlohmann::json::parse(r.out);
  };
  CHECK(json_of("--method exact")["log_p"].get<double>() == doctest::Approx(std::log(0.15)).epsilon(1e-12));
  const auto b = json_of("--method bounds");
  CHECK(b["log_lower"].get<double>() == doctest::Approx(std::log(0.075)).epsilon(1e-12));
  CHECK(b["log_upper"].get<double>() == doctest::Approx(std::log(0.15)).epsilon(1e-12));
  const auto mc = json_of("--method mc --samples 1000000 --seed 3");
  CHECK(std::abs(mc["estimate"].get<double>() - 0.15) < 3 * mc["stderr"].get<double>());

  CHECK(ws.run("pmf --params " + params + " --partition 110,011").code == 2);
  CHECK(ws.run("pmf --params " + params + " --partition 1100,0011").code == 2);
  const auto big = ws.write("big.json", R"({"K": 1, "n": 10, "omega": [1], "scores": [1,1,1,1,1,1,1,1,1,1]})");
  const auto r = ws.run("pmf --params " + big + " --partition 1111111111 --method exact");
  CHECK(r.code == 3);
  CHECK(r.err.find("bounds") != std::string::npos);
  CHECK(ws.run("pmf --params " + big + " --partition 1111111111 --method bounds").code == 0);
}

TEST_CASE("bounds-ablation command") {
  const Workspace ws;
  const auto r = ws.run("bounds-ablation --n 4 --k 3 --M 20000 --config all --seed 2 --out " + ws.path("abl").string());
  REQUIRE(r.code == 0);
  for (const char* c : {"equal", "rand-omega", "rand-s", "rand-both"}) {
    CHECK(fs::exists(ws.path("abl") / (std::string("bounds_") + c + ".csv")));
  }
  std::istringstream in(r.out);
  std::string line;
  int summaries = 0;
  while (std::getline(in, line)) {
    if (line.find("sandwich fraction") == std::string::npos) continue;
    ++summaries;
    CHECK(line.find("sandwich fraction 1.000") != std::string::npos);
  }
  CHECK(summaries == 4);
  CHECK(ws.run("bounds-ablation --n 20 --k 5 --M 10 --out " + ws.path("x").string()).code == 3);
}

TEST_CASE("gradcheck command") {
  const Workspace ws;
  const auto params = ws.write("p.json", kEqual3);
  const auto r = ws.run("gradcheck --params " + params + " --objective pl_log_pmf --tau 1 --trials 3 --seed 1");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("objective,coordinate,analytic,fd,rel_err\n", 0) == 0);
  CHECK(ws.run("gradcheck --params " + params + " --objective supervised_loss --tau 0.5 --trials 3 --seed 1").code == 0);
  const auto bad = ws.run("gradcheck --params " + params + " --objective nope");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("mvhg_log_pmf") != std::string::npos);
  // A step far too large to resolve the gradient cannot pass the threshold.
  CHECK(ws.run("gradcheck --params " + params + " --objective pl_log_pmf --tau 1 --trials 3 --seed 1 --step 0.5").code == 4);
}

TEST_CASE("fit command") {
  const Workspace ws;
  SUBCASE("target equal to the initial zero-noise output matches") {
    const auto t = ws.write("t.json", R"({"n": 3, "K": 2, "partition": "100,011"})");
    const auto r = ws.run("fit --target " + t + " --steps 50 --seed 1 --out " + ws.path("f").string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("match yes") != std::string::npos);
    std::istringstream in(slurp(ws.path("f") / "trace.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,tau,loss,l1,l2");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 51);
    const auto doc = nlohmann::json::parse(slurp(ws.path("f") / "params.json"));
    CHECK(doc["scores"].size() == 3);
  }
  SUBCASE("malformed target") {
    const auto t = ws.write("bad.json", R"({"n": 3, "K": 2, "partition": "110,011"})");
    CHECK(ws.run("fit --target " + t + " --steps 5 --out " + ws.path("g").string()).code == 2);
    const auto u = ws.write("bad2.json", R"({"n": 3, "K": 2})");
    CHECK(ws.run("fit --target " + u + " --steps 5 --out " + ws.path("g").string()).code == 2);
  }
}

TEST_CASE("every command is byte-identical on re-run, for any worker count") {
  const Workspace ws;
  const auto params = ws.write("p.json", kRandom4);
  const auto target = ws.write("t.json", R"({"n": 4, "K": 3, "partition": "1001,0100,0010"})");
  auto twice = [&](const std::string& args, const std::vector<std::string>& files) {
    std::string first;
    for (const std::string env : {"DRPM_THREADS=1", "DRPM_THREADS=4", "DRPM_THREADS=3"}) {
      const auto r = ws.run(args, env);
      REQUIRE(r.code == 0);
      std::string all = r.out;
      for (const auto& f : files) all += slurp(ws.path(f));
      if (first.empty()) {
        first = all;
      } else {
        CHECK(all == first);
      }
    }
  };
  twice("sample --params " + params + " --num 20000 --seed 5 --out " + ws.path("s.csv").string(), {"s.csv"});
  twice("sample --params " + params + " --num 200 --seed 5 --mode relaxed --tau 0.3 --out " + ws.path("r.csv").string(),
        {"r.csv"});
  twice("pmf --params " + params + " --partition 1001,0100,0010 --method mc --samples 50000 --seed 2", {});
  twice("pmf --params " + params + " --partition 1001,0100,0010 --method bounds", {});
  twice("bounds-ablation --n 3 --k 3 --M 5000 --seed 1 --out " + ws.path("b").string(),
        {"b/bounds_equal.csv", "b/bounds_rand-omega.csv", "b/bounds_rand-s.csv", "b/bounds_rand-both.csv"});
  twice("gradcheck --params " + params + " --objective partition_entry --tau 0.5 --trials 2 --seed 3", {});
  twice("fit --target " + target + " --steps 40 --seed 9 --out " + ws.path("f").string(), {"f/trace.csv", "f/params.json"});
}
