#include "commands.hpp"
#include "tlbm/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using tlbm::Json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = tlbm::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class TempDir {
public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("tlbm_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> row;
    std::string cell;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      row.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
      row.emplace_back();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST(Cli, DeriveSevenVelocities) {
  const auto r = call({"derive", "--q", "7", "--ratios", "2,3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  bool found = false;
  for (const auto& m : j["models"]) {
    found = found || std::abs(m["v2"].get<double>() - 0.846393) < 1e-6;
  }
  EXPECT_TRUE(found);
}

TEST(Cli, DeriveThreeVelocities) {
  const auto r = call({"derive", "--q", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json m = Json::parse(r.out)["models"][0];
  EXPECT_NEAR(m["v2"].get<double>(), std::sqrt(1.5), 1e-15);
  EXPECT_EQ(m["v2_squared_exact"], "3/2");
  EXPECT_EQ(m["weights_normalized_exact"][1], "1/6");
  EXPECT_EQ(m["weights_normalized_exact"][0], "2/3");
}

TEST(Cli, DeriveErrors) {
  EXPECT_EQ(call({"derive", "--q", "5", "--ratios", "1"}).code, 1);
  EXPECT_EQ(call({"derive", "--q", "4", "--ratios", "2"}).code, 1);
  EXPECT_EQ(call({"derive", "--q", "5", "--ratios", "abc"}).code, 1);
  EXPECT_EQ(call({"derive", "--bogus"}).code, 1);
  EXPECT_EQ(call({}).code, 1);
  const auto none = call({"derive", "--q", "5", "--ratios", "2"});
  EXPECT_EQ(none.code, 2);
  EXPECT_EQ(Json::parse(none.out)["models"].size(), 0U);
}

TEST(Cli, SweepFiveVelocityFamily) {
  const auto r = call({"sweep", "--q", "5", "--ratios", "x", "--param", "r", "--from", "0.01", "--to", "0.6", "--step", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 61U);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"r", "v2_minus", "v2_plus", "w1_minus", "w1_plus", "w2_minus",
                                                "w2_plus", "w4_minus", "w4_plus"}));
  auto row_at = [&](double r_value) {
    for (std::size_t k = 1; k < rows.size(); ++k) {
      if (std::abs(std::stod(rows[k][0]) - r_value) < 1e-12) {
        return rows[k];
      }
    }
    ADD_FAILURE() << "row " << r_value << " missing";
    return rows[1];
  };
  const auto r02 = row_at(0.2);
  EXPECT_LT(std::stod(r02[8]), std::stod(r02[6]));
  // The branches approach each other towards the edge of the real region near r = 0.4745.
  const auto r03 = row_at(0.3);
  const auto r047 = row_at(0.47);
  EXPECT_LT(std::stod(r047[2]) - std::stod(r047[1]), std::stod(r03[2]) - std::stod(r03[1]));
  EXPECT_LT(std::stod(r047[2]) - std::stod(r047[1]), 0.15);
  const auto r05 = row_at(0.5);
  EXPECT_TRUE(r05[1].empty());
  EXPECT_TRUE(r05[2].empty());
}

TEST(Cli, SweepVariants) {
  const auto ratio = call({"sweep", "--q", "7", "--ratios", "2,x", "--from", "3", "--to", "4", "--step", "0.5"});
  ASSERT_EQ(ratio.code, 0) << ratio.err;
  EXPECT_NE(ratio.out.find("ratio,branch,v2,w1,w2,w4,w6"), std::string::npos);
  EXPECT_NE(ratio.out.find("0.84639"), std::string::npos);
  const auto grid = call({"sweep", "--q", "5", "--ratios", "x", "--from", "3", "--to", "3", "--step", "1", "--v2-from",
                          "0.5", "--v2-to", "0.6", "--v2-step", "0.05"});
  ASSERT_EQ(grid.code, 0) << grid.err;
  const auto rows = parse_csv(grid.out);
  ASSERT_EQ(rows.size(), 4U);
  // The residual changes sign between 0.55 and 0.6 around the root 0.553432.
  EXPECT_LT(std::stod(rows[2][2]) * std::stod(rows[3][2]), 0.0);
  EXPECT_EQ(call({"sweep", "--q", "7", "--ratios", "x,x", "--from", "2", "--to", "3", "--step", "1"}).code, 1);
  EXPECT_EQ(call({"sweep", "--q", "7", "--ratios", "2,3", "--from", "2", "--to", "3", "--step", "1"}).code, 1);
}

TEST(Cli, Expand) {
  const auto r = call({"expand", "--kind", "HE", "--order", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  EXPECT_EQ(rows.size(), 7U);
  EXPECT_NE(r.out.find("2,2,0,2,1,HE,2"), std::string::npos);
  EXPECT_EQ(call({"expand", "--kind", "XX"}).code, 1);
  EXPECT_EQ(call({"expand", "--kind", "TE", "--order", "0"}).code, 1);
}

TEST(Cli, Verify) {
  const auto r = call({"verify", "--catalog", "q11", "--expansion", "TE4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["m_max"], 4);
  const auto fail = call({"verify", "--catalog", "q5", "--expansion", "HE3", "--max-moment", "6"});
  EXPECT_EQ(fail.code, 3);
}

TEST(Cli, SimulateWritesReproducibleOutputs) {
  TempDir dir;
  const auto a = dir.path() / "a";
  const auto b = dir.path() / "b";
  const auto r = call({"simulate", "--catalog", "q5", "--expansion", "HE3", "--rho-bar", "3", "--snapshot-interval",
                       "60", "--output-dir", a.string(), "--expect-stable"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(a / "profile.csv"));
  ASSERT_TRUE(fs::exists(a / "manifest.json"));
  EXPECT_TRUE(fs::exists(a / "profile_step_000060.csv"));
  const Json manifest = tlbm::read_json_file((a / "manifest.json").string());
  EXPECT_EQ(manifest["steps"], 132);
  EXPECT_FALSE(manifest.contains("workers"));
  EXPECT_EQ(manifest["outputs"].back()["fnv1a64"], tlbm::fnv1a64(slurp(a / "profile.csv")));
  const Json report = Json::parse(r.out);
  EXPECT_NEAR(report["plateaus"]["rho1"]["node"].get<double>(), 2.46, 0.02);

  const auto again = call({"simulate", "--config", (a / "manifest.json").string(), "--output-dir", b.string(),
                           "--workers", "3"});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(slurp(a / "profile.csv"), slurp(b / "profile.csv"));
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
}

TEST(Cli, SimulateConfigFile) {
  TempDir dir;
  const auto cfg = dir.path() / "config.json";
  std::ofstream(cfg) << R"({"model": {"catalog": "q7"}, "expansion": "TE3", "rho_bar": 3, "steps": 40})";
  const auto r = call({"simulate", "--config", cfg.string(), "--output-dir", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["steps"], 40);
  const auto override_steps =
      call({"simulate", "--config", cfg.string(), "--steps", "20", "--output-dir", dir.path().string()});
  EXPECT_EQ(Json::parse(override_steps.out)["steps"], 20);
}

TEST(Cli, SimulateErrors) {
  TempDir dir;
  const auto missing = call({"simulate", "--model-file", (dir.path() / "nope.json").string()});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("not found"), std::string::npos);
  EXPECT_EQ(call({"simulate", "--output-dir", dir.path().string()}).code, 1);
  EXPECT_EQ(call({"simulate", "--catalog", "q5", "--expansion", "HE3", "--rho-bar", "-1"}).code, 1);
  const auto unstable = call({"simulate", "--catalog", "q5", "--expansion", "HE3", "--rho-bar", "4", "--output-dir",
                              dir.path().string(), "--expect-stable"});
  EXPECT_EQ(unstable.code, 3);
  const auto tolerated = call({"simulate", "--catalog", "q5", "--expansion", "HE3", "--rho-bar", "4", "--output-dir",
                               dir.path().string()});
  EXPECT_EQ(tolerated.code, 0);
  EXPECT_FALSE(Json::parse(tolerated.out)["verdict"]["stable"].get<bool>());
}

TEST(Cli, SimulateDerivedModelFile) {
  TempDir dir;
  const auto models = dir.path() / "q5.json";
  ASSERT_EQ(call({"derive", "--q", "5", "--ratios", "3", "--output", models.string()}).code, 0);
  const auto ghost = call({"simulate", "--model-file", models.string(), "--branch", "1", "--expansion", "HE3",
                           "--output-dir", (dir.path() / "ghost").string()});
  const auto clean = call({"simulate", "--model-file", models.string(), "--branch", "0", "--expansion", "HE3",
                           "--output-dir", (dir.path() / "clean").string()});
  ASSERT_EQ(clean.code, 0) << clean.err;
  ASSERT_EQ(ghost.code, 0) << ghost.err;
  EXPECT_GT(Json::parse(ghost.out)["verdict"]["fluctuation"].get<double>(),
            Json::parse(clean.out)["verdict"]["fluctuation"].get<double>());
}

TEST(Cli, Riemann) {
  const auto r = call({"riemann"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_NEAR(j["p_star"].get<double>(), 1.6492629428487158, 1e-12);
  EXPECT_NEAR(j["u_star"].get<double>(), 0.22143478501423075, 1e-12);
  const auto eleven = call({"riemann", "--rho-bar", "11"});
  EXPECT_NEAR(Json::parse(eleven.out)["rho_star_left"].get<double>(), 6.838401559872682, 1e-12);
  EXPECT_EQ(call({"riemann", "--left", "1,-10,1", "--right", "1,10,1"}).code, 2);
  EXPECT_EQ(call({"riemann", "--left", "1,0"}).code, 1);
}

TEST(Cli, CompareAgainstSelfAndRiemann) {
  TempDir dir;
  ASSERT_EQ(call({"simulate", "--catalog", "q11", "--expansion", "TE4", "--output-dir", dir.path().string()}).code, 0);
  const auto profile = (dir.path() / "profile.csv").string();
  const auto self = call({"compare", "--simulation", profile, "--reference", profile});
  ASSERT_EQ(self.code, 0) << self.err;
  const Json s = Json::parse(self.out);
  for (const char* f : {"rho", "u", "theta", "p"}) {
    EXPECT_EQ(s["l1"][f].get<double>(), 0.0);
    EXPECT_EQ(s["linf"][f].get<double>(), 0.0);
  }
  const auto vs = call({"compare", "--simulation", profile, "--manifest", (dir.path() / "manifest.json").string()});
  ASSERT_EQ(vs.code, 0) << vs.err;
  const Json c = Json::parse(vs.out);
  for (const char* x : {"x1", "x2"}) {
    for (const char* f : {"rho", "u", "theta", "p"}) {
      EXPECT_LE(std::abs(c["plateaus"][x][f]["diff"].get<double>()), 0.02) << x << ' ' << f;
    }
  }
  const auto small = dir.path() / "small";
  ASSERT_EQ(call({"simulate", "--catalog", "q11", "--expansion", "TE4", "--nodes", "400", "--interface", "200",
                  "--output-dir", small.string()})
                .code,
            0);
  EXPECT_EQ(call({"compare", "--simulation", profile, "--reference", (small / "profile.csv").string()}).code, 1);
}

TEST(Cli, StabilityScan) {
  const auto r = call({"stability-scan", "--models", "q5", "--rho-bars", "3,4", "--expansions", "HE3", "--workers", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 3U);
  EXPECT_EQ(rows[1][7], "stable");
  EXPECT_EQ(rows[2][7], "unstable");
  EXPECT_EQ(call({"stability-scan", "--models", "", "--rho-bars", "3"}).code, 1);
}

TEST(Cli, Catalog) {
  const auto r = call({"catalog"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  ASSERT_EQ(j.size(), 5U);
  for (const auto& e : j) {
    EXPECT_LT(e["abs_diff"].get<double>(), 1e-6) << e["name"];
  }
}

TEST(Cli, Version) {
  const auto r = call({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(tlbm::cli::kToolVersion), std::string::npos);
}
