#include <gtest/gtest.h>

#include <filesystem>

#include "ssir/io.hpp"
#include "support.hpp"

using namespace ssir;
using io::json;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("ssir_io_" + std::to_string(::getpid()) + "_" +
                                         ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& f) const { return path_ / f; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

const char* kReferenceToml = R"(
A = 0.96
a = 0.14
r = 0.25
beta0 = 2
mu = 0.2
)";

}  // namespace

TEST(Params, FromJson) {
  const auto p = io::params_from_json(json::parse(R"({"A":0.96,"a":0.02,"r":0.25,"beta0":0.8,"mu":0.2,"gamma":0.1,
                                                     "omega":2,"d":0.01})"));
  EXPECT_EQ(p.A, 0.96);
  EXPECT_EQ(p.beta0, 0.8);
  EXPECT_EQ(p.gamma, 0.1);
  EXPECT_EQ(p.omega, 2.0);
  EXPECT_EQ(p.d, 0.01);
  EXPECT_TRUE(p.forcing.is_cosine());
}

TEST(Params, FromTomlWithIntegers) {
  const auto p = io::params_from_json(io::parse_config_text(kReferenceToml, ".toml", "inline"));
  EXPECT_EQ(p.beta0, 2.0);
  EXPECT_NEAR(thresholds(p).r0, fx::oracle::R0, 1e-15);
}

TEST(Params, ForcingTables) {
  const auto p = io::params_from_json(json::parse(
      R"({"A":1,"a":1,"r":0,"beta0":1,"mu":0.1,"forcing":{"type":"table","period":1.0,"samples":[1,1.5,1,0.5]}})"));
  EXPECT_FALSE(p.forcing.is_cosine());
  EXPECT_DOUBLE_EQ(p.forcing.period(), 1.0);
  const auto q = io::params_from_json(
      json::parse(R"({"A":1,"a":1,"r":0,"beta0":1,"mu":0.1,"forcing":{"type":"cosine","offset":2,"amplitude":1}})"));
  EXPECT_DOUBLE_EQ(q.forcing(0.0), 3.0);
}

TEST(Params, Errors) {
  auto parse = [](const char* s) { return io::params_from_json(json::parse(s)); };
  EXPECT_THROW(parse(R"({"A":1,"a":1,"r":0,"beta0":1})"), ConfigError);                    // missing mu
  EXPECT_THROW(parse(R"({"A":1,"a":1,"r":0,"beta0":1,"mu":0.1,"kappa":1})"), ConfigError);  // unknown key
  EXPECT_THROW(parse(R"({"A":"1","a":1,"r":0,"beta0":1,"mu":0.1})"), ConfigError);          // not a number
  EXPECT_THROW(parse(R"({"A":1,"a":0,"r":0,"beta0":1,"mu":0.1})"), ConfigError);            // a = 0
  EXPECT_THROW(parse(R"({"A":1,"a":1,"r":0,"beta0":1,"mu":0.1,"forcing":{"type":"square"}})"), ConfigError);
  EXPECT_THROW(parse(R"({"A":1,"a":1,"r":0,"beta0":1,"mu":0.1,"forcing":{"amplitude":0}})"), ConfigError);
  EXPECT_THROW(parse(R"([1,2])"), ConfigError);
  EXPECT_THROW(io::parse_config_text("{ nope", ".json", "x.json"), ConfigError);
  EXPECT_THROW(io::parse_config_text("A = = 1", ".toml", "x.toml"), ConfigError);
  EXPECT_THROW(io::parse_config_text("when = 1979-05-27", ".toml", "x.toml"), ConfigError);
}

TEST(Params, RoundTrip) {
  ModelParams p = fx::reference().with("gamma", 0.12).with("omega", 3.5);
  p.forcing = Forcing::table(2.0, {1.0, 1.4, 1.0, 0.7, 0.9});
  const auto q = io::params_from_json(io::to_json(p));
  EXPECT_EQ(io::to_json(q), io::to_json(p));
}

TEST(Files, LoadParamsBareAndNested) {
  TempDir d;
  io::write_text(d / "p.toml", kReferenceToml);
  io::write_text(d / "n.json", R"({"params":{"A":0.96,"a":0.14,"r":0.25,"beta0":2,"mu":0.2}})");
  io::write_text(d / "noext", R"({"A":0.96,"a":0.14,"r":0.25,"beta0":2,"mu":0.2})");
  EXPECT_EQ(io::load_params(d / "p.toml").a, 0.14);
  EXPECT_EQ(io::load_params(d / "n.json").a, 0.14);
  EXPECT_EQ(io::load_params(d / "noext").a, 0.14);
  EXPECT_THROW(io::load_params(d / "missing.toml"), IoError);
}

TEST(Files, WriteErrorsCarryThePath) {
  TempDir d;
  io::write_text(d / "file", "x");
  try {
    io::write_text(d / "file" / "below", "y");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("below"), std::string::npos);
  }
}

TEST(SweepFile, InlineAndRelativeBase) {
  TempDir d;
  io::write_text(d / "base.toml", kReferenceToml);
  io::write_text(d / "s.toml", R"(
base = "base.toml"
job = "classify"
workers = 3
seed = 99
jitter = 0.0
x0 = [0.5, 0.2]
[classify]
n_keep = 100
min_time = 1000.0
rel_tol = 1e-8
[[axes]]
name = "gamma"
min = 0.0
max = 0.1
n = 5
[[axes]]
name = "omega"
values = [0.5, 2.0]
)");
  const auto c = io::load_sweep_config(d / "s.toml");
  EXPECT_EQ(c.base.beta0, 2.0);
  EXPECT_EQ(c.workers, 3u);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.jitter, 0.0);
  ASSERT_TRUE(c.x0.has_value());
  EXPECT_EQ((*c.x0)[kI], 0.2);
  EXPECT_EQ(c.classify.n_keep, 100u);
  EXPECT_EQ(c.classify.min_time, 1000.0);
  EXPECT_EQ(c.classify.integrator.rel_tol, 1e-8);
  EXPECT_EQ(c.cell_count(), 10u);
  EXPECT_EQ(c.axes[1].values, (std::vector<double>{0.5, 2.0}));

  const auto inl = io::sweep_config_from_json(json::parse(
      R"({"base":{"A":0.96,"a":0.14,"r":0.25,"beta0":2,"mu":0.2},"job":"analyze","axes":[{"name":"A","values":[0.9]}]})"));
  EXPECT_EQ(inl.job, JobKind::Analyze);
}

TEST(SweepFile, Errors) {
  const std::string base = R"("base":{"A":0.96,"a":0.14,"r":0.25,"beta0":2,"mu":0.2})";
  auto parse = [&](const std::string& rest) {
    return io::sweep_config_from_json(json::parse("{" + base + "," + rest + "}"));
  };
  EXPECT_THROW(parse(R"("axes":[{"name":"gamma","min":0,"max":0.1,"n":0}])"), ConfigError);
  EXPECT_THROW(parse(R"("axes":[{"name":"gamma","min":0,"max":0.1,"n":2.5}])"), ConfigError);
  EXPECT_THROW(parse(R"("axes":[{"name":"gamma","min":0,"max":0.1}])"), ConfigError);
  EXPECT_THROW(parse(R"("axes":[{"name":"gamma","values":[]}])"), ConfigError);
  EXPECT_THROW(parse(R"("axes":[{"name":"kappa","values":[1]}])"), ConfigError);
  EXPECT_THROW(parse(R"("axes":[{"name":"A","values":[1]}],"job":"dance")"), ConfigError);
  EXPECT_THROW(parse(R"("axes":[{"name":"A","values":[1]}],"seed":-1)"), ConfigError);
  EXPECT_THROW(parse(R"("axes":[{"name":"A","values":[1]}],"x0":[1])"), ConfigError);
  EXPECT_THROW(parse(R"("axes":[{"name":"A","values":[1]}],"classify":{"n_keep":-3})"), ConfigError);
  EXPECT_THROW(parse(R"("axes":[{"name":"A","values":[1]}],"colour":"red")"), ConfigError);
  EXPECT_THROW(parse(R"("axes":{"name":"A"})"), ConfigError);
  EXPECT_THROW(io::sweep_config_from_json(json::parse(R"({"axes":[]})")), ConfigError);
}

TEST(Reports, Analysis) {
  const json j = io::analysis_report(fx::reference());
  EXPECT_EQ(j["regime"]["tag"], "LimitCycle");
  EXPECT_EQ(j["regime"]["e3_stability"], "sink");
  EXPECT_EQ(j["equilibria"].size(), 4u);
  EXPECT_NEAR(j["thresholds"]["hopf_h"].get<double>(), fx::oracle::H, 1e-15);
  EXPECT_TRUE(j["hopf"]["holds"].get<bool>());
  const json k = io::analysis_report(fx::disease_free());
  EXPECT_TRUE(k["thresholds"]["hopf_h"].is_null());
  EXPECT_EQ(k["equilibria"].size(), 2u);

  const std::string csv = io::analysis_csv(fx::disease_free());
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_NE(csv.find(",nan,"), std::string::npos);
  EXPECT_NE(csv.find("DiseaseFreeGlobal"), std::string::npos);
}

TEST(Reports, NumberFormatting) {
  EXPECT_EQ(io::fmt17(0.1), "0.10000000000000001");
  EXPECT_EQ(io::fmt17(std::nan("")), "nan");
  EXPECT_EQ(io::number_or_null(INFINITY), nullptr);
  LyapunovEstimate e;
  e.lambda_max = 0.01;
  e.history = {0.02, 0.01};
  EXPECT_EQ(io::to_json(e)["n_renorm"], 2);
  EXPECT_FALSE(io::to_json(e).contains("history"));
  EXPECT_TRUE(io::to_json(e, true).contains("history"));
}

TEST(Reports, SweepResultParseErrors) {
  EXPECT_THROW(io::sweep_result_from_json(json::parse(R"({"job":"classify"})")), ConfigError);
}
