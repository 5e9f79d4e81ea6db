#include "guas/builtin_examples.hpp"
#include "guas/error.hpp"
#include "guas/io.hpp"
#include "schema_check.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace guas;
using namespace guas::testing;

namespace {

const std::string kBin = GUAS_CERT_BIN;
const std::string kFixtures = GUAS_FIXTURES;
const std::string kSchema = GUAS_SCHEMA;

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "guas_cert_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

int run(const std::string& args, std::string* out = nullptr) {
  const auto log = scratch("stdout.txt");
  const std::string cmd = kBin + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(log);
    std::stringstream buf;
    buf << in.rdbuf();
    *out = buf.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json load_schema() {
  std::ifstream in(kSchema);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(ProblemFile, RoundTripIsBitExact) {
  for (const BuiltinExample& ex : corpus()) {
    ProblemFile pf{ex.pair, ex.name, {{"description", ex.description}}};
    const ProblemFile back = parse_problem(problem_to_json(pf));
    EXPECT_EQ(back.pair.b0, ex.pair.b0);
    EXPECT_EQ(back.pair.b1, ex.pair.b1);
    EXPECT_EQ(back.pair.p.has_value(), ex.pair.p.has_value());
    if (ex.pair.p) EXPECT_EQ(*back.pair.p, *ex.pair.p);
    EXPECT_EQ(back.label, ex.name);
    EXPECT_EQ(back.metadata.at("description"), ex.description);
  }
}

TEST(ProblemFile, FixtureMatchesBuiltinMason) {
  const ProblemFile pf = read_problem(kFixtures + "/mason.json");
  const BuiltinExample ex = mason_example();
  EXPECT_EQ(pf.pair.b0, ex.pair.b0);
  EXPECT_EQ(pf.pair.b1, ex.pair.b1);
  EXPECT_EQ(*pf.pair.p, *ex.pair.p);
}

TEST(ProblemFile, ParseErrors) {
  auto code_of = [](const std::string& text) {
    try {
      parse_problem(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code_of("{"), ErrorCode::ParseError);
  EXPECT_EQ(code_of(R"({"B0": [[-1]]})"), ErrorCode::ParseError);
  EXPECT_EQ(code_of(R"({"B0": [[-1, 0], [0]], "B1": [[-1]]})"), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of(R"({"B0": [["a"]], "B1": [[-1]]})"), ErrorCode::ParseError);
  EXPECT_EQ(code_of(R"({"B0": [[-1]], "B1": [[-1, 0], [0, -1]]})"),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of(R"({"B0": [[-1]], "B1": [[-1]], "P": [[-2]]})"),
            ErrorCode::NotPositiveDefinite);
  EXPECT_NO_THROW(parse_problem(R"({"B0": [[-1]], "B1": [[-2]], "label": "x"})"));
}

TEST(Signal, SpecParsing) {
  const SwitchingSignal s = parse_signal("binary:1=0,2.5=1");
  const auto& b = std::get<BinaryPiecewise>(s);
  ASSERT_EQ(b.segments.size(), 2u);
  EXPECT_EQ(b.segments[1].duration, 2.5);
  EXPECT_EQ(b.segments[1].value, 1.0);
  EXPECT_EQ(std::get<RelaxedPiecewise>(parse_signal("relaxed:1=0.3")).segments[0].value, 0.3);
  EXPECT_EQ(std::get<Feedback>(parse_signal("worst")).rule, FeedbackRule::WorstCase);
  EXPECT_EQ(std::get<Feedback>(parse_signal("badlocus")).rule, FeedbackRule::BadLocus);
  for (const char* bad : {"binary:1=0.5", "binary:", "binary:1", "sine", "relaxed:x=1",
                          "relaxed:1=2"}) {
    EXPECT_THROW(parse_signal(bad), Error) << bad;
  }
}

TEST(Csv, HeaderAndPrecision) {
  const NormalizedPair np = normalize(make_pair(-Matrix::Identity(2, 2), -Matrix::Identity(2, 2)));
  const Trajectory t = integrate(np, BinaryPiecewise{{{1.0, 0.0}}}, Vector::Ones(2), 0.01, 1e-3);
  std::ostringstream out;
  write_trajectory_csv(t, out);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x_1,x_2,norm");
  std::string row;
  std::getline(in, row);
  EXPECT_EQ(row, "0,1,1,1.4142135623730951");

  const BlockFamily blocks = block_form(normalize(kdeux_example().pair),
                                        common_kernel(normalize(kdeux_example().pair)));
  const Trajectory tb =
      integrate(blocks, RelaxedPiecewise{{{1.0, 0.5}}}, Vector::Unit(2, 0), 0.01, 1e-3);
  std::ostringstream outb;
  write_trajectory_csv(tb, outb);
  EXPECT_EQ(outb.str().substr(0, outb.str().find('\n')), "t,x_1,x_2,norm,y_1,lambda");
}

TEST(VerdictJson, ValidatesAgainstSchema) {
  const nlohmann::json schema = load_schema();
  AnalyzeOptions o;
  o.evidence_options.n_random = 2;
  o.evidence_options.horizon = 4.0;
  o.evidence_options.dt = 1e-2;
  for (const BuiltinExample& ex : corpus()) {
    const Verdict v = analyze(ex.pair, o);
    const auto j = nlohmann::json::parse(verdict_to_json(v));
    std::vector<std::string> errors;
    check_schema(j, schema, "$", errors);
    EXPECT_TRUE(errors.empty()) << ex.description << ": " << (errors.empty() ? "" : errors[0]);
    EXPECT_EQ(j["conclusion"], std::string(to_string(v.conclusion)));
  }
}

TEST(VerdictJson, SchemaCheckerRejectsBrokenReports) {
  const nlohmann::json schema = load_schema();
  AnalyzeOptions o;
  o.evidence = false;
  auto j = nlohmann::json::parse(verdict_to_json(analyze(mason_example().pair, o)));
  std::vector<std::string> errors;
  j["conclusion"] = "GUAS";
  j.erase("branch");
  j["extra"] = 1;
  check_schema(j, schema, "$", errors);
  EXPECT_EQ(errors.size(), 3u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("analyze " + kFixtures + "/mason.json --no-evidence"), 0);
  std::string out;
  EXPECT_EQ(run("analyze " + kFixtures + "/kdeux_ab_neg.json --no-evidence --json", &out), 1);
  const auto j = nlohmann::json::parse(out);
  EXPECT_NEAR(j["witness"]["lambda"].get<double>(), 0.5, 1e-9);
  EXPECT_EQ(run("analyze " + kFixtures + "/nonhurwitz.json"), 3);
  EXPECT_EQ(run("analyze " + kFixtures + "/does_not_exist.json"), 4);
  EXPECT_EQ(run("analyze"), 4);
  EXPECT_EQ(run("frobnicate"), 4);
  EXPECT_EQ(run("example nosuch"), 4);
  EXPECT_EQ(run("example torus --T 20 --dt 0.01"), 2);
  EXPECT_EQ(run("example kdeux --a 1 --b -1 --no-evidence"), 1);

  const auto broken = scratch("broken.json");
  std::ofstream(broken) << "{\"B0\": [[1, 2], [3]]";
  EXPECT_EQ(run("analyze " + broken.string()), 4);
}

TEST(Cli, ExampleMasonPrintsVertices) {
  std::string out;
  EXPECT_EQ(run("example mason --T 5 --dt 0.01", &out), 0);
  EXPECT_NE(out.find("GUAS_trivial_kernel"), std::string::npos);
  EXPECT_NE(out.find("0.17157288"), std::string::npos);
  EXPECT_NE(out.find("197.99495"), std::string::npos);
}

TEST(Cli, EmitRoundTrips) {
  const auto path = scratch("emitted.json");
  EXPECT_EQ(run("example kdeux --a 2 --b -1 --no-evidence --emit " + path.string()), 1);
  const ProblemFile pf = read_problem(path.string());
  EXPECT_EQ(pf.pair.b0, kdeux_example(2, -1).pair.b0);
  EXPECT_EQ(run("analyze " + path.string() + " --no-evidence"), 1);
}

TEST(Cli, SimulateWritesCsv) {
  const auto csv = scratch("traj.csv");
  std::string out;
  EXPECT_EQ(run("simulate " + kFixtures + "/minus_identity.json --signal binary:1=0 --x0 1,0 --T 3 "
                "--out " + csv.string(), &out), 0);
  std::ifstream in(csv);
  std::string line;
  std::string last;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x_1,x_2,norm");
  while (std::getline(in, line)) last = line;
  const double final_norm = std::stod(last.substr(last.rfind(',') + 1));
  EXPECT_NEAR(final_norm / std::exp(-3.0), 1.0, 1e-9);
  EXPECT_NE(out.find("final norm ratio"), std::string::npos);

  EXPECT_EQ(run("simulate " + kFixtures + "/kdeux_ab_pos.json --signal badlocus --x0 1,-1 --T 10 "
                "--out " + csv.string(), &out), 0);
  EXPECT_NE(out.find("left F at t ="), std::string::npos);
  EXPECT_EQ(run("simulate " + kFixtures + "/minus_identity.json --signal sine --x0 1,0"), 4);
  EXPECT_EQ(run("simulate " + kFixtures + "/minus_identity.json --signal worst --x0 1,0,0"), 4);
}
