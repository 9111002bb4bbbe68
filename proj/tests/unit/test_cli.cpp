#include "doctest.h"

#include <sstream>

#include "ecgppg/cli.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace ecgppg;
using nlohmann::json;
using testutil::read_text;
using testutil::TempDir;
using testutil::write_text;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void example_traces(const TempDir& dir, const std::string& systolic = "1568") {
  write_text(dir / "ecg.csv", "label,time_ms\np,728\nr,888\n");
  write_text(dir / "ppg.csv", "label,time_ms\nF,1416\nP," + systolic + "\n");
}

}  // namespace

TEST_CASE("exit code mapping") {
  CHECK(cli::exit_code_for(ErrorCode::MissingFile) == 2);
  CHECK(cli::exit_code_for(ErrorCode::TimeRegression) == 2);
  CHECK(cli::exit_code_for(ErrorCode::BadSpec) == 2);
  CHECK(cli::exit_code_for(ErrorCode::SignalTooShort) == 3);
  CHECK(cli::exit_code_for(ErrorCode::EmptyVerdicts) == 4);
  CHECK(cli::exit_code_for(ErrorCode::ZeroVariance) == 1);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"analyze"}).code == 2);  // --manifest missing
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("monitor on the example traces") {
  TempDir dir;
  example_traces(dir);
  const auto r = run({"monitor", "--ecg-trace", (dir / "ecg.csv").string(), "--ppg-trace",
                      (dir / "ppg.csv").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("cycle_index,ecg_verdict,ppg_verdict,composed\n0,T,T,T\n") != std::string::npos);

  example_traces(dir, "1650");
  const auto t = run({"monitor", "--ecg-trace", (dir / "ecg.csv").string(), "--ppg-trace",
                      (dir / "ppg.csv").string(), "--out", (dir / "v.csv").string()});
  CHECK(t.code == 0);
  CHECK(read_text(dir / "v.csv").find("0,T,F,F\n") != std::string::npos);

  // a wider guard admits the 234 ms systole
  const auto g = run({"monitor", "--ecg-trace", (dir / "ecg.csv").string(), "--ppg-trace",
                      (dir / "ppg.csv").string(), "--guard-ms", "240"});
  CHECK(g.out.find("0,T,T,T\n") != std::string::npos);
}

TEST_CASE("monitor errors") {
  TempDir dir;
  write_text(dir / "e.csv", "label,time_ms\n");
  write_text(dir / "p.csv", "label,time_ms\n");
  const auto empty = run({"monitor", "--ecg-trace", (dir / "e.csv").string(), "--ppg-trace",
                          (dir / "p.csv").string()});
  CHECK(empty.code == 4);
  CHECK(empty.err.find("EmptyVerdicts") != std::string::npos);

  write_text(dir / "back.csv", "label,time_ms\np,728\nr,700\n");
  const auto back = run({"monitor", "--ecg-trace", (dir / "back.csv").string(), "--ppg-trace",
                         (dir / "p.csv").string()});
  CHECK(back.code == 2);
  CHECK(back.err.find("TimeRegression") != std::string::npos);
  CHECK(back.err.find("(line 3)") != std::string::npos);

  const auto missing = run({"monitor", "--ecg-trace", (dir / "nope.csv").string(), "--ppg-trace",
                            (dir / "p.csv").string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("MissingFile") != std::string::npos);
}

TEST_CASE("synth is reproducible and validates its flags") {
  TempDir dir;
  const std::vector<std::string> base{"synth", "--n-cycles", "20", "--seed", "5"};
  auto a = base;
  a.insert(a.end(), {"--out", (dir / "a").string()});
  auto b = base;
  b.insert(b.end(), {"--out", (dir / "b").string()});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  for (const char* f : {"ecg.csv", "ppg.csv", "ground_truth.json", "ecg_trace.csv", "ppg_trace.csv",
                        "manifest.json"})
    CHECK(read_text(dir / "a" / f) == read_text(dir / "b" / f));

  const auto bad = run({"synth", "--out", (dir / "c").string(), "--n-cycles", "0"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("--n-cycles") != std::string::npos);
}

TEST_CASE("synth ground truth carries the requested lag") {
  TempDir dir;
  REQUIRE(run({"synth", "--out", dir.path().string(), "--pat", "650", "--no-noise", "--fs", "200",
               "--n-cycles", "30"})
              .code == 0);
  const auto truth = json::parse(read_text(dir / "ground_truth.json"));
  REQUIRE(truth["cycles"].size() == 30);
  for (const auto& c : truth["cycles"]) CHECK(c["r_to_systolic_ms"].get<double>() == doctest::Approx(650.0));
  CHECK(truth["spec"]["noise_sigma"] == 0.0);
}

TEST_CASE("analyze a synthetic record, then re-render the report") {
  TempDir dir;
  REQUIRE(run({"synth", "--out", (dir / "rec").string(), "--seed", "3"}).code == 0);
  const auto r = run({"analyze", "--manifest", (dir / "rec" / "manifest.json").string(), "--out",
                      (dir / "out").string(), "--thresholds", R"({"obs3_min_r": 0.0})"});
  CHECK(r.code == 0);
  CHECK(r.out.find("Observations") != std::string::npos);
  const auto report = json::parse(read_text(dir / "out" / "report.json"));
  CHECK(report["status"] == "ok");
  CHECK(report["config"]["thresholds"]["obs3_min_r"] == 0.0);
  CHECK(report["observations"]["obs6_r_systolic_lag"]["passed"] == true);
  CHECK(std::filesystem::exists(dir / "out" / "correlation_table.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "records" / "synth" / "intervals.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "scatter" / "PR_systole.csv"));

  const auto rep = run({"report", (dir / "out" / "report.json").string(), "--table-csv",
                        (dir / "t.csv").string()});
  CHECK(rep.code == 0);
  CHECK(rep.out.find("Correlation") != std::string::npos);
  CHECK(read_text(dir / "t.csv") == read_text(dir / "out" / "correlation_table.csv"));

  const auto bad_thr = run({"analyze", "--manifest", (dir / "rec" / "manifest.json").string(), "--out",
                            (dir / "out2").string(), "--thresholds", R"({"nope": 1})"});
  CHECK(bad_thr.code == 2);
  const auto bad_fs = run({"analyze", "--manifest", (dir / "rec" / "manifest.json").string(), "--out",
                           (dir / "out3").string(), "--fs", "250"});
  CHECK(bad_fs.code == 2);
  CHECK(bad_fs.err.find("SampleRateMismatch") != std::string::npos);
}

TEST_CASE("analyze failure exit codes") {
  TempDir dir;
  write_text(dir / "m.json", R"({"record_id":"gone","ecg_path":"e.csv","ppg_path":"p.csv","fs_hz":125})");
  const auto missing = run({"analyze", "--manifest", (dir / "m.json").string(), "--out", (dir / "o").string()});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("MissingFile") != std::string::npos);
  const auto report = json::parse(read_text(dir / "o" / "report.json"));
  CHECK(report["status"] == "error");

  std::string shorty = "v\n";
  for (int i = 0; i < 200; ++i) shorty += "0.1\n";
  write_text(dir / "e.csv", shorty);
  write_text(dir / "p.csv", shorty);
  const auto too_short = run({"analyze", "--manifest", (dir / "m.json").string(), "--out", (dir / "o").string()});
  CHECK(too_short.code == 3);
  CHECK(too_short.err.find("SignalTooShort") != std::string::npos);

  CHECK(run({"report", (dir / "none.json").string()}).code == 2);
}
