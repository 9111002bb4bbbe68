#include "doctest.h"

#include <cmath>
#include <limits>

#include "ecgppg/error.hpp"
#include "ecgppg/ingest.hpp"
#include "oracles.hpp"

using namespace ecgppg;
using testutil::TempDir;
using testutil::write_text;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ecgppg::Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("waveform rejects bad rate and non-finite samples") {
  CHECK(code_of([] { Waveform({1.0, 2.0}, 0.0); }) == ErrorCode::BadSampleRate);
  CHECK(code_of([] { Waveform({1.0}, -5.0); }) == ErrorCode::BadSampleRate);
  try {
    Waveform({0.0, 1.0, std::numeric_limits<double>::quiet_NaN()}, 125.0);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteSample);
    REQUIRE(e.index());
    CHECK(*e.index() == 2);
  }
  const Waveform w({1, 2, 3, 4}, 125.0, "x");
  CHECK(w.duration_ms() == doctest::Approx(32.0));
  CHECK(w.truncated(2).size() == 2);
  CHECK(w.truncated(99).size() == 4);
  CHECK(w.with_samples({5, 6}).fs() == 125.0);
}

TEST_CASE("load by column name and by index") {
  TempDir dir;
  write_text(dir / "r.csv", "time,ecg,ppg\n0,0.1,1.5\n0.008,0.2,1.6\n0.016,-0.3,1.7\n");
  const auto by_name = load_waveform(dir / "r.csv", std::string("ppg"), 125.0);
  REQUIRE(by_name.size() == 3);
  CHECK(by_name.samples()[2] == doctest::Approx(1.7));
  const auto by_index = load_waveform(dir / "r.csv", std::size_t{1}, 125.0);
  CHECK(by_index.samples()[2] == doctest::Approx(-0.3));
  CHECK(code_of([&] { load_waveform(dir / "r.csv", std::string("spo2"), 125.0); }) ==
        ErrorCode::BadColumn);
  CHECK(code_of([&] { load_waveform(dir / "r.csv", std::size_t{7}, 125.0); }) ==
        ErrorCode::BadColumn);
}

TEST_CASE("padded header names match") {
  TempDir dir;
  write_text(dir / "b.csv", "Time [s], RESP, PLETH, V, AVR, II\n0,1,2,3,4,5\n0.008,1,2.5,3,4,6\n");
  const auto ppg = load_waveform(dir / "b.csv", std::string("PLETH"), 125.0);
  CHECK(ppg.samples()[1] == doctest::Approx(2.5));
  const auto ecg = load_waveform(dir / "b.csv", std::string("II"), 125.0);
  CHECK(ecg.samples()[1] == doctest::Approx(6.0));
}

TEST_CASE("NaN cell reports its sample index") {
  TempDir dir;
  write_text(dir / "n.csv", "v\n1\n2\nnan\n4\n");
  try {
    load_waveform(dir / "n.csv", std::size_t{0}, 125.0);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteSample);
    REQUIRE(e.index());
    CHECK(*e.index() == 2);
  }
  write_text(dir / "g.csv", "v\n1\nabc\n");
  CHECK(code_of([&] { load_waveform(dir / "g.csv", std::size_t{0}, 125.0); }) ==
        ErrorCode::NonFiniteSample);
}

TEST_CASE("missing, empty and header-only files") {
  TempDir dir;
  CHECK(code_of([&] { load_waveform(dir / "nope.csv", std::size_t{0}, 125.0); }) ==
        ErrorCode::MissingFile);
  write_text(dir / "e.csv", "");
  CHECK(code_of([&] { load_waveform(dir / "e.csv", std::size_t{0}, 125.0); }) ==
        ErrorCode::EmptySignal);
  write_text(dir / "h.csv", "amplitude\n");
  CHECK(code_of([&] { load_waveform(dir / "h.csv", std::size_t{0}, 125.0); }) ==
        ErrorCode::EmptySignal);
}

TEST_CASE("rate comment must agree with the requested rate") {
  TempDir dir;
  write_text(dir / "a.csv", "# fs_hz=250\namplitude\n1\n2\n");
  CHECK(code_of([&] { load_waveform(dir / "a.csv", std::size_t{0}, 125.0); }) ==
        ErrorCode::SampleRateMismatch);
  CHECK(load_waveform(dir / "a.csv", std::size_t{0}, 250.0).size() == 2);
}

TEST_CASE("write then load round-trips exactly") {
  TempDir dir;
  const std::vector<double> v{0.1, -1.0 / 3.0, 1e-12, 12345.678901234567};
  write_waveform(dir / "w.csv", Waveform(v, 125.0, "ecg"));
  const auto back = load_waveform(dir / "w.csv", std::string("amplitude"), 125.0);
  REQUIRE(back.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(back.samples()[i] == v[i]);
}

TEST_CASE("synced record trims the longer channel and checks rates") {
  const auto rec = SyncedRecord::aligned("r", Waveform({1, 2, 3, 4, 5}, 125.0),
                                         Waveform({1, 2, 3}, 125.0));
  CHECK(rec.ecg.size() == 3);
  CHECK(rec.ppg.size() == 3);
  CHECK(code_of([] {
          SyncedRecord::aligned("r", Waveform({1, 2}, 125.0), Waveform({1, 2}, 250.0));
        }) == ErrorCode::SampleRateMismatch);
}

TEST_CASE("manifest object, array and relative paths") {
  TempDir dir;
  std::filesystem::create_directories(dir / "sub");
  write_text(dir / "sub" / "m.json",
             R"({"record_id":"a","ecg_path":"e.csv","ppg_path":"p.csv","fs_hz":125})");
  const auto one = load_manifest(dir / "sub" / "m.json");
  REQUIRE(one.size() == 1);
  CHECK(one[0].ecg_path == dir / "sub" / "e.csv");
  CHECK(std::get<std::size_t>(one[0].ecg_column) == 0);

  write_text(dir / "arr.json",
             R"([{"record_id":"a","ecg_path":"/abs/e.csv","ppg_path":"p.csv","fs_hz":125},
                 {"record_id":"b","ecg_path":"x.csv","ppg_path":"x.csv","fs_hz":125,
                  "ecg_column":"II","ppg_column":"PLETH"}])");
  const auto two = load_manifest(dir / "arr.json");
  REQUIRE(two.size() == 2);
  CHECK(two[0].ecg_path == std::filesystem::path("/abs/e.csv"));
  CHECK(std::get<std::string>(two[1].ppg_column) == "PLETH");

  write_text(dir / "bad.json", R"({"record_id":"a"})");
  CHECK(code_of([&] { load_manifest(dir / "bad.json"); }) == ErrorCode::BadManifest);
  write_text(dir / "empty.json", "[]");
  CHECK(code_of([&] { load_manifest(dir / "empty.json"); }) == ErrorCode::BadManifest);
  write_text(dir / "junk.json", "{nope");
  CHECK(code_of([&] { load_manifest(dir / "junk.json"); }) == ErrorCode::BadManifest);
  CHECK(code_of([&] { load_manifest(dir / "none.json"); }) == ErrorCode::MissingFile);
}

TEST_CASE("record pair from one multi-column file") {
  TempDir dir;
  write_text(dir / "s.csv", "t,II,PLETH\n0,1,10\n1,2,20\n2,3,30\n");
  const auto rec = load_record_pair(dir / "s.csv", dir / "s.csv", 125.0, "x", std::string("II"),
                                    std::string("PLETH"));
  CHECK(rec.record_id == "x");
  CHECK(rec.ecg.samples()[1] == 2.0);
  CHECK(rec.ppg.samples()[1] == 20.0);
}
