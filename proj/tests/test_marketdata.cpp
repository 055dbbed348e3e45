#include "qasa/marketdata.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace qasa;

namespace {

std::filesystem::path write_csv(const testkit::TempDir& dir, const std::string& body) {
  const auto path = dir.path() / "bars.csv";
  std::ofstream(path) << "timestamp,open,high,low,close,volume\n" << body;
  return path;
}

std::string error_of(const std::filesystem::path& path, LoadOptions opts = {}) {
  try {
    load_ohlcv(path, opts);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(LoadOhlcv, ParsesEpochRows) {
  testkit::TempDir dir("md");
  const auto s = load_ohlcv(write_csv(dir, "100,1,2,0.5,1.5,10\n160,1.5,1.6,1.4,1.45,0\n"));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.bar_interval(), 60);
  EXPECT_DOUBLE_EQ(s[1].close, 1.45);
  EXPECT_DOUBLE_EQ(s.volumes()(1), 0);
}

TEST(LoadOhlcv, DetectsIsoTimestamps) {
  testkit::TempDir dir("md");
  const auto s = load_ohlcv(write_csv(dir, "2024-01-01,1,1,1,1,1\n2024-01-02,1,1,1,1,1\n"));
  EXPECT_EQ(s[0].timestamp, 1704067200);
  EXPECT_EQ(s.bar_interval(), 86400);
  const auto t = load_ohlcv(write_csv(dir, "2024-01-01T00:00:00,1,1,1,1,1\n2024-01-01T01:00:00,1,1,1,1,1\n"));
  EXPECT_EQ(t.bar_interval(), 3600);
}

TEST(LoadOhlcv, SortsOutOfOrderRows) {
  testkit::TempDir dir("md");
  const auto s = load_ohlcv(write_csv(dir, "120,2,2,2,2,1\n60,1,1,1,1,1\n"));
  EXPECT_DOUBLE_EQ(s[0].close, 1);
}

TEST(LoadOhlcv, ErrorsNameTheRow) {
  testkit::TempDir dir("md");
  EXPECT_NE(error_of(write_csv(dir, "60,1,1,1,1,1\n120,1,1,1,-1,1\n")).find("row 3"), std::string::npos);
  EXPECT_NE(error_of(write_csv(dir, "60,1,1,1,1,1\n120,1,abc,1,1,1\n")).find("row 3"), std::string::npos);
  EXPECT_NE(error_of(write_csv(dir, "60,1,1,1,1\n")).find("row 2"), std::string::npos);
  EXPECT_NE(error_of(write_csv(dir, "60,1,1,2,1,1\n")).find("low"), std::string::npos);
  EXPECT_NE(error_of(write_csv(dir, "60,1,1,1,1,-5\n")).find("volume"), std::string::npos);
  EXPECT_NE(error_of(write_csv(dir, "60,1,1,1,1,1\n60,1,1,1,1,1\n")).find("duplicate"), std::string::npos);
}

TEST(LoadOhlcv, HeaderOnlyAndBadHeaderAreErrors) {
  testkit::TempDir dir("md");
  EXPECT_NE(error_of(write_csv(dir, "")).find("header only"), std::string::npos);
  const auto bad = dir.path() / "bad.csv";
  std::ofstream(bad) << "time,o,h,l,c,v\n1,1,1,1,1,1\n";
  EXPECT_NE(error_of(bad).find("header"), std::string::npos);
  EXPECT_NE(error_of(dir.path() / "missing.csv").find("cannot open"), std::string::npos);
}

TEST(LoadOhlcv, GapsNeedForwardFill) {
  testkit::TempDir dir("md");
  const auto path = write_csv(dir, "60,1,1,1,1,1\n120,1,1,1,1,1\n300,2,2,2,2,3\n");
  EXPECT_NE(error_of(path).find("gap of 2"), std::string::npos);
  const auto s = load_ohlcv(path, {true, std::nullopt});
  ASSERT_EQ(s.size(), 5u);
  EXPECT_EQ(s[2].timestamp, 180);
  EXPECT_DOUBLE_EQ(s[2].open, 1);
  EXPECT_DOUBLE_EQ(s[3].close, 1);
  EXPECT_DOUBLE_EQ(s[3].volume, 0);
  EXPECT_DOUBLE_EQ(s[4].close, 2);
}

TEST(LoadOhlcv, OffGridTimestampIsError) {
  testkit::TempDir dir("md");
  EXPECT_NE(error_of(write_csv(dir, "0,1,1,1,1,1\n60,1,1,1,1,1\n150,1,1,1,1,1\n")).find("bar grid"), std::string::npos);
}

TEST(WriteOhlcv, RoundTrips) {
  testkit::TempDir dir("md");
  const auto s = testkit::random_series(30, 4);
  write_ohlcv(dir.path() / "out.csv", s);
  const auto back = load_ohlcv(dir.path() / "out.csv");
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back[i].timestamp, s[i].timestamp);
    EXPECT_DOUBLE_EQ(back[i].close, s[i].close);
    EXPECT_DOUBLE_EQ(back[i].high, s[i].high);
  }
}

TEST(Iso8601, ParsesAndFormats) {
  EXPECT_EQ(parse_iso8601("1970-01-01"), 0);
  EXPECT_EQ(parse_iso8601("2000-03-01T12:30:15"), 951913815);
  EXPECT_EQ(format_iso8601(951913815), "2000-03-01T12:30:15Z");
  EXPECT_THROW(parse_iso8601("2023-02-30"), DataError);
  EXPECT_THROW(parse_iso8601("2023/02/01"), DataError);
}

TEST(Series, RejectsIrregularSpacing) {
  std::vector<OhlcvBar> bars(3, OhlcvBar{0, 1, 1, 1, 1, 1});
  bars[1].timestamp = 10;
  bars[2].timestamp = 30;
  EXPECT_THROW(OhlcvSeries(bars, 10), DataError);
  EXPECT_THROW(OhlcvSeries({}, 10), DataError);
}

TEST(LogReturns, OneFewerThanPrices) {
  Eigen::VectorXd p(3);
  p << 1, std::exp(0.5), std::exp(0.25);
  const auto r = log_returns(p);
  ASSERT_EQ(r.size(), 2);
  EXPECT_NEAR(r(0), 0.5, 1e-15);
  EXPECT_NEAR(r(1), -0.25, 1e-15);
}

TEST(ChronologicalSplit, DefaultFractions) {
  const auto s = chronological_split(252);
  EXPECT_EQ(s.train.size(), 176u);
  EXPECT_EQ(s.val.size(), 37u);
  EXPECT_EQ(s.test.size(), 39u);
  EXPECT_EQ(s.val.begin, s.train.end);
  EXPECT_EQ(s.test.end, 252u);
  const auto small = chronological_split(20);
  EXPECT_EQ(small.train.size(), 14u);
  EXPECT_EQ(small.val.size(), 3u);
  EXPECT_EQ(small.test.size(), 3u);
  EXPECT_THROW(chronological_split(19), std::invalid_argument);
  EXPECT_THROW(chronological_split(100, {0.5, 0.5, 0.5}), std::invalid_argument);
}

TEST(ChronologicalSplit, RangesPartitionEveryLength) {
  for (std::size_t n = 20; n < 400; ++n) {
    const auto s = chronological_split(n);
    EXPECT_EQ(s.train.begin, 0u);
    EXPECT_EQ(s.train.end, s.val.begin);
    EXPECT_EQ(s.val.end, s.test.begin);
    EXPECT_EQ(s.test.end, n);
    EXPECT_GT(s.test.size(), 0u);
  }
}
