#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "tapertpa/error.hpp"
#include "tapertpa/spectrum_io.hpp"
#include "test_support.hpp"

namespace tpa::io {
namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SpectrumData sample() {
  SpectrumData s;
  s.detuning = {-1.5e6, 0.0, 0.125e6, 2e9};
  s.transmission = {1.0, 0.7, 0.71234567890123, 0.999};
  return s;
}

TEST(FormatSpectrumCsv, HeaderAndMegahertzColumn) {
  EXPECT_EQ(format_spectrum_csv(sample()),
            "detuning_mhz,transmission\n-1.5,1\n0,0.7\n0.125,0.71234567890123\n2000,0.999\n");
}

TEST(SpectrumCsv, RoundTripPreservesValues) {
  testing::TempDir dir("io_roundtrip");
  const auto p = dir.path() / "s.csv";
  write_spectrum_csv(p, sample());
  const auto back = read_spectrum_csv(p);
  EXPECT_EQ(back.detuning_unit, "MHz");
  EXPECT_TRUE(back.warnings.empty());
  ASSERT_EQ(back.data.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(back.data.detuning[i], sample().detuning[i], 1e-6);
    EXPECT_NEAR(back.data.transmission[i], sample().transmission[i], 1e-14);
  }
}

TEST(AtomicWrite, ReplacesAndLeavesNoTemporary) {
  testing::TempDir dir("io_atomic");
  const auto p = dir.path() / "out.json";
  atomic_write(p, "first\n");
  atomic_write(p, "second\n");
  EXPECT_EQ(read_text(p), "second\n");
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1);
}

TEST(AtomicWrite, MissingDirectoryIsIoError) {
  testing::TempDir dir("io_missing");
  EXPECT_THROW(atomic_write(dir.path() / "nope" / "x.csv", "x"), IoError);
}

TEST(WriteJson, TrailingNewlineAndStableText) {
  testing::TempDir dir("io_json");
  const auto p = dir.path() / "a.json";
  write_json(p, {{"b", 1}, {"a", 0.5}});
  EXPECT_EQ(read_text(p), "{\n  \"a\": 0.5,\n  \"b\": 1\n}\n");
}

TEST(ReadSpectrumCsv, UnitsCommentsSortingAndDuplicates) {
  testing::TempDir dir("io_read");
  const auto p = dir.path() / "in.csv";
  write_text(p, "# exported\ndetuning_GHz,T\n0.002,0.9\n-0.001,0.8\n0.002,0.7\n\n0.000,0.5\r\n");
  const auto r = read_spectrum_csv(p);
  EXPECT_EQ(r.detuning_unit, "GHz");
  EXPECT_EQ(r.transmission_column, "T");
  ASSERT_EQ(r.data.size(), 3u);
  EXPECT_DOUBLE_EQ(r.data.detuning[0], -1e6);
  EXPECT_DOUBLE_EQ(r.data.detuning[2], 2e6);
  EXPECT_DOUBLE_EQ(r.data.transmission[2], 0.8);
  EXPECT_EQ(r.warnings.size(), 2u);
  EXPECT_EQ(r.data.metadata.at("source"), "in.csv");
}

TEST(ReadSpectrumCsv, MalformedRowNamesLine) {
  testing::TempDir dir("io_bad");
  const auto p = dir.path() / "bad.csv";
  write_text(p, "detuning_mhz,transmission\n0,1\n1,abc\n");
  try {
    read_spectrum_csv(p);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ReadSpectrumCsv, RejectsUnknownUnitAndMissingFile) {
  testing::TempDir dir("io_unit");
  const auto p = dir.path() / "u.csv";
  write_text(p, "detuning_thz,transmission\n0,1\n1,1\n");
  EXPECT_THROW(read_spectrum_csv(p), InputError);
  EXPECT_THROW(read_spectrum_csv(dir.path() / "absent.csv"), IoError);
}

TEST(ReadSpectrumCsv, RejectsOutOfRangeTransmission) {
  testing::TempDir dir("io_range");
  const auto p = dir.path() / "r.csv";
  write_text(p, "detuning_mhz,transmission\n0,1\n1,1.5\n");
  EXPECT_THROW(read_spectrum_csv(p), InputError);
}

}  // namespace
}  // namespace tpa::io
