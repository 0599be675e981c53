#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "penceig/penceig.hpp"
#include "test_util.hpp"

namespace {

using penceig::cx;
using penceig::ConvergenceRecord;

TEST(ParseComplex, AcceptsDocumentedForms) {
  const std::vector<std::pair<std::string, cx>> cases = {
      {"2", cx(2, 0)},
      {"-3.5", cx(-3.5, 0)},
      {"4i", cx(0, 4)},
      {"-0.5-2i", cx(-0.5, -2)},
      {"1e-3+2.5e-2i", cx(1e-3, 2.5e-2)},
      {"i", cx(0, 1)},
      {"-i", cx(0, -1)},
      {"3+4i", cx(3, 4)},
      {" 1.5 - 0.25i ", cx(1.5, -0.25)},
  };
  for (const auto& [text, want] : cases)
    EXPECT_EQ(penceig::parse_complex(text), want) << "literal: " << text;
}

TEST(ParseComplex, RejectsMalformedLiterals) {
  for (const char* bad : {"abc", "1+2j", "", "1++2i", "2+", "1.2.3"})
    EXPECT_THROW(penceig::parse_complex(bad), penceig::StructuralError)
        << "literal: " << bad;
}

TEST(FormatComplex, RoundTripsBitExact) {
  auto rng = testutil::make_rng(404);
  std::vector<cx> values = {cx{}, cx(1e-308, 2.5), cx(-4.9e-324, 1.7e308),
                            cx(1.0 / 3.0, -2.0 / 7.0)};
  for (int k = 0; k < 50; ++k)
    values.push_back(testutil::random_complex(rng, 1e3));
  for (const cx& v : values) {
    const cx back = penceig::parse_complex(penceig::format_complex(v));
    EXPECT_EQ(back.real(), v.real());
    EXPECT_EQ(back.imag(), v.imag());
  }
}

TEST(JsonReport, ComplexPairRoundTrip) {
  const cx v(0.1814, -4.8323);
  EXPECT_EQ(penceig::complex_from_json(penceig::complex_to_json(v)), v);
  EXPECT_THROW(penceig::complex_from_json(nlohmann::json::array({1.0})),
               penceig::StructuralError);
  EXPECT_THROW(penceig::complex_from_json(nlohmann::json::array({"a", "b"})),
               penceig::StructuralError);
}

TEST(JsonReport, RecordRoundTripWithAndWithoutXi) {
  ConvergenceRecord rec;
  rec.lambda = cx(2.5, -1.25);
  rec.mu = cx(0.125, 0.5);
  rec.sigma = cx(4.8334, 0);
  rec.iterations = 17;
  rec.lu_count = 5;
  rec.residual_order = -9;
  rec.source_shift = 3;

  ConvergenceRecord back =
      penceig::record_from_json(penceig::record_to_json(rec));
  EXPECT_EQ(back.lambda, rec.lambda);
  EXPECT_EQ(back.mu, rec.mu);
  EXPECT_EQ(back.sigma, rec.sigma);
  EXPECT_EQ(back.iterations, rec.iterations);
  EXPECT_EQ(back.lu_count, rec.lu_count);
  EXPECT_EQ(back.residual_order, rec.residual_order);
  EXPECT_EQ(back.source_shift, rec.source_shift);
  EXPECT_FALSE(back.xi.has_value());

  rec.xi = cx(0.2, 0.01);
  back = penceig::record_from_json(penceig::record_to_json(rec));
  ASSERT_TRUE(back.xi.has_value());
  EXPECT_EQ(*back.xi, *rec.xi);
}

TEST(JsonReport, ReportCarriesExactlyFourSections) {
  penceig::SolveOutcome outcome;
  outcome.records.emplace_back();
  outcome.records[0].lambda = cx(2, 0);
  outcome.trajectories.emplace_back();

  nlohmann::json params;
  params["sigma"] = penceig::complex_to_json(cx(1, 0));
  params["r"] = 4;

  const nlohmann::json j = penceig::report_to_json("one", params, outcome);
  EXPECT_EQ(j.size(), 4u);
  EXPECT_TRUE(j.contains("algorithm"));
  EXPECT_TRUE(j.contains("parameters"));
  EXPECT_TRUE(j.contains("records"));
  EXPECT_TRUE(j.contains("trajectories"));
  EXPECT_EQ(j["algorithm"], "one");
  EXPECT_EQ(j["records"].size(), 1u);
  EXPECT_EQ(j["trajectories"].size(), 1u);
  EXPECT_FALSE(j["parameters"].contains("threads"));
}

TEST(JsonReport, SpectrumRoundTrip) {
  const std::vector<cx> spectrum = {cx(1, 2), cx(1, -2), cx(-7.5, 0)};
  EXPECT_EQ(penceig::spectrum_from_json(penceig::spectrum_to_json(spectrum)),
            spectrum);
  EXPECT_THROW(penceig::spectrum_from_json(nlohmann::json("x")),
               penceig::StructuralError);
}

TEST(JsonReport, FileRoundTripAndErrors) {
  const std::string path = testing::TempDir() + "penceig_report_test.json";
  nlohmann::json j;
  j["key"] = 42;
  penceig::write_json_file(j, path);
  EXPECT_EQ(penceig::read_json_file(path), j);

  EXPECT_THROW(penceig::read_json_file(testing::TempDir() + "no_such_file.json"),
               penceig::ParseError);

  {
    std::ofstream out(path);
    out << "{not json";
  }
  EXPECT_THROW(penceig::read_json_file(path), penceig::ParseError);
  std::remove(path.c_str());
}

TEST(CsvReport, HeaderAndRowFormat) {
  std::vector<ConvergenceRecord> records(2);
  records[0].lambda = cx(0.1814, 4.8323);
  records[0].iterations = 12;
  records[0].lu_count = 3;
  records[0].residual_order = -9;
  records[1].lambda = cx(-2.0 / 3.0, 0);
  records[1].iterations = 40;
  records[1].lu_count = 10;
  records[1].residual_order = -6;

  const std::string path = testing::TempDir() + "penceig_csv_test.csv";
  penceig::write_report_csv(records, path);

  std::ifstream in(path);
  ASSERT_TRUE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "converged_value_re,converged_value_im,iter,lu,residual_order");

  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%d,%d", 0.1814, 4.8323, 12,
                3, -9);
  EXPECT_EQ(lines[1], buf);
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%d,%d", -2.0 / 3.0, 0.0, 40,
                10, -6);
  EXPECT_EQ(lines[2], buf);
  std::remove(path.c_str());
}

}  // namespace
