#include <cstring>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "castguard/dataset.hpp"
#include "castguard/error.hpp"
#include "test_support.hpp"

namespace castguard {
namespace {

namespace fs = std::filesystem;
using test::make_dataset;
using test::scratch_dir;

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

template <typename T>
T read_le(const std::string& bytes, std::size_t offset) {
  T v{};
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i));
  return v;
}

TEST(Fmx, TwoByThreeLabeledLayoutIsByteExact) {
  const auto dir = scratch_dir();
  const auto ds = make_dataset({{1, 2, 3}, {4, 5, 6}}, {1, 0});
  write_fmx(ds, dir / "a.fmx");
  const std::string b = read_bytes(dir / "a.fmx");
  // magic 4 + version 1 + rows 4 + cols 4 + has_labels 1 + payload 24 + labels 2 + tag length 2
  ASSERT_EQ(b.size(), 42u);
  EXPECT_EQ(fmx_file_size(2, 3, true, 0), 42u);
  EXPECT_EQ(b.substr(0, 4), "FMX1");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(read_le<std::uint32_t>(b, 5), 2u);
  EXPECT_EQ(read_le<std::uint32_t>(b, 9), 3u);
  EXPECT_EQ(b[13], 1);
  for (int i = 0; i < 6; ++i) {
    float v;
    const auto bits = read_le<std::uint32_t>(b, 14 + 4 * static_cast<std::size_t>(i));
    std::memcpy(&v, &bits, 4);
    EXPECT_EQ(v, static_cast<float>(i + 1));
  }
  EXPECT_EQ(b[38], 1);
  EXPECT_EQ(b[39], 0);
  EXPECT_EQ(read_le<std::uint16_t>(b, 40), 0u);
}

TEST(Fmx, RoundTripKeepsTagAndHeader) {
  const auto dir = scratch_dir();
  const FeatureDataset ds(FeatureMatrix::Random(7, 5), Labels{0, 1, 1, 0, 1, 0, 0}, "vgg16");
  write_fmx(ds, dir / "b.fmx");
  EXPECT_EQ(read_fmx(dir / "b.fmx"), ds);
  const auto h = read_fmx_header(dir / "b.fmx");
  EXPECT_EQ(h.rows, 7u);
  EXPECT_EQ(h.cols, 5u);
  EXPECT_TRUE(h.has_labels);
  EXPECT_EQ(h.source_tag, "vgg16");
  EXPECT_EQ(fs::file_size(dir / "b.fmx"), fmx_file_size(7, 5, true, 5));
}

TEST(Fmx, NanIsRejectedBeforeAnyFileIsWritten) {
  const auto dir = scratch_dir();
  FeatureMatrix x(1, 2);
  x << 1.0f, std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(FeatureDataset(x, Labels{1}), ValidationError);
  EXPECT_THROW(write_fmx_unlabeled(x, "", dir / "nan.fmx"), ValidationError);
  EXPECT_FALSE(fs::exists(dir / "nan.fmx"));
}

TEST(Fmx, BadMagicIsNotAnFmxFile) {
  const auto dir = scratch_dir();
  write_bytes(dir / "x.fmx", "XXXX" + std::string(40, '\0'));
  try {
    read_fmx(dir / "x.fmx");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("not an FMX file"), std::string::npos);
  }
}

TEST(Fmx, HeaderClaimingMoreRowsThanPayloadIsCorrupt) {
  const auto dir = scratch_dir();
  const FeatureDataset ds(FeatureMatrix::Ones(10, 3), Labels(10, 1));
  write_fmx(ds, dir / "t.fmx");
  std::string b = read_bytes(dir / "t.fmx");
  const std::uint32_t rows = 1000;
  std::memcpy(&b[5], &rows, 4);
  write_bytes(dir / "t.fmx", b);
  try {
    read_fmx(dir / "t.fmx");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated/corrupt"), std::string::npos);
  }
  write_bytes(dir / "short.fmx", b.substr(0, 20));
  EXPECT_THROW(read_fmx(dir / "short.fmx"), DataError);
}

TEST(Fmx, LabelByteOutsideZeroOneIsValidationError) {
  const auto dir = scratch_dir();
  write_fmx(make_dataset({{1, 2, 3}, {4, 5, 6}}, {1, 0}), dir / "l.fmx");
  std::string b = read_bytes(dir / "l.fmx");
  b[38] = 7;
  write_bytes(dir / "l.fmx", b);
  EXPECT_THROW(read_fmx(dir / "l.fmx"), ValidationError);
}

TEST(Fmx, UnlabeledFilesReadThroughFeaturesOnly) {
  const auto dir = scratch_dir();
  const FeatureMatrix x = FeatureMatrix::Random(3, 4);
  write_fmx_unlabeled(x, "batch", dir / "u.fmx");
  EXPECT_EQ(fs::file_size(dir / "u.fmx"), fmx_file_size(3, 4, false, 5));
  EXPECT_THROW(read_fmx(dir / "u.fmx"), DataError);
  std::string tag;
  EXPECT_EQ(read_fmx_features(dir / "u.fmx", &tag), x);
  EXPECT_EQ(tag, "batch");
}

TEST(Fmx, MissingFileErrorNamesThePath) {
  try {
    read_fmx("/nonexistent/dir/f.fmx");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/f.fmx"), std::string::npos);
  }
}

TEST(Csv, ThreeRowsWithLabelColumn) {
  const auto dir = scratch_dir();
  write_bytes(dir / "a.csv", "f1,f2,y\n1,2,1\n3,4,0\n5,6,1");
  const auto ds = read_csv(dir / "a.csv", "y");
  ASSERT_EQ(ds.size(), 3u);
  ASSERT_EQ(ds.feature_dim(), 2u);
  EXPECT_EQ(ds.labels(), (Labels{1, 0, 1}));
  EXPECT_EQ(ds.features()(2, 1), 6.0f);
}

TEST(Csv, MissingLabelColumnIsNamed) {
  const auto dir = scratch_dir();
  write_bytes(dir / "a.csv", "f1,f2,label\n1,2,1\n");
  try {
    read_csv(dir / "a.csv", "y");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("\"y\""), std::string::npos);
  }
}

TEST(Csv, UnparsableCellCitesRow) {
  const auto dir = scratch_dir();
  write_bytes(dir / "a.csv", "f1,f2,y\n1,2,1\nabc,4,0\n");
  try {
    read_csv(dir / "a.csv", "y");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(Split, ThirteenHundredSampleClassBalance) {
  Labels labels(1300, kNonDefect);
  std::fill(labels.begin(), labels.begin() + 781, kDefect);
  const auto idx = split_indices(labels, {0.75, 4, true});
  EXPECT_NEAR(static_cast<double>(idx.train.size()), 975.0, 1.0);
  std::size_t defect = 0;
  for (const auto i : idx.train) defect += labels[i];
  EXPECT_EQ(defect, 586u);
  EXPECT_EQ(idx.train.size() - defect, 389u);
  EXPECT_EQ(idx.train.size() + idx.test.size(), 1300u);
}

TEST(Split, HalfOfFourBalancedSamples) {
  const auto idx = split_indices(Labels{0, 1, 0, 1}, {0.5, 9, true});
  ASSERT_EQ(idx.train.size(), 2u);
  const Labels l{0, 1, 0, 1};
  EXPECT_NE(l[idx.train[0]], l[idx.train[1]]);
  EXPECT_NE(l[idx.test[0]], l[idx.test[1]]);
}

TEST(Split, SameSeedSamePartitionAndDisjoint) {
  Labels labels(101);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::uint8_t>(i % 3 == 0);
  const auto a = split_indices(labels, {0.75, 17, false});
  const auto b = split_indices(labels, {0.75, 17, false});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  std::vector<std::size_t> all = a.train;
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  EXPECT_THROW(split_indices(labels, {1.0, 0, false}), ValidationError);
}

TEST(Synth, DeterministicBalancedAndValidated) {
  const auto a = test::separable_synth(30, 6, 5);
  const auto b = test::separable_synth(30, 6, 5);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.count(kDefect), 30u);
  EXPECT_EQ(a.count(kNonDefect), 30u);
  EXPECT_NE(a, test::separable_synth(30, 6, 6));
  SynthSpec bad;
  bad.dim = 0;
  EXPECT_THROW(gen_synth(bad), ValidationError);
}

TEST(Synth, ClassMeansSitSeparationApart) {
  SynthSpec s;
  s.n_per_class = 4000;
  s.dim = 5;
  s.class_separation = 6.0;
  s.seed = 2;
  const auto ds = gen_synth(s);
  const Eigen::MatrixXd x = ds.features().cast<double>();
  const Eigen::RowVectorXd m0 = x.topRows(4000).colwise().mean();
  const Eigen::RowVectorXd m1 = x.bottomRows(4000).colwise().mean();
  EXPECT_NEAR((m1 - m0).norm(), 6.0, 0.1);
}

}  // namespace
}  // namespace castguard
