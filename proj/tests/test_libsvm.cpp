#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "alkit/libsvm.hpp"

using namespace alkit;

namespace {

std::string data_path(const std::string& name) { return std::string(ALKIT_DATA_DIR) + "/" + name; }

std::size_t parse_error_line(const std::string& text) {
  try {
    parse_libsvm(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no parse error for: " << text;
  return 0;
}

RawDataset roundtrip(const RawDataset& d) {
  std::ostringstream out;
  write_libsvm(out, d);
  return parse_libsvm(out.str());
}

std::multiset<std::vector<double>> rows_with_labels(const RawDataset& d) {
  std::multiset<std::vector<double>> rows;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<double> r(d.features.row(i).begin(), d.features.row(i).end());
    r.push_back(d.labels[i]);
    rows.insert(r);
  }
  return rows;
}

RawDataset synthetic(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  std::ostringstream text;
  for (std::size_t i = 0; i < n; ++i) {
    text << (gen() % 2 ? "+1" : "-1") << " 1:" << g(gen) << " 2:" << g(gen) << "\n";
  }
  return parse_libsvm(text.str());
}

}  // namespace

TEST(ParseLibsvm, SparseLineToDense) {
  const auto d = parse_libsvm("+1 1:0.5 3:-1.2");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.dimensionality(), 3u);
  EXPECT_EQ(d.labels[0], 0);
  EXPECT_EQ(d.features(0, 0), 0.5);
  EXPECT_EQ(d.features(0, 1), 0.0);
  EXPECT_EQ(d.features(0, 2), -1.2);
  EXPECT_EQ(d.class_table, (std::vector<std::string>{"+1"}));
}

TEST(ParseLibsvm, EmptyFeatureListAllowed) {
  const auto d = parse_libsvm("-1\n+1 2:1");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dimensionality(), 2u);
  EXPECT_EQ(d.features(0, 0), 0.0);
  EXPECT_EQ(d.features(0, 1), 0.0);
  EXPECT_EQ(d.labels, (std::vector<ClassId>{0, 1}));
}

TEST(ParseLibsvm, LabelsByFirstAppearance) {
  const auto d = parse_libsvm("2 1:1\n-1 1:2\n2 1:3\n7 1:4\n");
  EXPECT_EQ(d.labels, (std::vector<ClassId>{0, 1, 0, 2}));
  EXPECT_EQ(d.class_table, (std::vector<std::string>{"2", "-1", "7"}));
  EXPECT_EQ(d.class_of("-1"), 1);
  EXPECT_EQ(d.class_of("3"), std::nullopt);
}

TEST(ParseLibsvm, CommentsBlankLinesAndWhitespace) {
  const auto d = parse_libsvm("# header\n\n+1 1:1 # trailing\n\t-1   2:3.5e1  \r\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.features(1, 1), 35.0);
}

TEST(ParseLibsvm, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("+1 3:1 2:1"), 1u);
  EXPECT_EQ(parse_error_line("+1 1:1\n+1 2:2 2:3"), 2u);
  EXPECT_EQ(parse_error_line("+1 1:1\n\n-1 1:x"), 3u);
  EXPECT_EQ(parse_error_line("+1 1:1\n-1 0:1"), 2u);
  EXPECT_EQ(parse_error_line("+1 1-1"), 1u);
  EXPECT_EQ(parse_error_line("abc 1:1"), 1u);
  EXPECT_EQ(parse_error_line("+1 a:1"), 1u);
  EXPECT_EQ(parse_error_line("+1 1:nan"), 1u);
  EXPECT_EQ(parse_error_line("+1 1:"), 1u);
  EXPECT_EQ(parse_error_line(""), 1u);
  EXPECT_EQ(parse_error_line("\n\n# only comments\n"), 3u);
}

TEST(ParseLibsvm, MissingFileIsNotFound) {
  EXPECT_THROW(load_libsvm("/nonexistent/file.libsvm"), NotFoundError);
}

TEST(ParseLibsvm, BundledDatasetsHaveDocumentedShapes) {
  struct Expect {
    const char* file;
    std::size_t n, d;
  };
  for (const auto& e : {Expect{"heart.libsvm", 270, 13}, Expect{"australian.libsvm", 690, 14},
                        Expect{"diabetes.libsvm", 768, 8}}) {
    const auto d = load_libsvm(data_path(e.file));
    EXPECT_EQ(d.size(), e.n) << e.file;
    EXPECT_EQ(d.dimensionality(), e.d) << e.file;
    EXPECT_EQ(d.num_classes(), 2u) << e.file;
    const auto back = roundtrip(d);
    EXPECT_EQ(back.features, d.features) << e.file;
    EXPECT_EQ(back.labels, d.labels) << e.file;
    EXPECT_EQ(back.class_table, d.class_table) << e.file;
  }
}

TEST(ParseLibsvm, RoundTripPreservesExactValues) {
  const auto d = parse_libsvm("-1 1:0.1 2:1e-300 4:123456789.125\n+1 3:-0.3333333333333333\n");
  const auto back = roundtrip(d);
  EXPECT_EQ(back.features, d.features);
  EXPECT_EQ(back.labels, d.labels);
}

// Random edits of a valid file: the parser either succeeds or throws a
// ParseError with a line number inside the file; nothing else escapes.
TEST(ParseLibsvm, FuzzedInputsFailCleanly) {
  const std::string base = "+1 1:0.5 2:1.5 4:-2\n-1 2:3 3:0.25\n+1 1:1e3\n-1 5:7\n";
  const std::string alphabet = "0123456789:+-.e# \n\tx";
  std::mt19937_64 gen(2718);
  int errors = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::string text = base;
    const int edits = 1 + int(gen() % 4);
    for (int e = 0; e < edits; ++e) {
      const std::size_t pos = gen() % (text.size() + 1);
      switch (gen() % 3) {
        case 0: text.insert(pos, 1, alphabet[gen() % alphabet.size()]); break;
        case 1: if (pos < text.size()) text.erase(pos, 1); break;
        default: if (pos < text.size()) text[pos] = alphabet[gen() % alphabet.size()]; break;
      }
    }
    const auto lines = std::count(text.begin(), text.end(), '\n') + 1;
    try {
      const auto d = parse_libsvm(text);
      EXPECT_GE(d.size(), 1u);
      EXPECT_GE(d.dimensionality(), 1u);
    } catch (const ParseError& e) {
      ++errors;
      EXPECT_GE(e.line(), 1u);
      EXPECT_LE(e.line(), std::size_t(lines));
    }
  }
  EXPECT_GT(errors, 50);
}

TEST(Split, SizesFollowRoundedFraction) {
  const auto d = synthetic(10, 1);
  const auto [train, test] = split(d, 0.3, 5);
  EXPECT_EQ(test.size(), 3u);
  EXPECT_EQ(train.size(), 7u);
  EXPECT_EQ(train.class_table, d.class_table);
}

TEST(Split, RejectsEmptyParts) {
  const auto d = synthetic(10, 1);
  EXPECT_THROW(split(d, 0.01, 0), SplitError);
  EXPECT_THROW(split(d, 0.99, 0), SplitError);
  EXPECT_THROW(split(d, 0.0, 0), SplitError);
  EXPECT_THROW(split(d, 1.0, 0), SplitError);
}

TEST(Split, DeterministicAndMultisetPreserving) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 60;
    const double fraction = 0.05 + 0.9 * double(gen() % 1000) / 1000.0;
    const std::uint64_t seed = gen();
    const auto d = synthetic(n, seed);
    const auto n_test = std::size_t(std::llround(double(n) * fraction));
    if (n_test == 0 || n_test >= n) {
      EXPECT_THROW(split(d, fraction, seed), SplitError);
      continue;
    }
    const auto [a_train, a_test] = split(d, fraction, seed);
    const auto [b_train, b_test] = split(d, fraction, seed);
    EXPECT_EQ(a_train.features, b_train.features);
    EXPECT_EQ(a_test.labels, b_test.labels);
    EXPECT_EQ(a_test.size(), n_test);
    auto joined = rows_with_labels(a_train);
    const auto t = rows_with_labels(a_test);
    joined.insert(t.begin(), t.end());
    EXPECT_EQ(joined, rows_with_labels(d));
  }
}

TEST(MinMaxScaler, MapsTrainingRangeOntoUnitInterval) {
  const Matrix x = Matrix::from_rows({{0.0, 5.0, 1.0}, {10.0, 5.0, 3.0}, {5.0, 5.0, 2.0}});
  const auto s = MinMaxScaler::fit(x);
  const Matrix y = s.transform(x);
  EXPECT_EQ(y(0, 0), -1.0);
  EXPECT_EQ(y(1, 0), 1.0);
  EXPECT_EQ(y(2, 0), 0.0);
  EXPECT_EQ(y(1, 1), 0.0);  // constant column
  EXPECT_EQ(y(2, 2), 0.0);
  EXPECT_EQ(s.transform(Matrix::from_rows({{20.0, 0.0, 1.0}}))(0, 0), 3.0);
  EXPECT_THROW(s.transform(Matrix(1, 2)), DimensionError);
}

TEST(SeedPool, CoversTwoClasses) {
  const auto d = parse_libsvm("+1 1:1\n+1 1:2\n+1 1:3\n-1 1:4\n+1 1:5\n+1 1:6\n");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = seed_pool(d, 2, seed);
    EXPECT_EQ(s.pool.labeled_count(), 2u);
    std::set<ClassId> seen;
    for (const auto& e : s.pool.labeled_view()) {
      seen.insert(e.label);
      EXPECT_EQ(e.label, d.labels[e.id]);
    }
    EXPECT_EQ(seen.size(), 2u);
    EXPECT_EQ(s.ground_truth, d.labels);
  }
}

TEST(SeedPool, SameSeedSamePool) {
  const auto d = synthetic(40, 3);
  const auto a = seed_pool(d, 10, 4), b = seed_pool(d, 10, 4);
  for (EntryId i = 0; i < d.size(); ++i) EXPECT_EQ(a.pool.label(i), b.pool.label(i));
  EXPECT_EQ(a.pool.labeled_count(), 10u);
}

TEST(SeedPool, RejectsImpossibleRequests) {
  const auto one_class = parse_libsvm("+1 1:1\n+1 1:2\n+1 1:3\n");
  EXPECT_THROW(seed_pool(one_class, 2, 0), SeedingError);
  const auto d = synthetic(5, 0);
  EXPECT_THROW(seed_pool(d, 1, 0), SeedingError);
  EXPECT_THROW(seed_pool(d, 6, 0), SeedingError);
}
