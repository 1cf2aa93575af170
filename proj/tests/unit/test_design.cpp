#include <gtest/gtest.h>

#include "ipwkit/design.hpp"
#include "ipwkit/error.hpp"

namespace ipwkit {
namespace {

Eigen::VectorXd seq(std::initializer_list<double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.begin(), static_cast<Eigen::Index>(v.size()));
}

TEST(Standardize, ZScoresContinuousColumns) {
  const auto s = standardize(std::vector<MainColumn>{{"a", seq({1, 2, 3}), ColumnRole::kContinuous}});
  EXPECT_NEAR(s.matrix(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(s.matrix(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(s.matrix(2, 0), 1.0, 1e-15);
}

TEST(Standardize, BinaryPassesThroughConstantDropped) {
  const auto s = standardize(std::vector<MainColumn>{{"b", seq({0, 1, 1, 0}), ColumnRole::kBinary},
                              {"c", seq({7, 7, 7, 7}), ColumnRole::kContinuous}});
  ASSERT_EQ(s.names, std::vector<std::string>{"b"});
  EXPECT_EQ(s.matrix.col(0), Eigen::Vector4d(0, 1, 1, 0));
  EXPECT_EQ(s.scaling.constant_columns, std::vector<std::string>{"c"});
}

TEST(Standardize, Errors) {
  EXPECT_THROW(standardize(std::vector<MainColumn>{{"a", seq({1}), ColumnRole::kContinuous}}), DataError);
  EXPECT_THROW(standardize(std::vector<MainColumn>{{"a", seq({1, 1}), ColumnRole::kContinuous}}), DataError);
}

TEST(Standardize, MomentsAndReapplication) {
  Eigen::VectorXd a(101), b(101);
  for (int i = 0; i < 101; ++i) {
    a[i] = std::sin(i) * 40 + 1000;
    b[i] = i % 7;
  }
  const std::vector<MainColumn> cols{{"a", a, ColumnRole::kContinuous},
                                     {"b", b, ColumnRole::kContinuous}};
  const auto s = standardize(cols);
  for (Eigen::Index j = 0; j < 2; ++j) {
    const auto c = s.matrix.col(j);
    const double mean = c.mean();
    const double sd = std::sqrt((c.array() - mean).square().sum() / 100.0);
    EXPECT_LE(std::abs(mean), 1e-10);
    EXPECT_LE(std::abs(sd - 1.0), 1e-10);
  }
  const Eigen::MatrixXd again = s.scaling.apply(cols);
  EXPECT_TRUE((again.array() == s.matrix.array()).all());
}

TEST(ExpandInteractions, SmallestCase) {
  StandardizedMains m;
  m.matrix.resize(1, 2);
  m.matrix << 2, 3;
  m.names = {"a", "b"};
  m.roles = {ColumnRole::kContinuous, ColumnRole::kContinuous};
  const auto d = expand_interactions(m);
  EXPECT_EQ(d.names, (std::vector<std::string>{"(intercept)", "a", "b", "a:b"}));
  EXPECT_EQ(d.x(0, 0), 1.0);
  EXPECT_EQ(d.x(0, 3), 6.0);
  EXPECT_EQ(d.tags[3].kind, ColumnTag::Kind::kInteraction);
}

TEST(ExpandInteractions, ThirteenMainsPlusIndicators) {
  StandardizedMains m;
  m.matrix = Eigen::MatrixXd::Random(5, 15);
  for (int j = 0; j < 13; ++j) {
    m.names.push_back("m" + std::to_string(j));
    m.roles.push_back(ColumnRole::kContinuous);
  }
  m.names.push_back("m0_missing");
  m.names.push_back("m1_missing");
  m.roles.push_back(ColumnRole::kIndicator);
  m.roles.push_back(ColumnRole::kIndicator);
  const auto d = expand_interactions(m);
  EXPECT_EQ(d.cols(), 1 + 13 + 2 + 78);
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    const auto& t = d.tags[static_cast<std::size_t>(j)];
    if (t.kind != ColumnTag::Kind::kInteraction) continue;
    EXPECT_TRUE(d.x.col(j).isApprox(d.x.col(t.parent_a).cwiseProduct(d.x.col(t.parent_b))));
    EXPECT_EQ(d.tags[static_cast<std::size_t>(t.parent_a)].kind, ColumnTag::Kind::kMain);
  }
  InteractionPolicy none{InteractionPolicy::Mode::kNone, {}};
  EXPECT_EQ(expand_interactions(m, none).cols(), 16);
}

TEST(ExpandInteractions, ExplicitPolicy) {
  StandardizedMains m;
  m.matrix = Eigen::MatrixXd::Random(4, 3);
  m.names = {"a", "b", "c"};
  m.roles.assign(3, ColumnRole::kContinuous);
  InteractionPolicy p{InteractionPolicy::Mode::kExplicit, {{"a", "c"}}};
  const auto d = expand_interactions(m, p);
  EXPECT_EQ(d.cols(), 5);
  EXPECT_EQ(d.names.back(), "a:c");
  p.pairs = {{"a", "zzz"}};
  EXPECT_THROW(expand_interactions(m, p), DataError);
}

}  // namespace
}  // namespace ipwkit
