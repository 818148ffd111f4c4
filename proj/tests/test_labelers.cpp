#include <gtest/gtest.h>

#include <sstream>

#include "alkit/labelers.hpp"

using namespace alkit;

TEST(IdealLabeler, ReturnsGroundTruth) {
  IdealLabeler l({1, 0, 1});
  EXPECT_EQ(l.label(2), 1);
  EXPECT_EQ(l.label(2), 1);
  EXPECT_EQ(l.label(1), 0);
  EXPECT_THROW(l.label(99), NotFoundError);
  const std::vector<double> x{0.0};
  EXPECT_EQ(static_cast<Labeler&>(l).label(0, x), 1);
}

TEST(TerminalLabeler, AcceptsFirstValidToken) {
  std::istringstream in("-1\n");
  std::ostringstream out;
  TerminalLabeler l(in, out, {"+1", "-1"});
  const std::vector<double> x{1.5, -2.0};
  EXPECT_EQ(l.label(4, x), 1);
  EXPECT_EQ(l.reprompts(), 0u);
  EXPECT_NE(out.str().find("example 4"), std::string::npos);
  EXPECT_NE(out.str().find("f2"), std::string::npos);
  EXPECT_NE(out.str().find("label [+1/-1]"), std::string::npos);
}

TEST(TerminalLabeler, RepromptsOnInvalidToken) {
  std::istringstream in("maybe\n  +1  \n");
  std::ostringstream out;
  TerminalLabeler l(in, out, {"+1", "-1"});
  const std::vector<double> x{0.0};
  EXPECT_EQ(l.label(0, x), 0);
  EXPECT_EQ(l.reprompts(), 1u);
  EXPECT_NE(out.str().find("invalid label 'maybe'"), std::string::npos);
}

TEST(TerminalLabeler, ClosedInputAborts) {
  std::istringstream in("");
  std::ostringstream out;
  TerminalLabeler l(in, out, {"a", "b"});
  const std::vector<double> x{0.0};
  EXPECT_THROW(l.label(0, x), AbortedSessionError);
}

TEST(RenderFeatures, ImageHintDrawsShadeGrid) {
  std::ostringstream out;
  DisplayHint hint;
  hint.image_shape = std::make_pair(2, 3);
  const std::vector<double> px{0.0, 0.5, 1.0, 1.0, 0.5, 0.0};
  render_features(out, px, hint);
  EXPECT_EQ(out.str(), " +@\n@+ \n");
}

TEST(RenderFeatures, MismatchedShapeFallsBackToTable) {
  std::ostringstream out;
  DisplayHint hint;
  hint.image_shape = std::make_pair(2, 2);
  hint.feature_names = {"age"};
  const std::vector<double> x{63.0, 1.0, 0.25};
  render_features(out, x, hint);
  EXPECT_NE(out.str().find("age"), std::string::npos);
  EXPECT_NE(out.str().find("63"), std::string::npos);
  EXPECT_NE(out.str().find("f3"), std::string::npos);
}
