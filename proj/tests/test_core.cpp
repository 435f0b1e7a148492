#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "safeor/core.hpp"

using namespace safeor;

TEST(AffineDecode, LowerEndpoint) { EXPECT_EQ(affine_decode(-1.0, {0.0, 10.0}), 0.0); }

TEST(AffineDecode, UpperEndpoint) { EXPECT_EQ(affine_decode(1.0, {2.0, 8.0}), 8.0); }

TEST(AffineDecode, Midpoint) { EXPECT_EQ(affine_decode(0.0, {0.0, 10.0}), 5.0); }

TEST(AffineDecode, EndpointsExactForAwkwardBounds) {
  const Bounds b{0.1, 0.7};
  EXPECT_EQ(affine_decode(-1.0, b), 0.1);
  EXPECT_EQ(affine_decode(1.0, b), 0.7);
}

TEST(AffineDecode, ClampsOutsideCube) {
  EXPECT_EQ(affine_decode(-7.0, {1.0, 3.0}), 1.0);
  EXPECT_EQ(affine_decode(4.0, {1.0, 3.0}), 3.0);
}

TEST(AffineDecode, Monotone) {
  const Bounds b{-3.0, 11.0};
  double prev = affine_decode(-1.0, b);
  for (int i = 1; i <= 2000; ++i) {
    const double x = affine_decode(-1.0 + i / 1000.0, b);
    EXPECT_GE(x, prev);
    prev = x;
  }
}

TEST(AffineDecode, RejectsNonFinite) {
  EXPECT_THROW(affine_decode(std::nan(""), {0.0, 1.0}), InvalidAction);
  EXPECT_THROW(affine_decode(std::numeric_limits<double>::infinity(), {0.0, 1.0}), InvalidAction);
}

TEST(ClipWithPenalty, InBoundsIdentity) {
  const auto r = clip_with_penalty(5.0, {0.0, 10.0}, 2.0);
  EXPECT_EQ(r.value, 5.0);
  EXPECT_EQ(r.penalty, 0.0);
}

TEST(ClipWithPenalty, AboveUpper) {
  const auto r = clip_with_penalty(12.0, {0.0, 10.0}, 2.0);
  EXPECT_EQ(r.value, 10.0);
  EXPECT_EQ(r.penalty, 4.0);
}

TEST(ClipWithPenalty, BelowLower) {
  const auto r = clip_with_penalty(-3.0, {0.0, 10.0}, 1.0);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.penalty, 3.0);
}

TEST(ClipWithPenalty, PenaltyZeroExactlyInBounds) {
  const Bounds b{-1.5, 2.5};
  for (double x = -4.0; x <= 5.0; x += 0.25) {
    const auto r = clip_with_penalty(x, b, 3.0);
    EXPECT_EQ(r.penalty == 0.0, b.contains(x)) << x;
    EXPECT_EQ(r.value, std::clamp(x, b.lo, b.hi));
  }
}

TEST(ForecastWindow, PadsPastEnd) {
  const ForecastWindow w{{4, 5, 6}, 0, 3};
  EXPECT_EQ(w.window(1), (std::vector<double>{5, 6, 0}));
}

TEST(ForecastWindow, NoPaddingNeeded) {
  const ForecastWindow w{{4, 5, 6}, 0, 2};
  EXPECT_EQ(w.window(0), (std::vector<double>{4, 5}));
}

TEST(ForecastWindow, EmptySeries) {
  const ForecastWindow w{{}, 0, 2};
  EXPECT_EQ(w.window(0), (std::vector<double>{0, 0}));
}

TEST(ForecastWindow, StartPastHorizonThrows) {
  const ForecastWindow w{{1, 2}, 0, 2};
  EXPECT_NO_THROW(w.window(2));
  EXPECT_THROW(w.window(3), std::out_of_range);
}

TEST(CostKeys, SumsOnlyPrefixedEntries) {
  const Info info{{"cost_a", 1.5}, {"cost_b", 2.0}, {"revenue", 100.0}, {"costly", 7.0}};
  EXPECT_EQ(sum_cost_components(info), 3.5);
}

namespace {

class Counter final : public Env {
 public:
  std::string_view name() const override { return "Counter"; }
  std::size_t action_dim() const override { return 2; }
  std::size_t observation_dim() const override { return 1; }
  int horizon() const override { return 3; }
  std::unique_ptr<Env> clone() const override { return std::make_unique<Counter>(*this); }
  std::vector<double> last;

 protected:
  Observation do_reset() override { return {0.0}; }
  StepOutcome advance(std::span<const double> a) override {
    last.assign(a.begin(), a.end());
    StepOutcome out;
    out.observation = {static_cast<double>(time() + 1)};
    out.info = {{"cost_x", 0.25}, {"cost_y", 0.5}, {"note", 9.0}};
    return out;
  }
};

}  // namespace

TEST(EnvBase, ClampsAndTerminates) {
  Counter env;
  env.reset();
  auto out = env.step(std::vector<double>{3.0, -0.5});
  EXPECT_EQ(env.last, (std::vector<double>{1.0, -0.5}));
  EXPECT_EQ(out.cost, 0.75);
  EXPECT_FALSE(out.terminated);
  env.step(std::vector<double>{0.0, 0.0});
  out = env.step(std::vector<double>{0.0, 0.0});
  EXPECT_TRUE(out.terminated);
  EXPECT_FALSE(out.truncated);
  EXPECT_THROW(env.step(std::vector<double>{0.0, 0.0}), EpisodeFinished);
}

TEST(EnvBase, WrongDimension) {
  Counter env;
  env.reset();
  EXPECT_THROW(env.step(std::vector<double>{0.0}), DimensionMismatch);
  EXPECT_EQ(env.time(), 0);
}

TEST(EnvBase, NonFiniteActionRejectedWithoutAdvancing) {
  Counter env;
  env.reset();
  EXPECT_THROW(env.step(std::vector<double>{std::nan(""), 0.0}), InvalidAction);
  EXPECT_EQ(env.time(), 0);
}
