#include "mfdepth/cost_volume.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "mfdepth/scene_sim.hpp"

using namespace mfdepth;

namespace {

const Intrinsics kCam(240.0, 79.5, 23.5, 160, 48);

Scene slanted_scene() {
  Scene scene;
  scene.background_depth = 40.0;
  Surface plane;
  plane.kind = Surface::Kind::kPlane;
  plane.position = {0, 0, 10};
  plane.normal = Eigen::Vector3d(0.35, 0.1, -1).normalized();
  plane.texture.seed = 11;
  plane.texture.amplitude = 0.35;
  plane.texture.wavelength = 1.2;
  scene.add(plane);
  return scene;
}

GridF downsample4(const GridF& full) {
  GridF out(full.height() / 4, full.width() / 4);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) {
      double inv = 0.0;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) inv += 1.0 / full(y * 4 + r, x * 4 + c);
      out(y, x) = static_cast<float>(16.0 / inv);
    }
  return out;
}

FeatureGrid constant_feature(int h, int w, int channels, float value) {
  FeatureGrid f;
  f.height = h;
  f.width = w;
  f.channels = channels;
  f.data.assign(static_cast<std::size_t>(h) * w * channels, value);
  return f;
}

WarpedVolume constant_volume(int h, int w, int channels, int count,
                             float value) {
  WarpedVolume v;
  v.height = h;
  v.width = w;
  v.channels = channels;
  v.count = count;
  v.data.assign(static_cast<std::size_t>(h) * w * count * channels, value);
  v.validity.assign(static_cast<std::size_t>(h) * w * count, 1);
  return v;
}

}  // namespace

TEST(ExtractFeatures, ShapeContract) {
  Image img(48, 160);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 160; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = static_cast<float>(((x * 7 + y * 13 + c) % 29) / 29.0);
  const FeatureGrid f = extract_features(img);
  EXPECT_EQ(f.height, 12);
  EXPECT_EQ(f.width, 40);
  EXPECT_EQ(f.channels, 32);
  EXPECT_FALSE(f.textureless);
}

TEST(ExtractFeatures, DeterministicAndNormalized) {
  const RenderedFrame frame =
      render(slanted_scene(), kCam, Pose::identity());
  const FeatureGrid a = extract_features(frame.image);
  const FeatureGrid b = extract_features(frame.image);
  EXPECT_EQ(a.data, b.data);

  // Frame normalization: each non-degenerate channel has ~zero mean and
  // ~unit variance.
  const double n = static_cast<double>(a.height) * a.width;
  for (int c = 0; c < a.channels; ++c) {
    double mean = 0.0, var = 0.0;
    for (int y = 0; y < a.height; ++y)
      for (int x = 0; x < a.width; ++x) mean += a.at(y, x, c);
    mean /= n;
    for (int y = 0; y < a.height; ++y)
      for (int x = 0; x < a.width; ++x) {
        const double d = a.at(y, x, c) - mean;
        var += d * d;
      }
    var /= n;
    EXPECT_NEAR(mean, 0.0, 1e-4);
    EXPECT_NEAR(var, 1.0, 2e-2);
  }
}

TEST(ExtractFeatures, ConstantImageFallsBackToZeros) {
  Image img(16, 16, 0.3f);
  const FeatureGrid f = extract_features(img);
  EXPECT_TRUE(f.textureless);
  for (const float v : f.data) EXPECT_FLOAT_EQ(v, 0.0f);
}

TEST(ExtractFeatures, RejectsBadShapes) {
  EXPECT_THROW(extract_features(Image(13, 16)), std::invalid_argument);
  EXPECT_THROW(extract_features(Image(16, 16), 64), std::invalid_argument);
}

TEST(GroupCorrelation, AllOnesSubstitution) {
  // v = f = ones, C=4, G=2: each group inner product is 2, times 1/G -> 1.
  const WarpedVolume vol = constant_volume(2, 2, 4, 3, 1.0f);
  const FeatureGrid f = constant_feature(2, 2, 4, 1.0f);
  const CostVolume cost = group_correlation(vol, f, 2);
  for (int g = 0; g < 2; ++g)
    for (int j = 0; j < 3; ++j) EXPECT_FLOAT_EQ(cost.at(1, 1, g, j), 1.0f);
}

TEST(GroupCorrelation, OrthogonalFeaturesGiveZero) {
  WarpedVolume vol = constant_volume(1, 1, 4, 1, 0.0f);
  vol.data = {1, 0, 1, 0};
  FeatureGrid f = constant_feature(1, 1, 4, 0.0f);
  f.data = {0, 1, 0, 1};
  const CostVolume cost = group_correlation(vol, f, 2);
  EXPECT_FLOAT_EQ(cost.at(0, 0, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(cost.at(0, 0, 1, 0), 0.0f);
}

TEST(GroupCorrelation, Bilinearity) {
  WarpedVolume vol = constant_volume(1, 1, 4, 1, 1.5f);
  const FeatureGrid f = constant_feature(1, 1, 4, 0.7f);
  const CostVolume once = group_correlation(vol, f, 2);
  for (float& v : vol.data) v *= 2.0f;
  const CostVolume twice = group_correlation(vol, f, 2);
  EXPECT_FLOAT_EQ(twice.at(0, 0, 0, 0), 2.0f * once.at(0, 0, 0, 0));
}

TEST(GroupCorrelation, SingleGroupIsFullDotProduct) {
  WarpedVolume vol = constant_volume(1, 1, 6, 2, 0.0f);
  FeatureGrid f = constant_feature(1, 1, 6, 0.0f);
  double expect[2] = {0.0, 0.0};
  for (int c = 0; c < 6; ++c) {
    f.data[c] = 0.1f * (c + 1);
    for (int j = 0; j < 2; ++j) {
      vol.data[static_cast<std::size_t>(j) * 6 + c] = 0.2f * (c - 2 + j);
      expect[j] += static_cast<double>(f.data[c]) * vol.data[j * 6 + c];
    }
  }
  const CostVolume cost = group_correlation(vol, f, 1);
  EXPECT_NEAR(cost.at(0, 0, 0, 0), expect[0], 1e-6);
  EXPECT_NEAR(cost.at(0, 0, 0, 1), expect[1], 1e-6);
}

TEST(GroupCorrelation, InvalidCellsProduceZero) {
  WarpedVolume vol = constant_volume(1, 1, 4, 2, 1.0f);
  vol.validity[0] = 0;
  const FeatureGrid f = constant_feature(1, 1, 4, 1.0f);
  const CostVolume cost = group_correlation(vol, f, 2);
  EXPECT_FLOAT_EQ(cost.at(0, 0, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(cost.at(0, 0, 0, 1), 1.0f);
}

TEST(CostToProbability, EqualLogitsGiveUniform) {
  CostVolume cost;
  cost.height = cost.width = 1;
  cost.groups = 2;
  cost.count = 4;
  cost.data.assign(8, 0.25f);
  const ProbabilityVolume p = cost_to_probability(cost, 1.0);
  for (int j = 0; j < 4; ++j) EXPECT_FLOAT_EQ(p.at(0, 0, j), 0.25f);
  EXPECT_TRUE(p.low_evidence[0]);
}

TEST(CostToProbability, SoftmaxOracle) {
  // logits [1,0,0,0], tau=1: p0 = e/(e+3) ~= 0.47536, rest 0.17488.
  CostVolume cost;
  cost.height = cost.width = 1;
  cost.groups = 1;
  cost.count = 4;
  cost.data = {1.0f, 0.0f, 0.0f, 0.0f};
  const ProbabilityVolume p = cost_to_probability(cost, 1.0);
  const double e = std::exp(1.0);
  EXPECT_NEAR(p.at(0, 0, 0), e / (e + 3), 1e-6);
  for (int j = 1; j < 4; ++j) EXPECT_NEAR(p.at(0, 0, j), 1 / (e + 3), 1e-6);
  EXPECT_NEAR(p.at(0, 0, 0), 0.4754, 1e-4);
  EXPECT_NEAR(p.at(0, 0, 1), 0.1749, 1e-4);
  EXPECT_FALSE(p.low_evidence[0]);
}

TEST(CostToProbability, VanishingTemperatureIsOneHot) {
  CostVolume cost;
  cost.height = cost.width = 1;
  cost.groups = 1;
  cost.count = 4;
  cost.data = {0.2f, 0.9f, 0.3f, 0.1f};
  const ProbabilityVolume p = cost_to_probability(cost, 1e-3);
  EXPECT_NEAR(p.at(0, 0, 1), 1.0, 1e-6);
  EXPECT_NEAR(p.at(0, 0, 0), 0.0, 1e-6);
  EXPECT_NEAR(p.at(0, 0, 2), 0.0, 1e-6);
}

TEST(CostToProbability, NormalizationAndPositivity) {
  CostVolume cost;
  cost.height = 2;
  cost.width = 3;
  cost.groups = 4;
  cost.count = 8;
  cost.data.resize(2 * 3 * 4 * 8);
  for (std::size_t i = 0; i < cost.data.size(); ++i)
    cost.data[i] = static_cast<float>(std::sin(0.37 * i));
  const ProbabilityVolume p = cost_to_probability(cost, 0.5);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 3; ++x) {
      double sum = 0.0;
      for (int j = 0; j < 8; ++j) {
        EXPECT_GE(p.at(y, x, j), 0.0f);
        sum += p.at(y, x, j);
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
}

TEST(BuildWarpedVolume, IdentityPoseReproducesFeatures) {
  const RenderedFrame frame = render(slanted_scene(), kCam, Pose::identity());
  const FeatureGrid feat = extract_features(frame.image);
  const GridF centers = downsample4(frame.depth_gt);
  const HypothesisVolume hyp = sample_hypotheses(centers, 0.3, 4);
  const WarpedVolume vol =
      build_warped_volume(feat, hyp, kCam.scaled(4), Pose::identity());
  for (int y = 1; y + 1 < feat.height; ++y)
    for (int x = 1; x + 1 < feat.width; ++x)
      for (int j = 0; j < 4; ++j) {
        ASSERT_TRUE(vol.valid(y, x, j));
        const std::size_t cell =
            ((static_cast<std::size_t>(y) * feat.width + x) * 4 + j) * 32;
        for (int c = 0; c < 32; ++c)
          EXPECT_NEAR(vol.data[cell + c], feat.at(y, x, c), 1e-4);
      }
}

TEST(BuildWarpedVolume, AllWarpsOffImageInvalid) {
  const RenderedFrame frame = render(slanted_scene(), kCam, Pose::identity());
  const FeatureGrid feat = extract_features(frame.image);
  const GridF centers = downsample4(frame.depth_gt);
  const HypothesisVolume hyp = sample_hypotheses(centers, 0.3, 4);
  // 100 m lateral shift throws every warp far outside the 40-px grid.
  const WarpedVolume vol = build_warped_volume(
      feat, hyp, kCam.scaled(4), Pose::translation({100.0, 0, 0}));
  for (const auto v : vol.validity) EXPECT_EQ(v, 0);
}

TEST(BuildWarpedVolume, TrueDepthMatchesCorrespondence) {
  // A 0.4 m lateral pair: at the hypothesis nearest ground truth, the
  // warped previous-frame feature should essentially reproduce the current
  // frame feature.
  const Scene scene = slanted_scene();
  const Trajectory traj = make_linear_trajectory({4.0, 0, 0}, 2, 10.0);
  const auto frames = make_sequence(scene, traj, kCam);
  const FeatureGrid f_prev = extract_features(frames[0].image);
  const FeatureGrid f_cur = extract_features(frames[1].image);
  const GridF centers = downsample4(frames[1].depth_gt);
  const int D = 16;
  const HypothesisVolume hyp = sample_hypotheses(centers, 0.3, D);
  const Pose rel = frames[0].pose * frames[1].pose.inverse();
  const WarpedVolume vol = build_warped_volume(f_prev, hyp, kCam.scaled(4), rel);
  const CostVolume cost = group_correlation(vol, f_cur, 16);

  // Mean group similarity at the bin nearest truth must beat every bin two
  // or more steps away, on at least 95% of fully valid pixels.
  int good = 0, total = 0;
  for (int y = 0; y < f_cur.height; ++y) {
    for (int x = 0; x < f_cur.width; ++x) {
      bool all_valid = true;
      for (int j = 0; j < D; ++j) all_valid = all_valid && vol.valid(y, x, j);
      if (!all_valid) continue;
      int nearest = 0;
      double best = 1e9;
      for (int j = 0; j < D; ++j) {
        const double gap =
            std::abs(1.0 / hyp.at(y, x, j) - 1.0 / centers(y, x));
        if (gap < best) {
          best = gap;
          nearest = j;
        }
      }
      auto mean_cost = [&](int j) {
        double acc = 0.0;
        for (int g = 0; g < 16; ++g) acc += cost.at(y, x, g, j);
        return acc / 16.0;
      };
      const double at_truth = mean_cost(nearest);
      bool wins = true;
      for (int j = 0; j < D; ++j)
        if (std::abs(j - nearest) >= 2 && mean_cost(j) >= at_truth)
          wins = false;
      good += wins;
      ++total;
    }
  }
  ASSERT_GT(total, 200);
  EXPECT_GE(static_cast<double>(good) / total, 0.95);
}

TEST(ArgmaxCorrectness, NearestBinWinsOnTexturedStaticScene) {
  // Lateral baseline 0.4 m, hypotheses bracket ground truth: the argmax of
  // the decoded probability must be the bin nearest truth on >= 95% of
  // valid pixels.
  const Scene scene = slanted_scene();
  const Trajectory traj = make_linear_trajectory({4.0, 0, 0}, 2, 10.0);
  const auto frames = make_sequence(scene, traj, kCam);
  const FeatureGrid f_prev = extract_features(frames[0].image);
  const FeatureGrid f_cur = extract_features(frames[1].image);
  const GridF centers = downsample4(frames[1].depth_gt);
  const int D = 16;
  const HypothesisVolume hyp = sample_hypotheses(centers, 0.3, D);
  const Pose rel = frames[0].pose * frames[1].pose.inverse();
  const WarpedVolume vol = build_warped_volume(f_prev, hyp, kCam.scaled(4), rel);
  const CostVolume cost = group_correlation(vol, f_cur, 16);
  const ProbabilityVolume prob = cost_to_probability(cost, 0.05);

  int good = 0, total = 0;
  for (int y = 0; y < f_cur.height; ++y) {
    for (int x = 0; x < f_cur.width; ++x) {
      bool all_valid = true;
      for (int j = 0; j < D; ++j) all_valid = all_valid && vol.valid(y, x, j);
      if (!all_valid) continue;
      int nearest = 0, argmax = 0;
      double best = 1e9;
      for (int j = 0; j < D; ++j) {
        const double gap =
            std::abs(1.0 / hyp.at(y, x, j) - 1.0 / centers(y, x));
        if (gap < best) {
          best = gap;
          nearest = j;
        }
        if (prob.at(y, x, j) > prob.at(y, x, argmax)) argmax = j;
      }
      good += argmax == nearest;
      ++total;
    }
  }
  ASSERT_GT(total, 200);
  EXPECT_GE(static_cast<double>(good) / total, 0.95);
}
