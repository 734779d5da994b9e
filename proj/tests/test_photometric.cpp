#include "mfdepth/photometric.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mfdepth/scene_sim.hpp"

using namespace mfdepth;

namespace {

const Intrinsics kCam(240.0, 79.5, 23.5, 160, 48);

Scene test_scene() {
  Scene scene;
  scene.background_depth = 40.0;
  Surface plane;
  plane.kind = Surface::Kind::kPlane;
  plane.position = {0, 0, 10};
  plane.normal = Eigen::Vector3d(0.3, 0.1, -1).normalized();
  plane.texture.seed = 21;
  plane.texture.wavelength = 1.6;
  scene.add(plane);
  return scene;
}

DepthMap full_map(const GridF& data) {
  DepthMap m;
  m.data = data;
  m.resolution = MapResolution::kFull;
  m.kind = DepthKind::kMono;
  return m;
}

Image random_image(int h, int w, unsigned seed) {
  Image img(h, w);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> ud(0.0f, 1.0f);
  for (float& v : img.data()) v = ud(rng);
  return img;
}

// Scalar SSIM of two constant patches: means (a, b), variances 0.
double constant_patch_ssim(double a, double b) {
  const double c1 = 1e-4, c2 = 9e-4;
  return ((2 * a * b + c1) * c2) / ((a * a + b * b + c1) * c2);
}

}  // namespace

TEST(Synthesize, IdentityPoseReproducesSource) {
  const RenderedFrame frame = render(test_scene(), kCam, Pose::identity());
  const SynthesizedImage synth = synthesize(
      frame.image, full_map(frame.depth_gt), kCam, Pose::identity());
  for (int y = 0; y < kCam.height; ++y)
    for (int x = 0; x < kCam.width; ++x) {
      ASSERT_TRUE(synth.validity(y, x));
      for (int c = 0; c < 3; ++c)
        EXPECT_FLOAT_EQ(synth.image.at(y, x, c), frame.image.at(y, x, c));
    }
}

TEST(Synthesize, GroundTruthWarpReproducesTarget) {
  const Scene scene = test_scene();
  const Trajectory traj = make_linear_trajectory({4.0, 0, 0}, 2, 10.0);
  const auto frames = make_sequence(scene, traj, kCam);
  const Pose rel = frames[0].pose * frames[1].pose.inverse();
  const SynthesizedImage synth =
      synthesize(frames[0].image, full_map(frames[1].depth_gt), kCam, rel);
  double l1 = 0.0;
  long count = 0;
  for (int y = 0; y < kCam.height; ++y)
    for (int x = 0; x < kCam.width; ++x) {
      if (!synth.validity(y, x)) continue;
      for (int c = 0; c < 3; ++c)
        l1 += std::abs(synth.image.at(y, x, c) - frames[1].image.at(y, x, c));
      count += 3;
    }
  ASSERT_GT(count, 1000);
  EXPECT_LT(l1 / count, 0.01);
}

TEST(Synthesize, WrongDepthScaleMisaligns) {
  const Scene scene = test_scene();
  const Trajectory traj = make_linear_trajectory({4.0, 0, 0}, 2, 10.0);
  const auto frames = make_sequence(scene, traj, kCam);
  const Pose rel = frames[0].pose * frames[1].pose.inverse();
  GridF doubled = frames[1].depth_gt;
  for (float& v : doubled.data()) v *= 2.0f;
  const SynthesizedImage synth =
      synthesize(frames[0].image, full_map(doubled), kCam, rel);
  double l1 = 0.0;
  long count = 0;
  for (int y = 0; y < kCam.height; ++y)
    for (int x = 0; x < kCam.width; ++x) {
      if (!synth.validity(y, x)) continue;
      for (int c = 0; c < 3; ++c)
        l1 += std::abs(synth.image.at(y, x, c) - frames[1].image.at(y, x, c));
      count += 3;
    }
  ASSERT_GT(count, 1000);
  EXPECT_GT(l1 / count, 0.02);  // clearly above the noise floor
}

TEST(PhotometricError, IdenticalImagesGiveExactZero) {
  const Image img = random_image(24, 32, 5);
  const GridF pe = photometric_error(img, img);
  for (const float v : pe.data()) EXPECT_EQ(v, 0.0f);
}

TEST(PhotometricError, ConstantPatchOracle) {
  // a = 0, b = 1: SSIM is c2-dominated; L1 term contributes 0.15.
  Image a(16, 16, 0.0f), b(16, 16, 1.0f);
  const GridF pe = photometric_error(a, b);
  const double expected =
      0.85 * (1.0 - constant_patch_ssim(0.0, 1.0)) / 2.0 + 0.15;
  for (const float v : pe.data()) EXPECT_NEAR(v, expected, 1e-6);
}

TEST(PhotometricError, Symmetric) {
  const Image a = random_image(20, 28, 7);
  const Image b = random_image(20, 28, 8);
  const GridF ab = photometric_error(a, b);
  const GridF ba = photometric_error(b, a);
  for (std::size_t i = 0; i < ab.size(); ++i)
    EXPECT_NEAR(ab.data()[i], ba.data()[i], 1e-9);
}

TEST(PhotometricError, NonNegative) {
  const Image a = random_image(20, 28, 9);
  const Image b = random_image(20, 28, 10);
  for (const float v : photometric_error(a, b).data()) EXPECT_GE(v, 0.0f);
}

namespace {
SynthesizedImage wrap_valid(const Image& img) {
  SynthesizedImage s;
  s.image = img;
  s.validity = GridB(img.height(), img.width(), 1);
  return s;
}
}  // namespace

TEST(MinReprojection, PerfectViewsGiveZero) {
  const Image target = random_image(16, 20, 11);
  EXPECT_EQ(min_reprojection_loss(target, {wrap_valid(target),
                                           wrap_valid(target)}),
            0.0);
}

TEST(MinReprojection, MinSelectsThePerfectView) {
  const Image target = random_image(16, 20, 12);
  Image corrupted = target;
  for (float& v : corrupted.data()) v = 1.0f - v;
  EXPECT_EQ(min_reprojection_loss(
                target, {wrap_valid(target), wrap_valid(corrupted)}),
            0.0);
}

TEST(MinReprojection, SingleViewReducesToMeanError) {
  const Image target = random_image(16, 20, 13);
  const Image other = random_image(16, 20, 14);
  const GridF pe = photometric_error(target, other);
  double mean = 0.0;
  for (const float v : pe.data()) mean += v;
  mean /= pe.size();
  EXPECT_NEAR(min_reprojection_loss(target, {wrap_valid(other)}), mean, 1e-7);
}

TEST(MinReprojection, BoundedByEachView) {
  const Image target = random_image(16, 20, 15);
  const Image v1 = random_image(16, 20, 16);
  const Image v2 = random_image(16, 20, 17);
  const double joint =
      min_reprojection_loss(target, {wrap_valid(v1), wrap_valid(v2)});
  EXPECT_LE(joint, min_reprojection_loss(target, {wrap_valid(v1)}) + 1e-12);
  EXPECT_LE(joint, min_reprojection_loss(target, {wrap_valid(v2)}) + 1e-12);
}

TEST(MinReprojection, NoValidPixelsThrows) {
  const Image target = random_image(8, 8, 18);
  SynthesizedImage s = wrap_valid(target);
  s.validity = GridB(8, 8, 0);
  EXPECT_THROW(min_reprojection_loss(target, {s}), NoValidPixels);
}

TEST(SmoothnessLoss, ConstantDepthIsZero) {
  const Image img = random_image(12, 16, 19);
  EXPECT_EQ(smoothness_loss(full_map(GridF(12, 16, 9.0f)), img), 0.0);
}

TEST(SmoothnessLoss, RampMatchesClosedForm) {
  // Inverse depth ramps linearly on a constant image: the loss equals the
  // mean |gradient| of mean-normalized inverse depth.
  const int h = 8, w = 16;
  GridF depth(h, w);
  double inv_sum = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double inv = 0.1 + 0.002 * x;
      depth(y, x) = static_cast<float>(1.0 / inv);
      inv_sum += 1.0 / depth(y, x);
    }
  const double inv_mean = inv_sum / (h * w);
  Image img(h, w, 0.4f);

  double expected = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 1 < w; ++x)
      expected += std::abs(1.0 / depth(y, x + 1) - 1.0 / depth(y, x)) / inv_mean;
  expected /= static_cast<double>(h) * (w - 1);

  EXPECT_NEAR(smoothness_loss(full_map(depth), img), expected, 1e-9);
}

TEST(SmoothnessLoss, ImageEdgeDampsDepthEdge) {
  const int h = 8, w = 16;
  GridF depth(h, w, 10.0f);
  for (int y = 0; y < h; ++y)
    for (int x = w / 2; x < w; ++x) depth(y, x) = 5.0f;

  Image flat(h, w, 0.5f);
  Image edged = flat;
  for (int y = 0; y < h; ++y)
    for (int x = w / 2; x < w; ++x)
      for (int c = 0; c < 3; ++c) edged.at(y, x, c) = 1.0f;

  EXPECT_LT(smoothness_loss(full_map(depth), edged),
            smoothness_loss(full_map(depth), flat));
}

TEST(CompositeLoss, GroundTruthDepthLeavesOnlySmoothness) {
  const Scene scene = test_scene();
  const Trajectory traj = make_linear_trajectory({4.0, 0, 0}, 3, 10.0);
  const auto frames = make_sequence(scene, traj, kCam);
  const Pose to_prev = frames[0].pose * frames[1].pose.inverse();
  const Pose to_next = frames[2].pose * frames[1].pose.inverse();
  const DepthMap gt = full_map(frames[1].depth_gt);

  LossWeights weights;
  const LossBreakdown loss = composite_loss(
      frames[1].image, {{&frames[0].image, to_prev}, {&frames[2].image, to_next}},
      gt, gt, gt, kCam, weights);

  // Reprojection at true depth+pose is interpolation error only.
  EXPECT_LT(loss.reprojection / 3.0, 0.005);
  EXPECT_NEAR(loss.total, loss.reprojection + weights.gamma * loss.smoothness,
              1e-12);
  EXPECT_GT(loss.smoothness, 0.0);
}

TEST(CompositeLoss, LambdaGatingAndGammaZero) {
  const Scene scene = test_scene();
  const Trajectory traj = make_linear_trajectory({4.0, 0, 0}, 2, 10.0);
  const auto frames = make_sequence(scene, traj, kCam);
  const Pose rel = frames[0].pose * frames[1].pose.inverse();
  const DepthMap gt = full_map(frames[1].depth_gt);
  GridF wrong_data = frames[1].depth_gt;
  for (float& v : wrong_data.data()) v *= 1.7f;
  const DepthMap wrong = full_map(wrong_data);

  LossWeights mono_only;
  mono_only.lambda_mvs = 0.0;
  mono_only.lambda_fused = 0.0;
  const LossBreakdown a = composite_loss(
      frames[1].image, {{&frames[0].image, rel}}, gt, wrong, wrong, kCam,
      mono_only);
  const LossBreakdown b = composite_loss(
      frames[1].image, {{&frames[0].image, rel}}, gt, gt, gt, kCam, mono_only);
  EXPECT_DOUBLE_EQ(a.total, b.total);  // mvs/fused do not contribute

  LossWeights no_smooth;
  no_smooth.gamma = 0.0;
  const LossBreakdown c = composite_loss(
      frames[1].image, {{&frames[0].image, rel}}, gt, gt, gt, kCam, no_smooth);
  EXPECT_DOUBLE_EQ(c.total, c.reprojection);
}
