#include "mfdepth/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mfdepth {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice_value(std::int64_t ix, std::int64_t iy, std::uint32_t seed) {
  std::uint64_t h = mix64((static_cast<std::uint64_t>(ix) << 32) ^
                          (static_cast<std::uint64_t>(iy) & 0xffffffffULL) ^
                          (static_cast<std::uint64_t>(seed) << 17));
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double noise_layer(double x, double y, std::uint32_t seed) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double tx = smoothstep(x - fx);
  const double ty = smoothstep(y - fy);
  const double v00 = lattice_value(ix, iy, seed);
  const double v01 = lattice_value(ix + 1, iy, seed);
  const double v10 = lattice_value(ix, iy + 1, seed);
  const double v11 = lattice_value(ix + 1, iy + 1, seed);
  return (1 - ty) * ((1 - tx) * v00 + tx * v01) +
         ty * ((1 - tx) * v10 + tx * v11);
}

// Fixed world light direction used only by the specular toggle.
const Eigen::Vector3d kGlintDir = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  int id = -1;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  double s = 0.0, u = 0.0;  // surface texture coordinates (meters)
};

// Deterministic in-plane frame for texture coordinates.
void plane_axes(const Eigen::Vector3d& n, Eigen::Vector3d& eu,
                Eigen::Vector3d& ev) {
  const Eigen::Vector3d ref = std::abs(n.y()) < 0.9
                                  ? Eigen::Vector3d::UnitY()
                                  : Eigen::Vector3d::UnitX();
  eu = ref.cross(n).normalized();
  ev = n.cross(eu);
}

bool intersect_plane(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                     const Eigen::Vector3d& point, const Eigen::Vector3d& n,
                     double half_u, double half_v, Hit* hit) {
  const double dn = dir.dot(n);
  if (std::abs(dn) < 1e-12) return false;
  const double t = (point - origin).dot(n) / dn;
  if (t <= 1e-9) return false;
  const Eigen::Vector3d p = origin + t * dir;
  Eigen::Vector3d eu, ev;
  plane_axes(n, eu, ev);
  const double s = (p - point).dot(eu);
  const double u = (p - point).dot(ev);
  if (half_u > 0.0 && (std::abs(s) > half_u || std::abs(u) > half_v))
    return false;
  hit->t = t;
  hit->point = p;
  hit->s = s;
  hit->u = u;
  return true;
}

bool intersect_sphere(const Eigen::Vector3d& origin,
                      const Eigen::Vector3d& dir, const Eigen::Vector3d& c,
                      double radius, Hit* hit) {
  const Eigen::Vector3d oc = origin - c;
  const double a = dir.squaredNorm();
  const double b = 2.0 * oc.dot(dir);
  const double cc = oc.squaredNorm() - radius * radius;
  const double disc = b * b - 4 * a * cc;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  double t = (-b - sq) / (2 * a);
  if (t <= 1e-9) t = (-b + sq) / (2 * a);
  if (t <= 1e-9) return false;
  const Eigen::Vector3d p = origin + t * dir;
  const Eigen::Vector3d local = (p - c) / radius;
  hit->t = t;
  hit->point = p;
  hit->s = std::atan2(local.z(), local.x()) * radius;
  hit->u = std::asin(std::clamp(local.y(), -1.0, 1.0)) * radius;
  return true;
}

void shade(const TextureSpec& tex, double s, double u,
           const Eigen::Vector3d& view_dir, float rgb[3]) {
  double value = 0.0;
  if (!tex.textureless) {
    const double inv_w = 1.0 / tex.wavelength;
    // Three octaves keep the texture band-limited: smooth enough for
    // bilinear resampling, busy enough for feature matching.
    const double n = 0.5 * noise_layer(s * inv_w, u * inv_w, tex.seed) +
                     0.3 * noise_layer(s * 2 * inv_w + 13.7,
                                       u * 2 * inv_w + 7.1, tex.seed + 1) +
                     0.2 * noise_layer(s * 4 * inv_w + 31.4,
                                       u * 4 * inv_w + 17.9, tex.seed + 2);
    value = tex.amplitude * 2.0 * (n - 0.5);
    const auto cs = static_cast<std::int64_t>(std::floor(s / tex.checker_period));
    const auto cu = static_cast<std::int64_t>(std::floor(u / tex.checker_period));
    value += ((cs + cu) & 1) ? tex.checker : -tex.checker;
  }
  double glint = 0.0;
  if (tex.specular > 0.0) {
    const double align = std::max(0.0, -view_dir.normalized().dot(kGlintDir));
    glint = tex.specular * std::pow(align, 16.0);
  }
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<float>(
        std::clamp(static_cast<double>(tex.base[c]) + value + glint, 0.0, 1.0));
  }
}

}  // namespace

double value_noise(double x, double y, std::uint32_t seed, int octaves) {
  double sum = 0.0, weight = 0.5, total = 0.0, freq = 1.0;
  for (int o = 0; o < std::max(1, octaves); ++o) {
    sum += weight * noise_layer(x * freq + o * 13.7, y * freq + o * 7.1,
                                seed + static_cast<std::uint32_t>(o));
    total += weight;
    weight *= 0.5;
    freq *= 2.0;
  }
  return sum / total;
}

int Scene::add(Surface s) {
  surfaces.push_back(std::move(s));
  return static_cast<int>(surfaces.size());  // backdrop occupies id 0
}

Trajectory make_linear_trajectory(const Eigen::Vector3d& velocity_mps,
                                  int frame_count, double frame_rate) {
  if (frame_count < 1)
    throw std::invalid_argument("make_linear_trajectory: need >= 1 frame");
  if (!(frame_rate > 0.0))
    throw std::invalid_argument("make_linear_trajectory: frame_rate <= 0");
  Trajectory traj;
  traj.frame_rate = frame_rate;
  traj.poses.reserve(frame_count);
  for (int k = 0; k < frame_count; ++k) {
    const Eigen::Vector3d center = velocity_mps * (k / frame_rate);
    traj.poses.push_back(Pose{Eigen::Matrix3d::Identity(), -center});
  }
  return traj;
}

RenderedFrame render(const Scene& scene, const Intrinsics& camera,
                     const Pose& pose, double time) {
  if (!(scene.background_depth > 0.0))
    throw std::invalid_argument("render: background_depth must be > 0");

  const Eigen::Vector3d origin = -(pose.R.transpose() * pose.T);

  for (std::size_t i = 0; i < scene.surfaces.size(); ++i) {
    const Surface& s = scene.surfaces[i];
    if (s.kind == Surface::Kind::kSphere &&
        (origin - (s.position + s.velocity * time)).norm() <= s.radius)
      throw InvalidCameraPlacement("render: camera inside sphere");
  }
  if (origin.z() >= scene.background_depth)
    throw InvalidCameraPlacement("render: camera behind the backdrop");

  RenderedFrame frame;
  frame.image = Image(camera.height, camera.width);
  frame.depth_gt = GridF(camera.height, camera.width);
  frame.surface_id = GridI(camera.height, camera.width, 0);
  frame.pose = pose;
  frame.time = time;

  const Eigen::Matrix3d Rt = pose.R.transpose();

  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      // Ray scaled so the parameter t equals camera-frame z-depth.
      const Eigen::Vector3d dir_cam((x - camera.cu) / camera.f,
                                    (y - camera.cv) / camera.f, 1.0);
      const Eigen::Vector3d dir = Rt * dir_cam;

      Hit best;
      int best_id = 0;
      const TextureSpec* best_tex = &scene.background_texture;

      Hit h;
      if (intersect_plane(origin, dir,
                          Eigen::Vector3d(0, 0, scene.background_depth),
                          -Eigen::Vector3d::UnitZ(), 0.0, 0.0, &h)) {
        best = h;
      }
      for (std::size_t i = 0; i < scene.surfaces.size(); ++i) {
        const Surface& s = scene.surfaces[i];
        const Eigen::Vector3d at = s.position + s.velocity * time;
        bool ok = s.kind == Surface::Kind::kPlane
                      ? intersect_plane(origin, dir, at, s.normal, s.half_u,
                                        s.half_v, &h)
                      : intersect_sphere(origin, dir, at, s.radius, &h);
        if (ok && h.t < best.t) {
          best = h;
          best_id = static_cast<int>(i) + 1;
          best_tex = &s.texture;
        }
      }

      if (!std::isfinite(best.t))
        throw std::runtime_error("render: ray escaped the scene");
      if (best.t < scene.depth_floor || best.t > scene.depth_ceiling)
        throw std::runtime_error("render: hit outside configured depth bounds");

      float rgb[3];
      shade(*best_tex, best.s, best.u, dir, rgb);
      for (int c = 0; c < 3; ++c) frame.image.at(y, x, c) = rgb[c];
      frame.depth_gt(y, x) = static_cast<float>(best.t);
      frame.surface_id(y, x) = best_id;
    }
  }
  return frame;
}

std::vector<RenderedFrame> make_sequence(const Scene& scene,
                                         const Trajectory& trajectory,
                                         const Intrinsics& camera) {
  if (trajectory.poses.size() < 2)
    throw std::invalid_argument("make_sequence: need >= 2 poses");
  std::vector<RenderedFrame> frames;
  frames.reserve(trajectory.poses.size());
  for (std::size_t k = 0; k < trajectory.poses.size(); ++k) {
    frames.push_back(render(scene, camera, trajectory.poses[k],
                            static_cast<double>(k) / trajectory.frame_rate));
  }
  return frames;
}

DepthMap perturb_prior(const GridF& depth_gt, const PriorNoise& noise,
                       std::uint64_t seed) {
  DepthMap out;
  out.data = GridF(depth_gt.height(), depth_gt.width());
  out.kind = DepthKind::kMono;
  out.resolution = MapResolution::kFull;

  switch (noise.model) {
    case PriorNoiseModel::kMultiplicative: {
      if (noise.sigma < 0.0)
        throw std::invalid_argument("perturb_prior: sigma must be >= 0");
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (std::size_t i = 0; i < depth_gt.size(); ++i) {
        const double factor =
            std::max(0.05, 1.0 + noise.sigma * gauss(rng));
        out.data.data()[i] = static_cast<float>(depth_gt.data()[i] * factor);
      }
      break;
    }
    case PriorNoiseModel::kConstantBias: {
      if (!(noise.bias > 0.0))
        throw std::invalid_argument("perturb_prior: bias must be > 0");
      for (std::size_t i = 0; i < depth_gt.size(); ++i)
        out.data.data()[i] =
            static_cast<float>(depth_gt.data()[i] * noise.bias);
      break;
    }
    case PriorNoiseModel::kLowFrequency: {
      const double inv_w = 1.0 / std::max(1.0, noise.wavelength);
      const auto nseed = static_cast<std::uint32_t>(seed & 0xffffffffULL);
      for (int y = 0; y < depth_gt.height(); ++y) {
        for (int x = 0; x < depth_gt.width(); ++x) {
          const double field =
              2.0 * (value_noise(x * inv_w, y * inv_w, nseed, 2) - 0.5);
          const double factor =
              std::max(0.05, 1.0 + noise.amplitude * field);
          out.data(y, x) = static_cast<float>(depth_gt(y, x) * factor);
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace mfdepth
