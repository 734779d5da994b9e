#include "mfdepth/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace mfdepth {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" +
                      value + "'");
  }
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" +
                      value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw ConfigError("config: key '" + key + "' expects a boolean, got '" +
                    value + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not key=value: '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " has an empty key or value");
    cfg.set_key(key, value);
  }
  cfg.validate();
  return cfg;
}

void ExperimentConfig::set_key(const std::string& key,
                               const std::string& value) {
  // surface.<index>.<field>
  if (key.rfind("surface.", 0) == 0) {
    const std::size_t dot = key.find('.', 8);
    if (dot == std::string::npos)
      throw ConfigError("config: malformed surface key '" + key + "'");
    const long index = parse_int(key, key.substr(8, dot - 8));
    if (index < 0 || index > 999)
      throw ConfigError("config: surface index out of range in '" + key + "'");
    const std::string field = key.substr(dot + 1);
    SurfaceConfig& s = surfaces[static_cast<int>(index)];
    if (field == "kind") {
      if (value != "plane" && value != "sphere")
        throw ConfigError("config: surface kind must be plane|sphere");
      s.kind = value;
    } else if (field == "x") s.x = parse_double(key, value);
    else if (field == "y") s.y = parse_double(key, value);
    else if (field == "z") s.z = parse_double(key, value);
    else if (field == "nx") s.nx = parse_double(key, value);
    else if (field == "ny") s.ny = parse_double(key, value);
    else if (field == "nz") s.nz = parse_double(key, value);
    else if (field == "radius") s.radius = parse_double(key, value);
    else if (field == "half_u") s.half_u = parse_double(key, value);
    else if (field == "half_v") s.half_v = parse_double(key, value);
    else if (field == "vx") s.vx = parse_double(key, value);
    else if (field == "vy") s.vy = parse_double(key, value);
    else if (field == "vz") s.vz = parse_double(key, value);
    else if (field == "textureless") s.textureless = parse_bool(key, value);
    else if (field == "specular") s.specular = parse_double(key, value);
    else if (field == "amplitude") s.amplitude = parse_double(key, value);
    else if (field == "wavelength") s.wavelength = parse_double(key, value);
    else if (field == "checker") s.checker = parse_double(key, value);
    else if (field == "checker_period")
      s.checker_period = parse_double(key, value);
    else if (field == "base_r") s.base_r = parse_double(key, value);
    else if (field == "base_g") s.base_g = parse_double(key, value);
    else if (field == "base_b") s.base_b = parse_double(key, value);
    else if (field == "seed")
      s.seed = static_cast<std::uint32_t>(parse_int(key, value));
    else
      throw ConfigError("config: unknown surface field '" + field + "'");
    return;
  }

  if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "image.width") width = static_cast<int>(parse_int(key, value));
  else if (key == "image.height") height = static_cast<int>(parse_int(key, value));
  else if (key == "camera.focal") focal = parse_double(key, value);
  else if (key == "camera.cu") cu = parse_double(key, value);
  else if (key == "camera.cv") cv = parse_double(key, value);
  else if (key == "scene.background_depth") background_depth = parse_double(key, value);
  else if (key == "scene.depth_floor") depth_floor = parse_double(key, value);
  else if (key == "scene.depth_ceiling") depth_ceiling = parse_double(key, value);
  else if (key == "scene.background_amplitude") background_amplitude = parse_double(key, value);
  else if (key == "scene.background_wavelength") background_wavelength = parse_double(key, value);
  else if (key == "scene.background_textureless") background_textureless = parse_bool(key, value);
  else if (key == "trajectory.frames") frames = static_cast<int>(parse_int(key, value));
  else if (key == "trajectory.frame_rate") frame_rate = parse_double(key, value);
  else if (key == "trajectory.speed") speed = parse_double(key, value);
  else if (key == "trajectory.dir_x") dir_x = parse_double(key, value);
  else if (key == "trajectory.dir_y") dir_y = parse_double(key, value);
  else if (key == "trajectory.dir_z") dir_z = parse_double(key, value);
  else if (key == "pipeline.depth_bins") depth_bins = static_cast<int>(parse_int(key, value));
  else if (key == "pipeline.groups") groups = static_cast<int>(parse_int(key, value));
  else if (key == "pipeline.channels") channels = static_cast<int>(parse_int(key, value));
  else if (key == "pipeline.radius") radius = static_cast<int>(parse_int(key, value));
  else if (key == "pipeline.beta") beta = parse_double(key, value);
  else if (key == "pipeline.temperature") temperature = parse_double(key, value);
  else if (key == "pipeline.sampling") {
    if (value == "velocity") sampling = SamplingStrategy::kVelocity;
    else if (value == "fixed") sampling = SamplingStrategy::kFixed;
    else if (value == "cascade") sampling = SamplingStrategy::kCascade;
    else if (value == "confidence") sampling = SamplingStrategy::kConfidence;
    else throw ConfigError("config: pipeline.sampling must be velocity|fixed|cascade|confidence");
  }
  else if (key == "pipeline.fixed_fraction") fixed_fraction = parse_double(key, value);
  else if (key == "pipeline.uncertainty") {
    if (value == "normalized") uncertainty = UncertaintyMapping::kNormalized;
    else if (value == "affine_sigmoid") uncertainty = UncertaintyMapping::kAffineSigmoid;
    else throw ConfigError("config: pipeline.uncertainty must be normalized|affine_sigmoid");
  }
  else if (key == "pipeline.sigmoid_a") sigmoid_a = parse_double(key, value);
  else if (key == "pipeline.sigmoid_b") sigmoid_b = parse_double(key, value);
  else if (key == "pipeline.fusion") fusion = parse_bool(key, value);
  else if (key == "pipeline.fuse_at_full") fuse_at_full = parse_bool(key, value);
  else if (key == "pipeline.velocity_scale") {
    if (value == "identity") velocity_scale = VelocityScaleFn::kIdentity;
    else if (value == "median_ratio") velocity_scale = VelocityScaleFn::kMedianRatio;
    else throw ConfigError("config: pipeline.velocity_scale must be identity|median_ratio");
  }
  else if (key == "prior.model") {
    if (value == "multiplicative") prior_model = PriorNoiseModel::kMultiplicative;
    else if (value == "bias") prior_model = PriorNoiseModel::kConstantBias;
    else if (value == "lowfreq") prior_model = PriorNoiseModel::kLowFrequency;
    else throw ConfigError("config: prior.model must be multiplicative|bias|lowfreq");
  }
  else if (key == "prior.sigma") prior_sigma = parse_double(key, value);
  else if (key == "prior.bias") prior_bias = parse_double(key, value);
  else if (key == "prior.amplitude") prior_amplitude = parse_double(key, value);
  else if (key == "prior.wavelength") prior_wavelength = parse_double(key, value);
  else if (key == "prior.confidence") prior_confidence = parse_double(key, value);
  else if (key == "pose.mode") {
    if (value == "ground_truth") pose_mode = PoseMode::kGroundTruth;
    else if (value == "noisy") pose_mode = PoseMode::kNoisy;
    else if (value == "chained") pose_mode = PoseMode::kChained;
    else throw ConfigError("config: pose.mode must be ground_truth|noisy|chained");
  }
  else if (key == "pose.sigma_translation") pose_sigma_translation = parse_double(key, value);
  else if (key == "pose.sigma_rotation_deg") pose_sigma_rotation_deg = parse_double(key, value);
  else if (key == "loss.lambda_mono") loss.lambda_mono = parse_double(key, value);
  else if (key == "loss.lambda_mvs") loss.lambda_mvs = parse_double(key, value);
  else if (key == "loss.lambda_fused") loss.lambda_fused = parse_double(key, value);
  else if (key == "loss.gamma") loss.gamma = parse_double(key, value);
  else if (key == "eval.median_scale") eval.median_scale = parse_bool(key, value);
  else if (key == "eval.cap") eval.cap = parse_double(key, value);
  else
    throw ConfigError("config: unknown key '" + key + "'");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };

  if (width <= 0 || height <= 0 || width % 4 != 0 || height % 4 != 0)
    fail("image size must be positive and divisible by 4");
  if (!(focal > 0)) fail("camera.focal must be > 0");
  if (!(background_depth > 0)) fail("scene.background_depth must be > 0");
  if (!(depth_floor > 0) || !(depth_ceiling > depth_floor))
    fail("scene depth bounds must satisfy 0 < floor < ceiling");
  if (frames < 2) fail("trajectory.frames must be >= 2");
  if (!(frame_rate > 0)) fail("trajectory.frame_rate must be > 0");
  if (speed < 0) fail("trajectory.speed must be >= 0");
  if (depth_bins < 2) fail("pipeline.depth_bins must be >= 2");
  if (groups < 1) fail("pipeline.groups must be >= 1");
  if (channels < 1 || channels > kFeatureChannels)
    fail("pipeline.channels must be in [1, 32]");
  if (channels % groups != 0)
    fail("pipeline.channels must be divisible by pipeline.groups");
  if (radius < 0 || 2 * radius + 1 > depth_bins)
    fail("pipeline.radius window must fit inside pipeline.depth_bins");
  if (!(beta > 0)) fail("pipeline.beta must be > 0");
  if (!(temperature > 0)) fail("pipeline.temperature must be > 0");
  if (!(fixed_fraction > 0 && fixed_fraction < 1))
    fail("pipeline.fixed_fraction must be in (0,1)");
  if (!(prior_sigma >= 0)) fail("prior.sigma must be >= 0");
  if (!(prior_bias > 0)) fail("prior.bias must be > 0");
  if (!(prior_confidence > 0 && prior_confidence <= 1))
    fail("prior.confidence must be in (0,1]");
  if (pose_sigma_translation < 0 || pose_sigma_rotation_deg < 0)
    fail("pose noise sigmas must be >= 0");
  if (loss.lambda_mono < 0 || loss.lambda_mvs < 0 || loss.lambda_fused < 0 ||
      loss.gamma < 0)
    fail("loss weights must be >= 0");
  if (!(eval.cap > 0)) fail("eval.cap must be > 0");
  for (const auto& [index, s] : surfaces) {
    if (s.kind != "plane" && s.kind != "sphere")
      fail("surface kind must be plane|sphere");
    if (s.kind == "sphere" && !(s.radius > 0))
      fail("sphere radius must be > 0");
    if (s.kind == "plane" &&
        std::abs(s.nx) + std::abs(s.ny) + std::abs(s.nz) < 1e-12)
      fail("plane normal must be nonzero");
    if (s.amplitude < 0 || s.wavelength <= 0 || s.checker < 0 ||
        s.checker_period <= 0)
      fail("surface texture parameters out of range");
  }
  if (std::abs(dir_x) + std::abs(dir_y) + std::abs(dir_z) < 1e-12 && speed > 0)
    fail("trajectory direction must be nonzero when speed > 0");
}

std::string ExperimentConfig::canonical_text() const {
  std::vector<std::pair<std::string, std::string>> kv;
  auto put = [&kv](const std::string& k, const std::string& v) {
    kv.emplace_back(k, v);
  };
  auto putd = [&put](const std::string& k, double v) { put(k, format_double(v)); };
  auto puti = [&put](const std::string& k, long v) { put(k, std::to_string(v)); };
  auto putb = [&put](const std::string& k, bool v) { put(k, v ? "true" : "false"); };

  puti("seed", static_cast<long>(seed));
  puti("image.width", width);
  puti("image.height", height);
  putd("camera.focal", focal);
  putd("camera.cu", cu);
  putd("camera.cv", cv);
  putd("scene.background_depth", background_depth);
  putd("scene.depth_floor", depth_floor);
  putd("scene.depth_ceiling", depth_ceiling);
  putd("scene.background_amplitude", background_amplitude);
  putd("scene.background_wavelength", background_wavelength);
  putb("scene.background_textureless", background_textureless);
  puti("trajectory.frames", frames);
  putd("trajectory.frame_rate", frame_rate);
  putd("trajectory.speed", speed);
  putd("trajectory.dir_x", dir_x);
  putd("trajectory.dir_y", dir_y);
  putd("trajectory.dir_z", dir_z);
  puti("pipeline.depth_bins", depth_bins);
  puti("pipeline.groups", groups);
  puti("pipeline.channels", channels);
  puti("pipeline.radius", radius);
  putd("pipeline.beta", beta);
  putd("pipeline.temperature", temperature);
  put("pipeline.sampling",
      sampling == SamplingStrategy::kVelocity     ? "velocity"
      : sampling == SamplingStrategy::kFixed      ? "fixed"
      : sampling == SamplingStrategy::kCascade    ? "cascade"
                                                  : "confidence");
  putd("pipeline.fixed_fraction", fixed_fraction);
  put("pipeline.uncertainty",
      uncertainty == UncertaintyMapping::kNormalized ? "normalized"
                                                     : "affine_sigmoid");
  putd("pipeline.sigmoid_a", sigmoid_a);
  putd("pipeline.sigmoid_b", sigmoid_b);
  putb("pipeline.fusion", fusion);
  putb("pipeline.fuse_at_full", fuse_at_full);
  put("pipeline.velocity_scale",
      velocity_scale == VelocityScaleFn::kIdentity ? "identity"
                                                   : "median_ratio");
  put("prior.model",
      prior_model == PriorNoiseModel::kMultiplicative ? "multiplicative"
      : prior_model == PriorNoiseModel::kConstantBias ? "bias"
                                                      : "lowfreq");
  putd("prior.sigma", prior_sigma);
  putd("prior.bias", prior_bias);
  putd("prior.amplitude", prior_amplitude);
  putd("prior.wavelength", prior_wavelength);
  putd("prior.confidence", prior_confidence);
  put("pose.mode", pose_mode == PoseMode::kGroundTruth ? "ground_truth"
                   : pose_mode == PoseMode::kNoisy     ? "noisy"
                                                       : "chained");
  putd("pose.sigma_translation", pose_sigma_translation);
  putd("pose.sigma_rotation_deg", pose_sigma_rotation_deg);
  putd("loss.lambda_mono", loss.lambda_mono);
  putd("loss.lambda_mvs", loss.lambda_mvs);
  putd("loss.lambda_fused", loss.lambda_fused);
  putd("loss.gamma", loss.gamma);
  putb("eval.median_scale", eval.median_scale);
  putd("eval.cap", eval.cap);

  for (const auto& [index, s] : surfaces) {
    const std::string p = "surface." + std::to_string(index) + ".";
    put(p + "kind", s.kind);
    putd(p + "x", s.x);
    putd(p + "y", s.y);
    putd(p + "z", s.z);
    putd(p + "nx", s.nx);
    putd(p + "ny", s.ny);
    putd(p + "nz", s.nz);
    putd(p + "radius", s.radius);
    putd(p + "half_u", s.half_u);
    putd(p + "half_v", s.half_v);
    putd(p + "vx", s.vx);
    putd(p + "vy", s.vy);
    putd(p + "vz", s.vz);
    putb(p + "textureless", s.textureless);
    putd(p + "specular", s.specular);
    putd(p + "amplitude", s.amplitude);
    putd(p + "wavelength", s.wavelength);
    putd(p + "checker", s.checker);
    putd(p + "checker_period", s.checker_period);
    putd(p + "base_r", s.base_r);
    putd(p + "base_g", s.base_g);
    putd(p + "base_b", s.base_b);
    puti(p + "seed", s.seed);
  }

  std::sort(kv.begin(), kv.end());
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::string ExperimentConfig::hash() const {
  // FNV-1a 64.
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : canonical_text()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

Scene ExperimentConfig::build_scene() const {
  Scene scene;
  scene.background_depth = background_depth;
  scene.depth_floor = depth_floor;
  scene.depth_ceiling = depth_ceiling;
  scene.background_texture.amplitude = background_amplitude;
  scene.background_texture.wavelength = background_wavelength;
  scene.background_texture.textureless = background_textureless;
  scene.background_texture.seed = 9001;

  for (const auto& [index, sc] : surfaces) {
    Surface s;
    s.kind = sc.kind == "sphere" ? Surface::Kind::kSphere
                                 : Surface::Kind::kPlane;
    s.position = {sc.x, sc.y, sc.z};
    s.normal = Eigen::Vector3d(sc.nx, sc.ny, sc.nz).normalized();
    s.radius = sc.radius;
    s.half_u = sc.half_u;
    s.half_v = sc.half_v;
    s.velocity = {sc.vx, sc.vy, sc.vz};
    s.texture.textureless = sc.textureless;
    s.texture.specular = sc.specular;
    s.texture.amplitude = sc.amplitude;
    s.texture.wavelength = sc.wavelength;
    s.texture.checker = sc.checker;
    s.texture.checker_period = sc.checker_period;
    s.texture.base[0] = static_cast<float>(sc.base_r);
    s.texture.base[1] = static_cast<float>(sc.base_g);
    s.texture.base[2] = static_cast<float>(sc.base_b);
    s.texture.seed =
        sc.seed != 0 ? sc.seed : static_cast<std::uint32_t>(index + 1);
    scene.add(s);
  }
  return scene;
}

Trajectory ExperimentConfig::build_trajectory() const {
  Eigen::Vector3d dir(dir_x, dir_y, dir_z);
  if (dir.norm() > 0) dir.normalize();
  return make_linear_trajectory(dir * speed, frames, frame_rate);
}

Intrinsics ExperimentConfig::build_intrinsics() const {
  const double pcu = cu < 0 ? (width - 1) * 0.5 : cu;
  const double pcv = cv < 0 ? (height - 1) * 0.5 : cv;
  return Intrinsics(focal, pcu, pcv, width, height);
}

UncertaintyOptions ExperimentConfig::uncertainty_options() const {
  UncertaintyOptions opt;
  opt.mapping = uncertainty;
  opt.sigmoid_a = sigmoid_a;
  opt.sigmoid_b = sigmoid_b;
  return opt;
}

PriorNoise ExperimentConfig::prior_noise() const {
  PriorNoise noise;
  noise.model = prior_model;
  noise.sigma = prior_sigma;
  noise.bias = prior_bias;
  noise.amplitude = prior_amplitude;
  noise.wavelength = prior_wavelength;
  return noise;
}

}  // namespace mfdepth
