#include "mondi/bundle_io.h"

#include <charconv>
#include <sstream>
#include <vector>

#include "mondi/errors.h"
#include "mondi/pfm.h"

namespace fs = std::filesystem;

namespace mondi {
namespace {

constexpr const char* kBundleFormat = "mondi-bundle/1";
constexpr const char* kProductFormat = "mondi-product/1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::string& require(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("manifest is missing key '" + key + "'", 0);
  return it->second;
}

int parse_int(const std::string& text, const std::string& key) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw FormatError("manifest key '" + key + "' is not an integer", 0);
  return v;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& key, std::size_t n) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, key));
  if (out.size() != n)
    throw FormatError("manifest key '" + key + "' needs " + std::to_string(n) + " numbers", 0);
  return out;
}

std::string file_entry(const std::string& name, int w, int h, int c) {
  return name + " " + std::to_string(w) + " " + std::to_string(h) + " " + std::to_string(c);
}

// "name W H C" -> PFM checked against the declared dimensions.
PfmImage load_entry(const fs::path& dir, const KeyValues& kv, const std::string& key) {
  std::istringstream in(require(kv, key));
  std::string name;
  int w = 0, h = 0, c = 0;
  if (!(in >> name >> w >> h >> c)) throw FormatError("malformed file entry '" + key + "'", 0);
  PfmImage img = read_pfm(dir / name);
  if (img.width != w || img.height != h || img.channels != c)
    throw FormatError("dimensions of " + name + " differ from the manifest", 0);
  return img;
}

std::string pose_text(const RigidPose& pose) {
  std::string out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out += format_double(pose.rotation(r, c)) + " ";
  for (int i = 0; i < 3; ++i) out += format_double(pose.translation(i)) + (i < 2 ? " " : "");
  return out;
}

RigidPose parse_pose(const std::string& text, const std::string& key) {
  const std::vector<double> v = parse_doubles(text, key, 12);
  RigidPose pose;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) pose.rotation(r, c) = v[r * 3 + c];
  pose.translation = {v[9], v[10], v[11]};
  return pose;
}

void quantize(std::vector<double>& data) {
  for (double& v : data) v = static_cast<float>(v);
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError("expected key=value", line_start);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw FormatError("empty key", line_start);
    if (!kv.emplace(key, trim(t.substr(eq + 1))).second)
      throw FormatError("duplicate key '" + key + "'", line_start);
  }
  return kv;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& text, const std::string& key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw FormatError("value of '" + key + "' is not a number: '" + text + "'", 0);
  return v;
}

void write_bundle(const fs::path& dir, const SceneBundle& bundle) {
  bundle.validate();
  fs::create_directories(dir);
  const int W = bundle.width();
  const int H = bundle.height();
  const CameraIntrinsics& K = bundle.intrinsics;

  std::string m;
  m += std::string("format=") + kBundleFormat + "\n";
  m += "width=" + std::to_string(W) + "\nheight=" + std::to_string(H) + "\n";
  m += "intrinsics=" + format_double(K.fx) + " " + format_double(K.fy) + " " + format_double(K.cx) +
       " " + format_double(K.cy) + "\n";
  write_pfm(dir / "target.pfm", to_pfm(bundle.target));
  m += "target=" + file_entry("target.pfm", W, H, bundle.target.channels) + "\n";
  m += "views=" + std::to_string(bundle.views.size()) + "\n";
  for (std::size_t v = 0; v < bundle.views.size(); ++v) {
    const std::string idx = std::to_string(v + 1);
    const std::string name = "view_" + idx + ".pfm";
    write_pfm(dir / name, to_pfm(bundle.views[v].image));
    m += "view." + idx + ".image=" + file_entry(name, W, H, bundle.views[v].image.channels) + "\n";
    m += "view." + idx + ".pose=" + pose_text(bundle.views[v].pose) + "\n";
  }
  write_pfm(dir / "sparse.pfm", to_pfm(bundle.sparse));
  m += "sparse=" + file_entry("sparse.pfm", W, H, 1) + "\n";
  if (bundle.ground_truth) {
    write_pfm(dir / "ground_truth.pfm", to_pfm(*bundle.ground_truth));
    m += "ground_truth=" + file_entry("ground_truth.pfm", W, H, 1) + "\n";
  }
  m += "teachers=" + std::to_string(bundle.teachers.size()) + "\n";
  for (std::size_t t = 0; t < bundle.teachers.size(); ++t) {
    const std::string idx = std::to_string(t + 1);
    const std::string name = "teacher_" + idx + ".pfm";
    write_pfm(dir / name, to_pfm(bundle.teachers[t].depth));
    m += "teacher." + idx + "=" + file_entry(name, W, H, 1) + "\n";
  }
  write_file_atomic(dir / "manifest.txt", m);
}

SceneBundle read_bundle(const fs::path& dir) {
  const KeyValues kv = parse_key_values(read_file(dir / "manifest.txt"));
  if (require(kv, "format") != kBundleFormat) throw FormatError("unsupported bundle format", 0);
  SceneBundle b;
  const int W = parse_int(require(kv, "width"), "width");
  const int H = parse_int(require(kv, "height"), "height");
  const std::vector<double> k = parse_doubles(require(kv, "intrinsics"), "intrinsics", 4);
  b.intrinsics = {k[0], k[1], k[2], k[3], W, H};
  b.target = image_from_pfm(load_entry(dir, kv, "target"));
  const int views = parse_int(require(kv, "views"), "views");
  for (int v = 1; v <= views; ++v) {
    const std::string idx = std::to_string(v);
    AdjacentView view;
    view.image = image_from_pfm(load_entry(dir, kv, "view." + idx + ".image"));
    view.pose = parse_pose(require(kv, "view." + idx + ".pose"), "view." + idx + ".pose");
    b.views.push_back(std::move(view));
  }
  b.sparse = depth_from_pfm(load_entry(dir, kv, "sparse"));
  if (kv.count("ground_truth")) b.ground_truth = depth_from_pfm(load_entry(dir, kv, "ground_truth"));
  const int teachers = parse_int(require(kv, "teachers"), "teachers");
  for (int t = 1; t <= teachers; ++t)
    b.teachers.push_back({t, depth_from_pfm(load_entry(dir, kv, "teacher." + std::to_string(t)))});
  b.validate();
  return b;
}

void quantize_to_float(DistillationProduct& product) {
  quantize(product.distilled.data);
  quantize(product.residual.value.data);
  quantize(product.monitor.data);
}

void write_product(const fs::path& dir, const DistillationProduct& product) {
  fs::create_directories(dir);
  const int W = product.distilled.width;
  const int H = product.distilled.height;
  ScalarGrid selection(H, W, 0.0);
  for (std::size_t i = 0; i < selection.size(); ++i) selection.data[i] = product.selection.data[i];
  ScalarGrid monitor(H, W, 0.0);
  monitor.data = product.monitor.data;

  write_pfm(dir / "distilled.pfm", to_pfm(product.distilled));
  write_pfm(dir / "residual.pfm", to_pfm(product.residual.value));
  write_pfm(dir / "monitor.pfm", to_pfm(monitor));
  write_pfm(dir / "selection.pfm", to_pfm(selection));

  std::string m = std::string("format=") + kProductFormat + "\n";
  m += "width=" + std::to_string(W) + "\nheight=" + std::to_string(H) + "\n";
  m += "distilled=" + file_entry("distilled.pfm", W, H, 1) + "\n";
  m += "residual=" + file_entry("residual.pfm", W, H, 1) + "\n";
  m += "monitor=" + file_entry("monitor.pfm", W, H, 1) + "\n";
  m += "selection=" + file_entry("selection.pfm", W, H, 1) + "\n";
  m += "teachers=" + std::to_string(product.betas.size()) + "\n";
  for (std::size_t t = 0; t < product.betas.size(); ++t) {
    const std::string idx = std::to_string(t + 1);
    m += "beta." + idx + "=" + format_double(product.betas[t]) + "\n";
    m += "z." + idx + "=" + format_double(product.z_scores[t]) + "\n";
  }
  write_file_atomic(dir / "product.txt", m);
}

DistillationProduct read_product(const fs::path& dir) {
  const KeyValues kv = parse_key_values(read_file(dir / "product.txt"));
  if (require(kv, "format") != kProductFormat) throw FormatError("unsupported product format", 0);
  DistillationProduct p;
  p.distilled = depth_from_pfm(load_entry(dir, kv, "distilled"));
  const ScalarGrid residual = scalar_from_pfm(load_entry(dir, kv, "residual"));
  const ScalarGrid monitor = scalar_from_pfm(load_entry(dir, kv, "monitor"));
  const ScalarGrid selection = scalar_from_pfm(load_entry(dir, kv, "selection"));
  const int H = p.distilled.height;
  const int W = p.distilled.width;
  p.residual = ErrorMap(H, W);
  p.residual.value = residual;
  p.monitor = MonitorGrid(H, W, 0.0);
  p.monitor.data = monitor.data;
  p.selection = IndexGrid(H, W, 0);
  for (std::size_t i = 0; i < selection.size(); ++i) {
    p.selection.data[i] = static_cast<int>(selection.data[i]);
    p.residual.valid.data[i] = p.selection.data[i] > 0;
  }
  const int teachers = parse_int(require(kv, "teachers"), "teachers");
  for (int t = 1; t <= teachers; ++t) {
    p.betas.push_back(parse_double(require(kv, "beta." + std::to_string(t)), "beta"));
    p.z_scores.push_back(parse_double(require(kv, "z." + std::to_string(t)), "z"));
  }
  return p;
}

}  // namespace mondi
