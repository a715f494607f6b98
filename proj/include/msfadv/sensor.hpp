#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "msfadv/common.hpp"

namespace msfadv {

// LiDAR returns; intensity is unitless in [0,1].
template <class T>
struct CloudT {
  std::vector<Vec3<T>> xyz;
  std::vector<T> intensity;

  std::size_t size() const { return xyz.size(); }
  void push_back(const Vec3<T>& p, const T& i) {
    xyz.push_back(p);
    intensity.push_back(i);
  }
};
using PointCloud = CloudT<double>;

inline void validate(const PointCloud& pc) {
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const auto& p = pc.xyz[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
      throw Error("point cloud: non-finite coordinate at point " + std::to_string(i));
    if (pc.intensity[i] < 0.0 || pc.intensity[i] > 1.0)
      throw Error("point cloud: intensity outside [0,1] at point " + std::to_string(i));
  }
}

// H x W x 3 raster, channels in [0,1].
struct SensorImage {
  int width = 0, height = 0;
  std::vector<double> rgb;  // 3 * width * height, row-major

  double& at(int x, int y, int c) { return rgb[3 * (static_cast<std::size_t>(y) * width + x) + c]; }
  double at(int x, int y, int c) const {
    return rgb[3 * (static_cast<std::size_t>(y) * width + x) + c];
  }
  static SensorImage filled(int w, int h, double r, double g, double b) {
    SensorImage img;
    img.width = w;
    img.height = h;
    img.rgb.resize(static_cast<std::size_t>(3) * w * h);
    for (std::size_t i = 0; i + 2 < img.rgb.size(); i += 3) {
      img.rgb[i] = r;
      img.rgb[i + 1] = g;
      img.rgb[i + 2] = b;
    }
    return img;
  }
};

// 3x4 projection from homogeneous LiDAR-frame points to pixels.
struct Calibration {
  std::array<double, 12> P{};  // row-major

  // Camera center c solving M c = -p4 (P = [M | p4]).
  Vec3d camera_center() const {
    const auto& m = P;
    double det = m[0] * (m[5] * m[10] - m[6] * m[9]) - m[1] * (m[4] * m[10] - m[6] * m[8]) +
                 m[2] * (m[4] * m[9] - m[5] * m[8]);
    if (std::fabs(det) < 1e-15) return {0, 0, 0};
    double rx = -m[3], ry = -m[7], rz = -m[11];
    Vec3d c;
    c.x = (rx * (m[5] * m[10] - m[6] * m[9]) - m[1] * (ry * m[10] - m[6] * rz) +
           m[2] * (ry * m[9] - m[5] * rz)) / det;
    c.y = (m[0] * (ry * m[10] - rz * m[6]) - rx * (m[4] * m[10] - m[6] * m[8]) +
           m[2] * (m[4] * rz - ry * m[8])) / det;
    c.z = (m[0] * (m[5] * rz - ry * m[9]) - m[1] * (m[4] * rz - ry * m[8]) +
           rx * (m[4] * m[9] - m[5] * m[8])) / det;
    return c;
  }
};

// Scan-grid geometry plus the constant reflectivity assigned to object
// returns. Concretizes the ray casting; defaults follow an HDL-64E class
// device.
struct LidarSpec {
  std::vector<double> elevation_deg;  // sorted ascending
  double azimuth_step_deg = 0.17;
  double max_range = 120.0;           // meters
  double object_intensity = 0.4;

  static LidarSpec hdl64() {
    LidarSpec s;
    s.elevation_deg.resize(64);
    for (int i = 0; i < 64; ++i)
      s.elevation_deg[static_cast<std::size_t>(i)] = -24.9 + (2.0 - (-24.9)) * i / 63.0;
    return s;
  }

  void validate() const {
    if (elevation_deg.empty()) throw Error("lidar spec: no elevation channels");
    if (!std::is_sorted(elevation_deg.begin(), elevation_deg.end()))
      throw Error("lidar spec: elevation channels must be sorted");
    if (azimuth_step_deg <= 0) throw Error("lidar spec: azimuth resolution must be > 0");
    if (max_range <= 0) throw Error("lidar spec: max range must be > 0");
  }

  int azimuth_bins() const {
    return static_cast<int>(std::lround(360.0 / azimuth_step_deg));
  }
};

// ---- file formats ----------------------------------------------------
// pc.bin: flat little-endian float32, 4 per point (x,y,z,intensity).
// image.ppm: binary P6, 8-bit, linearized to [0,1] on load.
// calib.txt: one line "P: " + 12 row-major reals.

inline PointCloud load_pointcloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_pointcloud: cannot open '" + path + "'");
  in.seekg(0, std::ios::end);
  std::streamoff bytes = in.tellg();
  in.seekg(0);
  if (bytes % 16 != 0)
    throw Error("load_pointcloud: '" + path + "' size is not a multiple of 16 bytes");
  std::size_t n = static_cast<std::size_t>(bytes) / 16;
  std::vector<float> raw(n * 4);
  in.read(reinterpret_cast<char*>(raw.data()), bytes);
  if (!in) throw Error("load_pointcloud: short read on '" + path + "'");
  PointCloud pc;
  pc.xyz.reserve(n);
  pc.intensity.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    pc.push_back({raw[4 * i], raw[4 * i + 1], raw[4 * i + 2]}, raw[4 * i + 3]);
  return pc;
}

inline void save_pointcloud(const PointCloud& pc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_pointcloud: cannot open '" + path + "' for writing");
  std::vector<float> raw;
  raw.reserve(pc.size() * 4);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    raw.push_back(static_cast<float>(pc.xyz[i].x));
    raw.push_back(static_cast<float>(pc.xyz[i].y));
    raw.push_back(static_cast<float>(pc.xyz[i].z));
    raw.push_back(static_cast<float>(pc.intensity[i]));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (!out) throw Error("save_pointcloud: write failed for '" + path + "'");
}

inline SensorImage load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_ppm: cannot open '" + path + "'");
  std::string magic;
  in >> magic;
  if (magic != "P6") throw Error("load_ppm: '" + path + "' is not binary PPM (P6)");
  auto next_int = [&]() {
    // skip whitespace and '#' comments
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    int v;
    in >> v;
    return v;
  };
  int w = next_int(), h = next_int(), maxval = next_int();
  if (maxval != 255) throw Error("load_ppm: only 8-bit PPM supported");
  in.get();  // single whitespace after header
  SensorImage img;
  img.width = w;
  img.height = h;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(3) * w * h);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw Error("load_ppm: short read on '" + path + "'");
  img.rgb.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) img.rgb[i] = raw[i] / 255.0;
  return img;
}

inline void save_ppm(const SensorImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_ppm: cannot open '" + path + "' for writing");
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<std::uint8_t> raw(img.rgb.size());
  for (std::size_t i = 0; i < img.rgb.size(); ++i) {
    double v = std::clamp(img.rgb[i], 0.0, 1.0);
    raw[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw Error("save_ppm: write failed for '" + path + "'");
}

inline Calibration load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_calibration: cannot open '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "P:") continue;
    Calibration c;
    for (double& v : c.P)
      if (!(ss >> v)) throw Error("load_calibration: '" + path + "' has fewer than 12 values");
    return c;
  }
  throw Error("load_calibration: no 'P:' line in '" + path + "'");
}

inline void save_calibration(const Calibration& calib, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_calibration: cannot open '" + path + "' for writing");
  out << "P:";
  char buf[64];
  for (double v : calib.P) {
    std::snprintf(buf, sizeof(buf), " %.17g", v);
    out << buf;
  }
  out << '\n';
}

}  // namespace msfadv
