#include "lamino/io.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace lamino {

namespace {

using nlohmann::json;

constexpr char kSceneMagic[4] = {'L', 'G', 'S', 'C'};
constexpr uint32_t kSceneVersion = 1;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ComputeError("cannot open for writing: " + path.string());
  return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ComputeError("cannot open for reading: " + path.string());
  return f;
}

json read_sidecar(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ComputeError("missing sidecar: " + path.string());
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ValidationError("bad sidecar " + path.string() + ": " + e.what());
  }
  return j;
}

void write_f32(std::ofstream& f, const double* src, size_t n) {
  std::vector<float> buf(n);
  for (size_t i = 0; i < n; ++i) buf[i] = float(src[i]);
  f.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(n * 4));
}

void read_f32(std::ifstream& f, double* dst, size_t n, const std::string& what) {
  std::vector<float> buf(n);
  f.read(reinterpret_cast<char*>(buf.data()), std::streamsize(n * 4));
  if (size_t(f.gcount()) != n * 4) throw ValidationError("truncated " + what);
  for (size_t i = 0; i < n; ++i) dst[i] = double(buf[i]);
}

}  // namespace

void save_scene(const std::filesystem::path& path, const GaussianScene& scene) {
  std::ofstream f = open_out(path);
  f.write(kSceneMagic, 4);
  const uint32_t version = kSceneVersion;
  const uint64_t count = scene.count();
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&count), 8);
  std::vector<float> rec(11);
  for (const RadiativeGaussian& g : scene.gaussians) {
    rec[0] = float(g.raw_density);
    for (int i = 0; i < 3; ++i) rec[1 + i] = float(g.position[i]);
    for (int i = 0; i < 4; ++i) rec[4 + i] = float(g.raw_quat[i]);
    for (int i = 0; i < 3; ++i) rec[8 + i] = float(g.raw_scale[i]);
    f.write(reinterpret_cast<const char*>(rec.data()), 44);
  }
  if (!f) throw ComputeError("write failed: " + path.string());
}

GaussianScene load_scene(const std::filesystem::path& path, const Aabb& bounds) {
  std::ifstream f = open_in(path);
  char magic[4];
  f.read(magic, 4);
  if (f.gcount() != 4 || std::memcmp(magic, kSceneMagic, 4) != 0)
    throw ValidationError("not a scene file: " + path.string());
  uint32_t version = 0;
  uint64_t count = 0;
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&count), 8);
  if (!f || version != kSceneVersion)
    throw ValidationError("unsupported scene version in " + path.string());
  if (count > (1ull << 32)) throw ValidationError("implausible gaussian count");

  GaussianScene scene;
  scene.bounds = bounds;
  scene.gaussians.resize(count);
  std::vector<float> rec(11);
  for (RadiativeGaussian& g : scene.gaussians) {
    f.read(reinterpret_cast<char*>(rec.data()), 44);
    if (f.gcount() != 44) throw ValidationError("truncated scene file");
    g.raw_density = rec[0];
    g.position = Vec3(rec[1], rec[2], rec[3]);
    g.raw_quat = Vec4(rec[4], rec[5], rec[6], rec[7]);
    g.raw_scale = Vec3(rec[8], rec[9], rec[10]);
  }
  return scene;
}

void save_volume(const std::filesystem::path& path, const Volume& vol) {
  std::ofstream f = open_out(path);
  write_f32(f, vol.data.data(), vol.data.size());
  if (!f) throw ComputeError("write failed: " + path.string());

  json j;
  j["dims"] = vol.grid.dims;
  j["voxel_size"] = vol.grid.voxel_size;
  j["origin"] = {vol.grid.origin.x(), vol.grid.origin.y(), vol.grid.origin.z()};
  std::ofstream side(path.string() + ".json");
  side << j.dump(2) << "\n";
  if (!side) throw ComputeError("write failed: " + path.string() + ".json");
}

Volume load_volume(const std::filesystem::path& path) {
  const json j = read_sidecar(path.string() + ".json");
  GridSpec grid;
  try {
    grid.dims = j.at("dims").get<std::array<int, 3>>();
    grid.voxel_size = j.at("voxel_size").get<double>();
    const auto o = j.at("origin").get<std::array<double, 3>>();
    grid.origin = Vec3(o[0], o[1], o[2]);
  } catch (const json::exception& e) {
    throw ValidationError("bad volume sidecar key: " + std::string(e.what()));
  }
  grid.validate();

  Volume vol(grid);
  std::ifstream f = open_in(path);
  read_f32(f, vol.data.data(), vol.data.size(), "volume file " + path.string());
  return vol;
}

void save_stack(const std::filesystem::path& path, const ProjectionStack& stack) {
  std::ofstream f = open_out(path);
  for (const Image& im : stack.images) write_f32(f, im.data.data(), im.data.size());
  if (!f) throw ComputeError("write failed: " + path.string());

  json j;
  j["nu"] = stack.geom.nu;
  j["nv"] = stack.geom.nv;
  j["pixel_size"] = stack.geom.pixel_size;
  j["angles_rad"] = stack.angles;
  j["tilt_alpha_rad"] = stack.geom.tilt_alpha;
  j["d_so"] = stack.geom.d_so;
  j["d_sd"] = stack.geom.d_sd;
  std::ofstream side(path.string() + ".json");
  side << j.dump(2) << "\n";
  if (!side) throw ComputeError("write failed: " + path.string() + ".json");
}

ProjectionStack load_stack(const std::filesystem::path& path) {
  const json j = read_sidecar(path.string() + ".json");
  ProjectionStack stack;
  try {
    stack.geom.nu = j.at("nu").get<int>();
    stack.geom.nv = j.at("nv").get<int>();
    stack.geom.pixel_size = j.at("pixel_size").get<double>();
    stack.angles = j.at("angles_rad").get<std::vector<double>>();
    stack.geom.tilt_alpha = j.at("tilt_alpha_rad").get<double>();
    stack.geom.d_so = j.at("d_so").get<double>();
    stack.geom.d_sd = j.at("d_sd").get<double>();
  } catch (const json::exception& e) {
    throw ValidationError("bad stack sidecar key: " + std::string(e.what()));
  }
  stack.geom.validate();

  std::ifstream f = open_in(path);
  stack.images.assign(stack.angles.size(), Image(stack.geom.nu, stack.geom.nv));
  for (Image& im : stack.images)
    read_f32(f, im.data.data(), im.data.size(), "stack file " + path.string());
  return stack;
}

namespace {

void write_png_gray8(const std::filesystem::path& path, int w, int h,
                     const std::vector<unsigned char>& pixels) {
  FILE* fp = std::fopen(path.string().c_str(), "wb");
  if (!fp) throw ComputeError("cannot open for writing: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw ComputeError("png write failed: " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int row = 0; row < h; ++row)
    png_write_row(png, const_cast<png_bytep>(pixels.data() + size_t(row) * w));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace

int export_slices(const Volume& vol, int axis, const std::filesystem::path& out_dir,
                  double win_lo, double win_hi) {
  if (axis < 0 || axis > 2) throw ValidationError("slice axis must be 0, 1 or 2");
  if (win_hi <= win_lo) {
    win_lo = 0.0;
    win_hi = vol.max_value();
    if (win_hi <= win_lo) win_hi = win_lo + 1.0;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ComputeError("cannot create directory: " + out_dir.string());

  const int n_slices = vol.grid.dims[axis];
  const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
  const int w = vol.grid.dims[a1], h = vol.grid.dims[a2];
  const double scale = 255.0 / (win_hi - win_lo);

  std::vector<unsigned char> pixels(size_t(w) * h);
  for (int s = 0; s < n_slices; ++s) {
    for (int row = 0; row < h; ++row)
      for (int col = 0; col < w; ++col) {
        int idx[3];
        idx[axis] = s;
        idx[a1] = col;
        idx[a2] = row;
        const double v = (vol.at(idx[0], idx[1], idx[2]) - win_lo) * scale;
        pixels[size_t(row) * w + col] =
            (unsigned char)(std::clamp(v, 0.0, 255.0) + 0.5);
      }
    char name[32];
    std::snprintf(name, sizeof(name), "slice_%04d.png", s);
    write_png_gray8(out_dir / name, w, h, pixels);
  }
  return n_slices;
}

}  // namespace lamino
