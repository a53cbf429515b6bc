#pragma once

#include <filesystem>
#include <string>

#include "lamino/types.hpp"

namespace lamino {

// File formats (all binary payloads little-endian f32):
//   scene:  magic "LGSC", u32 version, u64 count, then per-gaussian records of
//           raw_density(1), position(3), quaternion wxyz(4), raw_scale(3).
//   volume: raw f32 array (x fastest) + JSON sidecar "<path>.json" with
//           {dims, voxel_size, origin}.
//   stack:  raw f32 array (view-major, u fastest) + JSON sidecar with
//           {nu, nv, pixel_size, angles_rad, tilt_alpha_rad, d_so, d_sd}.

void save_scene(const std::filesystem::path& path, const GaussianScene& scene);

/// Scene files carry only the raw parameters; the caller supplies the scene
/// bounds (they determine the scale activation floor).
GaussianScene load_scene(const std::filesystem::path& path, const Aabb& bounds);

void save_volume(const std::filesystem::path& path, const Volume& vol);
Volume load_volume(const std::filesystem::path& path);

void save_stack(const std::filesystem::path& path, const ProjectionStack& stack);
ProjectionStack load_stack(const std::filesystem::path& path);

/// One 8-bit grayscale PNG per slice along `axis` (0=x, 1=y, 2=z), windowed to
/// [win_lo, win_hi]; win_hi <= win_lo selects [0, max]. Returns file count.
int export_slices(const Volume& vol, int axis, const std::filesystem::path& out_dir,
                  double win_lo = 0.0, double win_hi = 0.0);

}  // namespace lamino
