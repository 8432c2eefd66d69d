#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rigfit/fitter.hpp"
#include "rigfit/geom.hpp"
#include "rigfit/metrics.hpp"
#include "rigfit/skinning.hpp"

namespace rigfit::io {

inline constexpr const char* kFormatVersion = "1.0";

// ---------------------------------------------------------------------------
// Wavefront OBJ

/// Reads `v` positions and `f` faces (1-based, negative indices relative);
/// polygons are fan-triangulated around their first vertex. Texture/normal
/// references in `f` and every other record are ignored.
TriMesh load_obj(const std::filesystem::path& path);

/// Writes positions with 17 significant digits and triangle faces.
void save_obj(const std::filesystem::path& path, const TriMesh& mesh);

/// `*.obj` files of a directory in lexicographic filename order. Zero-pad frame
/// numbers (f_0002 < f_0010) to keep that order chronological.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir);

/// Throws InvalidInput on fewer than 2 frames and TopologyMismatch naming the
/// first file whose vertex count or faces differ from the first frame.
MeshSequence load_sequence(const std::filesystem::path& dir);

/// Writes frame_0000.obj, frame_0001.obj, ... into dir (created if missing).
void save_sequence(const std::filesystem::path& dir, const MeshSequence& seq);

// ---------------------------------------------------------------------------
// Rig / motion / report files (versioned JSON)

struct MeshFingerprint {
  std::uint64_t vertices = 0;
  std::uint64_t faces = 0;
  std::string hash;

  bool operator==(const MeshFingerprint&) const = default;
};

/// FNV-1a over vertex coordinate bits and face indices.
MeshFingerprint fingerprint(const TriMesh& mesh);

struct RigFile {
  std::string format_version = kFormatVersion;
  double tau = kUnreachable;
  std::size_t top_k = kDefaultTopBones;
  bool geodesic_refinement = true;
  AnchorSet anchors;
  std::vector<GaussianBone> bones;
  SkinningWeights weights;
  MeshFingerprint source;

  std::size_t bone_count() const { return bones.size(); }
};

RigFile make_rig_file(const RigParams& rig, const SkinningWeights& weights, const TriMesh& source);
RigParams to_rig_params(const RigFile& file);

/// Throws TopologyMismatch unless the rig was fitted on `mesh` or `force` is set.
/// Even with `force`, the vertex count must agree.
void check_fingerprint(const RigFile& rig, const TriMesh& mesh, bool force);

struct MotionFile {
  std::string format_version = kFormatVersion;
  std::size_t bone_count = 0;
  std::vector<BoneTransforms> frames;
};

MotionFile make_motion_file(const MotionParams& motion, const RigParams& rig);

void save_rig(const std::filesystem::path& path, const RigFile& rig);
RigFile load_rig(const std::filesystem::path& path);
std::string serialize_rig(const RigFile& rig);
RigFile parse_rig(const std::string& text);

void save_motion(const std::filesystem::path& path, const MotionFile& motion);
MotionFile load_motion(const std::filesystem::path& path);
std::string serialize_motion(const MotionFile& motion);
MotionFile parse_motion(const std::string& text);

std::string serialize_fit_report(const FitReport& report);
void save_fit_report(const std::filesystem::path& path, const FitReport& report);

std::string serialize_eval_report(const EvalReport& report);
EvalReport parse_eval_report(const std::string& text);
void save_eval_report(const std::filesystem::path& path, const EvalReport& report);

/// Overrides fields of `base` with the keys present in a JSON object using the
/// FitConfig field names; a null "tau" means the diagonal fraction applies.
FitConfig parse_fit_config(const std::string& text, const FitConfig& base = {});

// ---------------------------------------------------------------------------
// Visualization

/// Fixed 64-entry RGB palette; bone k is drawn with entry k mod 64.
const std::array<std::array<std::uint8_t, 3>, 64>& bone_palette();

/// ASCII PLY with each vertex coloured by its dominant bone.
std::string weights_ply(const RigFile& rig, const TriMesh& mesh);
void export_weights_visualization(const RigFile& rig, const TriMesh& mesh, const std::filesystem::path& out);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace rigfit::io
