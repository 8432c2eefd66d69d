#include "rigfit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "rigfit/error.hpp"

namespace rigfit::io {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Files

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidInput("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw InvalidInput("cannot write " + tmp.string());
    }
    out << content;
    if (!out) {
      throw InvalidInput("failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// OBJ

namespace {

std::int32_t parse_obj_index(const std::string& token, std::size_t vertex_count, const fs::path& path,
                             std::size_t line) {
  const std::string head = token.substr(0, token.find('/'));
  long value = 0;
  try {
    std::size_t used = 0;
    value = std::stol(head, &used);
    if (used != head.size()) {
      throw std::invalid_argument(head);
    }
  } catch (const std::exception&) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": bad face index '" + token + "'");
  }
  const long resolved = value < 0 ? static_cast<long>(vertex_count) + value : value - 1;
  if (value == 0 || resolved < 0) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": face index out of range '" + token + "'");
  }
  return static_cast<std::int32_t>(resolved);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TriMesh load_obj(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput("cannot open " + path.string());
  }
  TriMesh mesh;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    std::istringstream ls(text);
    std::string tag;
    if (!(ls >> tag)) {
      continue;
    }
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": malformed vertex");
      }
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::int32_t> poly;
      std::string token;
      while (ls >> token) {
        poly.push_back(parse_obj_index(token, mesh.vertices.size(), path, line_no));
      }
      if (poly.size() < 3) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": face with fewer than 3 vertices");
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  try {
    mesh.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return mesh;
}

void save_obj(const fs::path& path, const TriMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 64 + mesh.faces.size() * 24);
  for (const Vec3& v : mesh.vertices) {
    out += "v " + format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z()) + "\n";
  }
  for (const Face& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " + std::to_string(f[2] + 1) + "\n";
  }
  write_file_atomic(path, out);
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw InvalidInput(dir.string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".obj") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

MeshSequence load_sequence(const fs::path& dir) {
  const auto files = list_frames(dir);
  if (files.size() < 2) {
    throw InvalidInput(dir.string() + " holds " + std::to_string(files.size()) + " .obj frames; at least 2 are required");
  }
  MeshSequence seq;
  for (std::size_t t = 0; t < files.size(); ++t) {
    TriMesh mesh = load_obj(files[t]);
    if (t == 0) {
      seq.faces = std::move(mesh.faces);
    } else if (mesh.vertices.size() != seq.frames.front().size()) {
      throw TopologyMismatch(files[t].string() + " has " + std::to_string(mesh.vertices.size()) +
                             " vertices, expected " + std::to_string(seq.frames.front().size()));
    } else if (mesh.faces != seq.faces) {
      throw TopologyMismatch(files[t].string() + " has a different face list than " + files[0].string());
    }
    seq.frames.push_back(std::move(mesh.vertices));
  }
  return seq;
}

void save_sequence(const fs::path& dir, const MeshSequence& seq) {
  fs::create_directories(dir);
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    std::ostringstream name;
    name << "frame_" << std::setw(4) << std::setfill('0') << t << ".obj";
    save_obj(dir / name.str(), {seq.frames[t], seq.faces});
  }
}

// ---------------------------------------------------------------------------
// Fingerprint

MeshFingerprint fingerprint(const TriMesh& mesh) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t n = mesh.vertices.size();
  const std::uint64_t f = mesh.faces.size();
  mix(&n, sizeof(n));
  mix(&f, sizeof(f));
  for (const Vec3& v : mesh.vertices) {
    for (int a = 0; a < 3; ++a) {
      const double c = v[a];
      mix(&c, sizeof(c));
    }
  }
  for (const Face& face : mesh.faces) {
    mix(face.data(), sizeof(std::int32_t) * 3);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return {n, f, buf};
}

// ---------------------------------------------------------------------------
// JSON helpers

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json quat_json(const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }

const json& field(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(ctx + ": missing field '" + key + "'");
  }
  return j.at(key);
}

double number(const json& j, const std::string& ctx) {
  if (!j.is_number()) {
    throw ParseError(ctx + ": expected a number");
  }
  return j.get<double>();
}

template <typename Int>
Int integer(const json& j, const std::string& ctx) {
  if (!j.is_number_integer()) {
    throw ParseError(ctx + ": expected an integer");
  }
  return j.get<Int>();
}

const json& array(const json& j, const std::string& ctx, std::size_t expected = 0) {
  if (!j.is_array() || (expected != 0 && j.size() != expected)) {
    throw ParseError(ctx + ": expected an array" + (expected ? " of " + std::to_string(expected) : std::string()));
  }
  return j;
}

Vec3 parse_vec(const json& j, const std::string& ctx) {
  const json& a = array(j, ctx, 3);
  return {number(a[0], ctx + "[0]"), number(a[1], ctx + "[1]"), number(a[2], ctx + "[2]")};
}

Quat parse_quat(const json& j, const std::string& ctx) {
  const json& a = array(j, ctx, 4);
  return {number(a[0], ctx + "[0]"), number(a[1], ctx + "[1]"), number(a[2], ctx + "[2]"), number(a[3], ctx + "[3]")};
}

json parse_document(const std::string& text, const std::string& kind) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(kind + " file: " + e.what());
  }
  const json& version = field(doc, "format_version", kind);
  if (!version.is_string()) {
    throw ParseError(kind + ": format_version must be a string");
  }
  const std::string v = version.get<std::string>();
  const std::string major = v.substr(0, v.find('.'));
  const std::string ours = std::string(kFormatVersion).substr(0, std::string(kFormatVersion).find('.'));
  if (major != ours) {
    throw ParseError(kind + ": unsupported format_version " + v + " (this build reads " + ours + ".x)");
  }
  if (doc.contains("kind") && doc.at("kind") != kind) {
    throw ParseError(kind + ": file declares kind " + doc.at("kind").dump());
  }
  return doc;
}

json transform_json(const RigidTransform& t) { return {{"q", quat_json(t.rotation)}, {"t", vec_json(t.translation)}}; }

RigidTransform parse_transform(const json& j, const std::string& ctx) {
  return {parse_quat(field(j, "q", ctx), ctx + ".q"), parse_vec(field(j, "t", ctx), ctx + ".t")};
}

json tau_json(double tau) { return std::isfinite(tau) ? json(tau) : json(nullptr); }

double parse_tau(const json& j, const std::string& ctx) {
  if (j.is_null()) {
    return kUnreachable;
  }
  return number(j, ctx);
}

json config_json(const FitConfig& c) {
  return {{"bones", c.bones},
          {"iterations", c.iterations},
          {"lr_rig", c.lr_rig},
          {"lr_motion", c.lr_motion},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},
          {"tau", c.tau ? json(*c.tau) : json(nullptr)},
          {"tau_fraction", c.tau_fraction},
          {"top_k", c.top_k},
          {"geodesic_refinement", c.geodesic_refinement},
          {"grad_clip", c.grad_clip},
          {"seed", c.seed},
          {"init_jitter", c.init_jitter},
          {"log_every", c.log_every}};
}

void apply_config(const json& doc, FitConfig& out, const std::string& ctx) {
  if (!doc.is_object()) {
    throw ParseError(ctx + ": expected an object");
  }
  auto take = [&](const char* key, auto& target) {
    if (doc.contains(key) && !doc.at(key).is_null()) {
      try {
        doc.at(key).get_to(target);
      } catch (const json::exception&) {
        throw ParseError(ctx + "." + key + ": wrong type");
      }
    }
  };
  take("bones", out.bones);
  take("iterations", out.iterations);
  take("lr_rig", out.lr_rig);
  take("lr_motion", out.lr_motion);
  take("beta1", out.beta1);
  take("beta2", out.beta2);
  take("adam_eps", out.adam_eps);
  take("tau_fraction", out.tau_fraction);
  take("top_k", out.top_k);
  take("geodesic_refinement", out.geodesic_refinement);
  take("grad_clip", out.grad_clip);
  take("seed", out.seed);
  take("init_jitter", out.init_jitter);
  take("log_every", out.log_every);
  if (doc.contains("tau")) {
    if (doc.at("tau").is_null()) {
      out.tau.reset();
    } else {
      out.tau = number(doc.at("tau"), ctx + ".tau");
    }
  }
}

json metrics_json(const SequenceMetrics& m) {
  return {{"cd_l1", m.cd_l1},
          {"cd_l2", m.cd_l2},
          {"mse", m.mse},
          {"mean_cd_l1", m.mean_cd_l1},
          {"mean_cd_l2", m.mean_cd_l2},
          {"mean_mse", m.mean_mse}};
}

SequenceMetrics parse_metrics(const json& j, const std::string& ctx) {
  SequenceMetrics m;
  auto list = [&](const char* key) {
    std::vector<double> out;
    for (const auto& v : array(field(j, key, ctx), ctx + "." + key)) {
      out.push_back(number(v, ctx + "." + key));
    }
    return out;
  };
  m.cd_l1 = list("cd_l1");
  m.cd_l2 = list("cd_l2");
  m.mse = list("mse");
  m.mean_cd_l1 = number(field(j, "mean_cd_l1", ctx), ctx + ".mean_cd_l1");
  m.mean_cd_l2 = number(field(j, "mean_cd_l2", ctx), ctx + ".mean_cd_l2");
  m.mean_mse = number(field(j, "mean_mse", ctx), ctx + ".mean_mse");
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Rig

RigFile make_rig_file(const RigParams& rig, const SkinningWeights& weights, const TriMesh& source) {
  RigFile file;
  file.tau = rig.tau;
  file.top_k = rig.top_k;
  file.geodesic_refinement = rig.geodesic_refinement;
  file.anchors = rig.anchors;
  file.bones = rig.bones();
  for (auto& b : file.bones) {
    b.orientation = b.orientation.normalized();
  }
  file.weights = weights;
  file.source = fingerprint(source);
  return file;
}

RigParams to_rig_params(const RigFile& file) {
  RigParams rig;
  rig.anchors = file.anchors;
  rig.tau = file.tau;
  rig.top_k = file.top_k;
  rig.geodesic_refinement = file.geodesic_refinement;
  for (const auto& b : file.bones) {
    rig.delta_center.push_back(b.delta_center);
    rig.log_scale.push_back(b.scale.array().log().matrix());
    rig.orientation.push_back(b.orientation);
  }
  return rig;
}

void check_fingerprint(const RigFile& rig, const TriMesh& mesh, bool force) {
  if (rig.weights.vertex_count() != mesh.vertices.size()) {
    throw TopologyMismatch("rig covers " + std::to_string(rig.weights.vertex_count()) + " vertices but the mesh has " +
                           std::to_string(mesh.vertices.size()));
  }
  if (!force && !(fingerprint(mesh) == rig.source)) {
    throw TopologyMismatch("rig was fitted on a different mesh (fingerprint " + rig.source.hash + " vs " +
                           fingerprint(mesh).hash + "); pass --force to apply it anyway");
  }
}

std::string serialize_rig(const RigFile& rig) {
  json bones = json::array();
  for (const auto& b : rig.bones) {
    bones.push_back({{"anchor_index", b.anchor_index},
                     {"delta_center", vec_json(b.delta_center)},
                     {"scale", vec_json(b.scale)},
                     {"quaternion", quat_json(b.orientation)}});
  }
  json coords = json::array();
  for (const auto& c : rig.anchors.coords) {
    coords.push_back(vec_json(c));
  }
  json weights = json::array();
  for (const auto& row : rig.weights.rows) {
    json idx = json::array();
    json val = json::array();
    for (const auto& e : row) {
      idx.push_back(e.bone);
      val.push_back(e.value);
    }
    weights.push_back({{"bones", idx}, {"values", val}});
  }
  json doc = {{"format_version", rig.format_version},
              {"kind", "rig"},
              {"bone_count", rig.bones.size()},
              {"tau", tau_json(rig.tau)},
              {"top_k", rig.top_k},
              {"geodesic_refinement", rig.geodesic_refinement},
              {"anchors", {{"indices", rig.anchors.indices}, {"coords", coords}}},
              {"bones", bones},
              {"weights", weights},
              {"source_mesh", {{"vertices", rig.source.vertices}, {"faces", rig.source.faces}, {"hash", rig.source.hash}}}};
  return doc.dump(1) + "\n";
}

RigFile parse_rig(const std::string& text) {
  const json doc = parse_document(text, "rig");
  RigFile rig;
  rig.format_version = doc.at("format_version").get<std::string>();
  const auto k = integer<std::size_t>(field(doc, "bone_count", "rig"), "rig.bone_count");
  rig.tau = parse_tau(field(doc, "tau", "rig"), "rig.tau");
  rig.top_k = integer<std::size_t>(field(doc, "top_k", "rig"), "rig.top_k");
  if (doc.contains("geodesic_refinement")) {
    rig.geodesic_refinement = doc.at("geodesic_refinement").get<bool>();
  }

  const json& anchors = field(doc, "anchors", "rig");
  const json& indices = array(field(anchors, "indices", "rig.anchors"), "rig.anchors.indices", k);
  const json& coords = array(field(anchors, "coords", "rig.anchors"), "rig.anchors.coords", k);
  for (std::size_t a = 0; a < k; ++a) {
    const std::string ctx = "rig.anchors[" + std::to_string(a) + "]";
    rig.anchors.indices.push_back(integer<std::int32_t>(indices[a], ctx + ".index"));
    rig.anchors.coords.push_back(parse_vec(coords[a], ctx + ".coord"));
  }

  const json& bones = array(field(doc, "bones", "rig"), "rig.bones", k);
  for (std::size_t b = 0; b < k; ++b) {
    const std::string ctx = "rig.bones[" + std::to_string(b) + "]";
    GaussianBone bone;
    bone.anchor_index = integer<std::int32_t>(field(bones[b], "anchor_index", ctx), ctx + ".anchor_index");
    bone.delta_center = parse_vec(field(bones[b], "delta_center", ctx), ctx + ".delta_center");
    bone.scale = parse_vec(field(bones[b], "scale", ctx), ctx + ".scale");
    bone.orientation = parse_quat(field(bones[b], "quaternion", ctx), ctx + ".quaternion");
    if (!(bone.scale.minCoeff() > 0.0)) {
      throw ValidationError(ctx + ": scale must be positive");
    }
    if (std::abs(bone.orientation.norm() - 1.0) > 1e-6) {
      throw ValidationError(ctx + ": quaternion is not unit length");
    }
    rig.bones.push_back(bone);
  }

  rig.weights.bone_count = k;
  const json& rows = array(field(doc, "weights", "rig"), "rig.weights");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string ctx = "rig.weights[" + std::to_string(i) + "]";
    const json& idx = array(field(rows[i], "bones", ctx), ctx + ".bones");
    const json& val = array(field(rows[i], "values", ctx), ctx + ".values");
    if (idx.size() != val.size() || idx.empty()) {
      throw ParseError(ctx + ": bones and values must be non-empty and of equal length");
    }
    std::vector<WeightEntry> row;
    double total = 0.0;
    for (std::size_t e = 0; e < idx.size(); ++e) {
      const auto bone = integer<std::int32_t>(idx[e], ctx + ".bones");
      const double value = number(val[e], ctx + ".values");
      if (bone < 0 || static_cast<std::size_t>(bone) >= k || value < 0.0) {
        throw ValidationError(ctx + ": invalid bone index or negative weight");
      }
      row.push_back({bone, value});
      total += value;
    }
    if (std::abs(total - 1.0) > 1e-5) {
      throw ValidationError(ctx + ": weights sum to " + std::to_string(total) + ", expected 1");
    }
    rig.weights.rows.push_back(std::move(row));
  }

  const json& src = field(doc, "source_mesh", "rig");
  rig.source.vertices = integer<std::uint64_t>(field(src, "vertices", "rig.source_mesh"), "rig.source_mesh.vertices");
  rig.source.faces = integer<std::uint64_t>(field(src, "faces", "rig.source_mesh"), "rig.source_mesh.faces");
  rig.source.hash = field(src, "hash", "rig.source_mesh").get<std::string>();
  if (rig.source.vertices != rig.weights.vertex_count()) {
    throw ValidationError("rig: weight rows do not match the source mesh vertex count");
  }
  return rig;
}

void save_rig(const fs::path& path, const RigFile& rig) { write_file_atomic(path, serialize_rig(rig)); }

RigFile load_rig(const fs::path& path) {
  try {
    return parse_rig(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Motion

MotionFile make_motion_file(const MotionParams& motion, const RigParams& rig) {
  MotionFile file;
  file.bone_count = rig.bone_count();
  file.frames = to_bone_transforms(motion, rig.centers());
  return file;
}

std::string serialize_motion(const MotionFile& motion) {
  json frames = json::array();
  for (const auto& f : motion.frames) {
    json bones = json::array();
    for (const auto& t : f.local) {
      bones.push_back(transform_json(t));
    }
    frames.push_back({{"frame", f.frame_index}, {"root", transform_json(f.root)}, {"bones", bones}});
  }
  json doc = {{"format_version", motion.format_version},
              {"kind", "motion"},
              {"bone_count", motion.bone_count},
              {"frame_count", motion.frames.size()},
              {"frames", frames}};
  return doc.dump(1) + "\n";
}

MotionFile parse_motion(const std::string& text) {
  const json doc = parse_document(text, "motion");
  MotionFile motion;
  motion.format_version = doc.at("format_version").get<std::string>();
  motion.bone_count = integer<std::size_t>(field(doc, "bone_count", "motion"), "motion.bone_count");
  const auto count = integer<std::size_t>(field(doc, "frame_count", "motion"), "motion.frame_count");
  const json& frames = array(field(doc, "frames", "motion"), "motion.frames");
  if (frames.size() != count) {
    throw ValidationError("motion: frame_count does not match the number of frames");
  }
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::string ctx = "motion.frames[" + std::to_string(f) + "]";
    BoneTransforms bt;
    bt.frame_index = frames[f].contains("frame") ? integer<std::int32_t>(frames[f].at("frame"), ctx + ".frame")
                                                 : static_cast<std::int32_t>(f + 1);
    bt.root = parse_transform(field(frames[f], "root", ctx), ctx + ".root");
    const json& bones = array(field(frames[f], "bones", ctx), ctx + ".bones", 0);
    if (bones.size() != motion.bone_count) {
      throw ValidationError(ctx + ": has " + std::to_string(bones.size()) + " bones, expected " +
                            std::to_string(motion.bone_count));
    }
    for (std::size_t k = 0; k < bones.size(); ++k) {
      bt.local.push_back(parse_transform(bones[k], ctx + ".bones[" + std::to_string(k) + "]"));
    }
    motion.frames.push_back(std::move(bt));
  }
  return motion;
}

void save_motion(const fs::path& path, const MotionFile& motion) { write_file_atomic(path, serialize_motion(motion)); }

MotionFile load_motion(const fs::path& path) {
  try {
    return parse_motion(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

std::string serialize_fit_report(const FitReport& report) {
  json doc = {{"format_version", kFormatVersion},
              {"kind", "fit_report"},
              {"final_loss", report.final_loss},
              {"loss_history", report.loss_history},
              {"logged_iterations", report.logged_iterations},
              {"wall_seconds", report.wall_seconds},
              {"frame_mse", report.frame_mse},
              {"tau", tau_json(report.tau)},
              {"config", config_json(report.config)}};
  return doc.dump(1) + "\n";
}

void save_fit_report(const fs::path& path, const FitReport& report) {
  write_file_atomic(path, serialize_fit_report(report));
}

std::string serialize_eval_report(const EvalReport& report) {
  json doc = {{"format_version", kFormatVersion}, {"kind", "eval"}};
  if (report.sequence) {
    doc["sequence"] = metrics_json(*report.sequence);
  }
  json splits = json::array();
  for (const auto& s : report.splits) {
    splits.push_back({{"seed", s.seed},
                      {"train", metrics_json(s.train)},
                      {"transfer", metrics_json(s.transfer)},
                      {"train_fit_loss", s.train_fit_loss},
                      {"transfer_fit_loss", s.transfer_fit_loss}});
  }
  doc["splits"] = splits;
  json agg = json::object();
  for (const auto& [key, ms] : report.aggregates) {
    agg[key] = {{"mean", ms.mean}, {"std", ms.stddev}};
  }
  doc["aggregates"] = agg;
  if (report.config) {
    doc["config"] = config_json(*report.config);
  }
  return doc.dump(1) + "\n";
}

EvalReport parse_eval_report(const std::string& text) {
  const json doc = parse_document(text, "eval");
  EvalReport report;
  if (doc.contains("sequence")) {
    report.sequence = parse_metrics(doc.at("sequence"), "eval.sequence");
  }
  if (doc.contains("splits")) {
    const json& splits = array(doc.at("splits"), "eval.splits");
    for (std::size_t i = 0; i < splits.size(); ++i) {
      const std::string ctx = "eval.splits[" + std::to_string(i) + "]";
      SplitResult s;
      s.seed = integer<std::uint64_t>(field(splits[i], "seed", ctx), ctx + ".seed");
      s.train = parse_metrics(field(splits[i], "train", ctx), ctx + ".train");
      s.transfer = parse_metrics(field(splits[i], "transfer", ctx), ctx + ".transfer");
      s.train_fit_loss = number(field(splits[i], "train_fit_loss", ctx), ctx + ".train_fit_loss");
      s.transfer_fit_loss = number(field(splits[i], "transfer_fit_loss", ctx), ctx + ".transfer_fit_loss");
      report.splits.push_back(std::move(s));
    }
  }
  if (doc.contains("aggregates")) {
    for (const auto& [key, value] : doc.at("aggregates").items()) {
      report.aggregates[key] = {number(field(value, "mean", "eval.aggregates." + key), key),
                                number(field(value, "std", "eval.aggregates." + key), key)};
    }
  }
  if (doc.contains("config")) {
    FitConfig cfg;
    apply_config(doc.at("config"), cfg, "eval.config");
    report.config = cfg;
  }
  return report;
}

FitConfig parse_fit_config(const std::string& text, const FitConfig& base) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  FitConfig out = base;
  apply_config(doc, out, "config");
  return out;
}

void save_eval_report(const fs::path& path, const EvalReport& report) {
  write_file_atomic(path, serialize_eval_report(report));
}

// ---------------------------------------------------------------------------
// Visualization

namespace {

std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = v - c;
  auto to_byte = [m](double ch) { return static_cast<std::uint8_t>(std::lround((ch + m) * 255.0)); };
  return {to_byte(r), to_byte(g), to_byte(b)};
}

std::array<std::array<std::uint8_t, 3>, 64> make_palette() {
  std::array<std::array<std::uint8_t, 3>, 64> p{};
  for (std::size_t i = 0; i < p.size(); ++i) {
    // golden-ratio hue walk
    const double hue = std::fmod(static_cast<double>(i) * 0.618033988749895, 1.0);
    const double sat = (i / 16) % 2 == 0 ? 0.85 : 0.55;
    const double val = (i / 8) % 2 == 0 ? 0.95 : 0.75;
    p[i] = hsv_to_rgb(hue, sat, val);
  }
  return p;
}

}  // namespace

const std::array<std::array<std::uint8_t, 3>, 64>& bone_palette() {
  static const auto palette = make_palette();
  return palette;
}

std::string weights_ply(const RigFile& rig, const TriMesh& mesh) {
  if (rig.weights.vertex_count() != mesh.vertices.size()) {
    throw TopologyMismatch("rig covers " + std::to_string(rig.weights.vertex_count()) + " vertices but the mesh has " +
                           std::to_string(mesh.vertices.size()));
  }
  std::string out = "ply\nformat ascii 1.0\ncomment dominant Gaussian bone per vertex\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "element face " + std::to_string(mesh.faces.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  const auto& palette = bone_palette();
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto bone = rig.weights.dominant_bone(i);
    const auto& c = palette[static_cast<std::size_t>(bone) % palette.size()];
    const Vec3& v = mesh.vertices[i];
    out += format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z()) + " " + std::to_string(c[0]) +
           " " + std::to_string(c[1]) + " " + std::to_string(c[2]) + "\n";
  }
  for (const Face& f : mesh.faces) {
    out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
  }
  return out;
}

void export_weights_visualization(const RigFile& rig, const TriMesh& mesh, const fs::path& out) {
  write_file_atomic(out, weights_ply(rig, mesh));
}

}  // namespace rigfit::io
