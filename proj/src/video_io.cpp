#include "fvmd/video_io.hpp"

#include <algorithm>
#include <cctype>

#include "fvmd/errors.hpp"

namespace fvmd {

namespace {

bool image_extension(const std::filesystem::path& p) {
  auto e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return e == ".png" || e == ".ppm" || e == ".pgm";
}

}  // namespace

FrameSequence load_frames(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw NoFrames("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && image_extension(entry.path())) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw NoFrames("no image files in " + dir.string());
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });

  FrameSequence seq;
  seq.id = dir.filename().string();
  if (seq.id.empty()) seq.id = dir.parent_path().filename().string();
  seq.frames.reserve(files.size());
  for (const auto& f : files) {
    Image img = decode_image(f);
    if (!seq.frames.empty() && !img.same_shape(seq.frames.front())) {
      throw InconsistentFrames("frame " + f.filename().string() + " in " +
                               dir.string() + " differs in shape");
    }
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

FrameSequence preprocess(const FrameSequence& seq) {
  if (seq.frames.empty()) throw NoFrames("empty sequence " + seq.id);
  FrameSequence out;
  out.id = seq.id;
  out.frames.reserve(seq.frames.size());
  for (const auto& f : seq.frames) {
    out.frames.push_back(resize_bilinear(f, kCanvas, kCanvas));
  }
  return out;
}

FrameSequence gray_sequence(const FrameSequence& seq) {
  FrameSequence out;
  out.id = seq.id;
  out.frames.reserve(seq.frames.size());
  for (const auto& f : seq.frames) out.frames.push_back(to_gray(f));
  return out;
}

void validate_clip_spec(const ClipSpec& spec) {
  if (spec.frames_per_clip < 2) {
    throw BadConfig("frames per clip must be at least 2");
  }
  if (spec.stride < 1 || spec.stride > spec.frames_per_clip) {
    throw BadConfig("stride must lie in [1, frames per clip]");
  }
}

std::vector<int> segment_starts(int length, const ClipSpec& spec) {
  validate_clip_spec(spec);
  if (length < spec.frames_per_clip) {
    throw TooShort("sequence of " + std::to_string(length) +
                   " frames is shorter than a clip of " +
                   std::to_string(spec.frames_per_clip));
  }
  std::vector<int> starts;
  for (int s = 0; s + spec.frames_per_clip <= length; s += spec.stride) {
    starts.push_back(s);
  }
  return starts;
}

std::vector<Clip> segment(const FrameSequence& seq, const ClipSpec& spec) {
  const auto starts = segment_starts(seq.length(), spec);
  std::vector<Clip> clips;
  clips.reserve(starts.size());
  for (int s : starts) {
    Clip c;
    c.source_id = seq.id;
    c.start_frame = s;
    c.frames.assign(seq.frames.begin() + s,
                    seq.frames.begin() + s + spec.frames_per_clip);
    clips.push_back(std::move(c));
  }
  return clips;
}

std::vector<std::filesystem::path> list_video_dirs(
    const std::filesystem::path& set_dir) {
  if (!std::filesystem::is_directory(set_dir)) {
    throw NoFrames("not a directory: " + set_dir.string());
  }
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(set_dir)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace fvmd
