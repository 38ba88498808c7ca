#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fvmd/image.hpp"

namespace fvmd {

struct FrameSequence {
  std::string id;
  std::vector<Image> frames;

  int width() const { return frames.empty() ? 0 : frames.front().width; }
  int height() const { return frames.empty() ? 0 : frames.front().height; }
  int channels() const { return frames.empty() ? 0 : frames.front().channels; }
  int length() const { return static_cast<int>(frames.size()); }
};

struct ClipSpec {
  int frames_per_clip = 16;
  int stride = 1;
};

struct Clip {
  std::string source_id;
  int start_frame = 0;
  std::vector<Image> frames;
};

// Side of the canonical square working resolution.
inline constexpr int kCanvas = 256;

// Frames are the image files in `dir` (.png/.ppm/.pgm), in lexicographic
// filename order. The sequence id is the directory name.
FrameSequence load_frames(const std::filesystem::path& dir);

// Every frame resized to 256x256. Channel count is kept; grayscale
// conversion happens separately where the tracker needs it.
FrameSequence preprocess(const FrameSequence& seq);

// In-place variant of to_gray over a whole sequence.
FrameSequence gray_sequence(const FrameSequence& seq);

// Windows of F frames starting at 0, s, 2s, ...; trailing frames that cannot
// fill a window are dropped.
std::vector<Clip> segment(const FrameSequence& seq, const ClipSpec& spec);

// Start offsets of the clips segment() would produce.
std::vector<int> segment_starts(int length, const ClipSpec& spec);

void validate_clip_spec(const ClipSpec& spec);

// Subdirectories of a video-set directory, sorted by name.
std::vector<std::filesystem::path> list_video_dirs(
    const std::filesystem::path& set_dir);

}  // namespace fvmd
