#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fvmd/video_io.hpp"

namespace fvmd {

enum class NoiseKind { local_swap, global_swap, interleave, switch_videos };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::local_swap;
  double intensity = 0.0;  // fraction for swaps, tuple size for the others
  std::uint64_t seed = 0;
};

// The preset intensity grids exercised by the sensitivity protocol.
const std::vector<double>& noise_presets(NoiseKind kind);

NoiseKind parse_noise_kind(const std::string& name);
std::string noise_kind_name(NoiseKind kind);

// floor(p*L/2) disjoint adjacent frame pairs, drawn uniformly over all valid
// pair placements, each swapped in place.
FrameSequence local_swap(const FrameSequence& seq, double p, std::uint64_t seed);

// floor(p*L) source frames drawn without replacement, each swapped with an
// independently drawn partner, applied in draw order.
FrameSequence global_swap(const FrameSequence& seq, double p, std::uint64_t seed);

// Videos grouped into random disjoint n-tuples (leftovers dropped); within a
// tuple, output o takes frame t from input (o + t) mod n.
std::vector<FrameSequence> interleave(const std::vector<FrameSequence>& seqs,
                                      int n, std::uint64_t seed);

// Same grouping; output i is n contiguous chunks, chunk c = frames
// [floor(cL/n), floor((c+1)L/n)) of input (i + c) mod n.
std::vector<FrameSequence> switch_videos(const std::vector<FrameSequence>& seqs,
                                         int n, std::uint64_t seed);

namespace detail {

// Index-level versions used by the pipeline and the tests: the output order
// of frames 0..L-1 after each swap noise.
std::vector<int> local_swap_order(int length, double p, std::uint64_t seed);
std::vector<int> global_swap_order(int length, double p, std::uint64_t seed);
// Random disjoint n-tuples over video indices 0..count-1.
std::vector<std::vector<int>> make_tuples(int count, int n, std::uint64_t seed);

}  // namespace detail

}  // namespace fvmd
