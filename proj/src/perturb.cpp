#include "fvmd/perturb.hpp"

#include <algorithm>
#include <numeric>

#include "fvmd/errors.hpp"
#include "fvmd/rng.hpp"

namespace fvmd {

const std::vector<double>& noise_presets(NoiseKind kind) {
  static const std::vector<double> local{0.1, 0.2, 0.4, 0.6, 0.8};
  static const std::vector<double> global{0.1, 0.2, 0.3, 0.4, 0.5};
  static const std::vector<double> counts{2, 3, 4, 5, 6};
  switch (kind) {
    case NoiseKind::local_swap: return local;
    case NoiseKind::global_swap: return global;
    default: return counts;
  }
}

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "local_swap") return NoiseKind::local_swap;
  if (name == "global_swap") return NoiseKind::global_swap;
  if (name == "interleave") return NoiseKind::interleave;
  if (name == "switch") return NoiseKind::switch_videos;
  throw BadConfig("unknown noise kind: " + name);
}

std::string noise_kind_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::local_swap: return "local_swap";
    case NoiseKind::global_swap: return "global_swap";
    case NoiseKind::interleave: return "interleave";
    default: return "switch";
  }
}

namespace detail {

std::vector<int> local_swap_order(int length, double p, std::uint64_t seed) {
  if (length < 2) throw TooShort("need at least 2 frames to swap");
  if (p <= 0.0 || p > 1.0) throw BadConfig("swap fraction must lie in (0, 1]");
  std::vector<int> order(length);
  std::iota(order.begin(), order.end(), 0);
  const int m = static_cast<int>(p * length / 2.0);
  if (m == 0) return order;

  // A set of m disjoint adjacent pairs is equivalent to an m-subset
  // t_1 < ... < t_m of {0..L-m-1} via start_i = t_i + (i - 1); sampling the
  // subset uniformly makes every pair placement equally likely.
  Rng rng(seed);
  auto picks = rng.sample_without_replacement(
      static_cast<std::uint64_t>(length - m), static_cast<std::uint64_t>(m));
  std::sort(picks.begin(), picks.end());
  for (int i = 0; i < m; ++i) {
    const int start = static_cast<int>(picks[i]) + i;
    std::swap(order[start], order[start + 1]);
  }
  return order;
}

std::vector<int> global_swap_order(int length, double p, std::uint64_t seed) {
  if (length < 2) throw TooShort("need at least 2 frames to swap");
  if (p <= 0.0 || p > 1.0) throw BadConfig("swap fraction must lie in (0, 1]");
  std::vector<int> order(length);
  std::iota(order.begin(), order.end(), 0);
  const int m = static_cast<int>(p * length);
  if (m == 0) return order;
  Rng rng(seed);
  const auto sources = rng.sample_without_replacement(
      static_cast<std::uint64_t>(length), static_cast<std::uint64_t>(m));
  for (const auto s : sources) {
    const auto partner = rng.below(static_cast<std::uint64_t>(length));
    std::swap(order[s], order[partner]);
  }
  return order;
}

std::vector<std::vector<int>> make_tuples(int count, int n, std::uint64_t seed) {
  if (n < 2) throw BadConfig("tuple size must be at least 2");
  if (count < n) {
    throw NotEnoughVideos("need at least " + std::to_string(n) +
                          " equal-length videos, have " + std::to_string(count));
  }
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<int>> tuples;
  for (int base = 0; base + n <= count; base += n) {
    tuples.emplace_back(order.begin() + base, order.begin() + base + n);
  }
  return tuples;  // leftover videos are dropped
}

}  // namespace detail

namespace {

FrameSequence reorder(const FrameSequence& seq, const std::vector<int>& order) {
  FrameSequence out;
  out.id = seq.id;
  out.frames.reserve(order.size());
  for (int i : order) out.frames.push_back(seq.frames[i]);
  return out;
}

void check_equal_lengths(const std::vector<FrameSequence>& seqs) {
  if (seqs.empty()) throw NotEnoughVideos("no input videos");
  const int L = seqs.front().length();
  for (const auto& s : seqs) {
    if (s.length() != L) {
      throw NotEnoughVideos("videos differ in length: " + s.id);
    }
  }
  if (L < 1) throw TooShort("empty videos");
}

}  // namespace

FrameSequence local_swap(const FrameSequence& seq, double p, std::uint64_t seed) {
  return reorder(seq, detail::local_swap_order(seq.length(), p, seed));
}

FrameSequence global_swap(const FrameSequence& seq, double p, std::uint64_t seed) {
  return reorder(seq, detail::global_swap_order(seq.length(), p, seed));
}

std::vector<FrameSequence> interleave(const std::vector<FrameSequence>& seqs,
                                      int n, std::uint64_t seed) {
  check_equal_lengths(seqs);
  const auto tuples = detail::make_tuples(static_cast<int>(seqs.size()), n, seed);
  const int L = seqs.front().length();
  std::vector<FrameSequence> out;
  out.reserve(tuples.size() * n);
  for (const auto& tuple : tuples) {
    for (int o = 0; o < n; ++o) {
      FrameSequence w;
      w.id = seqs[tuple[o]].id + "+il" + std::to_string(n);
      w.frames.reserve(L);
      for (int t = 0; t < L; ++t) {
        w.frames.push_back(seqs[tuple[(o + t) % n]].frames[t]);
      }
      out.push_back(std::move(w));
    }
  }
  return out;
}

std::vector<FrameSequence> switch_videos(const std::vector<FrameSequence>& seqs,
                                         int n, std::uint64_t seed) {
  check_equal_lengths(seqs);
  const auto tuples = detail::make_tuples(static_cast<int>(seqs.size()), n, seed);
  const int L = seqs.front().length();
  std::vector<FrameSequence> out;
  out.reserve(tuples.size() * n);
  for (const auto& tuple : tuples) {
    for (int i = 0; i < n; ++i) {
      FrameSequence w;
      w.id = seqs[tuple[i]].id + "+sw" + std::to_string(n);
      w.frames.reserve(L);
      for (int c = 0; c < n; ++c) {
        const int lo = static_cast<int>(static_cast<long long>(c) * L / n);
        const int hi = static_cast<int>(static_cast<long long>(c + 1) * L / n);
        const auto& src = seqs[tuple[(i + c) % n]];
        for (int t = lo; t < hi; ++t) w.frames.push_back(src.frames[t]);
      }
      out.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace fvmd
