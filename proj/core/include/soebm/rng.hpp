#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace soebm {

/// What a substream is used for. Part of the substream key, so two purposes
/// on the same (epoch, example) never share draws.
enum class StreamPurpose : std::uint32_t {
  kInit = 1,
  kShuffle = 2,
  kProposal = 3,
  kDropout = 4,
  kMonteCarlo = 5,
  kData = 6,
  kSplit = 7,
  kLandscape = 8,
  kSolver = 9,
  kTwoStageShuffle = 10,
  kEval = 11,
  kTest = 255,
};

struct SubstreamKey {
  std::uint32_t epoch = 0;
  std::uint32_t index = 0;
  StreamPurpose purpose = StreamPurpose::kTest;
};

/// Counter-based generator (Philox-4x32-10). The 64-bit seed is the cipher
/// key; the substream key occupies three counter words and the draw counter
/// the remaining 40 bits, so distinct keys never overlap within 2^40 blocks.
class RngStream {
 public:
  static constexpr std::uint64_t kMaxBlocks = std::uint64_t{1} << 40;

  RngStream(std::uint64_t seed, SubstreamKey key);

  std::uint64_t seed() const { return seed_; }
  SubstreamKey key() const { return key_; }

  /// A fresh stream with the same seed and a different key.
  RngStream substream(SubstreamKey key) const { return RngStream(seed_, key); }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  void refill();

  std::uint64_t seed_;
  SubstreamKey key_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;  // remaining 64-bit words in buffer_ (0..2)
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Philox-4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::vector<double> draw_standard_normal(RngStream& stream, std::size_t n);

}  // namespace soebm
