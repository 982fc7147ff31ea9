#include "cv2x/rng.hpp"

namespace cv2x {

Rng make_stream(std::uint64_t master_seed, std::string_view name) {
  std::uint64_t tag = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    tag ^= ch;
    tag *= 0x100000001b3ULL;
  }
  const std::uint64_t a = mix64(master_seed);
  const std::uint64_t b = mix64(a ^ tag);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

RngStreams::RngStreams(std::uint64_t master_seed)
    : mobility(make_stream(master_seed, "mobility")),
      shadowing(make_stream(master_seed, "shadowing")),
      sps(make_stream(master_seed, "sps")),
      harq(make_stream(master_seed, "harq")),
      app(make_stream(master_seed, "app")) {}

}  // namespace cv2x
