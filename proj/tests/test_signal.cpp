#include <doctest.h>

#include <random>

#include "faultline/error.hpp"
#include "faultline/signal.hpp"

using namespace faultline;

namespace {

std::vector<RawSample> ramp(std::size_t n) {
  std::vector<RawSample> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back({static_cast<std::int64_t>(i), static_cast<double>(i)});
  return v;
}

}  // namespace

TEST_CASE("assemble_frames tiles and discards partial windows") {
  auto f = assemble_frames(ramp(4), 2, 2);
  REQUIRE(f.size() == 2);
  CHECK(f[0].start_t == 0);
  CHECK(f[1].start_t == 2);
  CHECK(f[1].samples == std::vector<double>{2, 3});

  CHECK(assemble_frames(ramp(5), 2, 2).size() == 2);

  f = assemble_frames(ramp(6), 4, 2);
  REQUIRE(f.size() == 2);
  CHECK(f[0].start_t == 0);
  CHECK(f[1].start_t == 2);
  CHECK(f[1].samples == std::vector<double>{2, 3, 4, 5});
}

TEST_CASE("frame count formula and purity") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t w = 2 + rng() % 20;
    const std::size_t h = 1 + rng() % w;
    const std::size_t n = rng() % 80;
    const auto s = ramp(n);
    const auto frames = assemble_frames(s, w, h);
    REQUIRE(frames.size() == expected_frame_count(n, w, h));
    for (std::size_t k = 0; k < frames.size(); ++k) {
      CHECK(frames[k].start_t == static_cast<std::int64_t>(k * h));
      CHECK(frames[k].samples.size() == w);
      CHECK(frames[k].samples.front() == static_cast<double>(k * h));
    }
    const auto again = assemble_frames(s, w, h);
    REQUIRE(again.size() == frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) CHECK(again[k].samples == frames[k].samples);
  }
}

TEST_CASE("non-monotone indices are stream errors") {
  FrameAssembler fa(2, 1);
  fa.push({5, 1.0});
  try {
    fa.push({5, 2.0});
    FAIL("expected a stream error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::stream);
  }
  CHECK_THROWS_AS(fa.push({4, 2.0}), Error);
  CHECK(fa.buffered() == 1);
}

TEST_CASE("frame geometry is validated") {
  CHECK_THROWS_AS(FrameAssembler(1, 1), Error);
  CHECK_THROWS_AS(FrameAssembler(4, 0), Error);
  CHECK_THROWS_AS(FrameAssembler(4, 5), Error);
}
