// Cut times of a fan of directions on the cylinder and on the 2 + cos warp.

#include <cstdio>

#include "lorkam/lorkam.hpp"

int main() {
  using namespace lorkam;
  for (const char* name : {"cylinder", "warped-2cos"}) {
    auto sp = spacetime_from_name(name);
    std::printf("%s\n", name);
    for (const auto& r : cut_locus_sample(sp, ChartPoint{0, 0}, 7, 1e3)) {
      if (!r.error.empty()) {
        std::printf("  w=%+.3f  error: %s\n", r.direction, r.error.c_str());
        continue;
      }
      if (!r.alpha.finite()) {
        std::printf("  w=%+.3f  %s\n", r.direction, to_string(r.alpha.kind));
        continue;
      }
      std::printf("  w=%+.3f  alpha=%.10g  cut at (%.6g, %.6g)  %s%s\n", r.direction, r.alpha.value,
                  (*r.cut_point)[0], (*r.cut_point)[1], r.multi_geodesic ? "multi " : "",
                  r.conjugate ? "conjugate" : "");
    }
  }
  auto v = in_future_aubry(Spacetime::cylinder(8), ChartPoint{0, 0}, ChartPoint{3, 0}, 1e3);
  std::printf("(3, 0) from the origin: %s\n", to_string(v.kind));
}
