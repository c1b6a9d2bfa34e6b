// Two maximizers between antipodal points of the flat cylinder.

#include <cstdio>

#include "lorkam/lorkam.hpp"

int main() {
  using namespace lorkam;
  auto cyl = Spacetime::cylinder(8);
  ChartPoint x{0, 0}, y{4, kPi};
  auto ms = connect(cyl, x, y);
  std::printf("d = %.15g (sqrt(16 - pi^2) = %.15g)\n", ms.d, std::sqrt(16 - kPi * kPi));
  for (const auto& m : ms.maximizers)
    std::printf("  v = (%.12g, %.12g)  winding %ld  residual %.3g\n", m.v[0], m.v[1], m.winding,
                m.residual);
  std::printf("c_1 = %.15g\n", action_c(cyl, 1.0, x, y));

  auto warped = spacetime_from_name("warped-cosh");
  auto mw = connect(warped, x, ChartPoint{2, 0.5});
  std::printf("warped cosh: d = %.15g with %zu maximizer(s)\n", mw.d, mw.multiplicity());
}
