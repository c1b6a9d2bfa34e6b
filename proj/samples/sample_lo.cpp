// The regularized maximizer F(s, x, y) moving off a cut point into NU.

#include <cstdio>

#include "lorkam/lorkam.hpp"

int main() {
  using namespace lorkam;
  auto cyl = Spacetime::cylinder(8);
  ChartPoint x{0, 0}, y{5, kPi};
  for (double s : {0.0, 0.01, 0.02, 0.05}) {
    auto r = f_map_detail(cyl, s, x, y);
    std::printf("s=%.2f  z=(%.10f, %.10f)  value=%.12f  NU=%s\n", s, r.z[0], wrap_angle(r.z[1]),
                r.eval.value, s == 0.0 ? "-" : (r.nu ? "yes" : "no"));
  }
  auto st = cut_to_nu_step(cyl, x, ChartPoint{kPi, kPi}, 0.5, 0.5);
  std::printf("cut -> NU step from the null cut point: (%.6g, %.6g), NU=%s\n", st.second[0], st.second[1],
              st.nu ? "yes" : "no");
}
