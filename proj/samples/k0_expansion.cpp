/// K0(k |x - x'|) from its parabolic-coordinate expansion, against the closed form.

#include <parasmt/extended_precision.hpp>

#include <cstdio>

int main() {
    using namespace parasmt;
    ParabolicPoint p{0.4, 2.0}, q{-0.3, 0.8};
    double rho = distance(to_cartesian(p), to_cartesian(q));
    std::printf("%6s %22s %22s %8s %6s\n", "k", "series", "bessel_k0", "terms", "digits");
    for (double k : {0.25, 1.0, 4.0, 9.0}) {
        auto s = k0_series_adaptive(p, q, k, 1e-12);
        std::printf("%6g %22.15e %22.15e %8d %6d\n", k, s.value, bessel_k0(k * rho), s.terms, s.digits);
    }
}
