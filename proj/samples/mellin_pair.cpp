/// Mellin transform of sampled K0 and its inversion back to K0.

#include <parasmt/mellin.hpp>

#include <cstdio>

int main() {
    using namespace parasmt;
    auto K = LogGridFunction::sample([](double y) { return bessel_k0(y); }, -140, 6.5, 2933);
    for (complex s : {complex(0.3, 0), complex(0.5, 2), complex(0.9, 0)}) {
        complex exact = std::pow(2.0, s - 2.0) * gamma_complex(s / 2.0) * gamma_complex(s / 2.0);
        complex got = mellin(K, s);
        std::printf("s = %4.1f%+4.1fi  M[K0] = %.12f%+.12fi  exact %.12f%+.12fi\n", s.real(), s.imag(), got.real(), got.imag(),
                    exact.real(), exact.imag());
    }
    auto G = mellin_samples(K, 0.5, 60, 0.01);
    for (double r : {0.5, 1.0, 2.0})
        std::printf("inverse at r = %.1f: %.10f  K0 = %.10f\n", r, inverse_mellin(G, r), bessel_k0(r));
}
