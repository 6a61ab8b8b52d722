/// Simulate boundary data for one bump and recover the spherical means at one exterior point.

#include <parasmt/pipeline.hpp>

#include <cstdio>

int main(int argc, char** argv) {
    using namespace parasmt;
    RunConfig cfg = argc > 1 ? read_config(argv[1]) : RunConfig{};
    if (cfg.phantoms.empty()) cfg.phantoms.emplace_back(std::vector<Bump>{{{1.0, 0.0}, 0.5, 1.0, 4}}, cfg.eta0);
    if (cfg.eval_points.empty()) cfg.eval_points = {{0.0, 1.6}};
    cfg.xi = {-17, 17, 681};
    cfg.r = {0, 150, 15001};
    cfg.k = {0.2, 25, 120};
    cfg.series_tol = 1e-12;

    auto data = simulate(cfg);
    auto res = run_extract(cfg, data);
    for (const auto& c : res.certificates) std::printf("# %s = %.3e\n", c.name.c_str(), c.value);
    std::printf("%8s %14s %14s\n", "r", "recovered", "direct");
    auto x = to_cartesian(res.psi.points[0]);
    for (std::size_t j = 0; j < res.radii.size(); ++j)
        std::printf("%8.3f %14.6e %14.6e\n", res.radii[j], res.values(0, j), spherical_mean(cfg.phantoms[0], x, res.radii[j]));
}
