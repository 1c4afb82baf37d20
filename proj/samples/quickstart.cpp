// Builds a dyadic cube system on a 16-point line and checks that the lower
// half is a cube-shaped plump set.

#include <iostream>

#include "dyadic/dyadic.hpp"

int main() {
    using namespace dyadic;

    std::vector<std::vector<double>> d(16, std::vector<double>(16));
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) d[i][j] = std::abs(i - j);
    const auto space = make_space(d);

    SubsetMask lower(16);
    for (PointIndex i = 0; i < 8; ++i) lower.set(i);

    const DPlumpParams p{1.0 / 16.0, 0, 6.0, 8.0};
    std::cout << "lower half d-plump: " << check_dplump(space, lower, p).certified << "\n";
    std::cout << "complement d-plump: " << check_dplump(space, lower.complement(), p).certified << "\n";

    const auto cert = certify_cube_candidate(space, lower, p);
    std::cout << "cube candidate accepted: " << cert.accepted() << "\n";

    const auto sys = build_plain_points(space, make_net_params(space, 1.0 / 16.0, 1.0, 1.0));
    const auto order = build_order(space, sys);
    const auto cubes = build_cube_system(space, sys, order);
    for (int k = cubes.k_min(); k <= cubes.k_max(); ++k)
        std::cout << "generation " << k << ": " << cubes.level(k).cubes.size() << " cubes\n";
}
