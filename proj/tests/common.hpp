#pragma once

#include <coherence/coherence.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace fixtures {

using namespace coherence;

inline DensityMatrix rho0() {
    Matrix m(2, 2);
    m << 2.0 / 3.0, 0.4, 0.4, 1.0 / 3.0;
    return DensityMatrix(m);
}

inline DensityMatrix rho1() {
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = m(0, 1) = m(1, 0) = m(1, 1) = 0.25;
    m(2, 2) = 0.5;
    return DensityMatrix(m);
}

inline DensityMatrix psi(std::size_t d) {
    IndexSet all(d);
    for (std::size_t i = 0; i < d; ++i) all[i] = i;
    return DensityMatrix::from_pure(PureState::uniform(d, all));
}

inline DensityMatrix qubit(double p, Complex z) {
    Matrix m(2, 2);
    m << p, z, std::conj(z), 1.0 - p;
    return DensityMatrix(m);
}

inline DensityMatrix diag(std::vector<double> p) { return DensityMatrix::diagonal(p); }

} // namespace fixtures
