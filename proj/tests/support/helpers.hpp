#pragma once

#include <Eigen/Dense>

#include "eqcount/rng.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(eqc::Rng& rng, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gauss();
    return m;
}

inline Eigen::VectorXd random_vector(eqc::Rng& rng, int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.next_gauss();
    return v;
}

inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues(); // descending
}

} // namespace testutil
