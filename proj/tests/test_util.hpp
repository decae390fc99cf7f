#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "scct/dataset.hpp"
#include "scct/tetrolet.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = 0.0,
                                     double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
    return m;
}

inline scct::ImageGrid random_image(int side, std::mt19937_64& rng) {
    return scct::ImageGrid(random_matrix(side, side, rng));
}

inline Eigen::Matrix4d random_block(std::mt19937_64& rng) {
    return random_matrix(4, 4, rng);
}

inline std::string data_dir() { return SCCT_DATA_DIR; }

// The bundled 5,000-image MNIST subset, normalized to 32×32.
inline scct::LabeledDataset mnist_subset() { return scct::load_mnist_directory(data_dir() + "/mnist5k"); }

}  // namespace testutil
