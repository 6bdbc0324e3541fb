#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace eqc {

// Parameters of the relaxed p-spin field: interaction order p >= 3 and the
// gradient/solenoidal mixing parameter tau in (-1/(p-1), 1).
struct ModelParams {
    int p = 3;
    double tau = 0.5;

    double alpha() const { return 1.0 + (p - 1) * tau; }

    bool valid() const {
        return p >= 3 && tau > -1.0 / (p - 1) && tau < 1.0 && alpha() > 0.0;
    }

    void require_valid() const {
        if (!valid())
            throw std::invalid_argument("ModelParams: need p >= 3 and -1/(p-1) < tau < 1, got p=" +
                                        std::to_string(p) + " tau=" + std::to_string(tau));
    }
};

} // namespace eqc
