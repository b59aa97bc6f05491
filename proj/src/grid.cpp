#include "navslip/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "navslip/errors.hpp"

namespace navslip {

Grid::Grid(int nx_, int ny_, int nz_) : nx(nx_), ny(ny_), nz(nz_) {
    if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0)
        throw std::invalid_argument("grid: nx and ny must be even and >= 4 (got " +
                                    std::to_string(nx) + ", " + std::to_string(ny) + ")");
    if (nz < 4) throw std::invalid_argument("grid: nz must be >= 4 (got " + std::to_string(nz) + ")");
}

double Grid::h_min() const {
    return std::min({lx / nx, ly / ny, height / nz});
}

void require_compatible(const Grid& a, const Grid& b) {
    if (!(a == b))
        throw GridMismatchError("incompatible grids: " + std::to_string(a.nx) + "x" +
                                std::to_string(a.ny) + "x" + std::to_string(a.nz) + " vs " +
                                std::to_string(b.nx) + "x" + std::to_string(b.ny) + "x" +
                                std::to_string(b.nz));
}

}  // namespace navslip
