#pragma once

#include <array>
#include <string>

#include <Eigen/Core>

#include "gravtop/mesh.hpp"

namespace gravtop {

/// An element field on a structured grid, as stored in a .field file.
struct DensityField {
    int dim = 2;
    std::array<int, 3> nel{1, 1, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    Eigen::VectorXd values; ///< lexicographic element order, x fastest

    static DensityField from_mesh(const Mesh& mesh, const Eigen::VectorXd& values);
    int size() const { return nel[0] * nel[1] * (dim == 3 ? nel[2] : 1); }
};

/// Plain text: a comment line, `dim`, `nel`, `lengths` header lines and one
/// value per line in shortest round-trip form, so reading gives back the
/// same doubles bit for bit.
void write_field(const std::string& path, const DensityField& field);
DensityField read_field(const std::string& path);

/// 8-bit grayscale PNG of a 2D field, intensity 255 (1 - x); the top image
/// row is the largest y.
void write_png(const std::string& path, const DensityField& field);

/// Reads a grayscale PNG back as raw pixel rows (top row first).
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> pixels;
};
GrayImage read_png(const std::string& path);

/// Legacy VTK STRUCTURED_POINTS file with two CELL_DATA arrays: `density`
/// and `solid` (1 where density >= threshold). Works for 2D and 3D fields.
void write_vtk(const std::string& path, const DensityField& field, double threshold = 0.90);

} // namespace gravtop
