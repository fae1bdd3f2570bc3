#include "gravtop/field_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <fmt/os.h>
#include <png.h>

#include "gravtop/error.hpp"

namespace gravtop {

namespace {

constexpr const char* kMagic = "# gravtop density field v1";

double parse_double(const std::string& token, const std::string& path) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size())
        throw ConfigError(fmt::format("{}: bad number '{}'", path, token));
    return v;
}

void check_field(const DensityField& f) {
    if (f.dim != 2 && f.dim != 3) throw ConfigError("field dim must be 2 or 3");
    if (f.values.size() != f.size())
        throw ConfigError(fmt::format("field has {} values, grid needs {}", f.values.size(), f.size()));
}

} // namespace

DensityField DensityField::from_mesh(const Mesh& mesh, const Eigen::VectorXd& values) {
    DensityField f;
    f.dim = mesh.dim();
    f.nel = {mesh.nel(0), mesh.nel(1), mesh.dim() == 3 ? mesh.nel(2) : 1};
    f.lengths = {mesh.length(0), mesh.length(1), mesh.dim() == 3 ? mesh.length(2) : mesh.thickness()};
    f.values = values;
    check_field(f);
    return f;
}

void write_field(const std::string& path, const DensityField& field) {
    check_field(field);
    std::ofstream out(path);
    if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
    out << kMagic << '\n';
    out << fmt::format("dim {}\n", field.dim);
    out << fmt::format("nel {} {} {}\n", field.nel[0], field.nel[1], field.nel[2]);
    out << fmt::format("lengths {} {} {}\n", field.lengths[0], field.lengths[1], field.lengths[2]);
    std::string buf;
    for (double v : field.values) {
        buf += fmt::format("{}\n", v);
        if (buf.size() > (1u << 16)) {
            out << buf;
            buf.clear();
        }
    }
    out << buf;
    if (!out) throw ConfigError(fmt::format("write to '{}' failed", path));
}

DensityField read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open '{}'", path));
    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw ConfigError(fmt::format("{}: not a density field file", path));

    DensityField f;
    auto header = [&](const char* key) {
        if (!std::getline(in, line)) throw ConfigError(fmt::format("{}: missing '{}' line", path, key));
        std::istringstream ls(line);
        std::string k;
        ls >> k;
        if (k != key) throw ConfigError(fmt::format("{}: expected '{}', got '{}'", path, key, k));
        std::vector<std::string> tokens;
        for (std::string t; ls >> t;) tokens.push_back(t);
        return tokens;
    };
    auto d = header("dim");
    auto n = header("nel");
    auto l = header("lengths");
    if (d.size() != 1 || n.size() != 3 || l.size() != 3) throw ConfigError(fmt::format("{}: malformed header", path));
    f.dim = static_cast<int>(parse_double(d[0], path));
    for (int a = 0; a < 3; ++a) {
        f.nel[a] = static_cast<int>(parse_double(n[a], path));
        f.lengths[a] = parse_double(l[a], path);
    }
    if (f.dim != 2 && f.dim != 3) throw ConfigError(fmt::format("{}: dim must be 2 or 3", path));
    if (f.nel[0] < 1 || f.nel[1] < 1 || f.nel[2] < 1) throw ConfigError(fmt::format("{}: bad element counts", path));

    f.values.resize(f.size());
    Eigen::Index i = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (i >= f.values.size()) throw ConfigError(fmt::format("{}: more values than the grid holds", path));
        f.values[i++] = parse_double(line, path);
    }
    if (i != f.values.size())
        throw ConfigError(fmt::format("{}: {} values, expected {}", path, i, f.values.size()));
    return f;
}

void write_png(const std::string& path, const DensityField& field) {
    check_field(field);
    if (field.dim != 2) throw ConfigError("PNG export needs a 2D field; use VTK for 3D");
    const int w = field.nel[0];
    const int h = field.nel[1];
    std::vector<unsigned char> pixels(static_cast<std::size_t>(w) * h);
    for (int j = 0; j < h; ++j) {
        const int row = h - 1 - j;
        for (int i = 0; i < w; ++i) {
            const double x = std::clamp(field.values[j * w + i], 0.0, 1.0);
            pixels[static_cast<std::size_t>(row) * w + i] = static_cast<unsigned char>(std::lround(255.0 * (1.0 - x)));
        }
    }

    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw ConfigError(fmt::format("cannot write '{}'", path));
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw ConfigError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ConfigError(fmt::format("libpng failed writing '{}'", path));
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < h; ++r) png_write_row(png, pixels.data() + static_cast<std::size_t>(r) * w);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

GrayImage read_png(const std::string& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw ConfigError(fmt::format("cannot read PNG '{}': {}", path, image.message));
    image.format = PNG_FORMAT_GRAY;
    GrayImage out;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw ConfigError(fmt::format("cannot decode PNG '{}': {}", path, image.message));
    }
    return out;
}

void write_vtk(const std::string& path, const DensityField& field, double threshold) {
    check_field(field);
    const int nz = field.dim == 3 ? field.nel[2] : 1;
    const double hz = field.dim == 3 ? field.lengths[2] / nz : 0.0;
    auto out = fmt::output_file(path);
    out.print("# vtk DataFile Version 3.0\n");
    out.print("gravtop density field\n");
    out.print("ASCII\nDATASET STRUCTURED_POINTS\n");
    out.print("DIMENSIONS {} {} {}\n", field.nel[0] + 1, field.nel[1] + 1, field.dim == 3 ? nz + 1 : 1);
    out.print("ORIGIN 0 0 0\n");
    out.print("SPACING {} {} {}\n", field.lengths[0] / field.nel[0], field.lengths[1] / field.nel[1],
              field.dim == 3 ? hz : 1.0);
    out.print("CELL_DATA {}\n", field.size());
    out.print("SCALARS density double 1\nLOOKUP_TABLE default\n");
    for (double v : field.values) out.print("{}\n", v);
    out.print("SCALARS solid unsigned_char 1\nLOOKUP_TABLE default\n");
    for (double v : field.values) out.print("{}\n", v >= threshold ? 1 : 0);
}

} // namespace gravtop
