// 2D scalar images for the tracking module. Pixel (r, c) indexing, row-major
// storage, bilinear sampling with nearest-edge clamping outside the domain.
#pragma once

#include <filesystem>
#include <vector>

#include "strainforge/types.hpp"

namespace strainforge {

class Image2D {
public:
    Image2D() = default;
    Image2D(int width, int height, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }

    double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * width_ + c]; }
    double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * width_ + c]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    // Bilinear sample at fractional (row, col); coordinates are clamped to the
    // image rectangle first, so out-of-bounds queries return edge values.
    double sample(double r, double c) const;
    // Gradient (d/dr, d/dc) of the bilinear interpolant at the clamped
    // position; zero in clamped directions.
    Vec2 sample_gradient(double r, double c) const;

    void validate() const;  // >= 8x8, finite values

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

// Box-filtered 2x downsample (dimensions halved, floor).
Image2D downsample2(const Image2D& img);

// PGM P2 (ASCII) / P5 (binary, 8- or 16-bit) readers and an 8-bit P5 writer.
Image2D load_pgm(const std::filesystem::path& path);
void save_pgm(const Image2D& img, const std::filesystem::path& path);

// Raw float grid: first line "width height\n" in ASCII, then width*height
// little-endian float32 values, row-major.
Image2D load_f32grid(const std::filesystem::path& path);
void save_f32grid(const Image2D& img, const std::filesystem::path& path);

// Dispatches on extension: .pgm / .f32grid.
Image2D load_image(const std::filesystem::path& path);

}  // namespace strainforge
