#include "strainforge/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace strainforge {

Image2D::Image2D(int width, int height, double fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 1 || height < 1) throw ValidationError("image dimensions must be positive");
}

void Image2D::validate() const {
    if (width_ < 8 || height_ < 8)
        throw ValidationError("image must be at least 8x8 pixels");
    for (double v : data_)
        if (!std::isfinite(v)) throw ValidationError("image intensities must be finite");
}

double Image2D::sample(double r, double c) const {
    r = std::clamp(r, 0.0, static_cast<double>(height_ - 1));
    c = std::clamp(c, 0.0, static_cast<double>(width_ - 1));
    const int r0 = std::min(static_cast<int>(r), height_ - 2 >= 0 ? height_ - 2 : 0);
    const int c0 = std::min(static_cast<int>(c), width_ - 2 >= 0 ? width_ - 2 : 0);
    const double fr = r - r0;
    const double fc = c - c0;
    const int r1 = std::min(r0 + 1, height_ - 1);
    const int c1 = std::min(c0 + 1, width_ - 1);
    const double v00 = at(r0, c0), v01 = at(r0, c1), v10 = at(r1, c0), v11 = at(r1, c1);
    return (1.0 - fr) * ((1.0 - fc) * v00 + fc * v01) + fr * ((1.0 - fc) * v10 + fc * v11);
}

Vec2 Image2D::sample_gradient(double r, double c) const {
    const bool clamped_r = r <= 0.0 || r >= height_ - 1;
    const bool clamped_c = c <= 0.0 || c >= width_ - 1;
    r = std::clamp(r, 0.0, static_cast<double>(height_ - 1));
    c = std::clamp(c, 0.0, static_cast<double>(width_ - 1));
    const int r0 = std::min(static_cast<int>(r), height_ - 2 >= 0 ? height_ - 2 : 0);
    const int c0 = std::min(static_cast<int>(c), width_ - 2 >= 0 ? width_ - 2 : 0);
    const double fr = r - r0;
    const double fc = c - c0;
    const int r1 = std::min(r0 + 1, height_ - 1);
    const int c1 = std::min(c0 + 1, width_ - 1);
    const double v00 = at(r0, c0), v01 = at(r0, c1), v10 = at(r1, c0), v11 = at(r1, c1);
    Vec2 g;
    g[0] = clamped_r ? 0.0 : (1.0 - fc) * (v10 - v00) + fc * (v11 - v01);
    g[1] = clamped_c ? 0.0 : (1.0 - fr) * (v01 - v00) + fr * (v11 - v10);
    return g;
}

Image2D downsample2(const Image2D& img) {
    const int w = std::max(1, img.width() / 2);
    const int h = std::max(1, img.height() / 2);
    Image2D out(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const int r0 = 2 * r, c0 = 2 * c;
            const int r1 = std::min(r0 + 1, img.height() - 1);
            const int c1 = std::min(c0 + 1, img.width() - 1);
            out.at(r, c) =
                0.25 * (img.at(r0, c0) + img.at(r0, c1) + img.at(r1, c0) + img.at(r1, c1));
        }
    return out;
}

namespace {

// Skips PGM whitespace and '#' comments.
int next_pnm_int(std::istream& in, const std::filesystem::path& path) {
    int ch = in.peek();
    while (ch == '#' || std::isspace(ch)) {
        if (ch == '#') in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
        else in.get();
        ch = in.peek();
    }
    int value = 0;
    if (!(in >> value)) throw IoError("malformed PGM header in " + path.string());
    return value;
}

}  // namespace

Image2D load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P2" && magic != "P5")
        throw IoError(path.string() + ": not a P2/P5 PGM file");
    const int width = next_pnm_int(in, path);
    const int height = next_pnm_int(in, path);
    const int maxval = next_pnm_int(in, path);
    if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
        throw IoError(path.string() + ": invalid PGM dimensions");
    Image2D img(width, height);
    if (magic == "P2") {
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c)
                img.at(r, c) = static_cast<double>(next_pnm_int(in, path));
    } else {
        in.get();  // single whitespace after maxval
        const bool wide = maxval > 255;
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c) {
                if (wide) {
                    const int hi = in.get(), lo = in.get();
                    if (hi < 0 || lo < 0) throw IoError(path.string() + ": truncated PGM");
                    img.at(r, c) = static_cast<double>((hi << 8) | lo);
                } else {
                    const int v = in.get();
                    if (v < 0) throw IoError(path.string() + ": truncated PGM");
                    img.at(r, c) = static_cast<double>(v);
                }
            }
    }
    return img;
}

void save_pgm(const Image2D& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    double lo = img.data()[0], hi = img.data()[0];
    for (double v : img.data()) { lo = std::min(lo, v); hi = std::max(hi, v); }
    const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c) {
            const int v = static_cast<int>(std::lround((img.at(r, c) - lo) * scale));
            out.put(static_cast<char>(std::clamp(v, 0, 255)));
        }
}

Image2D load_f32grid(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    std::istringstream hs(header);
    int width = 0, height = 0;
    if (!(hs >> width >> height) || width < 1 || height < 1)
        throw IoError(path.string() + ": malformed f32grid header");
    Image2D img(width, height);
    std::vector<float> buf(static_cast<std::size_t>(width) * height);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
        throw IoError(path.string() + ": truncated f32grid payload");
    for (std::size_t i = 0; i < buf.size(); ++i) img.data()[i] = static_cast<double>(buf[i]);
    return img;
}

void save_f32grid(const Image2D& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << img.width() << " " << img.height() << "\n";
    std::vector<float> buf(img.data().size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(img.data()[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Image2D load_image(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".pgm") return load_pgm(path);
    if (ext == ".f32grid") return load_f32grid(path);
    throw IoError("unsupported image format: " + path.string());
}

}  // namespace strainforge
