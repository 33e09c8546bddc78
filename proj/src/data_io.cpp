// Copyright 2026 the adcp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "adcp/data_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "adcp/ops.hpp"

namespace adcp {

namespace {

struct FileHandle {
    FILE* f = nullptr;
    explicit FileHandle(const std::string& path, const char* mode)
        : f(std::fopen(path.c_str(), mode)) {}
    ~FileHandle() {
        if (f) std::fclose(f);
    }
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
};

uint32_t swap32(uint32_t v) {
    return ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
}

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            break;
        }
    }
    while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(static_cast<char>(c));
    return tok;
}

int parse_positive_int(const std::string& tok, const char* what) {
    size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(tok, &pos);
    } catch (...) {
        fail("bad ", what, ": '", tok, "'");
    }
    check(pos == tok.size() && v > 0, "bad ", what, ": '", tok, "'");
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// PFM
// ---------------------------------------------------------------------------

Tensor<float> load_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "pfm: cannot open ", path);
    const std::string magic = next_token(in);
    check(magic == "Pf" || magic == "PF", "pfm: bad magic '", magic, "' in ", path);
    check(magic == "Pf", "pfm: color ('PF') files are not disparity maps: ", path);
    const int w = parse_positive_int(next_token(in), "pfm width");
    const int h = parse_positive_int(next_token(in), "pfm height");
    const std::string scale_tok = next_token(in);
    double scale = 0.0;
    try {
        scale = std::stod(scale_tok);
    } catch (...) {
        fail("pfm: bad scale '", scale_tok, "' in ", path);
    }
    check(scale != 0.0, "pfm: zero scale in ", path);
    const bool file_little = scale < 0.0;

    std::vector<float> raw(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
    check(in.gcount() == static_cast<std::streamsize>(raw.size() * sizeof(float)),
          "pfm: truncated payload in ", path);

    const bool host_little = std::endian::native == std::endian::little;
    if (file_little != host_little) {
        for (float& v : raw) {
            uint32_t u;
            std::memcpy(&u, &v, 4);
            u = swap32(u);
            std::memcpy(&v, &u, 4);
        }
    }
    // PFM stores rows bottom-up; flip to top-down.
    Tensor<float> map = Tensor<float>::zeros({h, w});
    for (int y = 0; y < h; ++y)
        std::memcpy(map.data().data() + static_cast<size_t>(y) * w,
                    raw.data() + static_cast<size_t>(h - 1 - y) * w, sizeof(float) * w);
    return map;
}

void save_pfm(const Tensor<float>& map, const std::string& path) {
    check(map.ndim() == 2, "save_pfm: map must be [H,W], got ", to_string(map.shape()));
    const int h = map.dim(0), w = map.dim(1);
    std::ofstream out(path, std::ios::binary);
    check(out.good(), "pfm: cannot write ", path);
    out << "Pf\n" << w << " " << h << "\n-1.0\n";
    const bool host_little = std::endian::native == std::endian::little;
    for (int y = h - 1; y >= 0; --y) {
        if (host_little) {
            out.write(
                reinterpret_cast<const char*>(map.data().data() + static_cast<size_t>(y) * w),
                static_cast<std::streamsize>(sizeof(float)) * w);
        } else {
            for (int x = 0; x < w; ++x) {
                float v = map.at({y, x});
                uint32_t u;
                std::memcpy(&u, &v, 4);
                u = swap32(u);
                out.write(reinterpret_cast<const char*>(&u), 4);
            }
        }
    }
    check(out.good(), "pfm: short write to ", path);
}

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

namespace {

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

void open_png_read(PngReader& r, FILE* f, const std::string& path) {
    png_byte sig[8];
    check(std::fread(sig, 1, 8, f) == 8 && png_sig_cmp(sig, 0, 8) == 0,
          "png: not a PNG file: ", path);
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    check(r.png != nullptr, "png: reader allocation failed");
    r.info = png_create_info_struct(r.png);
    check(r.info != nullptr, "png: info allocation failed");
    png_init_io(r.png, f);
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);
}

} // namespace

std::pair<Tensor<float>, Tensor<float>> load_disp_png16(const std::string& path) {
    FileHandle fh(path, "rb");
    check(fh.f != nullptr, "png: cannot open ", path);
    PngReader r;
    open_png_read(r, fh.f, path);
    if (setjmp(png_jmpbuf(r.png))) fail("png: decode error in ", path);

    const int w = static_cast<int>(png_get_image_width(r.png, r.info));
    const int h = static_cast<int>(png_get_image_height(r.png, r.info));
    const int depth = png_get_bit_depth(r.png, r.info);
    const int color = png_get_color_type(r.png, r.info);
    check(depth == 16 && color == PNG_COLOR_TYPE_GRAY,
          "png: expected 16-bit grayscale disparity, got depth ", depth, " color type ", color,
          " in ", path);

    std::vector<png_byte> row(static_cast<size_t>(w) * 2);
    Tensor<float> map = Tensor<float>::zeros({h, w});
    Tensor<float> valid = Tensor<float>::zeros({h, w});
    for (int y = 0; y < h; ++y) {
        png_read_row(r.png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) {
            const uint16_t raw =
                static_cast<uint16_t>((row[2 * size_t(x)] << 8) | row[2 * size_t(x) + 1]);
            map.data()[static_cast<size_t>(y) * w + x] = static_cast<float>(raw) / 256.0f;
            valid.data()[static_cast<size_t>(y) * w + x] = raw != 0 ? 1.0f : 0.0f;
        }
    }
    png_read_end(r.png, nullptr);
    return {map, valid};
}

void save_disp_png16(const Tensor<float>& map, const Tensor<float>& valid,
                     const std::string& path) {
    check(map.ndim() == 2 && map.shape() == valid.shape(), "save_disp_png16: shape mismatch");
    const int h = map.dim(0), w = map.dim(1);
    FileHandle fh(path, "wb");
    check(fh.f != nullptr, "png: cannot write ", path);
    PngWriter wr;
    wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    check(wr.png != nullptr, "png: writer allocation failed");
    wr.info = png_create_info_struct(wr.png);
    check(wr.info != nullptr, "png: info allocation failed");
    if (setjmp(png_jmpbuf(wr.png))) fail("png: encode error for ", path);
    png_init_io(wr.png, fh.f);
    png_set_IHDR(wr.png, wr.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 16,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(wr.png, wr.info);
    std::vector<png_byte> row(static_cast<size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            uint16_t raw = 0;
            if (valid.at({y, x}) > 0.5f) {
                const double q =
                    static_cast<double>(std::lround(static_cast<double>(map.at({y, x})) * 256.0));
                raw = static_cast<uint16_t>(std::clamp(q, 1.0, 65535.0));
            }
            row[2 * size_t(x)] = static_cast<png_byte>(raw >> 8);
            row[2 * size_t(x) + 1] = static_cast<png_byte>(raw & 0xff);
        }
        png_write_row(wr.png, row.data());
    }
    png_write_end(wr.png, nullptr);
}

namespace {

Tensor<float> load_image_png(const std::string& path) {
    FileHandle fh(path, "rb");
    check(fh.f != nullptr, "png: cannot open ", path);
    PngReader r;
    open_png_read(r, fh.f, path);
    if (setjmp(png_jmpbuf(r.png))) fail("png: decode error in ", path);

    png_set_expand(r.png);
    png_set_strip_16(r.png);
    png_set_strip_alpha(r.png);
    png_set_gray_to_rgb(r.png);
    png_read_update_info(r.png, r.info);

    const int w = static_cast<int>(png_get_image_width(r.png, r.info));
    const int h = static_cast<int>(png_get_image_height(r.png, r.info));
    check(png_get_channels(r.png, r.info) == 3, "png: unsupported channel layout in ", path);

    Tensor<float> img = Tensor<float>::zeros({3, h, w});
    std::vector<png_byte> row(static_cast<size_t>(w) * 3);
    float* out = img.data().data();
    const int64_t plane = static_cast<int64_t>(h) * w;
    for (int y = 0; y < h; ++y) {
        png_read_row(r.png, row.data(), nullptr);
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                out[c * plane + static_cast<int64_t>(y) * w + x] = row[3 * size_t(x) + c] / 255.0f;
    }
    png_read_end(r.png, nullptr);
    return img;
}

Tensor<float> load_image_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "pnm: cannot open ", path);
    const std::string magic = next_token(in);
    check(magic == "P5" || magic == "P6", "pnm: unsupported magic '", magic, "' in ", path);
    const int w = parse_positive_int(next_token(in), "pnm width");
    const int h = parse_positive_int(next_token(in), "pnm height");
    const int maxval = parse_positive_int(next_token(in), "pnm maxval");
    check(maxval == 255, "pnm: only maxval 255 supported, got ", maxval);
    const int ch = magic == "P6" ? 3 : 1;
    std::vector<unsigned char> raw(static_cast<size_t>(w) * h * ch);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    check(in.gcount() == static_cast<std::streamsize>(raw.size()), "pnm: truncated payload in ",
          path);
    Tensor<float> img = Tensor<float>::zeros({3, h, w});
    float* out = img.data().data();
    const int64_t plane = static_cast<int64_t>(h) * w;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                out[c * plane + static_cast<int64_t>(y) * w + x] =
                    raw[(static_cast<size_t>(y) * w + x) * ch + (ch == 3 ? c : 0)] / 255.0f;
    return img;
}

} // namespace

Tensor<float> load_image(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "png") return load_image_png(path);
    if (ext == "ppm" || ext == "pgm") return load_image_pnm(path);
    fail("load_image: unsupported extension '", ext, "' for ", path);
}

void save_image_ppm(const Tensor<float>& img, const std::string& path) {
    check(img.ndim() == 3 && img.dim(0) == 3, "save_image_ppm: image must be [3,H,W]");
    const int h = img.dim(1), w = img.dim(2);
    std::ofstream out(path, std::ios::binary);
    check(out.good(), "ppm: cannot write ", path);
    out << "P6\n" << w << " " << h << "\n255\n";
    const float* v = img.data().data();
    const int64_t plane = static_cast<int64_t>(h) * w;
    std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                const double q = static_cast<double>(
                    std::lround(v[c * plane + static_cast<int64_t>(y) * w + x] * 255.0));
                row[3 * size_t(x) + c] = static_cast<unsigned char>(std::clamp(q, 0.0, 255.0));
            }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    check(out.good(), "ppm: short write to ", path);
}

void export_gray(const Tensor<float>& map, const std::string& path, double scale) {
    check(map.ndim() == 2, "export_gray: map must be [H,W]");
    const int h = map.dim(0), w = map.dim(1);
    std::ofstream out(path, std::ios::binary);
    check(out.good(), "pgm: cannot write ", path);
    out << "P5\n" << w << " " << h << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(w));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double q =
                static_cast<double>(std::lround(static_cast<double>(map.at({y, x})) * scale));
            row[static_cast<size_t>(x)] = static_cast<unsigned char>(std::clamp(q, 0.0, 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()), w);
    }
    check(out.good(), "pgm: short write to ", path);
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

void normalize_image(Tensor<float>& img) {
    for (float& v : img.data()) v = (v - 0.5f) / 0.5f;
}

StereoSample preprocess(const StereoSample& s, int crop_h, int crop_w, Rng& rng) {
    const int h = s.left.dim(1), w = s.left.dim(2);
    check(crop_h >= 1 && crop_w >= 1 && crop_h <= h && crop_w <= w, "preprocess: crop ", crop_h,
          "x", crop_w, " exceeds image ", h, "x", w);
    const int y0 = crop_h == h ? 0 : rand_int(rng, 0, h - crop_h);
    const int x0 = crop_w == w ? 0 : rand_int(rng, 0, w - crop_w);
    StereoSample out;
    out.left = crop_last2(s.left, y0, x0, crop_h, crop_w);
    out.right = crop_last2(s.right, y0, x0, crop_h, crop_w);
    out.gt = crop_last2(s.gt, y0, x0, crop_h, crop_w);
    out.valid = crop_last2(s.valid, y0, x0, crop_h, crop_w);
    normalize_image(out.left);
    normalize_image(out.right);
    return out;
}

Tensor<float> pad_to_multiple(const Tensor<float>& t, int mult) {
    check(t.ndim() >= 2 && mult >= 1, "pad_to_multiple: bad arguments");
    const int h = t.dim(t.ndim() - 2), w = t.dim(t.ndim() - 1);
    const int ph = (mult - h % mult) % mult;
    const int pw = (mult - w % mult) % mult;
    if (ph == 0 && pw == 0) return t;
    return pad_last2(t, 0, ph, 0, pw);
}

// ---------------------------------------------------------------------------
// Dataset directory
// ---------------------------------------------------------------------------

std::vector<StereoSample> load_dataset_dir(const std::string& root) {
    namespace fs = std::filesystem;
    const fs::path left_dir = fs::path(root) / "left";
    const fs::path right_dir = fs::path(root) / "right";
    const fs::path disp_dir = fs::path(root) / "disp";
    check(fs::is_directory(left_dir), "dataset: missing directory ", left_dir.string());
    check(fs::is_directory(right_dir), "dataset: missing directory ", right_dir.string());
    check(fs::is_directory(disp_dir), "dataset: missing directory ", disp_dir.string());

    std::vector<fs::path> lefts;
    for (const auto& e : fs::directory_iterator(left_dir))
        if (e.is_regular_file()) lefts.push_back(e.path());
    std::sort(lefts.begin(), lefts.end());
    check(!lefts.empty(), "dataset: no images under ", left_dir.string());

    auto find_stem = [](const fs::path& dir, const std::string& stem,
                        std::initializer_list<const char*> exts) -> fs::path {
        for (const char* ext : exts) {
            fs::path p = dir / (stem + ext);
            if (fs::exists(p)) return p;
        }
        fail("dataset: no file with stem '", stem, "' under ", dir.string());
    };

    std::vector<StereoSample> out;
    for (const auto& lp : lefts) {
        const std::string stem = lp.stem().string();
        StereoSample s;
        s.left = load_image(lp.string());
        s.right = load_image(find_stem(right_dir, stem, {".png", ".ppm", ".pgm"}).string());
        const fs::path dp = find_stem(disp_dir, stem, {".pfm", ".png"});
        if (dp.extension() == ".pfm") {
            s.gt = load_pfm(dp.string());
            s.valid = Tensor<float>::zeros(s.gt.shape());
            for (int64_t i = 0; i < s.gt.numel(); ++i)
                s.valid.data()[i] = std::isfinite(s.gt.data()[i]) ? 1.0f : 0.0f;
        } else {
            auto [map, valid] = load_disp_png16(dp.string());
            s.gt = map;
            s.valid = valid;
        }
        check(s.left.shape() == s.right.shape(), "dataset: left/right size mismatch for ", stem);
        check(s.gt.dim(0) == s.left.dim(1) && s.gt.dim(1) == s.left.dim(2),
              "dataset: disparity size mismatch for ", stem);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace adcp
