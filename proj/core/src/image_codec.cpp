#include "panda/image_codec.hpp"

#include <png.h>

#include <array>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include <jpeglib.h>

#include "panda/error.hpp"

namespace panda {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_for_read(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        throw MissingFile("missing file: " + path.string());
    }
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw IoError("cannot open for reading: " + path.string());
    return f;
}

RgbImage read_png(const fs::path& path) {
    FilePtr f = open_for_read(path);
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_stdio(&image, f.get()) == 0) {
        throw IoError("bad PNG " + path.string() + ": " + image.message);
    }
    // Label maps carry ids in the colour channels; never composite alpha
    // or apply gamma conversion.
    image.format = PNG_FORMAT_RGB;
    RgbImage out(static_cast<int>(image.width), static_cast<int>(image.height));
    if (png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr) == 0) {
        std::string msg = image.message;
        png_image_free(&image);
        throw IoError("bad PNG " + path.string() + ": " + msg);
    }
    return out;
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    std::array<char, JMSG_LENGTH_MAX> message{};
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message.data());
    std::longjmp(err->jump, 1);
}

RgbImage read_jpeg(const fs::path& path) {
    FilePtr f = open_for_read(path);
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    // Nothing with a non-trivial destructor is created between setjmp and
    // the decoder calls below.
    RgbImage* result = new RgbImage();
    if (setjmp(err.jump) != 0) {
        jpeg_destroy_decompress(&cinfo);
        delete result;
        throw IoError("bad JPEG " + path.string() + ": " + std::string(err.message.data()));
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    result->width = static_cast<int>(cinfo.output_width);
    result->height = static_cast<int>(cinfo.output_height);
    result->pixels.resize(static_cast<std::size_t>(cinfo.output_width) * cinfo.output_height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = result->pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * cinfo.output_width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    RgbImage out = std::move(*result);
    delete result;
    return out;
}

}  // namespace

RgbImage read_rgb_image(const fs::path& path) {
    std::array<unsigned char, 8> magic{};
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            std::error_code ec;
            if (!fs::exists(path, ec)) throw MissingFile("missing file: " + path.string());
            throw IoError("cannot open for reading: " + path.string());
        }
        in.read(reinterpret_cast<char*>(magic.data()), magic.size());
    }
    if (png_sig_cmp(magic.data(), 0, magic.size()) == 0) return read_png(path);
    if (magic[0] == 0xFF && magic[1] == 0xD8) return read_jpeg(path);
    throw IoError("unrecognised image format: " + path.string());
}

void write_png_rgb(const fs::path& path, const RgbImage& image) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
        throw IoError("refusing to write malformed raster to " + path.string());
    }
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw IoError("cannot open for writing: " + path.string());
    png_image out;
    std::memset(&out, 0, sizeof(out));
    out.version = PNG_IMAGE_VERSION;
    out.width = static_cast<png_uint_32>(image.width);
    out.height = static_cast<png_uint_32>(image.height);
    out.format = PNG_FORMAT_RGB;
    if (png_image_write_to_stdio(&out, f.get(), 0, image.pixels.data(), 0, nullptr) == 0) {
        std::string msg = out.message;
        png_image_free(&out);
        throw IoError("PNG write failed for " + path.string() + ": " + msg);
    }
    if (std::fflush(f.get()) != 0) throw IoError("short write: " + path.string());
}

}  // namespace panda
