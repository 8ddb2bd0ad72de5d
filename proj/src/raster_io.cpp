#include "uca/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace uca {

namespace fs = std::filesystem;

namespace {

constexpr long kMaxSide = 1 << 16;
constexpr long long kMaxPixels = 1LL << 28;

void check_dimensions(long w, long h) {
  if (w < 1 || h < 1) throw InputError("raster header has zero or negative dimensions");
  if (w > kMaxSide || h > kMaxSide || static_cast<long long>(w) * h > kMaxPixels) {
    throw InputError("raster dimensions overflow the supported size");
  }
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::uint16_t quantize(double v, std::uint16_t maxval) {
  const double clamped = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(clamped * maxval));
}

// ---------------------------------------------------------------------------
// PGM

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      throw InputError("malformed PGM header");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) throw InputError("PGM header value overflows");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t data_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw InputError("malformed PGM header");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 2;
};

ScalarRaster decode_pgm(const std::string& bytes) {
  HeaderReader header(bytes);
  const long width = header.next_int();
  const long height = header.next_int();
  const long maxval = header.next_int();
  check_dimensions(width, height);
  if (maxval < 1 || maxval > 65535) throw InputError("PGM maxval out of range");
  const std::size_t offset = header.data_offset();
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < offset + count * bytes_per_sample) {
    throw InputError("PGM raster data is shorter than its header dimensions");
  }
  std::vector<double> values(count);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned sample = bytes_per_sample == 2 ? (data[2 * i] << 8) | data[2 * i + 1] : data[i];
    values[i] = std::min(1.0, static_cast<double>(sample) / static_cast<double>(maxval));
  }
  return ScalarRaster(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

std::string encode_pgm(const ScalarRaster& raster, BitDepth depth) {
  const std::uint16_t maxval = depth == BitDepth::Sixteen ? 65535 : 255;
  std::ostringstream out;
  out << "P5\n" << raster.width() << ' ' << raster.height() << '\n' << maxval << '\n';
  std::string bytes = out.str();
  for (double v : raster.values()) {
    const std::uint16_t q = quantize(v, maxval);
    if (depth == BitDepth::Sixteen) bytes.push_back(static_cast<char>(q >> 8));
    bytes.push_back(static_cast<char>(q & 0xFF));
  }
  return bytes;
}

// ---------------------------------------------------------------------------
// PNG

struct PngReadSource {
  const std::string* bytes;
  std::size_t pos;
};

[[noreturn]] void png_error_handler(png_structp, png_const_charp message) {
  throw InputError(std::string("PNG error: ") + message);
}

void png_warning_handler(png_structp, png_const_charp) {}

void png_read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->pos + length > src->bytes->size()) throw InputError("PNG data truncated");
  std::memcpy(out, src->bytes->data() + src->pos, length);
  src->pos += length;
}

void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

void png_flush_callback(png_structp) {}

ScalarRaster decode_png(const std::string& bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                           png_warning_handler);
  if (png == nullptr) throw InputError("cannot initialise PNG decoder");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};

  PngReadSource source{&bytes, 0};
  png_set_read_fn(png, &source, png_read_callback);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  check_dimensions(static_cast<long>(width), static_cast<long>(height));
  const int color = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) throw InputError("only grayscale PNG rasters are supported");
  if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  const int depth = bit_depth == 16 ? 16 : 8;
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> data(row_bytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = data.data() + y * row_bytes;
  png_read_image(png, rows.data());

  const double maxval = depth == 16 ? 65535.0 : 255.0;
  std::vector<double> values(static_cast<std::size_t>(width) * height);
  for (png_uint_32 y = 0; y < height; ++y) {
    for (png_uint_32 x = 0; x < width; ++x) {
      const unsigned sample =
          depth == 16 ? (rows[y][2 * x] << 8) | rows[y][2 * x + 1] : rows[y][x];
      values[static_cast<std::size_t>(y) * width + x] = sample / maxval;
    }
  }
  return ScalarRaster(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

std::string encode_png(const ScalarRaster& raster, BitDepth depth) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                            png_warning_handler);
  if (png == nullptr) throw InputError("cannot initialise PNG encoder");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};

  std::string out;
  png_set_write_fn(png, &out, png_write_callback, png_flush_callback);
  const int bits = static_cast<int>(depth);
  png_set_IHDR(png, info, static_cast<png_uint_32>(raster.width()),
               static_cast<png_uint_32>(raster.height()), bits, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::uint16_t maxval = depth == BitDepth::Sixteen ? 65535 : 255;
  const std::size_t bytes_per_sample = depth == BitDepth::Sixteen ? 2 : 1;
  std::vector<unsigned char> row(static_cast<std::size_t>(raster.width()) * bytes_per_sample);
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < raster.width(); ++x) {
      const std::uint16_t q = quantize(raster(x, y), maxval);
      if (bytes_per_sample == 2) {
        row[2 * x] = static_cast<unsigned char>(q >> 8);
        row[2 * x + 1] = static_cast<unsigned char>(q & 0xFF);
      } else {
        row[x] = static_cast<unsigned char>(q);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  return out;
}

bool is_png(const std::string& bytes) {
  static constexpr unsigned char kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kSignature, 8) == 0;
}

// Signed components are stored as 32768 + round(32767 * v / scale).
constexpr double kSignedZero = 32768.0;
constexpr double kSignedRange = 32767.0;

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomically(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("short write to '" + path.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError("cannot move temporary file onto '" + path.string() + "'");
  }
}

ScalarRaster load_scalar_raster(const fs::path& path) {
  if (!fs::exists(path)) throw InputError("missing raster file '" + path.string() + "'");
  const std::string bytes = read_file(path);
  try {
    if (is_png(bytes)) return decode_png(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
  } catch (const InputError& e) {
    throw InputError("'" + path.string() + "': " + e.what());
  }
  throw InputError("'" + path.string() + "': malformed header (expected PGM P5 or PNG)");
}

void save_scalar_raster(const ScalarRaster& raster, const fs::path& path, BitDepth depth) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") {
    write_file_atomically(path, encode_pgm(raster, depth));
  } else if (ext == ".png") {
    write_file_atomically(path, encode_png(raster, depth));
  } else {
    throw InputError("unsupported raster extension '" + ext + "' (use .pgm or .png)");
  }
}

void save_mask(const ScalarRaster& mask, const fs::path& path) {
  ScalarRaster binary(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) binary.values()[i] = mask.values()[i] > 0.5 ? 1.0 : 0.0;
  save_scalar_raster(binary, path, BitDepth::Eight);
}

void save_vector_raster(const VectorRaster& raster, const fs::path& sidecar) {
  double scale = 1.0;
  for (const Vec2& v : raster.values()) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) {
      throw InvariantError("vector raster contains non-finite components");
    }
    scale = std::max({scale, std::abs(v.x), std::abs(v.y)});
  }
  ScalarRaster xs(raster.width(), raster.height());
  ScalarRaster ys(raster.width(), raster.height());
  for (std::size_t i = 0; i < raster.size(); ++i) {
    xs.values()[i] = (kSignedZero + std::round(kSignedRange * raster.values()[i].x / scale)) / 65535.0;
    ys.values()[i] = (kSignedZero + std::round(kSignedRange * raster.values()[i].y / scale)) / 65535.0;
  }
  const std::string stem = sidecar.stem().string();
  const fs::path dir = sidecar.parent_path();
  const std::string x_name = stem + "_x.png";
  const std::string y_name = stem + "_y.png";
  save_scalar_raster(xs, dir / x_name);
  save_scalar_raster(ys, dir / y_name);

  nlohmann::json doc = {
      {"schema", 1},
      {"kind", "vector_raster"},
      {"width", raster.width()},
      {"height", raster.height()},
      {"components", {{"x", x_name}, {"y", y_name}}},
      {"encoding", {{"type", "signed16"}, {"zero", kSignedZero}, {"range", kSignedRange}, {"scale", scale}}},
  };
  write_file_atomically(sidecar, doc.dump(2) + "\n");
}

VectorRaster load_vector_raster(const fs::path& sidecar) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(sidecar));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + sidecar.string() + "': " + e.what());
  }
  try {
    const fs::path dir = sidecar.parent_path();
    const ScalarRaster xs = load_scalar_raster(dir / doc.at("components").at("x").get<std::string>());
    const ScalarRaster ys = load_scalar_raster(dir / doc.at("components").at("y").get<std::string>());
    if (!xs.same_shape(ys) || xs.width() != doc.at("width").get<int>() ||
        xs.height() != doc.at("height").get<int>()) {
      throw InputError("vector raster components disagree on dimensions");
    }
    const auto& enc = doc.at("encoding");
    const double zero = enc.at("zero").get<double>();
    const double range = enc.at("range").get<double>();
    const double scale = enc.at("scale").get<double>();
    VectorRaster out(xs.width(), xs.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double qx = std::round(xs.values()[i] * 65535.0);
      const double qy = std::round(ys.values()[i] * 65535.0);
      out.values()[i] = {scale * (qx - zero) / range, scale * (qy - zero) / range};
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + sidecar.string() + "': " + e.what());
  }
}

}  // namespace uca
