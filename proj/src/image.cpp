#include "qmrf/image.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include "qmrf/errors.hpp"

namespace qmrf {

GrayImage::GrayImage(int w, int h, double fill) : width(w), height(h) {
  if (w < 0 || h < 0) throw InvalidArgument("image dimensions must be non-negative");
  values.assign(static_cast<std::size_t>(w) * h, fill);
}

DisparityMap::DisparityMap(int w, int h, double fill) : width(w), height(h) {
  if (w < 0 || h < 0) throw InvalidArgument("map dimensions must be non-negative");
  values.assign(static_cast<std::size_t>(w) * h, fill);
  valid.assign(values.size(), 1);
}

namespace {

class PnmHeader {
 public:
  explicit PnmHeader(std::string_view bytes) : s_(bytes) {}

  void skip_space() {
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n' && s_[pos_] != '\r') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_] - '0');
      if (v > 1'000'000'000L) throw ParseError(std::string(what) + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("expected ") + what, start);
    return v;
  }

  std::size_t pos_ = 0;
  std::string_view s_;
};

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw InvalidArgument("failed writing " + path.string());
}

int block_ratio(double factor) {
  if (!(factor > 0.0) || factor > 1.0) throw InvalidArgument("resize factor must be in (0, 1]");
  const double inv = 1.0 / factor;
  const long r = std::lround(inv);
  if (std::abs(inv - r) > 1e-9 || r > 32 || !std::has_single_bit(static_cast<unsigned long>(r)))
    throw InvalidArgument("resize factor must be one of 1, 1/2, 1/4, 1/8, 1/16, 1/32");
  return static_cast<int>(r);
}

int clamp_coord(int v, int n) { return std::clamp(v, 0, n - 1); }

}  // namespace

PnmRaster parse_pnm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("missing PNM magic", 0);
  const char kind = bytes[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6')
    throw ParseError(std::string("unsupported PNM type P") + kind, 1);

  PnmHeader h(bytes);
  h.pos_ = 2;
  PnmRaster r;
  r.channels = (kind == '3' || kind == '6') ? 3 : 1;
  const std::size_t w_at = h.pos_;
  r.width = static_cast<int>(h.number("width"));
  r.height = static_cast<int>(h.number("height"));
  if (r.width <= 0 || r.height <= 0) throw ParseError("image dimensions must be positive", w_at);
  const std::size_t max_at = h.pos_;
  const long maxval = h.number("maxval");
  if (maxval < 1 || maxval > 65535) throw ParseError("maxval must be in [1, 65535]", max_at);
  r.maxval = static_cast<int>(maxval);

  const std::size_t count = static_cast<std::size_t>(r.width) * r.height * r.channels;
  r.samples.resize(count);

  if (kind == '2' || kind == '3') {
    for (std::size_t k = 0; k < count; ++k) {
      h.skip_space();
      const std::size_t at = h.pos_;
      if (at >= bytes.size()) throw ParseError("truncated pixel data", at);
      const long v = h.number("sample");
      if (v > maxval) throw ParseError("sample exceeds maxval", at);
      r.samples[k] = static_cast<std::uint16_t>(v);
    }
    return r;
  }

  if (h.pos_ >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[h.pos_])))
    throw ParseError("expected whitespace after maxval", h.pos_);
  std::size_t p = h.pos_ + 1;
  const std::size_t width_bytes = maxval < 256 ? 1 : 2;
  if (bytes.size() - p < count * width_bytes) throw ParseError("truncated pixel data", bytes.size());
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t at = p;
    unsigned v = static_cast<unsigned char>(bytes[p++]);
    if (width_bytes == 2) v = (v << 8) | static_cast<unsigned char>(bytes[p++]);
    if (v > static_cast<unsigned>(maxval)) throw ParseError("sample exceeds maxval", at);
    r.samples[k] = static_cast<std::uint16_t>(v);
  }
  return r;
}

PnmRaster read_pnm(const std::filesystem::path& path) { return parse_pnm(read_all(path)); }

void write_pnm(const PnmRaster& r, const std::filesystem::path& path) {
  if (r.channels != 1 && r.channels != 3) throw InvalidArgument("PNM rasters have 1 or 3 channels");
  if (r.maxval < 1 || r.maxval > 65535) throw InvalidArgument("maxval must be in [1, 65535]");
  std::ostringstream head;
  head << (r.channels == 1 ? "P5" : "P6") << '\n' << r.width << ' ' << r.height << '\n' << r.maxval << '\n';
  std::string data = head.str();
  const bool wide = r.maxval > 255;
  data.reserve(data.size() + r.samples.size() * (wide ? 2 : 1));
  for (std::uint16_t v : r.samples) {
    if (v > r.maxval) throw InvalidArgument("sample exceeds maxval");
    if (wide) data.push_back(static_cast<char>(v >> 8));
    data.push_back(static_cast<char>(v & 0xff));
  }
  write_all(path, data);
}

GrayImage to_gray(const PnmRaster& r) {
  GrayImage img(r.width, r.height);
  const double inv = 1.0 / r.maxval;
  for (std::size_t k = 0; k < img.values.size(); ++k) {
    if (r.channels == 1) {
      img.values[k] = r.samples[k] * inv;
    } else {
      const std::uint16_t* px = &r.samples[3 * k];
      img.values[k] = std::clamp((0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) * inv, 0.0, 1.0);
    }
  }
  return img;
}

GrayImage load_image(const std::filesystem::path& path) { return to_gray(read_pnm(path)); }

void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  PnmRaster r;
  r.width = img.width;
  r.height = img.height;
  r.maxval = 65535;
  r.samples.resize(img.values.size());
  for (std::size_t k = 0; k < img.values.size(); ++k)
    r.samples[k] = static_cast<std::uint16_t>(std::lround(std::clamp(img.values[k], 0.0, 1.0) * 65535.0));
  write_pnm(r, path);
}

void save_pgm(const DisparityMap& map, const std::filesystem::path& path, double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("disparity scale must be positive");
  PnmRaster r;
  r.width = map.width;
  r.height = map.height;
  r.samples.resize(map.values.size());
  int top = 0;
  for (std::size_t k = 0; k < map.values.size(); ++k) {
    long v = 0;
    if (map.valid[k] && std::isfinite(map.values[k])) v = std::clamp(std::lround(map.values[k] * scale), 0L, 65535L);
    r.samples[k] = static_cast<std::uint16_t>(v);
    top = std::max(top, static_cast<int>(v));
  }
  r.maxval = top > 255 ? 65535 : 255;
  write_pnm(r, path);
}

DisparityMap load_disparity(const std::filesystem::path& path, double scale) {
  if (!(scale > 0.0)) throw InvalidArgument("disparity scale must be positive");
  const PnmRaster r = read_pnm(path);
  if (r.channels != 1) throw ParseError("disparity maps must be single-channel PGM", 1);
  DisparityMap m(r.width, r.height);
  for (std::size_t k = 0; k < r.samples.size(); ++k) {
    m.values[k] = r.samples[k] / scale;
    m.valid[k] = r.samples[k] != 0;
  }
  return m;
}

namespace {
constexpr std::array<char, 8> kFloatMagic{'Q', 'M', 'R', 'F', 'D', 'S', 'P', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(std::string_view s, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + b])) << (8 * b);
  return v;
}
}  // namespace

void save_disparity_float(const DisparityMap& map, const std::filesystem::path& path) {
  std::string out(kFloatMagic.begin(), kFloatMagic.end());
  put_u32(out, static_cast<std::uint32_t>(map.width));
  put_u32(out, static_cast<std::uint32_t>(map.height));
  for (std::size_t k = 0; k < map.values.size(); ++k) {
    const float f = map.valid[k] ? static_cast<float>(map.values[k]) : std::numeric_limits<float>::quiet_NaN();
    put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  write_all(path, out);
}

DisparityMap load_disparity_float(const std::filesystem::path& path) {
  const std::string s = read_all(path);
  if (s.size() < 16 || std::memcmp(s.data(), kFloatMagic.data(), 8) != 0)
    throw ParseError("missing float disparity magic", 0);
  const std::uint32_t w = get_u32(s, 8);
  const std::uint32_t h = get_u32(s, 12);
  if (w > 1u << 20 || h > 1u << 20) throw ParseError("implausible float map dimensions", 8);
  const std::size_t count = static_cast<std::size_t>(w) * h;
  if (s.size() != 16 + 4 * count) throw ParseError("float map payload size mismatch", s.size());
  DisparityMap m(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t k = 0; k < count; ++k) {
    const float f = std::bit_cast<float>(get_u32(s, 16 + 4 * k));
    m.valid[k] = !std::isnan(f);
    m.values[k] = m.valid[k] ? f : 0.0;
  }
  return m;
}

GrayImage resize_area(const GrayImage& img, double factor) {
  const int ratio = block_ratio(factor);
  if (ratio == 1) return img;
  GrayImage out((img.width + ratio - 1) / ratio, (img.height + ratio - 1) / ratio);
  for (int y = 0; y < out.height; ++y) {
    const int y1 = std::min(img.height, (y + 1) * ratio);
    for (int x = 0; x < out.width; ++x) {
      const int x1 = std::min(img.width, (x + 1) * ratio);
      double sum = 0.0;
      for (int j = y * ratio; j < y1; ++j)
        for (int i = x * ratio; i < x1; ++i) sum += img(i, j);
      out(x, y) = sum / ((x1 - x * ratio) * (y1 - y * ratio));
    }
  }
  return out;
}

DisparityMap upsample_nearest(const DisparityMap& map, int ratio, int width, int height) {
  if (ratio < 1) throw InvalidArgument("upsample ratio must be positive");
  if (map.width == 0 || map.height == 0) throw InvalidArgument("cannot upsample an empty map");
  DisparityMap out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const std::size_t src = map.index(std::min(x / ratio, map.width - 1), std::min(y / ratio, map.height - 1));
      out.values[out.index(x, y)] = map.values[src];
      out.valid[out.index(x, y)] = map.valid[src];
    }
  return out;
}

DisparityMap median_filter(const DisparityMap& map, int window) {
  if (window < 1 || window % 2 == 0) throw InvalidArgument("median window must be odd and positive");
  const int r = window / 2;
  DisparityMap out = map;
  if (r == 0) return out;
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(window) * window);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      if (!map.is_valid(x, y)) continue;
      buf.clear();
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const std::size_t k = map.index(clamp_coord(x + dx, map.width), clamp_coord(y + dy, map.height));
          if (map.valid[k]) buf.push_back(map.values[k]);
        }
      auto mid = buf.begin() + (buf.size() - 1) / 2;
      std::nth_element(buf.begin(), mid, buf.end());
      out(x, y) = *mid;
    }
  return out;
}

DisparityMap bilateral_filter(const DisparityMap& map, int diameter, double sigma_color, double sigma_space) {
  if (diameter < 1) throw InvalidArgument("bilateral diameter must be positive");
  if (!(sigma_color > 0.0) || !(sigma_space > 0.0)) throw InvalidArgument("bilateral sigmas must be positive");
  const int r = diameter / 2;
  struct Tap {
    int dx, dy;
    double w;
  };
  std::vector<Tap> taps;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      if (dx * dx + dy * dy <= r * r)
        taps.push_back({dx, dy, std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_space * sigma_space))});
  const double color_coef = -1.0 / (2.0 * sigma_color * sigma_color);

  DisparityMap out = map;
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      if (!map.is_valid(x, y)) continue;
      const double centre = map(x, y);
      double num = 0.0;
      double den = 0.0;
      for (const Tap& t : taps) {
        const std::size_t k = map.index(clamp_coord(x + t.dx, map.width), clamp_coord(y + t.dy, map.height));
        if (!map.valid[k]) continue;
        const double diff = map.values[k] - centre;
        const double w = t.w * std::exp(color_coef * diff * diff);
        num += w * diff;
        den += w;
      }
      if (den > 0.0) out(x, y) = centre + num / den;
    }
  return out;
}

}  // namespace qmrf
