#include "lbvh/cloud_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace lbvh::io {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'L', '3'};
constexpr std::size_t kHeaderSize = 8;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= std::uint32_t{static_cast<unsigned char>(in[at + static_cast<std::size_t>(i)])} << (8 * i);
  }
  return v;
}

void append_float(std::string& out, float v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, result.ptr);
}

float parse_float(std::string_view field, std::size_t line) {
  // from_chars rejects a leading '+', which never appears in our output.
  float v = 0.f;
  const auto result = std::from_chars(field.data(), field.data() + field.size(), v);
  if (result.ec != std::errc{} || result.ptr != field.data() + field.size()) {
    throw std::invalid_argument("csv line " + std::to_string(line) + ": bad number '" +
                                std::string(field) + "'");
  }
  return v;
}

}  // namespace

CloudFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? CloudFormat::csv : CloudFormat::pcl3;
}

std::string encode_pcl3(const std::vector<Point>& points) {
  if (points.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("too many points for PCL3");
  std::string out(kMagic, sizeof kMagic);
  out.reserve(kHeaderSize + points.size() * 12);
  put_u32(out, static_cast<std::uint32_t>(points.size()));
  for (const Point& p : points) {
    for (const float v : {p.x, p.y, p.z}) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

std::vector<Point> decode_pcl3(const std::string& bytes) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw std::invalid_argument("not a PCL3 stream");
  const std::uint32_t count = get_u32(bytes, 4);
  if (bytes.size() != kHeaderSize + std::size_t{count} * 12)
    throw std::invalid_argument("PCL3 size does not match its point count");
  std::vector<Point> points(count);
  std::size_t at = kHeaderSize;
  for (Point& p : points) {
    p.x = std::bit_cast<float>(get_u32(bytes, at));
    p.y = std::bit_cast<float>(get_u32(bytes, at + 4));
    p.z = std::bit_cast<float>(get_u32(bytes, at + 8));
    at += 12;
  }
  return points;
}

std::string encode_csv(const std::vector<Point>& points) {
  std::string out;
  out.reserve(points.size() * 36);
  for (const Point& p : points) {
    append_float(out, p.x);
    out.push_back(',');
    append_float(out, p.y);
    out.push_back(',');
    append_float(out, p.z);
    out.push_back('\n');
  }
  return out;
}

std::vector<Point> decode_csv(const std::string& text) {
  std::vector<Point> points;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected x,y,z");
    const std::string_view view(line);
    points.push_back({parse_float(view.substr(0, c1), line_no),
                      parse_float(view.substr(c1 + 1, c2 - c1 - 1), line_no),
                      parse_float(view.substr(c2 + 1), line_no)});
  }
  return points;
}

void write_cloud(const std::filesystem::path& path, const std::vector<Point>& points) {
  const std::string data =
      format_for(path) == CloudFormat::csv ? encode_csv(points) : encode_pcl3(points);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<Point> read_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return format_for(path) == CloudFormat::csv ? decode_csv(data) : decode_pcl3(data);
}

}  // namespace lbvh::io
