#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbvh/geometry.hpp"

namespace lbvh::io {

// Two on-disk formats for point clouds:
//
//   PCL3 (binary, little-endian): the 4 bytes "PCL3", a uint32 point count,
//   then count * 3 float32 values ordered x, y, z per point.
//
//   CSV: one "x,y,z" line per point, '.' as decimal separator, no header.
//   Values are written in shortest round-trip form.
//
// The format is chosen by file extension: ".csv" means CSV, anything else
// is PCL3.

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CloudFormat { pcl3, csv };

CloudFormat format_for(const std::filesystem::path& path);

std::string encode_pcl3(const std::vector<Point>& points);
std::vector<Point> decode_pcl3(const std::string& bytes);

std::string encode_csv(const std::vector<Point>& points);
std::vector<Point> decode_csv(const std::string& text);

/// Throws IoError when the file cannot be written or read, and
/// std::invalid_argument when its contents are malformed.
void write_cloud(const std::filesystem::path& path, const std::vector<Point>& points);
std::vector<Point> read_cloud(const std::filesystem::path& path);

}  // namespace lbvh::io
