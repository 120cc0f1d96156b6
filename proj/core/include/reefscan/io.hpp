#pragma once

#include "reefscan/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace reefscan {

enum class CloudFormat {
  ply_binary,  // binary_little_endian, double precision: lossless round trip
  ply_ascii,
  xyz,
};

// Reads an ASCII/binary-little-endian PLY (vertex x,y,z as float or double,
// other vertex properties skipped) or a whitespace-separated XYZ text file.
// The format is chosen by file content (PLY magic), not extension.
// Throws ParseError naming the offending line/offset; a cloud containing
// non-finite coordinates is rejected outright.
PointCloud load_cloud(const std::filesystem::path& path);

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                CloudFormat format);

// Annotation / detection records: a JSON array of
//   {"class": name, "center": [x,y,z], "yaw": r}        (annotations)
//   {"class": name, "center": [x,y,z], "yaw": r, "score": s}  (detections)
std::vector<ObjectAnnotation> load_annotations(const std::filesystem::path& path);
void save_annotations(const std::vector<ObjectAnnotation>& annotations,
                      const std::filesystem::path& path);

std::vector<Detection> load_detections(const std::filesystem::path& path);
void save_detections(const std::vector<Detection>& detections,
                     const std::filesystem::path& path);

// Writes text to path atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

}  // namespace reefscan
