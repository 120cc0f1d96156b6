#include "reefscan/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace reefscan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const fs::path& path, std::size_t line,
                             const std::string& what) {
  std::ostringstream msg;
  msg << path.string() << ":" << line << ": " << what;
  throw ParseError(msg.str());
}

double parse_double_token(const fs::path& path, std::size_t line,
                          const std::string& token) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    parse_fail(path, line, "expected a number, got \"" + token + "\"");
  if (!std::isfinite(value))
    parse_fail(path, line, "non-finite coordinate \"" + token + "\"");
  return value;
}

struct PlyProperty {
  std::string type;
  std::string name;
};

std::size_t scalar_size(const fs::path& path, std::size_t line,
                        const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8")
    return 1;
  if (type == "short" || type == "ushort" || type == "int16" ||
      type == "uint16")
    return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
      type == "float" || type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  parse_fail(path, line, "unsupported PLY property type \"" + type + "\"");
}

PointCloud load_ply(std::ifstream& in, const fs::path& path) {
  std::string line;
  std::size_t line_no = 1;  // "ply" magic already consumed

  bool binary = false;
  bool have_format = false;
  long vertex_count = -1;
  std::vector<PlyProperty> vertex_props;
  bool in_vertex_element = false;
  bool vertex_seen = false;
  bool trailing_element = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word.empty() || word == "comment" || word == "obj_info") continue;
    if (word == "format") {
      std::string fmt, version;
      ls >> fmt >> version;
      if (fmt == "ascii")
        binary = false;
      else if (fmt == "binary_little_endian")
        binary = true;
      else
        parse_fail(path, line_no, "unsupported PLY format \"" + fmt + "\"");
      have_format = true;
    } else if (word == "element") {
      std::string name;
      long count = 0;
      if (!(ls >> name >> count) || count < 0)
        parse_fail(path, line_no, "malformed element declaration");
      if (name == "vertex") {
        if (vertex_seen) parse_fail(path, line_no, "duplicate vertex element");
        vertex_seen = true;
        in_vertex_element = true;
        vertex_count = count;
      } else {
        if (!vertex_seen && count > 0)
          parse_fail(path, line_no,
                     "element \"" + name + "\" precedes vertex data");
        in_vertex_element = false;
        if (count > 0) trailing_element = true;
      }
    } else if (word == "property") {
      std::string type;
      ls >> type;
      if (type == "list") {
        if (in_vertex_element)
          parse_fail(path, line_no, "list property on vertex element");
        continue;
      }
      std::string name;
      ls >> name;
      if (in_vertex_element) vertex_props.push_back({type, name});
    } else if (word == "end_header") {
      break;
    } else {
      parse_fail(path, line_no, "unexpected header keyword \"" + word + "\"");
    }
  }
  if (!have_format) parse_fail(path, line_no, "missing format declaration");
  if (!vertex_seen) parse_fail(path, line_no, "missing vertex element");

  int ix = -1, iy = -1, iz = -1;
  for (int i = 0; i < static_cast<int>(vertex_props.size()); ++i) {
    if (vertex_props[i].name == "x") ix = i;
    if (vertex_props[i].name == "y") iy = i;
    if (vertex_props[i].name == "z") iz = i;
  }
  if (ix < 0 || iy < 0 || iz < 0)
    parse_fail(path, line_no, "vertex element lacks x/y/z properties");

  PointCloud cloud;
  cloud.reserve(static_cast<std::size_t>(vertex_count));

  if (!binary) {
    for (long v = 0; v < vertex_count; ++v) {
      if (!std::getline(in, line))
        parse_fail(path, line_no, "unexpected end of file in vertex data");
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (tokens.size() < vertex_props.size())
        parse_fail(path, line_no, "vertex record has too few values");
      Point3 p(parse_double_token(path, line_no, tokens[ix]),
               parse_double_token(path, line_no, tokens[iy]),
               parse_double_token(path, line_no, tokens[iz]));
      cloud.push_back(p);
    }
  } else {
    std::vector<std::size_t> offsets(vertex_props.size(), 0);
    std::size_t stride = 0;
    std::vector<std::size_t> sizes(vertex_props.size(), 0);
    for (std::size_t i = 0; i < vertex_props.size(); ++i) {
      offsets[i] = stride;
      sizes[i] = scalar_size(path, line_no, vertex_props[i].type);
      stride += sizes[i];
    }
    std::vector<char> record(stride);
    for (long v = 0; v < vertex_count; ++v) {
      in.read(record.data(), static_cast<std::streamsize>(stride));
      if (in.gcount() != static_cast<std::streamsize>(stride)) {
        std::ostringstream msg;
        msg << path.string() << ": truncated binary vertex data at record "
            << v << " (offset " << static_cast<long long>(in.tellg()) << ")";
        throw ParseError(msg.str());
      }
      auto read_coord = [&](int prop) -> double {
        const char* src = record.data() + offsets[prop];
        const std::string& t = vertex_props[prop].type;
        if (t == "float" || t == "float32") {
          float f;
          std::memcpy(&f, src, sizeof(f));
          return static_cast<double>(f);
        }
        if (t == "double" || t == "float64") {
          double d;
          std::memcpy(&d, src, sizeof(d));
          return d;
        }
        std::ostringstream msg;
        msg << path.string() << ": coordinate property \""
            << vertex_props[prop].name << "\" has non-floating type " << t;
        throw ParseError(msg.str());
      };
      Point3 p(read_coord(ix), read_coord(iy), read_coord(iz));
      if (!p.allFinite()) {
        std::ostringstream msg;
        msg << path.string() << ": non-finite coordinate in binary record "
            << v;
        throw ParseError(msg.str());
      }
      cloud.push_back(p);
    }
  }
  return cloud;
}

PointCloud load_xyz(std::ifstream& in, const fs::path& path,
                    const std::string& first_line) {
  PointCloud cloud;
  std::size_t line_no = 0;
  std::string line = first_line;
  bool have_line = true;
  while (have_line) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (!tokens.empty() && tokens[0][0] != '#') {
      if (tokens.size() != 3)
        parse_fail(path, line_no, "expected 3 coordinates per line");
      cloud.emplace_back(parse_double_token(path, line_no, tokens[0]),
                         parse_double_token(path, line_no, tokens[1]),
                         parse_double_token(path, line_no, tokens[2]));
    }
    have_line = static_cast<bool>(std::getline(in, line));
  }
  return cloud;
}

// Shortest representation that parses back to the same double.
void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

PointCloud load_cloud(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string first;
  if (!std::getline(in, first)) {
    // Empty file: a valid, empty XYZ cloud.
    return {};
  }
  std::string magic = first;
  if (!magic.empty() && magic.back() == '\r') magic.pop_back();
  if (magic == "ply") return load_ply(in, path);
  return load_xyz(in, path, first);
}

void save_cloud(const PointCloud& cloud, const fs::path& path,
                CloudFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());

  if (format == CloudFormat::xyz) {
    std::string body;
    for (const Point3& p : cloud) {
      append_double(body, p.x());
      body.push_back(' ');
      append_double(body, p.y());
      body.push_back(' ');
      append_double(body, p.z());
      body.push_back('\n');
    }
    out << body;
  } else {
    const bool binary = format == CloudFormat::ply_binary;
    out << "ply\n";
    out << (binary ? "format binary_little_endian 1.0\n"
                   : "format ascii 1.0\n");
    out << "element vertex " << cloud.size() << "\n";
    // Binary keeps full precision for lossless round trips; ASCII uses the
    // interchange float declaration.
    const char* type = binary ? "double" : "float";
    out << "property " << type << " x\n";
    out << "property " << type << " y\n";
    out << "property " << type << " z\n";
    out << "end_header\n";
    if (binary) {
      for (const Point3& p : cloud) {
        const double xyz[3] = {p.x(), p.y(), p.z()};
        out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
      }
    } else {
      std::string body;
      for (const Point3& p : cloud) {
        append_double(body, p.x());
        body.push_back(' ');
        append_double(body, p.y());
        body.push_back(' ');
        append_double(body, p.z());
        body.push_back('\n');
      }
      out << body;
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

json annotation_to_json(const ObjectAnnotation& a) {
  return json{{"class", class_name(a.cls)},
              {"center", {a.center.x(), a.center.y(), a.center.z()}},
              {"yaw", a.yaw}};
}

ObjectAnnotation annotation_from_json(const json& j, const fs::path& path,
                                      std::size_t index, bool allow_score) {
  auto fail = [&](const std::string& what) -> void {
    std::ostringstream msg;
    msg << path.string() << ": record " << index << ": " << what;
    throw ParseError(msg.str());
  };
  if (!j.is_object()) fail("expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key == "class" || key == "center" || key == "yaw") continue;
    if (key == "score" && allow_score) continue;
    fail("unknown key \"" + key + "\"");
  }
  if (!j.contains("class") || !j.contains("center") || !j.contains("yaw"))
    fail("missing class/center/yaw");
  ObjectAnnotation a;
  a.cls = class_from_name(j.at("class").get<std::string>());
  const json& c = j.at("center");
  if (!c.is_array() || c.size() != 3) fail("center must be [x, y, z]");
  a.center = Point3(c[0].get<double>(), c[1].get<double>(), c[2].get<double>());
  if (!a.center.allFinite()) fail("non-finite center");
  const double yaw = j.at("yaw").get<double>();
  if (!std::isfinite(yaw)) fail("non-finite yaw");
  a.yaw = normalize_yaw(yaw);
  return a;
}

json load_record_array(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!root.is_array())
    throw ParseError(path.string() + ": expected a top-level JSON array");
  return root;
}

}  // namespace

std::vector<ObjectAnnotation> load_annotations(const fs::path& path) {
  const json root = load_record_array(path);
  std::vector<ObjectAnnotation> out;
  out.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i)
    out.push_back(annotation_from_json(root[i], path, i, /*allow_score=*/true));
  return out;
}

void save_annotations(const std::vector<ObjectAnnotation>& annotations,
                      const fs::path& path) {
  json root = json::array();
  for (const ObjectAnnotation& a : annotations)
    root.push_back(annotation_to_json(a));
  write_file_atomic(path, root.dump(2) + "\n");
}

std::vector<Detection> load_detections(const fs::path& path) {
  const json root = load_record_array(path);
  std::vector<Detection> out;
  out.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const json& j = root[i];
    ObjectAnnotation a = annotation_from_json(j, path, i, /*allow_score=*/true);
    Detection d;
    d.cls = a.cls;
    d.center = a.center;
    d.yaw = a.yaw;
    if (!j.contains("score")) {
      std::ostringstream msg;
      msg << path.string() << ": record " << i << ": missing score";
      throw ParseError(msg.str());
    }
    d.score = j.at("score").get<double>();
    if (!std::isfinite(d.score) || d.score <= 0.0) {
      std::ostringstream msg;
      msg << path.string() << ": record " << i
          << ": score must be finite and positive";
      throw ParseError(msg.str());
    }
    out.push_back(d);
  }
  return out;
}

void save_detections(const std::vector<Detection>& detections,
                     const fs::path& path) {
  json root = json::array();
  for (const Detection& d : detections) {
    json j = annotation_to_json({d.cls, d.center, d.yaw});
    j["score"] = d.score;
    root.push_back(j);
  }
  write_file_atomic(path, root.dump(2) + "\n");
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path.string() + ": " + ec.message());
}

}  // namespace reefscan
