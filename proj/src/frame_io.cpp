#include "vqa/frame_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "vqa/errors.hpp"

namespace vqa {

Frame make_frame(int width, int height, double fill) {
  if (width < 2 || height < 2) {
    throw std::invalid_argument("frame dimensions must be at least 2x2");
  }
  Frame f;
  f.width = width;
  f.height = height;
  f.data.assign(size_t(kChannels) * width * height, fill);
  return f;
}

namespace {

// Reads one PPM header token, skipping whitespace and '#' comments.
bool read_header_token(std::istream& in, std::string& tok) {
  tok.clear();
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return true;
      continue;
    }
    tok.push_back(char(ch));
  }
  return !tok.empty();
}

int parse_header_int(const std::string& tok, const std::string& path,
                     const char* what) {
  for (char c : tok) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw DataError("malformed PPM header in " + path + ": bad " + what +
                      " '" + tok + "'");
    }
  }
  try {
    return std::stoi(tok);
  } catch (const std::exception&) {
    throw DataError("malformed PPM header in " + path + ": bad " + what + " '" +
                    tok + "'");
  }
}

}  // namespace

Frame load_frame(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open frame file: " + path);
  }
  std::string tok;
  if (!read_header_token(in, tok) || tok != "P6") {
    throw DataError("malformed PPM header in " + path + ": expected P6");
  }
  std::string wtok, htok, mtok;
  if (!read_header_token(in, wtok) || !read_header_token(in, htok) ||
      !read_header_token(in, mtok)) {
    throw DataError("malformed PPM header in " + path + ": incomplete header");
  }
  const int width = parse_header_int(wtok, path, "width");
  const int height = parse_header_int(htok, path, "height");
  const int maxval = parse_header_int(mtok, path, "maxval");
  if (width < 2 || height < 2) {
    throw DataError("malformed PPM header in " + path +
                    ": dimensions must be at least 2x2");
  }
  if (maxval != 255) {
    throw DataError("malformed PPM header in " + path +
                    ": only maxval 255 is supported");
  }
  // The single whitespace byte after maxval was consumed by the tokenizer.
  const size_t pixels = size_t(width) * size_t(height);
  std::vector<unsigned char> raw(pixels * 3);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (size_t(in.gcount()) != raw.size()) {
    throw DataError("truncated pixel data in " + path);
  }

  Frame f = make_frame(width, height);
  for (size_t i = 0; i < pixels; ++i) {
    for (int c = 0; c < kChannels; ++c) {
      f.data[size_t(c) * pixels + i] = double(raw[i * 3 + c]) / 255.0;
    }
  }
  return f;
}

void save_frame(const Frame& frame, const std::string& path) {
  if (frame.width < 2 || frame.height < 2 ||
      frame.data.size() != size_t(kChannels) * frame.plane()) {
    throw std::invalid_argument("save_frame: invalid frame");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot open file for writing: " + path);
  }
  out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
  const size_t pixels = frame.plane();
  std::vector<unsigned char> raw(pixels * 3);
  for (size_t i = 0; i < pixels; ++i) {
    for (int c = 0; c < kChannels; ++c) {
      double v = frame.data[size_t(c) * pixels + i];
      v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      raw[i * 3 + c] = static_cast<unsigned char>(std::llround(v * 255.0));
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            std::streamsize(raw.size()));
  if (!out) {
    throw DataError("failed writing " + path);
  }
}

void save_pgm(const std::vector<double>& gray, int width, int height,
              const std::string& path) {
  if (width < 1 || height < 1 || gray.size() != size_t(width) * size_t(height)) {
    throw std::invalid_argument("save_pgm: size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot open file for writing: " + path);
  }
  out << "P5\n" << width << " " << height << "\n255\n";
  std::vector<unsigned char> raw(gray.size());
  for (size_t i = 0; i < gray.size(); ++i) {
    double v = gray[i];
    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    raw[i] = static_cast<unsigned char>(std::llround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            std::streamsize(raw.size()));
  if (!out) {
    throw DataError("failed writing " + path);
  }
}

std::vector<VideoManifest> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open manifest: " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid manifest JSON in " + path + ": " + e.what());
  }
  if (!doc.is_array()) {
    throw DataError("invalid manifest in " + path + ": expected a JSON array");
  }

  std::vector<VideoManifest> out;
  std::set<std::string> seen;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("video_id") ||
        !item["video_id"].is_string() || !item.contains("frames") ||
        !item["frames"].is_array()) {
      throw DataError("invalid manifest entry in " + path);
    }
    VideoManifest m;
    m.video_id = item["video_id"].get<std::string>();
    if (!seen.insert(m.video_id).second) {
      throw DataError("duplicate video_id in manifest: " + m.video_id);
    }
    for (const auto& p : item["frames"]) {
      if (!p.is_string()) {
        throw DataError("invalid frame path for video " + m.video_id);
      }
      m.frame_paths.push_back(p.get<std::string>());
    }
    if (m.frame_paths.empty()) {
      throw DataError("empty frame list for video " + m.video_id);
    }
    if (item.contains("mos") && !item["mos"].is_null()) {
      if (!item["mos"].is_number()) {
        throw DataError("invalid mos for video " + m.video_id);
      }
      const double mos = item["mos"].get<double>();
      if (!(mos >= 0.0 && mos <= 1.0)) {
        throw DataError("mos out of range for video " + m.video_id);
      }
      m.mos = mos;
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<size_t> sample_frame_indices(size_t total_frames, size_t interval) {
  if (total_frames < 1 || interval < 1) {
    throw std::invalid_argument("sample_frame_indices: T and t must be >= 1");
  }
  const size_t n = total_frames / interval;
  if (n == 0) {
    return {0};  // clip shorter than the interval: keep its first frame
  }
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) {
    idx[i] = i * interval;
  }
  return idx;
}

}  // namespace vqa
