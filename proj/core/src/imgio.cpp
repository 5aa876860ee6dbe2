#include "pfe/imgio.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "pfe/errors.hpp"

namespace pfe {

namespace {

[[noreturn]] void corrupt(const std::string& path, std::istream& in, const std::string& what) {
  std::ostringstream os;
  os << path << ": " << what << " at byte offset " << in.tellg();
  throw IoError(os.str());
}

// Netpbm header token: skips whitespace and '#' comment lines.
std::string next_token(std::istream& in, const std::string& path) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
    } else if (!std::isspace(c)) {
      tok.push_back(static_cast<char>(c));
      while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(in.get()));
      }
      return tok;
    }
  }
  corrupt(path, in, "unexpected end of header");
}

int header_int(std::istream& in, const std::string& path, const std::string& field) {
  std::string tok = next_token(in, path);
  try {
    std::size_t pos = 0;
    int v = std::stoi(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    corrupt(path, in, "bad " + field + " token '" + tok + "'");
  }
}

}  // namespace

RgbImage load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_image: cannot open " + path);

  if (next_token(in, path) != "P6") corrupt(path, in, "not a binary PPM (expected P6)");
  int width = header_int(in, path, "width");
  int height = header_int(in, path, "height");
  int maxval = header_int(in, path, "maxval");
  if (width < 1 || height < 1) corrupt(path, in, "nonpositive dimensions");
  if (maxval != 255) corrupt(path, in, "unsupported maxval (expected 255)");
  in.get();  // single whitespace after maxval

  std::size_t count = static_cast<std::size_t>(width) * height * 3;
  std::vector<unsigned char> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count) corrupt(path, in, "truncated pixel data");

  RgbImage img;
  img.height = height;
  img.width = width;
  img.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) img.data[i] = raw[i] / 255.0;
  return img;
}

void save_image(const RgbImage& img, const std::string& path) {
  if (img.height < 1 || img.width < 1) throw ConfigError("save_image: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_image: cannot open " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    double v = std::clamp(img.data[i], 0.0, 1.0);
    raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("save_image: write failed for " + path);
}

RgbImage downsample(const RgbImage& img, int factor) {
  if (factor < 1) throw ConfigError("downsample: factor must be >= 1");
  if (factor == 1) return img;
  int oh = img.height / factor;
  int ow = img.width / factor;
  if (oh < 1 || ow < 1) throw ConfigError("downsample: result would be empty");

  RgbImage out;
  out.height = oh;
  out.width = ow;
  out.data.assign(static_cast<std::size_t>(oh) * ow * 3, 0.0);
  const double scale = 1.0 / (static_cast<double>(factor) * factor);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        double sum = 0.0;
        for (int dr = 0; dr < factor; ++dr) {
          for (int dc = 0; dc < factor; ++dc) {
            sum += img.at(r * factor + dr, c * factor + dc, ch);
          }
        }
        out.at(r, c, ch) = sum * scale;
      }
    }
  }
  return out;
}

void save_labels(const Segmentation& seg, const std::string& path, LabelFormat format) {
  if (seg.height < 1 || seg.width < 1 ||
      static_cast<std::size_t>(seg.height) * seg.width != seg.labels.size()) {
    throw ConfigError("save_labels: segmentation lacks a valid image layout");
  }
  if (format == LabelFormat::Pgm) {
    for (int l : seg.labels) {
      if (l < 0 || l > 65535) throw ConfigError("save_labels: label out of 16-bit range");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_labels: cannot open " + path);
    out << "P5\n" << seg.width << " " << seg.height << "\n65535\n";
    std::vector<unsigned char> raw;
    raw.reserve(seg.labels.size() * 2);
    for (int l : seg.labels) {
      raw.push_back(static_cast<unsigned char>((l >> 8) & 0xff));  // big-endian
      raw.push_back(static_cast<unsigned char>(l & 0xff));
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("save_labels: write failed for " + path);
  } else {
    std::ofstream out(path);
    if (!out) throw IoError("save_labels: cannot open " + path);
    for (int r = 0; r < seg.height; ++r) {
      for (int c = 0; c < seg.width; ++c) {
        if (c) out << ",";
        out << seg.labels[static_cast<std::size_t>(r) * seg.width + c];
      }
      out << "\n";
    }
    if (!out) throw IoError("save_labels: write failed for " + path);
  }
}

namespace {

Segmentation load_labels_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_labels: cannot open " + path);
  if (next_token(in, path) != "P5") corrupt(path, in, "not a binary PGM (expected P5)");
  int width = header_int(in, path, "width");
  int height = header_int(in, path, "height");
  int maxval = header_int(in, path, "maxval");
  if (width < 1 || height < 1) corrupt(path, in, "nonpositive dimensions");
  in.get();

  Segmentation seg;
  seg.height = height;
  seg.width = width;
  std::size_t count = static_cast<std::size_t>(width) * height;
  int max_label = 0;
  if (maxval > 255) {
    std::vector<unsigned char> raw(count * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
      corrupt(path, in, "truncated pixel data");
    }
    seg.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      seg.labels[i] = (raw[2 * i] << 8) | raw[2 * i + 1];
      max_label = std::max(max_label, seg.labels[i]);
    }
  } else {
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
      corrupt(path, in, "truncated pixel data");
    }
    seg.labels.assign(raw.begin(), raw.end());
    for (int l : seg.labels) max_label = std::max(max_label, l);
  }
  seg.k = max_label + 1;
  return seg;
}

Segmentation load_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_labels: cannot open " + path);
  Segmentation seg;
  std::string line;
  int width = -1;
  int max_label = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string cell;
    int row_width = 0;
    while (std::getline(is, cell, ',')) {
      try {
        int l = std::stoi(cell);
        seg.labels.push_back(l);
        max_label = std::max(max_label, l);
      } catch (const std::exception&) {
        throw IoError("load_labels: bad cell '" + cell + "' in " + path);
      }
      ++row_width;
    }
    if (width < 0) {
      width = row_width;
    } else if (width != row_width) {
      throw IoError("load_labels: ragged rows in " + path);
    }
    seg.height++;
  }
  if (seg.labels.empty()) throw IoError("load_labels: empty file " + path);
  seg.width = width;
  seg.k = max_label + 1;
  return seg;
}

}  // namespace

Segmentation load_labels(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("load_labels: cannot open " + path);
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();
  if (magic[0] == 'P' && magic[1] == '5') return load_labels_pgm(path);
  return load_labels_csv(path);
}

}  // namespace pfe
