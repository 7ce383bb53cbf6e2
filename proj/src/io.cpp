// Copyright 2026 The cmsched Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cmsched/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cmsched/error.hpp"

namespace cmsched {
namespace {

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto at = line.find(sep, start);
    out.emplace_back(line.substr(start, at == std::string_view::npos ? line.size() - start : at - start));
    if (at == std::string_view::npos) return out;
    start = at + 1;
  }
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw RuntimeFailure("malformed number '" + s + "' in " + path.string());
  }
  return v;
}

std::int64_t parse_int(const std::string& s, const std::filesystem::path& path) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw RuntimeFailure("malformed integer '" + s + "' in " + path.string());
  }
  return v;
}

// Rows of a CSV with a known header; blank trailing lines are skipped.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, std::string_view header) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw RuntimeFailure(path.string() + " does not start with the header '" + std::string(header) + "'");
  }
  std::vector<std::vector<std::string>> rows;
  const std::size_t columns = split(header, ',').size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line, ',');
    if (row.size() != columns) throw RuntimeFailure("wrong column count in " + path.string() + ": " + line);
    rows.push_back(std::move(row));
  }
  return rows;
}

constexpr std::array<const char*, 8> kPalette{"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                              "#59a14f", "#edc948", "#b07aa1", "#9c755f"};

std::string escape_xml(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeFailure("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw RuntimeFailure("failed writing " + path.string());
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw RuntimeFailure("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string schedule_csv_header() { return "step,k,batch_pos,level_index,sigma_lo,sigma_hi\n"; }

void append_schedule_csv(std::string& out, std::int64_t step, std::int64_t k, const MiniBatchSigmas& batch) {
  for (std::size_t j = 0; j < batch.size(); ++j) {
    out += std::to_string(step) + ',' + std::to_string(k) + ',' + std::to_string(j) + ',' +
           std::to_string(batch.level_index[j]) + ',' + format_double(batch.sigma_lo[j]) + ',' +
           format_double(batch.sigma_hi[j]) + '\n';
  }
}

std::string curriculum_csv(const CurriculumTrace& trace) {
  std::string out = "k,n_k,kind\n";
  const std::string kind = to_string(trace.kind);
  for (std::size_t k = 0; k < trace.n_of_k.size(); ++k) {
    out += std::to_string(k) + ',' + std::to_string(trace.n_of_k[k]) + ',' + kind + '\n';
  }
  return out;
}

std::string distribution_csv_header() { return "config_id,bucket_lo,bucket_hi,share\n"; }

void append_distribution_csv(std::string& out, std::string_view config_id, const DistributionReport& report,
                             const BucketSpec& buckets) {
  const std::string id(config_id);
  out += id + ",0," + format_double(buckets.edges.front()) + ',' + format_double(report.below_min_share) + '\n';
  for (std::size_t b = 0; b < report.bucket_shares.size(); ++b) {
    out += id + ',' + format_double(buckets.edges[b]) + ',' + format_double(buckets.edges[b + 1]) + ',' +
           format_double(report.bucket_shares[b]) + '\n';
  }
}

std::string metrics_csv(const RunMetrics& metrics) {
  std::string out = "step,k,n_k,loss\n";
  for (std::size_t k = 0; k < metrics.loss.size(); ++k) {
    out += std::to_string(k + 1) + ',' + std::to_string(k) + ',' + std::to_string(metrics.n_k[k]) + ',' +
           format_double(metrics.loss[k]) + '\n';
  }
  return out;
}

MetricsTable read_metrics_csv(const std::filesystem::path& path) {
  MetricsTable table;
  for (const auto& row : read_csv(path, "step,k,n_k,loss")) {
    table.k.push_back(parse_int(row[1], path));
    table.n_k.push_back(parse_int(row[2], path));
    table.loss.push_back(parse_double(row[3], path));
  }
  return table;
}

std::string points_csv(const PointSet& points) {
  if (points.rows() != 2) throw ConfigError("points CSV holds 2D points only");
  std::string out = "x,y\n";
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    out += format_double(points(0, j)) + ',' + format_double(points(1, j)) + '\n';
  }
  return out;
}

PointSet read_points_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path, "x,y");
  PointSet points(2, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    points(0, static_cast<Eigen::Index>(j)) = parse_double(rows[j][0], path);
    points(1, static_cast<Eigen::Index>(j)) = parse_double(rows[j][1], path);
  }
  return points;
}

std::string curriculum_svg(const CurriculumTrace& trace, std::string_view title) {
  constexpr double width = 720.0;
  constexpr double height = 360.0;
  constexpr double margin = 48.0;
  const double k_max = std::max<double>(1.0, static_cast<double>(trace.n_of_k.size()) - 1.0);
  const double n_max = static_cast<double>(std::max<std::int64_t>(1, trace.max_n()));
  auto px = [&](double k) { return margin + (width - 2 * margin) * k / k_max; };
  auto py = [&](double n) { return height - margin - (height - 2 * margin) * n / n_max; };

  std::string pts;
  // Plot every change point plus its predecessor so plateaus render as steps.
  for (std::size_t k = 0; k < trace.n_of_k.size(); ++k) {
    const bool edge = k == 0 || k + 1 == trace.n_of_k.size() || trace.n_of_k[k] != trace.n_of_k[k - 1] ||
                      trace.n_of_k[k + 1] != trace.n_of_k[k];
    if (!edge) continue;
    pts += fixed(px(static_cast<double>(k))) + ',' + fixed(py(static_cast<double>(trace.n_of_k[k]))) + ' ';
  }
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"360\" viewBox=\"0 0 720 360\">\n";
  svg += "<rect width=\"720\" height=\"360\" fill=\"white\"/>\n";
  svg += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         escape_xml(title) + "</text>\n";
  svg += "<line x1=\"48\" y1=\"312\" x2=\"672\" y2=\"312\" stroke=\"black\"/>\n";
  svg += "<line x1=\"48\" y1=\"48\" x2=\"48\" y2=\"312\" stroke=\"black\"/>\n";
  svg += "<text x=\"360\" y=\"344\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">k (max " +
         std::to_string(trace.n_of_k.empty() ? 0 : trace.n_of_k.size() - 1) + ")</text>\n";
  svg += "<text x=\"40\" y=\"52\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" +
         std::to_string(trace.max_n()) + "</text>\n";
  svg += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[0]) + "\" stroke-width=\"2\" points=\"" + pts +
         "\"/>\n";
  svg += "</svg>\n";
  return svg;
}

std::string pie_svg(const DistributionReport& report, const BucketSpec& buckets, std::string_view title) {
  std::vector<std::pair<std::string, double>> slices;
  slices.emplace_back("sigma <= " + format_double(buckets.edges.front()), report.below_min_share);
  for (std::size_t b = 0; b < report.bucket_shares.size(); ++b) {
    slices.emplace_back(format_double(buckets.edges[b]) + " - " + format_double(buckets.edges[b + 1]),
                        report.bucket_shares[b]);
  }
  constexpr double cx = 160.0;
  constexpr double cy = 180.0;
  constexpr double r = 120.0;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\" viewBox=\"0 0 480 360\">\n";
  svg += "<rect width=\"480\" height=\"360\" fill=\"white\"/>\n";
  svg += "<text x=\"240\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         escape_xml(title) + "</text>\n";
  double start = 0.0;
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const double share = slices[i].second;
    const char* color = kPalette[i % kPalette.size()];
    if (share >= 1.0) {
      svg += "<circle cx=\"160\" cy=\"180\" r=\"120\" fill=\"" + std::string(color) + "\"/>\n";
    } else if (share > 0.0) {
      const double a0 = 2.0 * std::numbers::pi * start - std::numbers::pi / 2.0;
      const double a1 = 2.0 * std::numbers::pi * (start + share) - std::numbers::pi / 2.0;
      svg += "<path d=\"M " + fixed(cx) + ' ' + fixed(cy) + " L " + fixed(cx + r * std::cos(a0)) + ' ' +
             fixed(cy + r * std::sin(a0)) + " A " + fixed(r) + ' ' + fixed(r) + " 0 " + (share > 0.5 ? "1" : "0") +
             " 1 " + fixed(cx + r * std::cos(a1)) + ' ' + fixed(cy + r * std::sin(a1)) + " Z\" fill=\"" + color +
             "\"/>\n";
    }
    start += share;
    const double ly = 80.0 + 24.0 * static_cast<double>(i);
    svg += "<rect x=\"310\" y=\"" + fixed(ly - 12.0) + "\" width=\"14\" height=\"14\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"330\" y=\"" + fixed(ly) + "\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape_xml(slices[i].first) + ": " + fixed(100.0 * share, 2) + "%</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void save_checkpoint(const std::filesystem::path& path, const ToyModel& model, const Json& extra_header) {
  Json header = extra_header;
  header["format"] = "cmsched-checkpoint";
  header["version"] = 1;
  header["data_dim"] = model.shape().data_dim;
  header["hidden"] = model.shape().hidden;
  header["fourier_features"] = model.shape().fourier_features;
  header["sigma_data"] = model.consistency().sigma_data;
  header["sigma_min"] = model.consistency().sigma_min;
  const auto flat = model.params().flatten();
  header["parameter_count"] = flat.size();

  std::string bytes = header.dump() + '\n';
  const std::size_t offset = bytes.size();
  bytes.resize(offset + flat.size() * sizeof(double));
  for (std::size_t i = 0; i < flat.size(); ++i) {
    auto word = std::bit_cast<std::uint64_t>(flat[i]);
    if constexpr (std::endian::native == std::endian::big) word = __builtin_bswap64(word);
    std::memcpy(bytes.data() + offset + i * sizeof(double), &word, sizeof(word));
  }
  write_text_file(path, bytes);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) throw RuntimeFailure(path.string() + " is not a cmsched checkpoint");
  Json header;
  try {
    header = Json::parse(bytes.substr(0, newline));
  } catch (const std::exception&) {
    throw RuntimeFailure(path.string() + " has a malformed checkpoint header");
  }
  if (header.value("format", "") != "cmsched-checkpoint") {
    throw RuntimeFailure(path.string() + " is not a cmsched checkpoint");
  }
  ModelShape shape;
  shape.data_dim = header.at("data_dim").get<int>();
  shape.hidden = header.at("hidden").get<std::vector<int>>();
  shape.fourier_features = header.at("fourier_features").get<int>();
  ConsistencyParam cp;
  cp.sigma_data = header.at("sigma_data").get<double>();
  cp.sigma_min = header.at("sigma_min").get<double>();
  ToyModel model(shape, cp, 0);

  const auto count = header.at("parameter_count").get<std::size_t>();
  if (count != model.params().count() || bytes.size() - newline - 1 != count * sizeof(double)) {
    throw RuntimeFailure(path.string() + ": parameter block does not match the header dimensions");
  }
  std::vector<double> flat(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t word = 0;
    std::memcpy(&word, bytes.data() + newline + 1 + i * sizeof(double), sizeof(word));
    if constexpr (std::endian::native == std::endian::big) word = __builtin_bswap64(word);
    flat[i] = std::bit_cast<double>(word);
  }
  model.params().unflatten(flat);
  if (!model.params().all_finite()) throw RuntimeFailure(path.string() + " contains non-finite parameters");
  return {std::move(model), std::move(header)};
}

}  // namespace cmsched
