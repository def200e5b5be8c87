#include "remem/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "remem/error.hpp"
#include "remem/pattern.hpp"

namespace remem::bench {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no, std::string_view column) {
  T value{};
  auto [ptr, err] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (err != std::errc{} || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::BadValue, fmt::format("line {}: bad {} '{}'", line_no, column, field));
  }
  return value;
}

void expect_header(const std::vector<std::string_view>& lines, std::string_view header) {
  if (lines.empty() || lines.front() != header) {
    throw Error(ErrorCode::BadValue, fmt::format("expected CSV header '{}'", header));
  }
}

bool within_one_ulp(double stored, double recomputed) {
  return stored == recomputed || std::nextafter(stored, INFINITY) == recomputed ||
         std::nextafter(stored, -INFINITY) == recomputed;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1-2-5 tick step covering `span` in roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

std::string tick_label(double v) {
  if (v == 0) return "0";
  if (std::fabs(v) >= 100) return fmt::format("{:.0f}", v);
  if (std::fabs(v) >= 1) return fmt::format("{:g}", v);
  return fmt::format("{:.3g}", v);
}

const char* series_color(BackendKind kind) {
  switch (kind) {
    case BackendKind::Local: return "#1f77b4";
    case BackendKind::Vfs: return "#d62728";
    case BackendKind::Remote: return "#2ca02c";
  }
  return "#000000";
}

}  // namespace

std::string format_raw_csv(std::span<const MeasurementRecord> records) {
  std::string out(kRawCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{}\n", to_string(r.backend), r.size_bytes, r.rep,
                       r.elapsed_ns, r.throughput_mb_s, r.checksum);
  }
  return out;
}

std::string format_summary_csv(std::span<const SummaryStat> stats) {
  std::string out(kSummaryCsvHeader);
  out += '\n';
  for (const auto& s : stats) {
    out += fmt::format("{},{},{},{:.3f},{:.3f},{:.3f},{:.0f},{:.0f},{:.6f}\n", to_string(s.backend),
                       s.size_bytes, s.n, s.elapsed_ns.mean, s.elapsed_ns.median,
                       s.elapsed_ns.stddev, s.elapsed_ns.min, s.elapsed_ns.max,
                       s.throughput_mb_s.mean);
  }
  return out;
}

std::vector<MeasurementRecord> parse_raw_csv(const std::string& text) {
  const auto lines = lines_of(text);
  expect_header(lines, kRawCsvHeader);
  std::vector<MeasurementRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 6) {
      throw Error(ErrorCode::BadValue, fmt::format("line {}: expected 6 fields", i + 1));
    }
    MeasurementRecord r;
    r.backend = parse_backend(f[0]);
    r.size_bytes = parse_number<std::uint64_t>(f[1], i + 1, "size_bytes");
    r.rep = parse_number<std::uint32_t>(f[2], i + 1, "rep");
    r.elapsed_ns = parse_number<std::uint64_t>(f[3], i + 1, "elapsed_ns");
    r.throughput_mb_s = parse_number<double>(f[4], i + 1, "throughput_mb_s");
    r.checksum = parse_number<std::uint64_t>(f[5], i + 1, "checksum");
    out.push_back(r);
  }
  return out;
}

std::vector<SummaryStat> parse_summary_csv(const std::string& text) {
  const auto lines = lines_of(text);
  expect_header(lines, kSummaryCsvHeader);
  std::vector<SummaryStat> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 9) {
      throw Error(ErrorCode::BadValue, fmt::format("line {}: expected 9 fields", i + 1));
    }
    SummaryStat s;
    s.backend = parse_backend(f[0]);
    s.size_bytes = parse_number<std::uint64_t>(f[1], i + 1, "size_bytes");
    s.n = parse_number<std::uint64_t>(f[2], i + 1, "n");
    s.elapsed_ns.mean = parse_number<double>(f[3], i + 1, "mean_ns");
    s.elapsed_ns.median = parse_number<double>(f[4], i + 1, "median_ns");
    s.elapsed_ns.stddev = parse_number<double>(f[5], i + 1, "stddev_ns");
    s.elapsed_ns.min = parse_number<double>(f[6], i + 1, "min_ns");
    s.elapsed_ns.max = parse_number<double>(f[7], i + 1, "max_ns");
    s.throughput_mb_s.mean = parse_number<double>(f[8], i + 1, "mean_mb_s");
    out.push_back(s);
  }
  return out;
}

void emit_csv(std::span<const SummaryStat> stats, std::span<const MeasurementRecord> records,
              const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "raw.csv", format_raw_csv(records));
  write_text_file(dir / "summary.csv", format_summary_csv(stats));
}

std::string render_svg(std::span<const SummaryStat> stats, const PlotOptions& options) {
  if (stats.empty()) throw Error(ErrorCode::EmptyGroup, "nothing to plot");

  constexpr double kWidth = 760, kHeight = 480;
  constexpr double kLeft = 80, kRight = 160, kTop = 50, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const bool throughput = options.metric == PlotMetric::Throughput;

  struct Point {
    double x, y, lo, hi;
  };
  std::map<int, std::vector<Point>> series;
  double x_max = 0, y_max = 0, y_min_pos = INFINITY;
  for (const auto& s : stats) {
    const double mb = static_cast<double>(s.size_bytes) / 1e6;
    Point p{};
    p.x = mb;
    if (throughput) {
      p.y = s.throughput_mb_s.mean;
      p.lo = s.elapsed_ns.max > 0 ? mb / (s.elapsed_ns.max / 1e9) : p.y;
      p.hi = s.elapsed_ns.min > 0 ? mb / (s.elapsed_ns.min / 1e9) : p.y;
    } else {
      p.y = s.elapsed_ns.mean / 1e6;
      p.lo = s.elapsed_ns.min / 1e6;
      p.hi = s.elapsed_ns.max / 1e6;
    }
    series[static_cast<int>(s.backend)].push_back(p);
    x_max = std::max(x_max, mb);
    y_max = std::max({y_max, p.hi, p.y});
    if (p.lo > 0) y_min_pos = std::min(y_min_pos, p.lo);
    if (p.y > 0) y_min_pos = std::min(y_min_pos, p.y);
  }
  for (auto& [_, pts] : series) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
  }
  if (x_max <= 0) x_max = 1;
  if (y_max <= 0) y_max = 1;

  const double x_step = nice_step(x_max, 10);
  const double x_top = std::ceil(x_max / x_step) * x_step;
  auto sx = [&](double x) { return kLeft + plot_w * x / x_top; };

  const bool log_y = options.log_y && std::isfinite(y_min_pos);
  double y_lo = 0, y_hi = 0, y_step = 0;
  if (log_y) {
    y_lo = std::floor(std::log10(y_min_pos));
    y_hi = std::ceil(std::log10(y_max));
    if (y_hi <= y_lo) y_hi = y_lo + 1;
  } else {
    y_step = nice_step(y_max, 8);
    y_hi = std::ceil(y_max / y_step) * y_step;
  }
  auto sy = [&](double y) {
    double t = 0;
    if (log_y) {
      t = (std::log10(std::max(y, std::pow(10.0, y_lo))) - y_lo) / (y_hi - y_lo);
    } else {
      t = y / y_hi;
    }
    return kTop + plot_h * (1.0 - t);
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight);
  if (!options.deterministic) {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    svg += fmt::format("<!-- generated {} -->\n", buf);
  }
  svg += fmt::format("<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"28\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     kLeft + plot_w / 2, xml_escape(options.title));

  // Grid and axes.
  svg += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double x = 0; x <= x_top + 1e-9; x += x_step) {
    svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\"/>\n", sx(x),
                       kTop, kTop + plot_h);
  }
  std::vector<std::pair<double, std::string>> y_ticks;
  if (log_y) {
    for (double e = y_lo; e <= y_hi + 1e-9; e += 1) {
      y_ticks.emplace_back(std::pow(10.0, e), tick_label(std::pow(10.0, e)));
    }
  } else {
    for (double y = 0; y <= y_hi + 1e-9 * y_hi; y += y_step) y_ticks.emplace_back(y, tick_label(y));
  }
  for (const auto& [y, _] : y_ticks) {
    svg += fmt::format("<line x1=\"{1:.2f}\" y1=\"{0:.2f}\" x2=\"{2:.2f}\" y2=\"{0:.2f}\"/>\n", sy(y),
                       kLeft, kLeft + plot_w);
  }
  svg += "</g>\n";
  svg += fmt::format(
      "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      kLeft, kTop, plot_w, plot_h);
  svg += "<g text-anchor=\"middle\">\n";
  for (double x = 0; x <= x_top + 1e-9; x += x_step) {
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", sx(x), kTop + plot_h + 18,
                       tick_label(x));
  }
  svg += "</g>\n<g text-anchor=\"end\">\n";
  for (const auto& [y, label] : y_ticks) {
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", kLeft - 6, sy(y) + 4, label);
  }
  svg += "</g>\n";
  svg += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">size [MB]</text>\n",
                     kLeft + plot_w / 2, kHeight - 18);
  svg += fmt::format(
      "<text x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.2f})\">{1}"
      "</text>\n",
      kTop + plot_h / 2, throughput ? "mean throughput [MB/s]" : "mean elapsed [ms] (min-max)");

  // Series.
  double legend_y = kTop + 10;
  for (const auto& [kind_index, pts] : series) {
    const auto kind = static_cast<BackendKind>(kind_index);
    const char* color = series_color(kind);
    svg += fmt::format("<g class=\"series\" data-backend=\"{}\" stroke=\"{}\" fill=\"{}\">\n",
                       to_string(kind), color, color);
    std::string path;
    for (const auto& p : pts) path += fmt::format("{:.2f},{:.2f} ", sx(p.x), sy(p.y));
    path.pop_back();
    svg += fmt::format("<polyline fill=\"none\" stroke-width=\"2\" points=\"{}\"/>\n", path);
    for (const auto& p : pts) {
      const double x = sx(p.x);
      svg += fmt::format(
          "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\"/>"
          "<line x1=\"{3:.2f}\" y1=\"{1:.2f}\" x2=\"{4:.2f}\" y2=\"{1:.2f}\"/>"
          "<line x1=\"{3:.2f}\" y1=\"{2:.2f}\" x2=\"{4:.2f}\" y2=\"{2:.2f}\"/>"
          "<circle cx=\"{0:.2f}\" cy=\"{5:.2f}\" r=\"3\"/>\n",
          x, sy(p.lo), sy(p.hi), x - 4, x + 4, sy(p.y));
    }
    svg += "</g>\n";
    const double lx = kLeft + plot_w + 20;
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"{3}\" "
        "stroke-width=\"2\"/><text x=\"{4:.2f}\" y=\"{5:.2f}\">{6}</text>\n",
        lx, legend_y, lx + 24, color, lx + 30, legend_y + 4, to_string(kind));
    legend_y += 20;
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(std::span<const SummaryStat> stats, const fs::path& path, const PlotOptions& options) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  write_text_file(path, render_svg(stats, options));
}

RunManifest RunManifest::from_config(const BenchmarkConfig& config) {
  RunManifest m;
  m.seed = config.pattern_seed;
  m.scale = config.scale;
  m.repetitions = config.repetitions;
  m.sizes_mb = config.sizes_mb;
  m.backends = config.backends;
  m.cache_fraction = config.cache_fraction;
  return m;
}

std::vector<std::uint64_t> RunManifest::size_bytes() const {
  std::vector<std::uint64_t> out;
  for (auto mb : sizes_mb) out.push_back(mb * kBytesPerMb / scale);
  return out;
}

std::string encode_manifest(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["seed"] = m.seed;
  j["scale"] = m.scale;
  j["repetitions"] = m.repetitions;
  j["sizes_mb"] = m.sizes_mb;
  std::vector<std::string> names;
  for (auto b : m.backends) names.emplace_back(to_string(b));
  j["backends"] = names;
  j["cache_fraction"] = m.cache_fraction;
  return j.dump(2) + "\n";
}

RunManifest decode_manifest(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.scale = j.at("scale").get<std::uint64_t>();
    m.repetitions = j.at("repetitions").get<std::uint32_t>();
    m.sizes_mb = j.at("sizes_mb").get<std::vector<std::uint64_t>>();
    for (const auto& name : j.at("backends").get<std::vector<std::string>>()) {
      m.backends.push_back(parse_backend(name));
    }
    m.cache_fraction = j.at("cache_fraction").get<double>();
    if (m.scale == 0) throw Error(ErrorCode::BadValue, "manifest scale is 0");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadValue, std::string("malformed manifest: ") + e.what());
  }
}

VerifyReport verify_records(std::span<const MeasurementRecord> records, std::uint64_t seed,
                            const std::optional<RunManifest>& manifest) {
  VerifyReport report;
  report.records_checked = records.size();
  if (records.empty()) {
    report.problems.push_back("no records");
    return report;
  }

  std::map<std::uint64_t, std::uint64_t> expected_sum;
  std::map<std::pair<int, std::uint64_t>, std::vector<std::uint32_t>> grid;
  for (const auto& r : records) {
    const std::string where =
        fmt::format("{} size {} rep {}", to_string(r.backend), r.size_bytes, r.rep);
    if (r.elapsed_ns == 0) report.problems.push_back(where + ": elapsed_ns is 0");
    if (!std::isfinite(r.throughput_mb_s) || r.throughput_mb_s <= 0) {
      report.problems.push_back(where + ": throughput not positive and finite");
    } else if (r.elapsed_ns > 0 &&
               !within_one_ulp(r.throughput_mb_s, throughput_mb_s(r.size_bytes, r.elapsed_ns))) {
      report.problems.push_back(where + ": throughput does not match size/elapsed");
    }
    auto [it, inserted] = expected_sum.try_emplace(r.size_bytes, 0);
    if (inserted) it->second = checksum(generate_pattern(seed, r.size_bytes));
    if (r.checksum != it->second) {
      report.problems.push_back(
          fmt::format("{}: checksum {} != pattern checksum {}", where, r.checksum, it->second));
    }
    grid[{static_cast<int>(r.backend), r.size_bytes}].push_back(r.rep);
  }

  // Grid shape: same sizes per backend, reps 0..n-1 exactly once, equal n.
  std::map<int, std::set<std::uint64_t>> sizes_by_backend;
  std::optional<std::size_t> n;
  for (auto& [key, reps] : grid) {
    sizes_by_backend[key.first].insert(key.second);
    std::sort(reps.begin(), reps.end());
    for (std::size_t i = 0; i < reps.size(); ++i) {
      if (reps[i] != i) {
        report.problems.push_back(fmt::format("{} size {}: repetition indices are not 0..{}",
                                              to_string(static_cast<BackendKind>(key.first)),
                                              key.second, reps.size() - 1));
        break;
      }
    }
    if (!n) n = reps.size();
    if (reps.size() != *n) {
      report.problems.push_back(fmt::format("{} size {}: {} reps, expected {}",
                                            to_string(static_cast<BackendKind>(key.first)),
                                            key.second, reps.size(), *n));
    }
  }
  const auto& first_sizes = sizes_by_backend.begin()->second;
  for (const auto& [kind, sizes] : sizes_by_backend) {
    if (sizes != first_sizes) {
      report.problems.push_back(fmt::format("{}: size grid differs from other backends",
                                            to_string(static_cast<BackendKind>(kind))));
    }
  }
  if (manifest) {
    const auto want = manifest->size_bytes();
    for (const auto& [kind, sizes] : sizes_by_backend) {
      if (!std::equal(sizes.begin(), sizes.end(), want.begin(), want.end())) {
        report.problems.push_back(fmt::format("{}: sizes differ from manifest",
                                              to_string(static_cast<BackendKind>(kind))));
      }
    }
    if (n && *n != manifest->repetitions) {
      report.problems.push_back(
          fmt::format("{} reps per group, manifest says {}", *n, manifest->repetitions));
    }
    std::set<int> want_backends, got_backends;
    for (auto b : manifest->backends) want_backends.insert(static_cast<int>(b));
    for (const auto& [kind, _] : sizes_by_backend) got_backends.insert(kind);
    if (want_backends != got_backends) report.problems.push_back("backends differ from manifest");
  }
  return report;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace remem::bench
