#include "remem/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "CLI11.hpp"
#include "remem/error.hpp"
#include "remem/vfs_backend.hpp"

extern char** environ;

namespace remem::cli {

namespace {

struct OptionSpec {
  std::string key;  // long flag name and config-file key
  std::string help;
  std::string default_value;
  std::string env;
  bool is_flag = false;
};

struct SubcommandSpec {
  Subcommand command;
  std::string name;
  std::string help;
  std::vector<OptionSpec> options;
};

std::string default_vfs_root() {
  std::error_code ec;
  auto tmp = std::filesystem::temp_directory_path(ec);
  if (ec) tmp = "/tmp";
  return (tmp / "remem-vfs").string();
}

std::vector<OptionSpec> global_options() {
  return {
      {"config", "key=value file with defaults for any option", "", "", false},
      {"deterministic", "suppress timestamps in generated files", "false", "", true},
      {"log-level", "error|warn|info|debug", "info", "REMEM_LOG_LEVEL", false},
  };
}

std::vector<SubcommandSpec> specs_for(Tool tool) {
  if (tool == Tool::Server) {
    return {{Subcommand::Server,
             "",
             "Expose memory windows for one-sided reads",
             {
                 {"bind", "listen endpoint host:port", "0.0.0.0:7930", "", false},
                 {"expose", "window sizes, comma separated (e.g. 4096,10MB,1G)", "", "", false},
                 {"fill", "pattern seed used to fill exposed windows", "42", "", false},
                 {"expose-vfs", "serve <root>/alloc-<id> directories as windows (comma separated)",
                  "", "", false},
             }}};
  }
  const std::string vfs_root = default_vfs_root();
  return {
      {Subcommand::BenchRun,
       "run",
       "Run the timed sweep and write raw.csv, summary.csv, plot.svg, manifest.json",
       {
           {"backends", "comma separated subset of local,vfs,remote", "local,vfs,remote", "", false},
           {"sizes", "decimal MB: a..b:step or a comma list", "100..1000:100", "", false},
           {"reps", "repetitions per size", "10", "", false},
           {"seed", "pattern seed", "42", "", false},
           {"scale", "divide every size by this factor", "1", "", false},
           {"vfs-root", "directory backing the VFS backend", vfs_root, kVfsRootEnv, false},
           {"endpoint", "remote window server host:port (default: in-process loopback server)",
            "", net::kEndpointEnv, false},
           {"embedded-server", "force an in-process loopback window server", "false", "", true},
           {"cache-fraction", "fraction of each VFS allocation's pages cached locally", "0.2", "",
            false},
           {"page-size", "VFS page size in bytes", "1048576", "", false},
           {"cold", "drop caches between repetitions", "false", "", true},
           {"out", "output directory", "results", "", false},
       }},
      {Subcommand::BenchPlot,
       "plot",
       "Render an SVG plot from a summary CSV",
       {
           {"in", "summary CSV", "results/summary.csv", "", false},
           {"out", "SVG output path", "plot.svg", "", false},
           {"metric", "time|throughput", "time", "", false},
           {"log-y", "logarithmic y axis", "false", "", true},
       }},
      {Subcommand::BenchVerify,
       "verify",
       "Recompute integrity and grid invariants of a raw CSV",
       {
           {"in", "raw CSV", "results/raw.csv", "", false},
           {"seed", "pattern seed (default: from manifest.json next to the CSV, else 42)", "", "",
            false},
       }},
      {Subcommand::VfsInspect,
       "vfs-inspect",
       "List the allocations stored under a VFS root",
       {
           {"vfs-root", "VFS root directory", vfs_root, kVfsRootEnv, false},
           {"json", "machine-readable output", "false", "", true},
       }},
  };
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::map<std::string, std::string> parse_config_file(const std::string& text,
                                                     const std::set<std::string>& known) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = trim(std::string_view(text).substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::BadValue,
                  "config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!known.contains(key)) throw Error(ErrorCode::BadValue, "unknown config key '" + key + "'");
    out[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

template <typename T>
T parse_unsigned(const std::string& text) {
  T value{};
  auto [ptr, err] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || err != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::BadValue, "'" + text + "' is not a non-negative integer");
  }
  return value;
}

double parse_double(const std::string& text) {
  double value = 0;
  auto [ptr, err] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || err != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::BadValue, "'" + text + "' is not a number");
  }
  return value;
}

bool parse_bool(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off" || t.empty()) return false;
  throw Error(ErrorCode::BadValue, "'" + text + "' is not a boolean");
}

LogLevel parse_log_level(const std::string& text) {
  if (text == "error") return LogLevel::Error;
  if (text == "warn") return LogLevel::Warn;
  if (text == "info") return LogLevel::Info;
  if (text == "debug") return LogLevel::Debug;
  throw Error(ErrorCode::BadValue, "'" + text + "' is not one of error,warn,info,debug");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    auto item = trim(std::string_view(text).substr(start, end - start));
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

}  // namespace

std::vector<std::uint64_t> parse_sizes(const std::string& text) {
  std::vector<std::uint64_t> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto colon = text.find(':', dots);
    const auto first = parse_unsigned<std::uint64_t>(trim(text.substr(0, dots)));
    const auto last = parse_unsigned<std::uint64_t>(
        trim(text.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2)));
    const std::uint64_t step =
        colon == std::string::npos ? 1 : parse_unsigned<std::uint64_t>(trim(text.substr(colon + 1)));
    if (step == 0 || first > last) throw Error(ErrorCode::BadValue, "bad size range '" + text + "'");
    for (std::uint64_t v = first; v <= last; v += step) out.push_back(v);
  } else {
    for (const auto& item : split_list(text)) out.push_back(parse_unsigned<std::uint64_t>(item));
  }
  if (out.empty()) throw Error(ErrorCode::BadValue, "empty size list");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw Error(ErrorCode::BadValue, "sizes must be strictly increasing");
  }
  return out;
}

std::vector<BackendKind> parse_backends(const std::string& text) {
  std::vector<BackendKind> out;
  for (const auto& item : split_list(text)) {
    const BackendKind kind = parse_backend(item);
    if (std::find(out.begin(), out.end(), kind) != out.end()) {
      throw Error(ErrorCode::BadValue, "backend '" + item + "' listed twice");
    }
    out.push_back(kind);
  }
  if (out.empty()) throw Error(ErrorCode::BadValue, "empty backend list");
  return out;
}

std::uint64_t parse_byte_size(const std::string& raw) {
  const std::string text = trim(raw);
  std::size_t digits = 0;
  while (digits < text.size() && std::isdigit(static_cast<unsigned char>(text[digits]))) ++digits;
  const auto value = parse_unsigned<std::uint64_t>(text.substr(0, digits));
  std::string suffix = text.substr(digits);
  std::transform(suffix.begin(), suffix.end(), suffix.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  std::uint64_t mult = 1;
  if (suffix.empty() || suffix == "B") mult = 1;
  else if (suffix == "K" || suffix == "KIB") mult = 1ull << 10;
  else if (suffix == "M" || suffix == "MIB") mult = 1ull << 20;
  else if (suffix == "G" || suffix == "GIB") mult = 1ull << 30;
  else if (suffix == "KB") mult = 1000;
  else if (suffix == "MB") mult = 1000 * 1000;
  else if (suffix == "GB") mult = 1000 * 1000 * 1000;
  else throw Error(ErrorCode::BadValue, "unknown size suffix in '" + text + "'");
  return value * mult;
}

Environment current_environment() {
  Environment env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    const auto eq = kv.find('=');
    if (eq != std::string_view::npos) env.emplace(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return env;
}

ToolConfig parse_config(Tool tool, const std::vector<std::string>& argv, const Environment& env,
                        const std::optional<std::string>& config_file_text) {
  const auto specs = specs_for(tool);
  const auto globals = global_options();

  CLI::App app(tool == Tool::Bench ? "Distributed memory access benchmark"
                                   : "One-sided remote memory window server",
               tool == Tool::Bench ? "remem-bench" : "remem-server");
  app.set_help_flag("-h,--help", "print help with defaults");

  // Storage for string values, keyed by (subcommand index, key).
  std::map<std::pair<std::size_t, std::string>, std::string> values;
  std::map<std::pair<std::size_t, std::string>, CLI::Option*> handles;
  std::vector<CLI::App*> apps;
  std::set<std::string> known_keys;

  auto add = [&](CLI::App* target, std::size_t index, const OptionSpec& spec) {
    known_keys.insert(spec.key);
    CLI::Option* opt = nullptr;
    std::string desc = spec.help;
    if (!spec.env.empty()) desc += " [env " + spec.env + "]";
    if (spec.is_flag) {
      opt = target->add_flag("--" + spec.key)->description(desc);
    } else {
      opt = target->add_option("--" + spec.key, values[{index, spec.key}], desc);
      if (!spec.default_value.empty()) opt->default_str(spec.default_value);
    }
    handles[{index, spec.key}] = opt;
  };

  for (std::size_t i = 0; i < specs.size(); ++i) {
    CLI::App* target = specs[i].name.empty() ? &app : app.add_subcommand(specs[i].name, specs[i].help);
    apps.push_back(target);
    for (const auto& g : globals) add(target, i, g);
    for (const auto& o : specs[i].options) add(target, i, o);
  }
  known_keys.erase("config");

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    ToolConfig help;
    std::string text = app.help();
    for (auto* sub : app.get_subcommands({})) text += "\n" + sub->help();
    help.help_text = text;
    return help;
  } catch (const CLI::ExtrasError& e) {
    throw Error(ErrorCode::UnknownFlag, e.what());
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::BadValue, e.what());
  }

  std::size_t chosen = 0;
  if (tool == Tool::Bench) {
    for (std::size_t i = 0; i < apps.size(); ++i) {
      if (apps[i]->parsed()) chosen = i;
    }
  }
  const SubcommandSpec& sub = specs[chosen];

  std::map<std::string, std::string> file_values;
  const auto& config_key = std::make_pair(chosen, std::string("config"));
  if (config_file_text) {
    file_values = parse_config_file(*config_file_text, known_keys);
  } else if (handles.at(config_key)->count() > 0) {
    file_values = parse_config_file(bench::read_text_file(values.at(config_key)), known_keys);
  }

  auto given = [&](const std::string& key) { return handles.at({chosen, key})->count() > 0; };
  auto lookup = [&](const OptionSpec& spec) -> std::string {
    if (given(spec.key)) return spec.is_flag ? "true" : values.at({chosen, spec.key});
    if (!spec.env.empty()) {
      if (auto it = env.find(spec.env); it != env.end() && !it->second.empty()) return it->second;
    }
    if (auto it = file_values.find(spec.key); it != file_values.end()) return it->second;
    return spec.default_value;
  };

  std::map<std::string, std::string> merged;
  for (const auto& g : globals) merged[g.key] = lookup(g);
  for (const auto& o : sub.options) merged[o.key] = lookup(o);

  ToolConfig cfg;
  cfg.command = sub.command;
  auto convert = [&](const std::string& key, auto&& fn) {
    try {
      fn(merged.at(key));
    } catch (const Error& e) {
      throw Error(ErrorCode::BadValue, "--" + key + ": " + e.what());
    }
  };

  convert("log-level", [&](const std::string& v) { cfg.log_level = parse_log_level(v); });
  convert("deterministic", [&](const std::string& v) { cfg.deterministic = parse_bool(v); });

  switch (sub.command) {
    case Subcommand::BenchRun: {
      if (given("endpoint") && given("embedded-server")) {
        throw Error(ErrorCode::ConflictingFlags, "--endpoint and --embedded-server are exclusive");
      }
      auto& b = cfg.bench;
      convert("backends", [&](const std::string& v) { b.backends = parse_backends(v); });
      convert("sizes", [&](const std::string& v) { b.sizes_mb = parse_sizes(v); });
      convert("reps", [&](const std::string& v) {
        b.repetitions = parse_unsigned<std::uint32_t>(v);
        if (b.repetitions == 0) throw Error(ErrorCode::BadValue, "must be >= 1");
      });
      convert("seed", [&](const std::string& v) { b.pattern_seed = parse_unsigned<std::uint64_t>(v); });
      convert("scale", [&](const std::string& v) {
        b.scale = parse_unsigned<std::uint64_t>(v);
        if (b.scale == 0) throw Error(ErrorCode::BadValue, "must be >= 1");
      });
      convert("vfs-root", [&](const std::string& v) { b.vfs_root = v; });
      convert("embedded-server", [&](const std::string& v) { cfg.embedded_server = parse_bool(v); });
      convert("endpoint", [&](const std::string& v) {
        if (!v.empty() && !cfg.embedded_server) b.endpoint = net::parse_endpoint(v);
      });
      convert("cache-fraction", [&](const std::string& v) {
        b.cache_fraction = parse_double(v);
        if (!(b.cache_fraction >= 0 && b.cache_fraction <= 1)) {
          throw Error(ErrorCode::BadValue, "must lie in [0, 1]");
        }
      });
      convert("page-size", [&](const std::string& v) {
        b.page_size = parse_byte_size(v);
        validate_page_size(b.page_size);
      });
      convert("cold", [&](const std::string& v) { b.cold = parse_bool(v); });
      convert("out", [&](const std::string& v) { cfg.out_dir = v; });
      b.validate();
      break;
    }
    case Subcommand::BenchPlot:
      convert("in", [&](const std::string& v) { cfg.in = v; });
      convert("out", [&](const std::string& v) { cfg.plot_out = v; });
      convert("metric", [&](const std::string& v) {
        if (v == "time") cfg.metric = bench::PlotMetric::ElapsedTime;
        else if (v == "throughput") cfg.metric = bench::PlotMetric::Throughput;
        else throw Error(ErrorCode::BadValue, "'" + v + "' is not time|throughput");
      });
      convert("log-y", [&](const std::string& v) { cfg.log_y = parse_bool(v); });
      break;
    case Subcommand::BenchVerify:
      convert("in", [&](const std::string& v) { cfg.in = v; });
      convert("seed", [&](const std::string& v) {
        if (!v.empty()) cfg.verify_seed = parse_unsigned<std::uint64_t>(v);
      });
      break;
    case Subcommand::VfsInspect:
      convert("vfs-root", [&](const std::string& v) { cfg.vfs_root = v; });
      convert("json", [&](const std::string& v) { cfg.json = parse_bool(v); });
      break;
    case Subcommand::Server:
      convert("bind", [&](const std::string& v) { cfg.bind = net::parse_endpoint(v); });
      convert("expose", [&](const std::string& v) {
        for (const auto& item : split_list(v)) {
          const auto size = parse_byte_size(item);
          if (size == 0) throw Error(ErrorCode::BadValue, "window size must be >= 1");
          cfg.expose_sizes.push_back(size);
        }
      });
      convert("fill", [&](const std::string& v) { cfg.fill_seed = parse_unsigned<std::uint64_t>(v); });
      convert("expose-vfs", [&](const std::string& v) {
        for (const auto& item : split_list(v)) cfg.expose_vfs.emplace_back(item);
      });
      break;
  }
  return cfg;
}

}  // namespace remem::cli
