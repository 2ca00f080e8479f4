#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/fileio.hpp"
#include "driftwatch/interpreter.hpp"
#include "driftwatch/pipeline.hpp"
#include "driftwatch/registry.hpp"
#include "driftwatch/server.hpp"
#include "driftwatch/store.hpp"

namespace driftwatch {

// Exit codes: 0 success / verdict pass, 1 any error, 2 verdict fail.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDrift = 2;

namespace detail {

inline DataFormat resolve_format(const std::string& flag, const fs::path& input) {
  if (!flag.empty()) {
    auto f = parse_data_format(flag);
    if (!f) throw InvalidArgument("--format must be csv or jsonl");
    return *f;
  }
  const auto ext = input.extension().string();
  return (ext == ".jsonl" || ext == ".ndjson") ? DataFormat::Jsonl : DataFormat::Csv;
}

inline std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

inline void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write '" + path + "'");
  file << content;
  if (!file) throw Error("cannot write '" + path + "'");
}

inline std::pair<std::string, std::string> split_kv(const std::string& s, const char* flag) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidArgument(std::string(flag) + " expects key=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

inline double parse_real(const std::string& s, const std::string& metric) {
  auto v = parse_number(s);
  if (!v) throw InvalidArgument("metric '" + metric + "': '" + s + "' is not a number");
  return *v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw InvalidArgument(what + ": '" + s + "' is not an integer");
  return v;
}

}  // namespace detail

/// Metric flag grammar: `v` → Scalar, `s/t` → Proportion, `[v1,v2,...]` → Samples.
inline MetricValue parse_metric_value(const std::string& metric, const std::string& text) {
  MetricValue value;
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw InvalidArgument("metric '" + metric + "': unterminated sample list");
    Samples s;
    std::string inner = text.substr(1, text.size() - 2);
    std::size_t start = 0;
    while (start <= inner.size()) {
      auto comma = inner.find(',', start);
      if (comma == std::string::npos) comma = inner.size();
      std::string item = inner.substr(start, comma - start);
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      s.values.push_back(detail::parse_real(item, metric));
      start = comma + 1;
    }
    value = std::move(s);
  } else if (auto slash = text.find('/'); slash != std::string::npos) {
    value = Proportion{detail::parse_int(text.substr(0, slash), "metric '" + metric + "' successes"),
                       detail::parse_int(text.substr(slash + 1), "metric '" + metric + "' trials")};
  } else {
    value = Scalar{detail::parse_real(text, metric)};
  }
  validate_metric(metric, value);
  return value;
}

/// Runs one CLI invocation. Documents go to `out`, diagnostics to `err`.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"driftwatch: dataset drift checks and model experiment registry", "driftwatch"};
  app.require_subcommand(1);

  // profile
  std::string p_input, p_format, p_config, p_out;
  auto* profile = app.add_subcommand("profile", "Summarize a dataset into a baseline document");
  profile->add_option("--input", p_input, "Dataset path")->required();
  profile->add_option("--format", p_format, "csv or jsonl (default: from extension)");
  profile->add_option("--config", p_config, "Config JSON path");
  profile->add_option("--out", p_out, "Where to write the summary JSON")->required();

  // validate
  std::string v_baseline, v_input, v_format, v_config, v_out, v_render = "text";
  bool v_notify = false;
  auto* validate_cmd = app.add_subcommand("validate", "Benchmark a dataset against a stored baseline");
  validate_cmd->add_option("--baseline", v_baseline, "Baseline summary JSON")->required();
  validate_cmd->add_option("--input", v_input, "Current dataset path")->required();
  validate_cmd->add_option("--format", v_format, "csv or jsonl (default: from extension)");
  validate_cmd->add_option("--config", v_config, "Config JSON path");
  validate_cmd->add_option("--out", v_out, "Write the rendered report here instead of stdout");
  validate_cmd->add_option("--render", v_render, "json or text")->check(CLI::IsMember({"json", "text"}));
  validate_cmd->add_flag("--notify", v_notify, "POST alerts to notify_url");

  // registry
  auto* registry = app.add_subcommand("registry", "Model version registry");
  registry->require_subcommand(1);
  std::string r_store, r_model, r_metric, r_versions, r_direction = "max";
  std::vector<std::string> r_params, r_metrics, r_parents, r_features;

  auto* r_log = registry->add_subcommand("log", "Log a model version");
  r_log->add_option("--store", r_store)->required();
  r_log->add_option("--model", r_model)->required();
  r_log->add_option("--param", r_params, "k=v")->take_all();
  r_log->add_option("--metric", r_metrics, "k=v | k=s/t | k=[v1,v2,...]")->take_all();
  r_log->add_option("--parent", r_parents, "Parent version")->take_all();
  r_log->add_option("--feature", r_features, "Feature input name")->take_all();

  auto* r_list = registry->add_subcommand("list", "List versions of a model");
  r_list->add_option("--store", r_store)->required();
  r_list->add_option("--model", r_model)->required();

  auto* r_lineage = registry->add_subcommand("lineage", "Lineage graph of a model");
  r_lineage->add_option("--store", r_store)->required();
  r_lineage->add_option("--model", r_model)->required();

  auto* r_compare = registry->add_subcommand("compare", "Statistical A/B/n comparison of versions");
  r_compare->add_option("--store", r_store)->required();
  r_compare->add_option("--model", r_model)->required();
  r_compare->add_option("--metric", r_metric)->required();
  r_compare->add_option("--versions", r_versions, "a,b[,c...]")->required();
  r_compare->add_option("--direction", r_direction)->check(CLI::IsMember({"max", "min"}));
  r_compare->add_option("--config", p_config, "Config JSON path");

  auto* r_best = registry->add_subcommand("best", "Best version by mean metric");
  r_best->add_option("--store", r_store)->required();
  r_best->add_option("--model", r_model)->required();
  r_best->add_option("--metric", r_metric)->required();
  r_best->add_option("--direction", r_direction)->check(CLI::IsMember({"max", "min"}));

  // serve
  std::string s_store, s_addr = "127.0.0.1:8080", s_config;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--store", s_store)->required();
  serve->add_option("--addr", s_addr, "host:port");
  serve->add_option("--config", s_config, "Config JSON path");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "driftwatch: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (profile->parsed()) {
      const auto cfg = load_config_file(detail::opt_path(p_config));
      const auto bytes = read_file(p_input);
      const auto summary = profile_bytes(bytes, detail::resolve_format(p_format, p_input), cfg);
      detail::write_output(p_out, canonical_dump(to_json(summary)) + "\n", out);
      err << "profiled " << summary.record_count << " records, summary " << summary.summary_id << "\n";
      return kExitOk;
    }

    if (validate_cmd->parsed()) {
      const auto cfg = load_config_file(detail::opt_path(v_config));
      const auto baseline = summary_from_json(parse_json(read_file(v_baseline)));
      const auto bytes = read_file(v_input);
      const auto report = validate_bytes(baseline, bytes, detail::resolve_format(v_format, v_input), cfg);
      const auto fmt = v_render == "json" ? RenderFormat::Json : RenderFormat::Text;
      std::string doc = render_report(report, fmt);
      if (fmt == RenderFormat::Json) doc += "\n";
      detail::write_output(v_out, doc, out);
      if (v_notify) {
        const auto outcome = emit_alerts(report, cfg);
        err << "notify: " << to_string(outcome.kind);
        if (!outcome.reason.empty()) err << " (" << outcome.reason << ")";
        err << "\n";
      }
      return report.verdict == Verdict::Fail ? kExitDrift : kExitOk;
    }

    if (registry->parsed()) {
      Registry reg(r_store);
      if (r_log->parsed()) {
        ModelDraft draft;
        for (const auto& p : r_params) draft.params.insert(detail::split_kv(p, "--param"));
        for (const auto& m : r_metrics) {
          auto [k, v] = detail::split_kv(m, "--metric");
          draft.metrics.insert_or_assign(k, parse_metric_value(k, v));
        }
        for (const auto& p : r_parents) draft.parent_versions.push_back(detail::parse_int(p, "--parent"));
        draft.feature_inputs = r_features;
        out << canonical_dump(to_json(reg.log_version(r_model, draft))) << "\n";
        return kExitOk;
      }
      if (r_list->parsed()) {
        Json list = Json::array();
        for (const auto& v : reg.list_versions(r_model)) list.push_back(to_json(v));
        out << canonical_dump(list) << "\n";
        return kExitOk;
      }
      if (r_lineage->parsed()) {
        out << canonical_dump(to_json(reg.get_lineage(r_model))) << "\n";
        return kExitOk;
      }
      if (r_compare->parsed()) {
        std::vector<std::int64_t> versions;
        std::size_t start = 0;
        while (start <= r_versions.size()) {
          auto comma = r_versions.find(',', start);
          if (comma == std::string::npos) comma = r_versions.size();
          versions.push_back(detail::parse_int(r_versions.substr(start, comma - start), "--versions"));
          start = comma + 1;
        }
        const auto cfg = load_config_file(detail::opt_path(p_config));
        const auto result = reg.compare_versions(r_model, r_metric, versions, *parse_direction(r_direction), cfg);
        out << canonical_dump(to_json(result)) << "\n";
        return kExitOk;
      }
      if (r_best->parsed()) {
        out << reg.best_version(r_model, r_metric, *parse_direction(r_direction)) << "\n";
        return kExitOk;
      }
    }

    if (serve->parsed()) {
      const auto colon = s_addr.rfind(':');
      if (colon == std::string::npos) throw InvalidArgument("--addr must be host:port");
      const std::string host = s_addr.substr(0, colon);
      const int port = static_cast<int>(detail::parse_int(s_addr.substr(colon + 1), "--addr port"));
      Server server(s_store, detail::opt_path(s_config));
      server.current_config();  // fail fast on a broken config
      const int bound = server.bind(host, port);
      err << "driftwatch listening on " << host << ":" << bound << "\n";
      server.listen();
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "driftwatch: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace driftwatch
