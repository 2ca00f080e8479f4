#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "driftwatch/benchmark.hpp"
#include "driftwatch/canonical.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/fileio.hpp"
#include "driftwatch/registry.hpp"
#include "driftwatch/summarizer.hpp"

namespace driftwatch {

/// File-backed persistence rooted at one directory:
///
///   config.json
///   baselines/<summary_id>.json
///   reports/<report_id>.json
///   registry/<model>/versions/<n>.json
///
/// Entities are content-addressed, so putting the same entity twice keeps
/// the first file.
class Store {
 public:
  explicit Store(fs::path root) : root_(std::move(root)), registry_(root_) {
    fs::create_directories(root_ / "baselines");
    fs::create_directories(root_ / "reports");
    fs::create_directories(root_ / "registry");
  }

  const fs::path& root() const { return root_; }
  fs::path config_path() const { return root_ / "config.json"; }
  Registry& registry() { return registry_; }
  const Registry& registry() const { return registry_; }

  std::string put_baseline(const DatasetSummary& s) {
    if (compute_summary_id(s) != s.summary_id) throw InvalidArgument("summary_id does not match content");
    put(root_ / "baselines", s.summary_id, to_json(s));
    return s.summary_id;
  }

  DatasetSummary get_baseline(const std::string& id) const {
    auto s = summary_from_json(get(root_ / "baselines", id, "baseline"));
    if (s.summary_id != id) throw CorruptError("baseline file " + id + " holds summary " + s.summary_id);
    return s;
  }

  std::vector<DatasetSummary> list_baselines() const {
    std::vector<DatasetSummary> out;
    for (const auto& id : ids(root_ / "baselines")) out.push_back(get_baseline(id));
    return out;
  }

  std::string put_report(const DriftReport& r) {
    put(root_ / "reports", r.report_id, to_json(r));
    return r.report_id;
  }

  DriftReport get_report(const std::string& id) const {
    auto r = report_from_json(get(root_ / "reports", id, "report"));
    if (r.report_id != id) throw CorruptError("report file " + id + " holds report " + r.report_id);
    return r;
  }

  std::vector<std::string> list_report_ids() const { return ids(root_ / "reports"); }

 private:
  static bool valid_id(const std::string& id) {
    return id.size() == 16 &&
           std::all_of(id.begin(), id.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
  }

  static void put(const fs::path& dir, const std::string& id, const Json& doc) {
    if (!valid_id(id)) throw InvalidArgument("invalid entity id '" + id + "'");
    const fs::path path = dir / (id + ".json");
    // One writer per directory; content addressing makes a second put of
    // the same id a no-op.
    FileLock lock(dir / ".lock");
    if (fs::exists(path)) return;
    atomic_write_file(path, canonical_dump(doc));
  }

  static Json get(const fs::path& dir, const std::string& id, const char* what) {
    const fs::path path = dir / (id + ".json");
    if (!valid_id(id) || !fs::exists(path)) throw NotFoundError(std::string("unknown ") + what + " '" + id + "'");
    try {
      return parse_json(read_file(path));
    } catch (const ParseError& e) {
      throw CorruptError(std::string(what) + " file '" + path.string() + "' is not JSON: " + e.what());
    }
  }

  static std::vector<std::string> ids(const fs::path& dir) {
    std::vector<std::string> out;
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".json") continue;
      auto stem = entry.path().stem().string();
      if (valid_id(stem)) out.push_back(std::move(stem));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  fs::path root_;
  Registry registry_;
};

}  // namespace driftwatch
