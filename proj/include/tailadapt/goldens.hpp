#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "tailadapt/app.hpp"
#include "tailadapt/errors.hpp"

namespace tailadapt::goldens {

namespace fs = std::filesystem;

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw numeric_error("sha256 failed", 0.0);
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// 12 significant digits, negative zero folded to zero.
inline std::string canonical_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline bool parse_number(const std::string& s, double& v) {
  if (s == "inf") {
    v = HUGE_VAL;
    return true;
  }
  if (s == "-inf") {
    v = -HUGE_VAL;
    return true;
  }
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return !s.empty() && end == s.c_str() + s.size();
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline std::string canonical_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    auto cells = split(line, ',');
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double v = 0.0;
      if (i) out += ',';
      out += parse_number(cells[i], v) ? canonical_number(v) : cells[i];
    }
    out += '\n';
  }
  return out;
}

inline void flatten(const nlohmann::json& j, const std::string& path, std::vector<std::string>& lines) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), path + "/" + it.key(), lines);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "/" + std::to_string(i), lines);
  } else if (j.is_number()) {
    lines.push_back(path + "," + canonical_number(j.get<double>()));
  } else if (j.is_string()) {
    lines.push_back(path + "," + j.get<std::string>());
  } else {
    lines.push_back(path + "," + j.dump());
  }
}

/// JSON flattened to sorted "path,value" lines.
inline std::string canonical_json(const std::string& text) {
  std::vector<std::string> lines;
  flatten(nlohmann::json::parse(text), "", lines);
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw argument_error("cannot read " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

inline std::string canonicalize(const fs::path& p) {
  const std::string text = read_file(p);
  return p.extension() == ".json" ? canonical_json(text) : canonical_csv(text);
}

struct ArtifactCheck {
  std::string file;
  bool passed = false;
  bool digest_match = false;
  double max_abs_delta = 0.0;
  double max_rel_delta = 0.0;
  std::string detail;
};

struct CaseReport {
  std::string name;
  bool passed = false;
  std::vector<ArtifactCheck> artifacts;
  std::string error;
};

struct VerifyReport {
  std::vector<CaseReport> cases;
  bool passed() const {
    return !cases.empty() && std::all_of(cases.begin(), cases.end(), [](const CaseReport& c) { return c.passed; });
  }
};

/// Cell-by-cell comparison of canonical texts. Numeric cells must agree
/// within abs_tol + rel_tol * |expected|; other cells must be equal.
inline ArtifactCheck compare_canonical(const std::string& file, const std::string& expected,
                                       const std::string& actual, double abs_tol, double rel_tol) {
  ArtifactCheck r;
  r.file = file;
  r.digest_match = sha256_hex(expected) == sha256_hex(actual);
  if (r.digest_match) {
    r.passed = true;
    return r;
  }
  std::istringstream ein(expected), ain(actual);
  std::string el, al;
  std::size_t line = 0;
  bool ok = true;
  while (true) {
    const bool eg = static_cast<bool>(std::getline(ein, el));
    const bool ag = static_cast<bool>(std::getline(ain, al));
    if (!eg && !ag) break;
    ++line;
    if (eg != ag) {
      ok = false;
      r.detail = "line count differs at line " + std::to_string(line);
      break;
    }
    const auto ec = split(el, ','), ac = split(al, ',');
    if (ec.size() != ac.size()) {
      ok = false;
      r.detail = "column count differs at line " + std::to_string(line);
      break;
    }
    for (std::size_t i = 0; i < ec.size(); ++i) {
      double ev = 0.0, av = 0.0;
      if (parse_number(ec[i], ev) && parse_number(ac[i], av)) {
        if (ev == av) continue;
        const double d = std::fabs(ev - av);
        const double rel = ev != 0.0 ? d / std::fabs(ev) : d;
        r.max_abs_delta = std::fmax(r.max_abs_delta, d);
        r.max_rel_delta = std::fmax(r.max_rel_delta, rel);
        if (!(d <= abs_tol + rel_tol * std::fabs(ev))) {
          if (ok) {
            r.detail = "line " + std::to_string(line) + " column " + std::to_string(i + 1) + ": expected " +
                       ec[i] + ", got " + ac[i] + " (delta " + canonical_number(d) + ")";
          }
          ok = false;
        }
      } else if (ec[i] != ac[i]) {
        if (ok) r.detail = "line " + std::to_string(line) + ": expected '" + ec[i] + "', got '" + ac[i] + "'";
        ok = false;
      }
    }
  }
  r.passed = ok;
  if (ok) r.detail = "digest differs, values within tolerance";
  return r;
}

inline std::vector<std::string> expand_args(const nlohmann::json& args, const fs::path& golden_dir,
                                            const fs::path& out_dir) {
  std::vector<std::string> out;
  for (const auto& a : args) {
    std::string s = a.get<std::string>();
    const std::string key = "{goldens}";
    for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key)) s.replace(pos, key.size(), golden_dir.string());
    out.push_back(s);
  }
  out.push_back("--out");
  out.push_back(out_dir.string());
  return out;
}

inline fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tailadapt_goldens_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// Re-runs every case of `golden_dir/manifest.json` and compares the
/// canonical artifacts with the recorded ones. With `bless` the recorded
/// canonical files and digests are replaced instead.
inline VerifyReport verify_goldens(const fs::path& golden_dir, bool bless = false,
                                   const std::vector<std::string>& only = {}) {
  const fs::path manifest_path = golden_dir / "manifest.json";
  nlohmann::ordered_json manifest = nlohmann::ordered_json::parse(read_file(manifest_path));
  VerifyReport report;
  for (auto& gc : manifest.at("cases")) {
    CaseReport cr;
    cr.name = gc.at("name").get<std::string>();
    if (!only.empty() && std::find(only.begin(), only.end(), cr.name) == only.end()) continue;
    const fs::path out_dir = scratch_dir(cr.name);
    std::ostringstream sink_out, sink_err;
    const int code = app::main_with_args(expand_args(gc.at("args"), golden_dir, out_dir), sink_out, sink_err);
    if (code != 0) {
      cr.error = "command failed with status " + std::to_string(code) + ": " + sink_err.str();
      report.cases.push_back(cr);
      continue;
    }
    cr.passed = true;
    for (auto& art : gc.at("artifacts")) {
      const std::string file = art.at("file").get<std::string>();
      const fs::path produced = out_dir / file;
      const fs::path recorded = golden_dir / cr.name / (file + ".canon");
      if (!fs::exists(produced)) {
        cr.passed = false;
        cr.artifacts.push_back({file, false, false, 0.0, 0.0, "artifact was not produced"});
        continue;
      }
      const std::string actual = canonicalize(produced);
      if (bless) {
        fs::create_directories(recorded.parent_path());
        io::write_text(recorded.string(), actual);
        art["sha256"] = sha256_hex(actual);
        cr.artifacts.push_back({file, true, true, 0.0, 0.0, "blessed"});
        continue;
      }
      if (!fs::exists(recorded)) {
        cr.passed = false;
        cr.artifacts.push_back({file, false, false, 0.0, 0.0, "no recorded golden"});
        continue;
      }
      const std::string expected = read_file(recorded);
      ArtifactCheck chk = compare_canonical(file, expected, actual, art.at("abs_tol").get<double>(),
                                            art.at("rel_tol").get<double>());
      if (sha256_hex(expected) != art.at("sha256").get<std::string>()) {
        chk.passed = false;
        chk.detail = "recorded golden does not match its digest";
      }
      cr.passed = cr.passed && chk.passed;
      cr.artifacts.push_back(chk);
    }
    fs::remove_all(out_dir);
    report.cases.push_back(cr);
  }
  if (bless) {
    for (auto& gc : manifest.at("cases")) {
      std::string joined;
      for (const auto& a : gc.at("args")) joined += a.get<std::string>() + "\n";
      gc["config_hash"] = sha256_hex(joined);
    }
    io::write_text(manifest_path.string(), manifest.dump(2) + "\n");
  }
  return report;
}

inline std::string format_report(const VerifyReport& r) {
  std::string s;
  for (const auto& c : r.cases) {
    s += (c.passed ? "PASS " : "FAIL ") + c.name + "\n";
    if (!c.error.empty()) s += "  " + c.error + "\n";
    for (const auto& a : c.artifacts) {
      if (a.digest_match && a.passed) continue;
      s += "  " + a.file + ": " + a.detail + " (max abs delta " + canonical_number(a.max_abs_delta) +
           ", max rel delta " + canonical_number(a.max_rel_delta) + ")\n";
    }
  }
  return s;
}

}  // namespace tailadapt::goldens
