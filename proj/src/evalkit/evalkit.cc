// src/evalkit/evalkit.cc

// Copyright 2026  The xvec Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "xvec/evalkit/evalkit.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "xvec/base/binary-io.h"
#include "xvec/base/error.h"

namespace xvec {

namespace {

using Key = std::pair<std::string, std::string>;

std::vector<std::string> Tokens(const std::string &line) {
  std::istringstream s(line);
  std::vector<std::string> out;
  std::string t;
  while (s >> t) out.push_back(t);
  return out;
}

template <typename F>
void ForEachLine(const std::string &text, F f) {
  std::istringstream s(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(s, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    f(number, line);
  }
}

std::string KeyString(const Key &k) { return k.first + " " + k.second; }

std::string ListKeys(const std::vector<Key> &keys) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(keys.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) out += (i ? ", " : "") + KeyString(keys[i]);
  if (keys.size() > shown) out += ", ... (" + std::to_string(keys.size()) + " total)";
  return out;
}

void RequireBothClasses(std::span<const double> target, std::span<const double> nontarget) {
  if (target.empty()) throw DataError("evaluation needs at least one target trial");
  if (nontarget.empty()) throw DataError("evaluation needs at least one nontarget trial");
}

}  // namespace

TrialList ParseTrials(const std::string &text, const std::string &source) {
  TrialList list;
  std::map<Key, std::size_t> seen;
  ForEachLine(text, [&](std::size_t number, const std::string &line) {
    auto tok = Tokens(line);
    if (tok.size() != 3)
      throw FormatError(source + ":" + std::to_string(number) + ": expected '<enroll> <test> <label>', got " +
                        std::to_string(tok.size()) + " fields");
    Trial t{tok[0], tok[1], false};
    if (tok[2] == "target")
      t.target = true;
    else if (tok[2] != "nontarget")
      throw FormatError(source + ":" + std::to_string(number) + ": unknown label '" + tok[2] + "'");
    auto [it, inserted] = seen.emplace(Key{t.enroll, t.test}, number);
    if (!inserted)
      throw FormatError(source + ":" + std::to_string(number) + ": duplicate trial '" + t.enroll + " " + t.test +
                        "' (first seen on line " + std::to_string(it->second) + ")");
    list.trials.push_back(std::move(t));
  });
  return list;
}

TrialList ReadTrials(const std::string &path) { return ParseTrials(ReadFileBytes(path), path); }

std::string FormatTrials(const TrialList &trials) {
  std::string out;
  for (const auto &t : trials.trials) out += t.enroll + " " + t.test + (t.target ? " target\n" : " nontarget\n");
  return out;
}

std::string FormatScores(const ScoreSet &scores) {
  std::string out;
  char buf[64];
  for (const auto &r : scores.records) {
    if (!std::isfinite(r.score)) throw NumericError("non-finite score for trial " + r.enroll + " " + r.test);
    std::snprintf(buf, sizeof(buf), " %.6f\n", r.score);
    out += r.enroll + " " + r.test + buf;
  }
  return out;
}

ScoreSet ParseScores(const std::string &text, const std::string &source) {
  ScoreSet set;
  ForEachLine(text, [&](std::size_t number, const std::string &line) {
    auto tok = Tokens(line);
    if (tok.size() != 3)
      throw FormatError(source + ":" + std::to_string(number) + ": expected '<enroll> <test> <score>'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok[2], &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != tok[2].size() || !std::isfinite(v))
      throw FormatError(source + ":" + std::to_string(number) + ": bad score '" + tok[2] + "'");
    set.records.push_back({tok[0], tok[1], v});
  });
  return set;
}

ScoreSet ReadScores(const std::string &path) { return ParseScores(ReadFileBytes(path), path); }

void WriteScores(const std::string &path, const ScoreSet &scores) { WriteFileBytes(path, FormatScores(scores)); }

LabelledScores AlignScores(const ScoreSet &scores, const TrialList &trials) {
  std::map<Key, double> by_key;
  for (const auto &r : scores.records) {
    if (!std::isfinite(r.score)) throw NumericError("non-finite score for trial " + r.enroll + " " + r.test);
    if (!by_key.emplace(Key{r.enroll, r.test}, r.score).second)
      throw DataError("duplicate score for trial " + r.enroll + " " + r.test);
  }
  LabelledScores out;
  std::vector<Key> missing;
  for (const auto &t : trials.trials) {
    auto it = by_key.find(Key{t.enroll, t.test});
    if (it == by_key.end()) {
      missing.push_back({t.enroll, t.test});
      continue;
    }
    (t.target ? out.target : out.nontarget).push_back(it->second);
    by_key.erase(it);
  }
  if (!missing.empty()) throw DataError("no score for " + std::to_string(missing.size()) + " trials: " + ListKeys(missing));
  if (!by_key.empty()) {
    std::vector<Key> extra;
    for (const auto &[k, v] : by_key) extra.push_back(k);
    throw DataError("scores for " + std::to_string(extra.size()) + " pairs not in the trial list: " + ListKeys(extra));
  }
  return out;
}

std::vector<DetPoint> ComputeDetPoints(std::span<const double> target, std::span<const double> nontarget) {
  RequireBothClasses(target, nontarget);
  std::vector<std::pair<double, bool>> all;  // score, is_target
  all.reserve(target.size() + nontarget.size());
  for (double s : target) all.emplace_back(s, true);
  for (double s : nontarget) all.emplace_back(s, false);
  std::sort(all.begin(), all.end());
  const double nt = static_cast<double>(target.size()), nn = static_cast<double>(nontarget.size());
  std::vector<DetPoint> points;
  std::size_t below_t = 0, below_n = 0;  // trials scoring below the current threshold
  for (std::size_t i = 0; i < all.size();) {
    const double thr = all[i].first;
    points.push_back({thr, static_cast<double>(below_t) / nt,
                      static_cast<double>(nontarget.size() - below_n) / nn});
    for (; i < all.size() && all[i].first == thr; ++i) (all[i].second ? below_t : below_n) += 1;
  }
  points.push_back({std::numeric_limits<double>::infinity(), 1.0, 0.0});
  return points;
}

double EerFromDetPoints(std::span<const DetPoint> p) {
  if (p.empty()) throw DataError("eer: no operating points");
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double diff = p[j].p_miss - p[j].p_fa;
    if (diff < 0.0) continue;
    if (diff == 0.0 || j == 0) return p[j].p_miss;
    const DetPoint &a = p[j - 1], &b = p[j];
    const double alpha = (a.p_fa - a.p_miss) / ((b.p_miss - a.p_miss) - (b.p_fa - a.p_fa));
    return a.p_miss + alpha * (b.p_miss - a.p_miss);
  }
  return p.back().p_miss;
}

double ComputeEer(std::span<const double> target, std::span<const double> nontarget) {
  auto points = ComputeDetPoints(target, nontarget);
  return EerFromDetPoints(points);
}

double MinDcfFromDetPoints(std::span<const DetPoint> points, double p, double c_miss, double c_fa) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("min_dcf: p_target must lie in (0,1)");
  if (!(c_miss > 0.0) || !(c_fa > 0.0)) throw ConfigError("min_dcf: costs must be positive");
  double best = std::numeric_limits<double>::infinity();
  for (const auto &pt : points) best = std::min(best, c_miss * p * pt.p_miss + c_fa * (1.0 - p) * pt.p_fa);
  return best / std::min(c_miss * p, c_fa * (1.0 - p));
}

double ComputeMinDcf(std::span<const double> target, std::span<const double> nontarget, double p, double c_miss,
                     double c_fa) {
  auto points = ComputeDetPoints(target, nontarget);
  return MinDcfFromDetPoints(points, p, c_miss, c_fa);
}

ScoreSet FuseScores(const ScoreSet &a, const ScoreSet &b, double wa, double wb) {
  if (!std::isfinite(wa) || !std::isfinite(wb)) throw ConfigError("fuse: weights must be finite");
  std::map<Key, double> bk;
  for (const auto &r : b.records) bk[{r.enroll, r.test}] = r.score;
  ScoreSet out;
  std::vector<Key> missing_in_b;
  for (const auto &r : a.records) {
    auto it = bk.find({r.enroll, r.test});
    if (it == bk.end()) {
      missing_in_b.push_back({r.enroll, r.test});
      continue;
    }
    out.records.push_back({r.enroll, r.test, wa * r.score + wb * it->second});
    bk.erase(it);
  }
  if (!missing_in_b.empty() || !bk.empty()) {
    std::vector<Key> missing_in_a;
    for (const auto &[k, v] : bk) missing_in_a.push_back(k);
    std::string msg = "fuse: trial keys differ;";
    if (!missing_in_b.empty()) msg += " missing from second set: " + ListKeys(missing_in_b) + ";";
    if (!missing_in_a.empty()) msg += " missing from first set: " + ListKeys(missing_in_a) + ";";
    throw DataError(msg);
  }
  return out;
}

MetricsReport EvaluateScores(const std::string &system, const ScoreSet &scores, const TrialList &trials) {
  LabelledScores ls = AlignScores(scores, trials);
  MetricsReport r;
  r.system = system;
  r.det = ComputeDetPoints(ls.target, ls.nontarget);
  r.eer = EerFromDetPoints(r.det);
  r.min_dcf_p01 = MinDcfFromDetPoints(r.det, 0.01);
  r.min_dcf_p001 = MinDcfFromDetPoints(r.det, 0.001);
  return r;
}

std::string ReportCsv(std::span<const MetricsReport> reports) {
  std::string out = "system,eer,dcf_p01,dcf_p001\n";
  char buf[128];
  for (const auto &r : reports) {
    std::snprintf(buf, sizeof(buf), ",%.3f,%.4f,%.4f\n", 100.0 * r.eer, r.min_dcf_p01, r.min_dcf_p001);
    out += r.system + buf;
  }
  return out;
}

std::string DetCsv(const MetricsReport &report) {
  std::string out = "threshold,p_miss,p_fa\n";
  char buf[96];
  for (const auto &p : report.det) {
    if (std::isinf(p.threshold))
      std::snprintf(buf, sizeof(buf), "inf,%.17g,%.17g\n", p.p_miss, p.p_fa);
    else
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.threshold, p.p_miss, p.p_fa);
    out += buf;
  }
  return out;
}

std::vector<std::string> EmitReport(const std::string &dir, std::span<const MetricsReport> reports) {
  if (reports.empty()) throw ConfigError("report: no systems to report");
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  written.push_back(dir + "/report.csv");
  WriteFileBytes(written.back(), ReportCsv(reports));
  for (const auto &r : reports) {
    written.push_back(dir + "/det_" + r.system + ".csv");
    WriteFileBytes(written.back(), DetCsv(r));
  }
  return written;
}

}  // namespace xvec
