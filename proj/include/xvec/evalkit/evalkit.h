// include/xvec/evalkit/evalkit.h

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

#ifndef XVEC_EVALKIT_EVALKIT_H_
#define XVEC_EVALKIT_EVALKIT_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace xvec {

struct Trial {
  std::string enroll;
  std::string test;
  bool target = false;
};

struct TrialList {
  std::vector<Trial> trials;
};

/// `<enroll> <test> target|nontarget` per line. Throws FormatError naming
/// the line for malformed lines, unknown labels and duplicate pairs.
TrialList ParseTrials(const std::string &text, const std::string &source = "<trials>");
TrialList ReadTrials(const std::string &path);
std::string FormatTrials(const TrialList &trials);

struct ScoreRecord {
  std::string enroll;
  std::string test;
  double score = 0.0;
};

struct ScoreSet {
  std::vector<ScoreRecord> records;
};

/// `<enroll> <test> <score>` per line, scores printed with 6 decimals.
std::string FormatScores(const ScoreSet &scores);
ScoreSet ParseScores(const std::string &text, const std::string &source = "<scores>");
ScoreSet ReadScores(const std::string &path);
void WriteScores(const std::string &path, const ScoreSet &scores);

/// Target and nontarget scores of a trial list.
struct LabelledScores {
  std::vector<double> target;
  std::vector<double> nontarget;
};

/// Matches scores to trials by key. DataError when a trial has no score or
/// a score has no trial; the message lists the offending keys.
LabelledScores AlignScores(const ScoreSet &scores, const TrialList &trials);

struct DetPoint {
  double threshold = 0.0;  // +inf for the reject-all point
  double p_miss = 0.0;
  double p_fa = 0.0;
};

/// One operating point per distinct score (accept when score >= threshold)
/// in increasing threshold order, followed by the reject-all point (1, 0).
/// The first point is accept-all (0, 1).
std::vector<DetPoint> ComputeDetPoints(std::span<const double> target, std::span<const double> nontarget);

/// EER by linear interpolation between the two operating points that
/// bracket P_miss = P_fa.
double ComputeEer(std::span<const double> target, std::span<const double> nontarget);
double EerFromDetPoints(std::span<const DetPoint> points);

/// min over operating points of c_miss p P_miss + c_fa (1 - p) P_fa,
/// normalized by min(c_miss p, c_fa (1 - p)).
double ComputeMinDcf(std::span<const double> target, std::span<const double> nontarget, double p_target,
                     double c_miss = 1.0, double c_fa = 1.0);
double MinDcfFromDetPoints(std::span<const DetPoint> points, double p_target, double c_miss = 1.0,
                           double c_fa = 1.0);

/// Per-trial w_a * a + w_b * b over identical keys, in a's order.
ScoreSet FuseScores(const ScoreSet &a, const ScoreSet &b, double weight_a = 0.5, double weight_b = 0.5);

struct MetricsReport {
  std::string system;
  double eer = 0.0;  // fraction
  double min_dcf_p01 = 0.0;
  double min_dcf_p001 = 0.0;
  std::vector<DetPoint> det;
};

MetricsReport EvaluateScores(const std::string &system, const ScoreSet &scores, const TrialList &trials);

/// `system,eer,dcf_p01,dcf_p001`; EER in percent with 3 decimals, DCFs with 4.
std::string ReportCsv(std::span<const MetricsReport> reports);
/// `threshold,p_miss,p_fa` per operating point.
std::string DetCsv(const MetricsReport &report);
/// Writes `<dir>/report.csv` and `<dir>/det_<system>.csv` for each system;
/// returns the paths written.
std::vector<std::string> EmitReport(const std::string &dir, std::span<const MetricsReport> reports);

}  // namespace xvec

#endif  // XVEC_EVALKIT_EVALKIT_H_
