// src/metrics.cc

// Copyright 2026  The DPLDA Backend Authors

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

#include "dplda/metrics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dplda/calibration.h"
#include "dplda/errors.h"

namespace dplda {

namespace {

void RequireBothClasses(const ClassScores &s, const char *what) {
  if (s.target.empty() || s.impostor.empty())
    throw ValidationError(std::string(what) +
                          ": need at least one target and one impostor");
}

std::vector<PavBlock> PavBlocks(const ClassScores &scores) {
  struct Item {
    double score;
    bool target;
  };
  std::vector<Item> items;
  items.reserve(scores.target.size() + scores.impostor.size());
  for (double s : scores.target) items.push_back({s, true});
  for (double s : scores.impostor) items.push_back({s, false});
  std::stable_sort(items.begin(), items.end(),
                   [](const Item &a, const Item &b) { return a.score < b.score; });

  std::vector<PavBlock> stack;
  auto rate = [](const PavBlock &b) {
    return static_cast<double>(b.targets) / (b.targets + b.impostors);
  };
  std::size_t i = 0;
  while (i < items.size()) {
    // Tied scores start out as one block.
    PavBlock blk;
    blk.lower = blk.upper = items[i].score;
    while (i < items.size() && items[i].score == blk.lower) {
      (items[i].target ? blk.targets : blk.impostors)++;
      ++i;
    }
    stack.push_back(blk);
    while (stack.size() >= 2 &&
           rate(stack[stack.size() - 2]) >= rate(stack.back())) {
      PavBlock top = stack.back();
      stack.pop_back();
      PavBlock &prev = stack.back();
      prev.upper = top.upper;
      prev.targets += top.targets;
      prev.impostors += top.impostors;
    }
  }
  return stack;
}

double HullEer(const std::vector<PavBlock> &blocks, double n_tgt, double n_imp) {
  double pmiss = 0.0, pfa = 1.0;
  for (const PavBlock &b : blocks) {
    double next_miss = pmiss + b.targets / n_tgt;
    double next_fa = pfa - b.impostors / n_imp;
    double d0 = pfa - pmiss, d1 = next_fa - next_miss;
    if (d0 >= 0.0 && d1 <= 0.0) {
      if (d0 == d1) return pmiss;
      double t = d0 / (d0 - d1);
      return pmiss + t * (next_miss - pmiss);
    }
    pmiss = next_miss;
    pfa = next_fa;
  }
  return 0.0;
}

}  // namespace

double Cllr(const ClassScores &llrs) {
  RequireBothClasses(llrs, "Cllr");
  double tgt = 0.0, imp = 0.0;
  for (double l : llrs.target) tgt += Softplus(-l);
  for (double l : llrs.impostor) imp += Softplus(l);
  return (tgt / llrs.target.size() + imp / llrs.impostor.size()) /
         (2.0 * std::numbers::ln2);
}

double PavResult::Map(double score) const {
  auto it = std::upper_bound(
      blocks.begin(), blocks.end(), score,
      [](double s, const PavBlock &b) { return s < b.lower; });
  if (it == blocks.begin()) return blocks.front().llr;
  return std::prev(it)->llr;
}

PavResult PavMinCllr(const ClassScores &scores) {
  RequireBothClasses(scores, "PavMinCllr");
  const double n_tgt = static_cast<double>(scores.target.size());
  const double n_imp = static_cast<double>(scores.impostor.size());
  const double prior_logit = std::log(n_tgt) - std::log(n_imp);

  PavResult result;
  result.blocks = PavBlocks(scores);
  double tgt_cost = 0.0, imp_cost = 0.0;
  for (PavBlock &b : result.blocks) {
    double llr;
    if (b.impostors == 0)
      llr = kPavLlrClamp;
    else if (b.targets == 0)
      llr = -kPavLlrClamp;
    else
      llr = std::log(static_cast<double>(b.targets)) -
            std::log(static_cast<double>(b.impostors)) - prior_logit;
    b.llr = std::clamp(llr, -kPavLlrClamp, kPavLlrClamp);
    tgt_cost += b.targets * Softplus(-b.llr);
    imp_cost += b.impostors * Softplus(b.llr);
  }
  result.min_cllr =
      (tgt_cost / n_tgt + imp_cost / n_imp) / (2.0 * std::numbers::ln2);
  return result;
}

double Eer(const ClassScores &scores) {
  RequireBothClasses(scores, "Eer");
  const double n_tgt = static_cast<double>(scores.target.size());
  const double n_imp = static_cast<double>(scores.impostor.size());
  ClassScores negated;
  for (double s : scores.target) negated.target.push_back(-s);
  for (double s : scores.impostor) negated.impostor.push_back(-s);
  return std::min(HullEer(PavBlocks(scores), n_tgt, n_imp),
                  HullEer(PavBlocks(negated), n_tgt, n_imp));
}

EvalReport Evaluate(const ClassScores &llrs) {
  EvalReport r;
  r.actual_cllr = Cllr(llrs);
  r.min_cllr = std::min(PavMinCllr(llrs).min_cllr, r.actual_cllr);
  r.eer = Eer(llrs);
  r.n_target = llrs.target.size();
  r.n_impostor = llrs.impostor.size();
  return r;
}

std::string EvalReportTsv(const EvalReport &r) {
  std::ostringstream os;
  os.precision(17);
  os << "actual_cllr\tmin_cllr\teer\tn_target\tn_impostor\n"
     << r.actual_cllr << '\t' << r.min_cllr << '\t' << r.eer << '\t'
     << r.n_target << '\t' << r.n_impostor << '\n';
  return os.str();
}

}  // namespace dplda
