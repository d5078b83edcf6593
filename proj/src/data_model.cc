// src/data_model.cc

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

#include "dplda/data_model.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "dplda/errors.h"

namespace dplda {

namespace {

constexpr char kArchiveMagic[8] = {'D', 'P', 'L', 'D', 'A', 'E', 'M', 'B'};
constexpr std::uint8_t kArchiveVersion = 1;

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::vector<std::string> SplitWhitespace(const std::string &line) {
  std::istringstream is(line);
  std::vector<std::string> fields;
  std::string tok;
  while (is >> tok) fields.push_back(tok);
  return fields;
}

void StripCarriageReturn(std::string *line) {
  if (!line->empty() && line->back() == '\r') line->pop_back();
}

std::ifstream OpenForRead(const std::string &path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw ValidationError("cannot open '" + path + "' for reading");
  return is;
}

std::ofstream OpenForWrite(const std::string &path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary | std::ios::trunc
                                : std::ios::out | std::ios::trunc);
  if (!os) throw RuntimeError("cannot open '" + path + "' for writing");
  return os;
}

void CheckWritten(const std::ofstream &os, const std::string &path) {
  if (!os) throw RuntimeError("write failed for '" + path + "'");
}

void PutU32(std::ostream &os, std::uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), 4);
}

void PutF64(std::ostream &os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i)
    b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}

bool GetU32(std::istream &is, std::uint32_t *v) {
  std::array<unsigned char, 4> b;
  if (!is.read(reinterpret_cast<char *>(b.data()), 4)) return false;
  *v = 0;
  for (int i = 0; i < 4; ++i) *v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return true;
}

bool GetF64(std::istream &is, double *v) {
  std::array<unsigned char, 8> b;
  if (!is.read(reinterpret_cast<char *>(b.data()), 8)) return false;
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  std::memcpy(v, &bits, sizeof bits);
  return true;
}

double ParseDouble(const std::string &tok, const std::string &where) {
  double value = 0.0;
  const char *first = tok.data();
  const char *last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ValidationError(where + ": cannot parse '" + tok + "' as a number");
  return value;
}

std::string FormatDouble(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::optional<TrialLabel> ParseLabel(const std::string &tok,
                                     const std::string &where) {
  if (tok == "tgt" || tok == "target") return TrialLabel::kTarget;
  if (tok == "imp" || tok == "nontarget" || tok == "impostor")
    return TrialLabel::kImpostor;
  throw ValidationError(where + ": unknown trial label '" + tok +
                        "' (expected tgt or imp)");
}

}  // namespace

Dataset::Dataset(std::vector<SegmentRecord> records)
    : records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const SegmentRecord &r = records_[i];
    const std::string row = "row " + std::to_string(i + 1);
    if (r.segment_id.empty())
      throw ValidationError(row + ": empty segment_id");
    if (i == 0) {
      dim_ = static_cast<int>(r.embedding.size());
      if (dim_ == 0)
        throw ValidationError(row + ": zero-dimensional embedding");
    } else if (r.embedding.size() != dim_) {
      throw ValidationError(row + " ('" + r.segment_id +
                            "'): dimension mismatch, expected " +
                            std::to_string(dim_) + " values, got " +
                            std::to_string(r.embedding.size()));
    }
    if (!r.embedding.allFinite())
      throw ValidationError(row + " ('" + r.segment_id +
                            "'): non-finite embedding value");
    if (!index_.emplace(r.segment_id, i).second)
      throw ValidationError(row + ": duplicate segment_id '" + r.segment_id +
                            "'");
  }
}

std::optional<std::size_t> Dataset::Find(const std::string &segment_id) const {
  auto it = index_.find(segment_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dataset::IndexOf(const std::string &segment_id) const {
  auto found = Find(segment_id);
  if (!found)
    throw ValidationError("unknown segment_id '" + segment_id + "'");
  return *found;
}

std::vector<std::string> Dataset::Speakers() const {
  std::set<std::string> s;
  for (const auto &r : records_) s.insert(r.speaker_id);
  return {s.begin(), s.end()};
}

std::vector<std::string> Dataset::Domains() const {
  std::set<std::string> s;
  for (const auto &r : records_) s.insert(r.domain);
  return {s.begin(), s.end()};
}

Matrix Dataset::EmbeddingMatrix() const {
  Matrix m(records_.size(), dim_);
  for (std::size_t i = 0; i < records_.size(); ++i)
    m.row(i) = records_[i].embedding.transpose();
  return m;
}

TrialSet BuildTrials(const Dataset &dataset, TrialPolicy policy) {
  if (dataset.Empty()) throw ValidationError("BuildTrials: empty dataset");
  TrialSet trials;
  const auto &recs = dataset.Records();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    for (std::size_t j = i + 1; j < recs.size(); ++j) {
      if (policy == TrialPolicy::kExhaustiveExcludingSameSession &&
          recs[i].session_id == recs[j].session_id)
        continue;
      trials.push_back({recs[i].segment_id, recs[j].segment_id,
                        recs[i].speaker_id == recs[j].speaker_id
                            ? TrialLabel::kTarget
                            : TrialLabel::kImpostor});
    }
  }
  return trials;
}

Dataset FilterMultiSessionSpeakers(const Dataset &dataset) {
  std::unordered_map<std::string, std::set<std::string>> sessions;
  for (const auto &r : dataset.Records())
    sessions[r.speaker_id].insert(r.session_id);
  std::vector<SegmentRecord> kept;
  for (const auto &r : dataset.Records())
    if (sessions[r.speaker_id].size() >= 2) kept.push_back(r);
  return Dataset(std::move(kept));
}

Dataset SubsetBySpeakers(const Dataset &dataset,
                         const std::vector<std::string> &speakers) {
  std::set<std::string> wanted(speakers.begin(), speakers.end());
  std::vector<SegmentRecord> kept;
  for (const auto &r : dataset.Records())
    if (wanted.count(r.speaker_id)) kept.push_back(r);
  return Dataset(std::move(kept));
}

Dataset SubsetByDomain(const Dataset &dataset, const std::string &domain) {
  std::vector<SegmentRecord> kept;
  for (const auto &r : dataset.Records())
    if (r.domain == domain) kept.push_back(r);
  return Dataset(std::move(kept));
}

std::vector<std::pair<std::string, Vector>> ReadEmbeddings(
    const std::string &path) {
  std::ifstream is = OpenForRead(path, true);
  std::vector<std::pair<std::string, Vector>> rows;

  char magic[sizeof kArchiveMagic] = {};
  is.read(magic, sizeof magic);
  bool binary = is.gcount() == sizeof magic &&
                std::memcmp(magic, kArchiveMagic, sizeof magic) == 0;
  if (binary) {
    char version = 0;
    std::uint32_t dim = 0;
    if (!is.get(version) || !GetU32(is, &dim))
      throw ValidationError(path + ": truncated archive header");
    if (static_cast<std::uint8_t>(version) != kArchiveVersion)
      throw ValidationError(path + ": unsupported archive version " +
                            std::to_string(static_cast<int>(version)));
    if (dim == 0) throw ValidationError(path + ": archive declares D = 0");
    std::uint32_t len = 0;
    while (GetU32(is, &len)) {
      const std::string row = path + ": row " + std::to_string(rows.size() + 1);
      std::string id(len, '\0');
      if (!is.read(id.data(), len))
        throw ValidationError(row + ": truncated segment_id");
      Vector v(dim);
      for (std::uint32_t d = 0; d < dim; ++d)
        if (!GetF64(is, &v[d]))
          throw ValidationError(row + " ('" + id + "'): truncated embedding");
      rows.emplace_back(std::move(id), std::move(v));
    }
    if (is.gcount() != 0)
      throw ValidationError(path + ": trailing bytes after row " +
                            std::to_string(rows.size()));
    return rows;
  }

  is.clear();
  is.seekg(0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    StripCarriageReturn(&line);
    auto fields = SplitWhitespace(line);
    if (fields.empty()) continue;
    const std::string where = path + ": line " + std::to_string(line_no);
    Vector v(static_cast<Eigen::Index>(fields.size() - 1));
    for (std::size_t d = 1; d < fields.size(); ++d)
      v[d - 1] = ParseDouble(fields[d], where);
    rows.emplace_back(fields[0], std::move(v));
  }
  return rows;
}

void WriteEmbeddingArchive(const Dataset &dataset, const std::string &path) {
  std::ofstream os = OpenForWrite(path, true);
  os.write(kArchiveMagic, sizeof kArchiveMagic);
  os.put(static_cast<char>(kArchiveVersion));
  PutU32(os, static_cast<std::uint32_t>(dataset.Dim()));
  for (const auto &r : dataset.Records()) {
    PutU32(os, static_cast<std::uint32_t>(r.segment_id.size()));
    os.write(r.segment_id.data(), r.segment_id.size());
    for (Eigen::Index d = 0; d < r.embedding.size(); ++d)
      PutF64(os, r.embedding[d]);
  }
  CheckWritten(os, path);
}

void WriteMetadataTable(const Dataset &dataset, const std::string &path) {
  std::ofstream os = OpenForWrite(path, false);
  os << "segment_id\tspeaker_id\tsession_id\tdomain\tcondition_label\n";
  for (const auto &r : dataset.Records())
    os << r.segment_id << '\t' << r.speaker_id << '\t' << r.session_id << '\t'
       << r.domain << '\t' << (r.condition_label.empty() ? "-" : r.condition_label)
       << '\n';
  CheckWritten(os, path);
}

Dataset LoadDataset(const std::string &embedding_path,
                    const std::string &metadata_path) {
  auto rows = ReadEmbeddings(embedding_path);

  struct Meta {
    std::string speaker, session, domain, condition;
  };
  std::unordered_map<std::string, Meta> meta;
  std::ifstream is = OpenForRead(metadata_path, false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    StripCarriageReturn(&line);
    if (line.empty()) continue;
    auto f = SplitTabs(line);
    const std::string where = metadata_path + ": line " + std::to_string(line_no);
    if (line_no == 1) {
      if (f.size() != 5 || f[0] != "segment_id" || f[1] != "speaker_id" ||
          f[2] != "session_id" || f[3] != "domain" || f[4] != "condition_label")
        throw ValidationError(
            where + ": expected header 'segment_id speaker_id session_id "
                    "domain condition_label' (tab-separated)");
      continue;
    }
    if (f.size() == 4) f.emplace_back();
    if (f.size() != 5)
      throw ValidationError(where + ": expected 5 tab-separated fields, got " +
                            std::to_string(f.size()));
    if (f[4] == "-") f[4].clear();
    if (!meta.emplace(f[0], Meta{f[1], f[2], f[3], f[4]}).second)
      throw ValidationError(where + ": duplicate segment_id '" + f[0] + "'");
  }

  std::vector<SegmentRecord> records;
  records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto &[id, emb] = rows[i];
    auto it = meta.find(id);
    if (it == meta.end())
      throw ValidationError(embedding_path + ": row " + std::to_string(i + 1) +
                            ": no metadata row for segment '" + id + "'");
    records.push_back({id, it->second.speaker, it->second.session,
                       it->second.domain, it->second.condition,
                       std::move(emb)});
  }
  try {
    return Dataset(std::move(records));
  } catch (const ValidationError &e) {
    throw ValidationError(embedding_path + ": " + e.what());
  }
}

void SaveDataset(const Dataset &dataset, const std::string &embedding_path,
                 const std::string &metadata_path) {
  WriteEmbeddingArchive(dataset, embedding_path);
  WriteMetadataTable(dataset, metadata_path);
}

const char *TrialLabelName(TrialLabel label) {
  return label == TrialLabel::kTarget ? "tgt" : "imp";
}

ClassScores SplitByLabel(const TrialSet &trials,
                         const std::vector<double> &values) {
  if (values.size() != trials.size())
    throw ValidationError("SplitByLabel: one value per trial required");
  ClassScores out;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (!trials[i].label)
      throw ValidationError("trial " + std::to_string(i + 1) + " (" +
                            trials[i].enroll_id + ", " + trials[i].test_id +
                            ") has no label");
    (*trials[i].label == TrialLabel::kTarget ? out.target : out.impostor)
        .push_back(values[i]);
  }
  return out;
}

TrialSet ReadTrials(const std::string &path) {
  std::ifstream is = OpenForRead(path, false);
  TrialSet trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    StripCarriageReturn(&line);
    if (line.empty()) continue;
    auto f = SplitTabs(line);
    if (line_no == 1 && f[0] == "enroll_id") continue;
    const std::string where = path + ": line " + std::to_string(line_no);
    if (f.size() < 2 || f.size() > 3)
      throw ValidationError(where + ": expected 2 or 3 tab-separated fields");
    Trial t{f[0], f[1], std::nullopt};
    if (t.enroll_id == t.test_id)
      throw ValidationError(where + ": enroll_id equals test_id");
    if (f.size() == 3) t.label = ParseLabel(f[2], where);
    trials.push_back(std::move(t));
  }
  return trials;
}

void WriteTrials(const TrialSet &trials, const std::string &path) {
  std::ofstream os = OpenForWrite(path, false);
  for (const auto &t : trials) {
    os << t.enroll_id << '\t' << t.test_id;
    if (t.label) os << '\t' << TrialLabelName(*t.label);
    os << '\n';
  }
  CheckWritten(os, path);
}

ScoreSet ReadScores(const std::string &path) {
  std::ifstream is = OpenForRead(path, false);
  ScoreSet scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    StripCarriageReturn(&line);
    if (line.empty()) continue;
    auto f = SplitTabs(line);
    if (line_no == 1 && f[0] == "enroll_id") continue;
    const std::string where = path + ": line " + std::to_string(line_no);
    if (f.size() < 4 || f.size() > 5)
      throw ValidationError(where + ": expected 4 or 5 tab-separated fields");
    Trial t{f[0], f[1], std::nullopt};
    if (f.size() == 5) t.label = ParseLabel(f[4], where);
    double raw = ParseDouble(f[2], where), llr = ParseDouble(f[3], where);
    if (!std::isfinite(raw) || !std::isfinite(llr))
      throw ValidationError(where + ": non-finite score");
    scores.trials.push_back(std::move(t));
    scores.raw_score.push_back(raw);
    scores.llr.push_back(llr);
  }
  return scores;
}

void WriteScores(const ScoreSet &scores, const std::string &path) {
  if (scores.llr.size() != scores.trials.size() ||
      scores.raw_score.size() != scores.trials.size())
    throw ValidationError("WriteScores: score columns do not match trials");
  std::ofstream os = OpenForWrite(path, false);
  for (std::size_t i = 0; i < scores.trials.size(); ++i) {
    const Trial &t = scores.trials[i];
    os << t.enroll_id << '\t' << t.test_id << '\t'
       << FormatDouble(scores.raw_score[i]) << '\t'
       << FormatDouble(scores.llr[i]);
    if (t.label) os << '\t' << TrialLabelName(*t.label);
    os << '\n';
  }
  CheckWritten(os, path);
}

}  // namespace dplda
