// include/dplda/data_model.h

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

#ifndef DPLDA_DATA_MODEL_H_
#define DPLDA_DATA_MODEL_H_

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace dplda {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SegmentRecord {
  std::string segment_id;
  std::string speaker_id;
  std::string session_id;
  std::string domain;
  // Empty when unknown; allowed on evaluation data only.
  std::string condition_label;
  Vector embedding;
};

// An immutable, validated collection of segments sharing one embedding
// dimension. Construction throws ValidationError on duplicate ids,
// inconsistent dimensions or non-finite values, naming the (1-based) row.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<SegmentRecord> records);

  int Dim() const { return dim_; }
  std::size_t Size() const { return records_.size(); }
  bool Empty() const { return records_.empty(); }
  const std::vector<SegmentRecord> &Records() const { return records_; }
  const SegmentRecord &operator[](std::size_t i) const { return records_[i]; }

  std::optional<std::size_t> Find(const std::string &segment_id) const;
  // Throws ValidationError for an unknown id.
  std::size_t IndexOf(const std::string &segment_id) const;

  // Sorted, unique.
  std::vector<std::string> Speakers() const;
  std::vector<std::string> Domains() const;

  // Records as a (Size() x Dim()) row matrix.
  Matrix EmbeddingMatrix() const;

 private:
  std::vector<SegmentRecord> records_;
  int dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class TrialLabel { kTarget, kImpostor };

struct Trial {
  std::string enroll_id;
  std::string test_id;
  std::optional<TrialLabel> label;
};

using TrialSet = std::vector<Trial>;

struct ScoreSet {
  TrialSet trials;
  std::vector<double> raw_score;
  // Either empty (uncalibrated) or one entry per trial.
  std::vector<double> llr;
};

enum class TrialPolicy { kExhaustive, kExhaustiveExcludingSameSession };

// All unordered segment pairs (i < j in dataset order), labelled by speaker
// identity.
TrialSet BuildTrials(const Dataset &dataset, TrialPolicy policy);

// Keeps only speakers that have recordings from at least two sessions.
Dataset FilterMultiSessionSpeakers(const Dataset &dataset);

// Records whose speaker is in `speakers`, in original order.
Dataset SubsetBySpeakers(const Dataset &dataset,
                         const std::vector<std::string> &speakers);

Dataset SubsetByDomain(const Dataset &dataset, const std::string &domain);

// ---- file formats ----

// Reads the binary archive, or the text form "segment_id f1 f2 ... fD" per
// line when the file does not start with the archive magic.
std::vector<std::pair<std::string, Vector>> ReadEmbeddings(
    const std::string &path);

void WriteEmbeddingArchive(const Dataset &dataset, const std::string &path);

// Tab-separated, header "segment_id speaker_id session_id domain
// condition_label". An empty or "-" condition label means unknown.
void WriteMetadataTable(const Dataset &dataset, const std::string &path);

Dataset LoadDataset(const std::string &embedding_path,
                    const std::string &metadata_path);
void SaveDataset(const Dataset &dataset, const std::string &embedding_path,
                 const std::string &metadata_path);

// "enroll_id<TAB>test_id[<TAB>tgt|imp]" per line.
TrialSet ReadTrials(const std::string &path);
void WriteTrials(const TrialSet &trials, const std::string &path);

// "enroll_id<TAB>test_id<TAB>raw_score<TAB>llr[<TAB>tgt|imp]" per line.
ScoreSet ReadScores(const std::string &path);
void WriteScores(const ScoreSet &scores, const std::string &path);

const char *TrialLabelName(TrialLabel label);

// Scores separated by class, the input shape of calibration and metrics.
struct ClassScores {
  std::vector<double> target;
  std::vector<double> impostor;
};

// Splits `values` (one per trial) by trial label; throws ValidationError on
// an unlabelled trial or a size mismatch.
ClassScores SplitByLabel(const TrialSet &trials,
                         const std::vector<double> &values);

}  // namespace dplda

#endif  // DPLDA_DATA_MODEL_H_
