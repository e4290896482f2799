// include/scorematch/score-model.h

// Copyright 2026  The scorematch Authors

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

#ifndef SCOREMATCH_SCORE_MODEL_H_
#define SCOREMATCH_SCORE_MODEL_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace scorematch {

/// Ordered set of phoneme class labels (X-SAMPA strings by convention, but
/// treated as opaque tokens). Column p of a posteriorgram refers to label p.
class PhonemeInventory {
 public:
  PhonemeInventory() = default;
  /// Throws ValidationError on empty, duplicated or whitespace-bearing labels.
  explicit PhonemeInventory(std::vector<std::string> labels);

  /// One label per content line.
  static PhonemeInventory Load(const std::filesystem::path &path);
  static PhonemeInventory Read(std::istream &is, std::string_view source);
  void Write(std::ostream &os) const;

  std::size_t Size() const { return labels_.size(); }
  const std::vector<std::string> &Labels() const { return labels_; }
  const std::string &Label(std::size_t index) const { return labels_.at(index); }
  bool Contains(std::string_view label) const;
  /// Throws ValidationError if the label is not in the inventory.
  std::size_t IndexOf(std::string_view label) const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class RoleType { kDan, kLaosheng };

std::string_view RoleTypeName(RoleType role);
/// Accepts "dan" and "laosheng"; anything else is a ValidationError.
RoleType ParseRoleType(std::string_view name);

struct ScoreSyllable {
  std::string pinyin;
  /// Relative note-duration units (no tempo). Melismas are pre-summed.
  double duration_units = 0.0;

  bool operator==(const ScoreSyllable &) const = default;
};

struct ScorePhrase {
  std::string phrase_id;
  RoleType role = RoleType::kDan;
  std::vector<ScoreSyllable> syllables;

  bool operator==(const ScorePhrase &) const = default;
  std::vector<std::string> Pinyin() const;
};

/// Throws ValidationError if the phrase has no syllables, a non-positive or
/// non-finite duration, or whitespace inside an identifier.
void ValidateScorePhrase(const ScorePhrase &phrase);

// Score-phrase file: one phrase per content line,
//   phrase_id <TAB> role_type <TAB> pinyin units pinyin units ...
// where units is a positive decimal or a ratio "a/b". A pinyin of "_" marks
// a rest, which is discarded on reading.
inline constexpr std::string_view kRestToken = "_";
std::vector<ScorePhrase> ReadScoreDataset(std::istream &is,
                                          std::string_view source);
std::vector<ScorePhrase> LoadScoreDataset(const std::filesystem::path &path);
void WriteScoreDataset(std::ostream &os, std::span<const ScorePhrase> phrases);

/// pinyin syllable -> phoneme labels.
class PronunciationDictionary {
 public:
  PronunciationDictionary() = default;
  explicit PronunciationDictionary(
      std::map<std::string, std::vector<std::string>> entries);

  /// One entry per line: `pinyin<TAB>phoneme phoneme ...`.
  static PronunciationDictionary Read(std::istream &is,
                                      std::string_view source);
  static PronunciationDictionary Load(const std::filesystem::path &path);
  void Write(std::ostream &os) const;

  /// Throws ValidationError naming the first entry whose labels are not all
  /// in `inventory`.
  void CheckAgainst(const PhonemeInventory &inventory) const;

  bool Contains(std::string_view pinyin) const;
  /// Throws ValidationError naming the syllable if it is out of vocabulary.
  const std::vector<std::string> &Lookup(std::string_view pinyin) const;
  std::size_t Size() const { return entries_.size(); }
  const std::map<std::string, std::vector<std::string>, std::less<>> &
  Entries() const { return entries_; }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

/// Concatenates the dictionary expansions of `syllables`, in order.
std::vector<std::string> Phonetize(std::span<const std::string> syllables,
                                   const PronunciationDictionary &dict);

struct AnnotationRecord {
  std::string phoneme;
  double duration_s = 0.0;
};

// Annotation file: `phoneme<TAB>duration_seconds` per line.
std::vector<AnnotationRecord> ReadAnnotations(std::istream &is,
                                              std::string_view source);
std::vector<AnnotationRecord> LoadAnnotations(
    const std::filesystem::path &path);
void WriteAnnotations(std::ostream &os,
                      std::span<const AnnotationRecord> records);

}  // namespace scorematch

#endif  // SCOREMATCH_SCORE_MODEL_H_
