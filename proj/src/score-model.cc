// src/score-model.cc

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

#include "scorematch/score-model.h"

#include <cmath>
#include <fstream>
#include <set>

#include "scorematch/text-io.h"

namespace scorematch {

namespace {

bool IsToken(std::string_view s) {
  return !s.empty() && s.find_first_of(" \t\r\n") == std::string_view::npos;
}

std::ifstream OpenOrThrow(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  return is;
}

}  // namespace

PhonemeInventory::PhonemeInventory(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.empty())
    throw ValidationError("phoneme inventory must not be empty");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!IsToken(labels_[i]))
      throw ValidationError("invalid phoneme label '" + labels_[i] + "'");
    if (!index_.emplace(labels_[i], i).second)
      throw ValidationError("duplicate phoneme label '" + labels_[i] + "'");
  }
}

PhonemeInventory PhonemeInventory::Read(std::istream &is,
                                        std::string_view source) {
  std::vector<std::string> labels;
  for (const TextLine &line : ReadContentLines(is)) {
    auto fields = SplitOnWhitespace(line.text);
    if (fields.size() != 1)
      throw ParseError(Where(source, line.number) +
                       "expected exactly one phoneme label");
    labels.push_back(fields[0]);
  }
  try {
    return PhonemeInventory(std::move(labels));
  } catch (const ValidationError &e) {
    throw ValidationError(std::string(source) + ": " + e.what());
  }
}

PhonemeInventory PhonemeInventory::Load(const std::filesystem::path &path) {
  auto is = OpenOrThrow(path);
  return Read(is, path.string());
}

void PhonemeInventory::Write(std::ostream &os) const {
  for (const auto &label : labels_) os << label << '\n';
}

bool PhonemeInventory::Contains(std::string_view label) const {
  return index_.find(std::string(label)) != index_.end();
}

std::size_t PhonemeInventory::IndexOf(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end())
    throw ValidationError("phoneme '" + std::string(label) +
                          "' is not in the inventory");
  return it->second;
}

std::string_view RoleTypeName(RoleType role) {
  return role == RoleType::kDan ? "dan" : "laosheng";
}

RoleType ParseRoleType(std::string_view name) {
  if (name == "dan") return RoleType::kDan;
  if (name == "laosheng") return RoleType::kLaosheng;
  throw ValidationError("unknown role_type '" + std::string(name) + "'");
}

std::vector<std::string> ScorePhrase::Pinyin() const {
  std::vector<std::string> out;
  out.reserve(syllables.size());
  for (const auto &s : syllables) out.push_back(s.pinyin);
  return out;
}

void ValidateScorePhrase(const ScorePhrase &phrase) {
  if (!IsToken(phrase.phrase_id))
    throw ValidationError("invalid phrase_id '" + phrase.phrase_id + "'");
  if (phrase.syllables.empty())
    throw ValidationError("phrase " + phrase.phrase_id + " has no syllables");
  for (const auto &s : phrase.syllables) {
    if (!IsToken(s.pinyin))
      throw ValidationError("phrase " + phrase.phrase_id +
                            ": invalid pinyin '" + s.pinyin + "'");
    if (!(s.duration_units > 0.0) || !std::isfinite(s.duration_units))
      throw ValidationError("phrase " + phrase.phrase_id +
                            ": duration of '" + s.pinyin +
                            "' must be positive and finite");
  }
}

std::vector<ScorePhrase> ReadScoreDataset(std::istream &is,
                                          std::string_view source) {
  std::vector<ScorePhrase> phrases;
  std::set<std::string, std::less<>> seen;
  for (const TextLine &line : ReadContentLines(is)) {
    const std::string where = Where(source, line.number);
    auto fields = SplitOnChar(line.text, '\t');
    if (fields.size() != 3)
      throw ParseError(where + "expected 3 tab-separated fields, got " +
                       std::to_string(fields.size()));
    ScorePhrase phrase;
    phrase.phrase_id = fields[0];
    try {
      phrase.role = ParseRoleType(fields[1]);
    } catch (const ValidationError &e) {
      throw ValidationError(where + e.what());
    }
    auto tokens = SplitOnWhitespace(fields[2]);
    if (tokens.empty() || tokens.size() % 2 != 0)
      throw ParseError(where + "syllables must be (pinyin, units) pairs");
    for (std::size_t i = 0; i < tokens.size(); i += 2) {
      double units;
      try {
        units = ParseDouble(tokens[i + 1], "duration_units", true);
      } catch (const ParseError &e) {
        throw ParseError(where + e.what());
      }
      // Rests are dropped; their neighbours simply abut.
      if (tokens[i] == kRestToken) {
        if (!(units > 0.0) || !std::isfinite(units))
          throw ValidationError(where + "rest duration must be positive");
        continue;
      }
      phrase.syllables.push_back({tokens[i], units});
    }
    try {
      ValidateScorePhrase(phrase);
    } catch (const ValidationError &e) {
      throw ValidationError(where + e.what());
    }
    if (!seen.insert(phrase.phrase_id).second)
      throw ValidationError(where + "duplicate phrase_id '" +
                            phrase.phrase_id + "'");
    phrases.push_back(std::move(phrase));
  }
  return phrases;
}

std::vector<ScorePhrase> LoadScoreDataset(const std::filesystem::path &path) {
  auto is = OpenOrThrow(path);
  return ReadScoreDataset(is, path.string());
}

void WriteScoreDataset(std::ostream &os,
                       std::span<const ScorePhrase> phrases) {
  for (const auto &phrase : phrases) {
    os << phrase.phrase_id << '\t' << RoleTypeName(phrase.role) << '\t';
    for (std::size_t i = 0; i < phrase.syllables.size(); ++i) {
      if (i > 0) os << ' ';
      os << phrase.syllables[i].pinyin << ' '
         << FormatDoubleShortest(phrase.syllables[i].duration_units);
    }
    os << '\n';
  }
}

PronunciationDictionary::PronunciationDictionary(
    std::map<std::string, std::vector<std::string>> entries) {
  for (auto &[pinyin, phones] : entries) {
    if (!IsToken(pinyin))
      throw ValidationError("invalid dictionary key '" + pinyin + "'");
    if (phones.empty())
      throw ValidationError("dictionary entry '" + pinyin + "' is empty");
    entries_.emplace(pinyin, std::move(phones));
  }
}

PronunciationDictionary PronunciationDictionary::Read(
    std::istream &is, std::string_view source) {
  std::map<std::string, std::vector<std::string>> entries;
  for (const TextLine &line : ReadContentLines(is)) {
    const std::string where = Where(source, line.number);
    auto tab = line.text.find('\t');
    if (tab == std::string::npos)
      throw ParseError(where + "expected pinyin<TAB>phonemes");
    std::string pinyin = line.text.substr(0, tab);
    auto phones = SplitOnWhitespace(std::string_view(line.text).substr(tab + 1));
    if (!IsToken(pinyin))
      throw ParseError(where + "invalid pinyin '" + pinyin + "'");
    if (phones.empty())
      throw ValidationError(where + "entry '" + pinyin + "' is empty");
    if (!entries.emplace(pinyin, std::move(phones)).second)
      throw ValidationError(where + "duplicate entry '" + pinyin + "'");
  }
  return PronunciationDictionary(std::move(entries));
}

PronunciationDictionary PronunciationDictionary::Load(
    const std::filesystem::path &path) {
  auto is = OpenOrThrow(path);
  return Read(is, path.string());
}

void PronunciationDictionary::Write(std::ostream &os) const {
  for (const auto &[pinyin, phones] : entries_) {
    os << pinyin << '\t';
    for (std::size_t i = 0; i < phones.size(); ++i)
      os << (i ? " " : "") << phones[i];
    os << '\n';
  }
}

void PronunciationDictionary::CheckAgainst(
    const PhonemeInventory &inventory) const {
  for (const auto &[pinyin, phones] : entries_)
    for (const auto &p : phones)
      if (!inventory.Contains(p))
        throw ValidationError("dictionary entry '" + pinyin +
                              "' uses phoneme '" + p +
                              "' missing from the inventory");
}

bool PronunciationDictionary::Contains(std::string_view pinyin) const {
  return entries_.find(pinyin) != entries_.end();
}

const std::vector<std::string> &PronunciationDictionary::Lookup(
    std::string_view pinyin) const {
  auto it = entries_.find(pinyin);
  if (it == entries_.end())
    throw ValidationError("out-of-vocabulary syllable '" +
                          std::string(pinyin) + "'");
  return it->second;
}

std::vector<std::string> Phonetize(std::span<const std::string> syllables,
                                   const PronunciationDictionary &dict) {
  std::vector<std::string> phones;
  for (const auto &syl : syllables) {
    const auto &expansion = dict.Lookup(syl);
    phones.insert(phones.end(), expansion.begin(), expansion.end());
  }
  return phones;
}

std::vector<AnnotationRecord> ReadAnnotations(std::istream &is,
                                              std::string_view source) {
  std::vector<AnnotationRecord> records;
  for (const TextLine &line : ReadContentLines(is)) {
    const std::string where = Where(source, line.number);
    auto fields = SplitOnChar(line.text, '\t');
    if (fields.size() != 2 || !IsToken(fields[0]))
      throw ParseError(where + "expected phoneme<TAB>duration_seconds");
    double dur;
    try {
      dur = ParseDouble(fields[1], "duration");
    } catch (const ParseError &e) {
      throw ParseError(where + e.what());
    }
    if (!(dur > 0.0) || !std::isfinite(dur))
      throw ValidationError(where + "duration must be positive and finite");
    records.push_back({fields[0], dur});
  }
  return records;
}

std::vector<AnnotationRecord> LoadAnnotations(
    const std::filesystem::path &path) {
  auto is = OpenOrThrow(path);
  return ReadAnnotations(is, path.string());
}

void WriteAnnotations(std::ostream &os,
                      std::span<const AnnotationRecord> records) {
  for (const auto &r : records)
    os << r.phoneme << '\t' << FormatDoubleShortest(r.duration_s) << '\n';
}

}  // namespace scorematch
