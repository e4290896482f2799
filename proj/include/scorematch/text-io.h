// include/scorematch/text-io.h

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

#ifndef SCOREMATCH_TEXT_IO_H_
#define SCOREMATCH_TEXT_IO_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scorematch {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. The message names the source and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// One non-blank, non-comment line of a text file, with its 1-based number.
struct TextLine {
  std::size_t number;
  std::string text;
};

/// Reads all lines that are neither blank nor start with '#'. Trailing
/// carriage returns are stripped.
std::vector<TextLine> ReadContentLines(std::istream &is);

/// Opens `path` and calls ReadContentLines; throws Error if unreadable.
std::vector<TextLine> ReadContentLines(const std::filesystem::path &path);

std::vector<std::string> SplitOnWhitespace(std::string_view line);
std::vector<std::string> SplitOnChar(std::string_view line, char sep);

/// Strict decimal parse. Accepts "inf", "-inf" and also "a/b" rationals when
/// `allow_ratio` is set. Throws ParseError mentioning `what` on failure.
double ParseDouble(std::string_view token, std::string_view what,
                   bool allow_ratio = false);
long long ParseInt(std::string_view token, std::string_view what);

/// 17 significant digits; parses back to the identical double.
std::string FormatDouble17(double value);

/// Shortest decimal string that parses back to the identical double.
std::string FormatDoubleShortest(double value);

/// "<source>:<line>: <msg>"
std::string Where(std::string_view source, std::size_t line);

}  // namespace scorematch

#endif  // SCOREMATCH_TEXT_IO_H_
