#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace topictrace {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input rather than a bug; the CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

#define TOPICTRACE_DEFINE_ERROR(Name)        \
  class Name : public ValidationError {      \
   public:                                   \
    using ValidationError::ValidationError;  \
  };

TOPICTRACE_DEFINE_ERROR(DuplicateId)
TOPICTRACE_DEFINE_ERROR(MissingFile)
TOPICTRACE_DEFINE_ERROR(BadDate)
TOPICTRACE_DEFINE_ERROR(EmptyVocabulary)
TOPICTRACE_DEFINE_ERROR(EmptyDocument)
TOPICTRACE_DEFINE_ERROR(EmptyCorpus)
TOPICTRACE_DEFINE_ERROR(BadTopicId)
TOPICTRACE_DEFINE_ERROR(VocabMismatch)
TOPICTRACE_DEFINE_ERROR(TooFewDistinctPoints)
TOPICTRACE_DEFINE_ERROR(SingleCluster)
TOPICTRACE_DEFINE_ERROR(LengthMismatch)
TOPICTRACE_DEFINE_ERROR(NoReadingsYet)
TOPICTRACE_DEFINE_ERROR(TooFewDocuments)
TOPICTRACE_DEFINE_ERROR(InvalidArgument)
TOPICTRACE_DEFINE_ERROR(InvalidDistribution)
TOPICTRACE_DEFINE_ERROR(FormatError)

#undef TOPICTRACE_DEFINE_ERROR

}  // namespace topictrace
