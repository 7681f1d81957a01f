#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace synlm {

/// Broad failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
  kData,       // malformed or inconsistent inputs
  kNumerical,  // NaN/inf during training or scoring
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(ErrorKind::kData, what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EmptyTreeError : public Error {
 public:
  explicit EmptyTreeError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

/// Raised for ill-formed action sequences and illegal transitions.
class TransitionError : public Error {
 public:
  TransitionError(const std::string& what, std::size_t position)
      : Error(ErrorKind::kData, what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class InvalidReduceError : public Error {
 public:
  explicit InvalidReduceError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class GrammarError : public Error {
 public:
  explicit GrammarError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class BeamFailure : public Error {
 public:
  BeamFailure(const std::string& what, std::size_t word_index)
      : Error(ErrorKind::kData, what), word_index_(word_index) {}
  std::size_t word_index() const noexcept { return word_index_; }

 private:
  std::size_t word_index_;
};

class IncompleteDataError : public Error {
 public:
  explicit IncompleteDataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class DesignError : public Error {
 public:
  explicit DesignError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class StatisticError : public Error {
 public:
  explicit StatisticError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class ProvenanceError : public Error {
 public:
  explicit ProvenanceError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

}  // namespace synlm
