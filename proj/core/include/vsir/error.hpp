#pragma once

#include <stdexcept>
#include <string>

namespace vsir {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid hyperparameters or other configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input files (corpus, vocabulary, run, qrels, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A numerical computation produced NaN or infinity.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// L2 normalization or cosine similarity on a zero vector.
class ZeroNormError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A query that tokenizes to nothing at all.
class EmptyQueryError : public Error {
 public:
  using Error::Error;
};

/// A query with tokens, none of which are in the vocabulary.
class OutOfVocabularyQueryError : public Error {
 public:
  using Error::Error;
};

}  // namespace vsir
