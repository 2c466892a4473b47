#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advtext {

// Base for every error the library raises on contract violations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Dataset ingestion failure. `row()` is 1-based, 0 when not row-specific.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t row = 0)
      : Error(row == 0 ? what : what + " (row " + std::to_string(row) + ")"),
        row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// An oracle could not be reached or answered malformed data. Retryable.
class OracleUnavailable : public Error {
 public:
  OracleUnavailable(const std::string& what, std::size_t query_index = 0)
      : Error(what + " (query " + std::to_string(query_index) + ")"),
        query_index_(query_index) {}
  std::size_t query_index() const { return query_index_; }

 private:
  std::size_t query_index_;
};

class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

class StudyError : public Error {
 public:
  using Error::Error;
};

}  // namespace advtext
