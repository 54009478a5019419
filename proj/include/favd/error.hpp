#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace favd {

// Base of every error raised by the library. Violations found by the corpus
// validator are data (ValidationReport), never exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t offset = 0)
      : Error(what), line_(line), offset_(offset) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

class SchemaError : public Error {
 public:
  SchemaError(const std::string& what, std::string field)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DuplicateIdError : public Error {
 public:
  DuplicateIdError(const std::string& id, std::size_t first, std::size_t second)
      : Error("duplicate video_id '" + id + "' at indices " + std::to_string(first) +
              " and " + std::to_string(second)),
        id_(id),
        first_(first),
        second_(second) {}
  const std::string& id() const noexcept { return id_; }
  std::size_t first_index() const noexcept { return first_; }
  std::size_t second_index() const noexcept { return second_; }

 private:
  std::string id_;
  std::size_t first_;
  std::size_t second_;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class UndefinedReferenceError : public Error {
 public:
  using Error::Error;
};

class ExtractionError : public Error {
 public:
  ExtractionError(const std::string& text_id, const std::string& cause)
      : Error("entity extraction failed for '" + text_id + "': " + cause), text_id_(text_id) {}
  const std::string& text_id() const noexcept { return text_id_; }

 private:
  std::string text_id_;
};

class DegenerateEmbeddingError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  ShapeError(const std::string& what, std::string modality)
      : Error(what), modality_(std::move(modality)) {}
  const std::string& modality() const noexcept { return modality_; }

 private:
  std::string modality_;
};

class NumericError : public Error {
 public:
  NumericError(const std::string& what, int layer) : Error(what), layer_(layer) {}
  // -1 when the fault is outside the transformer stack (embeddings, head).
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

// Predictions whose ids have no reference record.
class IdMismatchError : public Error {
 public:
  explicit IdMismatchError(std::vector<std::string> ids)
      : Error(message(ids)), ids_(std::move(ids)) {}
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  static std::string message(const std::vector<std::string>& ids) {
    std::string m = "predictions without a reference:";
    for (const auto& id : ids) m += " " + id;
    return m;
  }
  std::vector<std::string> ids_;
};

}  // namespace favd
