#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsir/corpus.hpp"
#include "vsir/error.hpp"
#include "vsir/params.hpp"

namespace vsir {

// Model file layout:
//   8 bytes   magic "VSIRMDL1"
//   4 bytes   little-endian uint32 header length
//   N bytes   UTF-8 JSON header
//   tensors   raw little-endian row-major float32, in header order
//
// The header records kind, dims, hyperparams, vocab_hash and the tensor list
// ({name, rows, cols}). It also embeds the vocabulary and object ids so a
// model file is sufficient to answer queries.

inline constexpr std::string_view kModelMagic = "VSIRMDL1";

class ModelFormatError : public FormatError {
 public:
  using FormatError::FormatError;
};

class MagicMismatchError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

class DimensionMismatchError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

class TruncatedFileError : public ModelFormatError {
 public:
  using ModelFormatError::ModelFormatError;
};

struct ModelMetadata {
  std::string vocab_hash;
  nlohmann::json hyperparams = nlohmann::json::object();
  Vocabulary vocabulary;
  std::vector<std::string> object_ids;  // documents, entities or candidates
};

struct SavedModel {
  ModelParams params;
  ModelMetadata meta;
};

void save_model(std::ostream& out, const ModelParams& params, const ModelMetadata& meta);
void save_model(const std::filesystem::path& path, const ModelParams& params,
                const ModelMetadata& meta);

SavedModel load_model(std::istream& in);
SavedModel load_model(const std::filesystem::path& path);

}  // namespace vsir
