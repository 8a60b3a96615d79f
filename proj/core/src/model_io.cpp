#include "vsir/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

namespace vsir {
namespace {

using nlohmann::json;

struct Dims {
  std::size_t vocab_size = 0;
  std::size_t num_objects = 0;
  std::size_t kw = 0;
  std::size_t kd = 0;
};

std::vector<std::pair<std::size_t, std::size_t>> expected_shapes(ModelKind kind, const Dims& d) {
  switch (kind) {
    case ModelKind::nvsm:
    case ModelKind::lse:
      return {{d.vocab_size, d.kw}, {d.num_objects, d.kd}, {d.kd, d.kw}, {1, d.kd}};
    case ModelKind::loglinear:
      return {{d.vocab_size, d.kw}, {d.num_objects, d.kw}, {1, d.num_objects}};
  }
  return {};
}

Dims dims_of(const ModelParams& params) {
  Dims d;
  const auto& word = params[tensor::kWordEmb];
  d.vocab_size = word.rows();
  d.kw = word.cols();
  switch (params.kind) {
    case ModelKind::nvsm:
      d.num_objects = params[tensor::kDocEmb].rows();
      d.kd = params[tensor::kDocEmb].cols();
      break;
    case ModelKind::lse:
      d.num_objects = params[tensor::kEntityEmb].rows();
      d.kd = params[tensor::kEntityEmb].cols();
      break;
    case ModelKind::loglinear:
      d.num_objects = params[tensor::kCandMat].rows();
      d.kd = d.kw;
      break;
  }
  return d;
}

void check_layout(const ModelParams& params, const Dims& dims) {
  const auto layout = tensor_layout(params.kind);
  if (params.names.size() != layout.size()) {
    throw DimensionMismatchError("tensor list does not match the model kind");
  }
  const auto shapes = expected_shapes(params.kind, dims);
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (params.names[i] != layout[i]) {
      throw DimensionMismatchError("expected tensor '" + std::string(layout[i]) + "' at position " +
                                   std::to_string(i) + ", found '" + params.names[i] + "'");
    }
    const auto& t = params.tensors[i];
    if (t.rows() != shapes[i].first || t.cols() != shapes[i].second) {
      throw DimensionMismatchError("tensor '" + params.names[i] + "' shape disagrees with dims");
    }
  }
}

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  v = to_le(v);
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

void write_tensor(std::ostream& out, const Matrix& t) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
  } else {
    for (float f : t.data()) write_u32(out, std::bit_cast<std::uint32_t>(f));
  }
}

void read_exact(std::istream& in, char* dst, std::size_t count, const std::string& what) {
  in.read(dst, static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count) {
    throw TruncatedFileError("model file truncated while reading " + what);
  }
}

}  // namespace

void save_model(std::ostream& out, const ModelParams& params, const ModelMetadata& meta) {
  const Dims dims = dims_of(params);
  check_layout(params, dims);
  if (meta.vocabulary.size() != dims.vocab_size) {
    throw DimensionMismatchError("vocabulary size disagrees with word embeddings");
  }
  if (meta.object_ids.size() != dims.num_objects) {
    throw DimensionMismatchError("object id count disagrees with object embeddings");
  }

  json header;
  header["kind"] = std::string(to_string(params.kind));
  header["dims"] = {{"vocab_size", dims.vocab_size},
                    {"num_objects", dims.num_objects},
                    {"kw", dims.kw},
                    {"kd", dims.kd}};
  header["hyperparams"] = meta.hyperparams;
  header["vocab_hash"] = meta.vocab_hash.empty() ? meta.vocabulary.hash() : meta.vocab_hash;
  json tensors = json::array();
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    tensors.push_back({{"name", params.names[i]},
                       {"rows", params.tensors[i].rows()},
                       {"cols", params.tensors[i].cols()}});
  }
  header["tensors"] = std::move(tensors);
  header["vocabulary"] = {{"terms", meta.vocabulary.terms()}, {"counts", meta.vocabulary.counts()}};
  header["object_ids"] = meta.object_ids;

  const std::string text = header.dump();
  out.write(kModelMagic.data(), static_cast<std::streamsize>(kModelMagic.size()));
  write_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : params.tensors) write_tensor(out, t);
  if (!out) throw Error("failed to write model");
}

void save_model(const std::filesystem::path& path, const ModelParams& params,
                const ModelMetadata& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  save_model(out, params, meta);
}

SavedModel load_model(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got < 8 && std::string_view(magic, got) == kModelMagic.substr(0, got)) {
    throw TruncatedFileError("model file truncated inside the magic");
  }
  if (std::string_view(magic, got) != kModelMagic) {
    throw MagicMismatchError("not a model file (magic mismatch)");
  }
  char len_buf[4];
  read_exact(in, len_buf, 4, "header length");
  std::uint32_t len;
  std::memcpy(&len, len_buf, 4);
  len = to_le(len);
  if (len > (1u << 28)) throw ModelFormatError("model header length is implausible");
  std::string text(len, '\0');
  read_exact(in, text.data(), len, "header");

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("model header is not valid JSON: ") + e.what());
  }

  SavedModel model;
  Dims dims;
  try {
    model.params.kind = parse_model_kind(header.at("kind").get<std::string>());
    const auto& jd = header.at("dims");
    dims.vocab_size = jd.at("vocab_size").get<std::size_t>();
    dims.num_objects = jd.at("num_objects").get<std::size_t>();
    dims.kw = jd.at("kw").get<std::size_t>();
    dims.kd = jd.at("kd").get<std::size_t>();
    model.meta.hyperparams = header.value("hyperparams", json::object());
    model.meta.vocab_hash = header.at("vocab_hash").get<std::string>();
    for (const auto& t : header.at("tensors")) {
      model.params.names.push_back(t.at("name").get<std::string>());
      model.params.tensors.emplace_back(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>());
    }
    const auto& jv = header.at("vocabulary");
    model.meta.vocabulary = Vocabulary(jv.at("terms").get<std::vector<std::string>>(),
                                       jv.at("counts").get<std::vector<std::uint64_t>>());
    model.meta.object_ids = header.at("object_ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("malformed model header: ") + e.what());
  }

  check_layout(model.params, dims);
  if (model.meta.vocabulary.size() != dims.vocab_size) {
    throw DimensionMismatchError("embedded vocabulary size disagrees with dims");
  }
  if (model.meta.object_ids.size() != dims.num_objects) {
    throw DimensionMismatchError("embedded object ids disagree with dims");
  }
  if (model.meta.vocabulary.hash() != model.meta.vocab_hash) {
    throw ModelFormatError("embedded vocabulary does not match vocab_hash");
  }

  for (std::size_t i = 0; i < model.params.tensors.size(); ++i) {
    auto data = model.params.tensors[i].data();
    read_exact(in, reinterpret_cast<char*>(data.data()), data.size() * sizeof(float),
               "tensor '" + model.params.names[i] + "'");
    if constexpr (std::endian::native == std::endian::big) {
      for (auto& f : data) f = std::bit_cast<float>(to_le(std::bit_cast<std::uint32_t>(f)));
    }
    for (float f : data) {
      if (!std::isfinite(f)) throw ModelFormatError("tensor '" + model.params.names[i] + "' has non-finite values");
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DimensionMismatchError("model file has data beyond the declared tensors");
  }
  return model;
}

SavedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model '" + path.string() + "'");
  return load_model(in);
}

}  // namespace vsir
