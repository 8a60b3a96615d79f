#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <sstream>

#include "vsir/model_io.hpp"
#include "vsir/nvsm.hpp"

using namespace vsir;

namespace {

Vocabulary small_vocab() {
  std::vector<std::vector<std::string>> streams{{"apple", "banana", "apple", "cherry"}};
  return build_vocabulary(streams, 10);
}

SavedModel small_model() {
  Rng rng(17);
  SavedModel m;
  m.meta.vocabulary = small_vocab();
  m.meta.vocab_hash = m.meta.vocabulary.hash();
  m.meta.object_ids = {"d0", "d1", "d2"};
  m.meta.hyperparams = {{"n", 4}, {"lambda", 0.01}};
  m.params = nvsm::init_params(m.meta.vocabulary.size(), 3, 5, 2, rng);
  m.params["beta"](0, 1) = 0.125f;
  return m;
}

std::string serialize(const SavedModel& m) {
  std::ostringstream out(std::ios::binary);
  save_model(out, m.params, m.meta);
  return out.str();
}

SavedModel deserialize(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return load_model(in);
}

std::uint32_t header_length(const std::string& bytes) {
  std::uint32_t len = 0;
  for (int i = 3; i >= 0; --i) len = (len << 8) | static_cast<unsigned char>(bytes[8 + i]);
  return len;
}

}  // namespace

TEST(ModelIo, RoundTripIsBitExact) {
  const auto m = small_model();
  const auto bytes = serialize(m);
  EXPECT_EQ(bytes.substr(0, 8), "VSIRMDL1");
  const auto back = deserialize(bytes);
  EXPECT_EQ(back.params.kind, m.params.kind);
  EXPECT_EQ(back.params.names, m.params.names);
  ASSERT_EQ(back.params.tensors.size(), m.params.tensors.size());
  for (std::size_t i = 0; i < m.params.tensors.size(); ++i) {
    const auto a = m.params.tensors[i].data();
    const auto b = back.params.tensors[i].data();
    ASSERT_EQ(a.size(), b.size());
    EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)), 0);
  }
  EXPECT_EQ(back.meta.vocabulary, m.meta.vocabulary);
  EXPECT_EQ(back.meta.vocab_hash, m.meta.vocab_hash);
  EXPECT_EQ(back.meta.object_ids, m.meta.object_ids);
  EXPECT_EQ(back.meta.hyperparams, m.meta.hyperparams);
  EXPECT_EQ(serialize(back), bytes);
}

TEST(ModelIo, FileRoundTrip) {
  const auto m = small_model();
  const auto path = std::filesystem::temp_directory_path() / "vsir_model_io_test.bin";
  save_model(path, m.params, m.meta);
  const auto back = load_model(path);
  EXPECT_EQ(back.params.tensors, m.params.tensors);
  std::filesystem::remove(path);
  EXPECT_THROW(load_model(path), Error);
}

TEST(ModelIo, CorruptMagic) {
  auto bytes = serialize(small_model());
  bytes[3] = 'X';
  EXPECT_THROW(deserialize(bytes), MagicMismatchError);
  EXPECT_THROW(deserialize("VSIR"), TruncatedFileError);
}

TEST(ModelIo, MissingTensorDataIsTruncation) {
  const auto bytes = serialize(small_model());
  EXPECT_THROW(deserialize(bytes.substr(0, bytes.size() - 4)), TruncatedFileError);
  EXPECT_THROW(deserialize(bytes.substr(0, 14)), TruncatedFileError);
}

TEST(ModelIo, HeaderClaimingMoreDataThanPresent) {
  // A 2x2 tensor declared in the header with only 3 floats behind it.
  auto m = small_model();
  m.params["beta"] = Matrix(1, 2);
  auto bytes = serialize(m);
  EXPECT_THROW(deserialize(bytes.substr(0, bytes.size() - sizeof(float))), TruncatedFileError);
}

TEST(ModelIo, ExtraDataIsDimensionMismatch) {
  auto bytes = serialize(small_model());
  bytes.append(4, '\0');
  EXPECT_THROW(deserialize(bytes), DimensionMismatchError);
}

TEST(ModelIo, HeaderShapeDisagreesWithDims) {
  auto bytes = serialize(small_model());
  const auto len = header_length(bytes);
  auto header = bytes.substr(12, len);
  const auto pos = header.find("\"kd\":2");
  ASSERT_NE(pos, std::string::npos) << header;
  header.replace(pos, 6, "\"kd\":3");
  bytes.replace(12, len, header);
  EXPECT_THROW(deserialize(bytes), DimensionMismatchError);
}

TEST(ModelIo, VocabularyHashMismatchRejected) {
  auto m = small_model();
  m.meta.vocab_hash = "0000000000000000";
  EXPECT_THROW(deserialize(serialize(m)), ModelFormatError);
}

TEST(ModelIo, SaveRejectsInconsistentMetadata) {
  auto m = small_model();
  m.meta.object_ids.pop_back();
  std::ostringstream out;
  EXPECT_THROW(save_model(out, m.params, m.meta), DimensionMismatchError);
}
