#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace vsir {

using TokenId = std::uint32_t;
using Rng = std::mt19937_64;
using StopwordSet = std::unordered_set<std::string>;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kNumToken = "<num>";

/// Lowercases, splits on whitespace and strips ASCII punctuation. Tokens made
/// only of digits become the numeric placeholder; stopwords are removed.
std::vector<std::string> tokenize(std::string_view text,
                                  const StopwordSet& stopwords = {});

/// Term <-> id map. Ids 0 and 1 are the padding and numeric placeholder
/// tokens; the remaining ids are ordered by descending collection frequency.
class Vocabulary {
 public:
  static constexpr TokenId kPadId = 0;
  static constexpr TokenId kNumId = 1;

  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint64_t> counts);

  std::size_t size() const noexcept { return terms_.size(); }
  TokenId pad_id() const noexcept { return kPadId; }
  TokenId num_id() const noexcept { return kNumId; }
  bool is_reserved(TokenId id) const noexcept { return id == kPadId || id == kNumId; }

  const std::string& term(TokenId id) const { return terms_.at(id); }
  std::uint64_t count(TokenId id) const { return counts_.at(id); }
  std::optional<TokenId> find(std::string_view term) const;

  std::span<const std::string> terms() const noexcept { return terms_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }

  /// 64-bit FNV-1a over the persisted text form, as 16 hex digits.
  std::string hash() const;

  /// Writes `<id>\t<term>\t<count>` lines.
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

  friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Keeps the `max_size` most frequent non-reserved terms; ties go to the
/// lexicographically smaller term.
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> token_streams,
                            std::size_t max_size, const StopwordSet& stopwords = {});

struct RawDocument {
  std::string id;
  std::string text;
};

/// Documents as token-id sequences, plus optional object (entity or candidate)
/// to document associations.
struct EncodedCorpus {
  std::vector<std::vector<TokenId>> docs;
  std::vector<std::string> doc_ids;
  TokenId pad_id = Vocabulary::kPadId;

  std::vector<std::string> object_ids;
  std::vector<std::vector<std::size_t>> object_docs;

  std::size_t num_docs() const noexcept { return docs.size(); }
  std::size_t num_objects() const noexcept { return object_ids.size(); }
  bool has_associations() const noexcept { return !object_ids.empty(); }

  /// Inverse of object_docs: for each document, the associated object indices.
  std::vector<std::vector<std::size_t>> doc_objects() const;
  std::size_t max_doc_length() const noexcept;

  /// Checks every invariant; throws FormatError on violation.
  void validate(std::size_t vocab_size) const;
};

/// Maps each document to in-vocabulary ids; OOV tokens are dropped and
/// documents that become empty are kept.
EncodedCorpus encode(std::span<const RawDocument> docs, const Vocabulary& vocab,
                     const StopwordSet& stopwords = {});

/// Associates `<object_id, doc_id>` pairs with the corpus. Object indices are
/// assigned in order of first appearance.
void attach_associations(EncodedCorpus& corpus,
                         std::span<const std::pair<std::string, std::string>> pairs);

// Text formats.
std::vector<RawDocument> read_raw_corpus(std::istream& in);
std::vector<std::pair<std::string, std::string>> read_associations(std::istream& in);
StopwordSet read_stopwords(std::istream& in);
void write_encoded_docs(std::ostream& out, const EncodedCorpus& corpus);
EncodedCorpus read_encoded_docs(std::istream& in);

/// ceil((1/m) * sum_d max(|d| - n + 1, 0))
std::size_t batches_per_epoch(const EncodedCorpus& corpus, std::size_t n, std::size_t m);

/// ceil((1/|X|) * sum_d max(|d| - n + 1, 0)): n-grams drawn per entity and epoch.
std::size_t ngrams_per_entity(const EncodedCorpus& corpus, std::size_t n);

/// m n-grams of length n, each paired with a target object index.
struct Batch {
  std::size_t n = 0;
  std::vector<TokenId> tokens;  // m * n, row-major
  std::vector<std::size_t> targets;

  std::size_t size() const noexcept { return targets.size(); }
  std::span<const TokenId> ngram(std::size_t i) const { return {tokens.data() + i * n, n}; }
};

enum class WindowStride { overlapping, non_overlapping };

/// Draws documents uniformly with replacement, then a window uniformly over
/// the valid start offsets. Documents shorter than n are right-padded.
class DocumentSampler {
 public:
  /// `doc_pool` restricts sampling to the listed documents; empty means all.
  explicit DocumentSampler(const EncodedCorpus& corpus,
                           WindowStride stride = WindowStride::overlapping,
                           std::span<const std::size_t> doc_pool = {});

  Batch sample(std::size_t n, std::size_t m, Rng& rng) const;

 private:
  const EncodedCorpus* corpus_;
  WindowStride stride_;
  std::vector<std::size_t> usable_;
};

/// Draws entities uniformly, then an n-gram from a uniformly chosen
/// non-empty associated document. Entities without usable documents are
/// skipped with a warning.
class EntitySampler {
 public:
  explicit EntitySampler(const EncodedCorpus& corpus,
                         WindowStride stride = WindowStride::overlapping);

  Batch sample(std::size_t n, std::size_t m, Rng& rng) const;
  std::size_t usable_entities() const noexcept { return entities_.size(); }

 private:
  const EncodedCorpus* corpus_;
  WindowStride stride_;
  std::vector<std::size_t> entities_;
  std::vector<std::vector<std::size_t>> docs_;  // non-empty docs per usable entity
};

Batch sample_batch(const EncodedCorpus& corpus, std::size_t n, std::size_t m, Rng& rng,
                   WindowStride stride = WindowStride::overlapping);
Batch sample_entity_batch(const EncodedCorpus& corpus, std::size_t n, std::size_t m,
                          Rng& rng, WindowStride stride = WindowStride::overlapping);

/// Copies an n-token window starting at `start`, right-padding with pad_id.
void extract_window(std::span<const TokenId> doc, std::size_t start, std::size_t n,
                    TokenId pad_id, std::span<TokenId> out);

/// Maps query tokens to ids, dropping OOV terms. Throws EmptyQueryError when
/// the text has no tokens and OutOfVocabularyQueryError when none are known.
std::vector<TokenId> encode_query(std::string_view text, const Vocabulary& vocab,
                                  const StopwordSet& stopwords = {});

}  // namespace vsir
