#include "vsir/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "vsir/error.hpp"
#include "vsir/log.hpp"

namespace vsir {
namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <typename Int>
Int parse_int(std::string_view s, const char* what) {
  Int value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(std::string("cannot parse ") + what + ": '" + std::string(s) + "'");
  }
  return value;
}

std::size_t window_starts(std::size_t len, std::size_t n, WindowStride stride) {
  if (len <= n) return 1;
  if (stride == WindowStride::overlapping) return len - n + 1;
  return (len - n) / n + 1;
}

void sample_ngram(const std::vector<TokenId>& doc, std::size_t n, WindowStride stride,
                  TokenId pad_id, Rng& rng, std::span<TokenId> out) {
  const std::size_t starts = window_starts(doc.size(), n, stride);
  std::size_t start = 0;
  if (starts > 1) {
    start = std::uniform_int_distribution<std::size_t>(0, starts - 1)(rng);
    if (stride == WindowStride::non_overlapping) start *= n;
  }
  extract_window(doc, start, n, pad_id, out);
}

void check_batch_shape(std::size_t n, std::size_t m) {
  if (n < 1) throw std::invalid_argument("n-gram window must be >= 1");
  if (m < 2) throw std::invalid_argument("batch size must be >= 2");
}

std::size_t clamped_window_total(const EncodedCorpus& corpus, std::size_t n) {
  std::size_t total = 0;
  for (const auto& d : corpus.docs) {
    if (d.size() + 1 > n) total += d.size() + 1 - n;
  }
  return total;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const StopwordSet& stopwords) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_ascii_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;

    std::string_view raw = text.substr(i, j - i);
    i = j;

    std::string token;
    if (raw == kNumToken) {
      token = raw;
    } else {
      token.reserve(raw.size());
      for (unsigned char c : raw) {
        if (c < 0x80 && std::ispunct(c)) continue;
        token.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
      }
      if (token.empty()) continue;
      if (all_digits(token)) token = kNumToken;
    }
    if (stopwords.contains(token)) continue;
    tokens.push_back(std::move(token));
  }
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint64_t> counts)
    : terms_(std::move(terms)), counts_(std::move(counts)) {
  if (terms_.size() != counts_.size()) {
    throw FormatError("vocabulary terms and counts differ in length");
  }
  if (terms_.size() < 2 || terms_[kPadId] != kPadToken || terms_[kNumId] != kNumToken) {
    throw FormatError("vocabulary must start with the reserved <pad> and <num> terms");
  }
  index_.reserve(terms_.size());
  for (std::size_t id = 0; id < terms_.size(); ++id) {
    if (!index_.emplace(terms_[id], static_cast<TokenId>(id)).second) {
      throw FormatError("duplicate vocabulary term '" + terms_[id] + "'");
    }
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::hash() const {
  std::ostringstream text;
  save(text);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Vocabulary::save(std::ostream& out) const {
  for (std::size_t id = 0; id < terms_.size(); ++id) {
    out << id << '\t' << terms_[id] << '\t' << counts_[id] << '\n';
  }
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<std::string> terms;
  std::vector<std::uint64_t> counts;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) throw FormatError("vocabulary line needs 3 fields: " + line);
    auto id = parse_int<std::size_t>(fields[0], "vocabulary id");
    if (id != terms.size()) throw FormatError("vocabulary ids must be dense and ordered");
    terms.emplace_back(fields[1]);
    counts.push_back(parse_int<std::uint64_t>(fields[2], "vocabulary count"));
  }
  return Vocabulary(std::move(terms), std::move(counts));
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> token_streams,
                            std::size_t max_size, const StopwordSet& stopwords) {
  if (max_size < 1) throw std::invalid_argument("max vocabulary size must be >= 1");
  if (token_streams.empty()) throw Error("no token streams to build a vocabulary from");

  std::unordered_map<std::string, std::uint64_t> freq;
  std::uint64_t num_count = 0;
  for (const auto& stream : token_streams) {
    for (const auto& tok : stream) {
      if (tok == kNumToken) {
        ++num_count;
      } else if (tok != kPadToken && !stopwords.contains(tok)) {
        ++freq[tok];
      }
    }
  }

  std::vector<std::pair<std::string, std::uint64_t>> ranked(freq.begin(), freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > max_size) ranked.resize(max_size);

  std::vector<std::string> terms{std::string(kPadToken), std::string(kNumToken)};
  std::vector<std::uint64_t> counts{0, num_count};
  for (auto& [term, count] : ranked) {
    terms.push_back(std::move(term));
    counts.push_back(count);
  }
  return Vocabulary(std::move(terms), std::move(counts));
}

std::vector<std::vector<std::size_t>> EncodedCorpus::doc_objects() const {
  std::vector<std::vector<std::size_t>> out(docs.size());
  for (std::size_t obj = 0; obj < object_docs.size(); ++obj) {
    for (auto d : object_docs[obj]) out[d].push_back(obj);
  }
  return out;
}

std::size_t EncodedCorpus::max_doc_length() const noexcept {
  std::size_t best = 0;
  for (const auto& d : docs) best = std::max(best, d.size());
  return best;
}

void EncodedCorpus::validate(std::size_t vocab_size) const {
  if (docs.empty()) throw FormatError("corpus has no documents");
  if (docs.size() != doc_ids.size()) throw FormatError("corpus doc_ids do not match documents");
  std::unordered_set<std::string_view> seen;
  for (const auto& id : doc_ids) {
    if (!seen.insert(id).second) throw FormatError("duplicate doc_id '" + id + "'");
  }
  for (const auto& d : docs) {
    for (auto t : d) {
      if (t >= vocab_size) throw FormatError("token id out of vocabulary range");
    }
  }
  if (object_ids.size() != object_docs.size()) {
    throw FormatError("object ids do not match association lists");
  }
  for (const auto& list : object_docs) {
    for (auto d : list) {
      if (d >= docs.size()) throw FormatError("association references a missing document");
    }
  }
}

EncodedCorpus encode(std::span<const RawDocument> docs, const Vocabulary& vocab,
                     const StopwordSet& stopwords) {
  EncodedCorpus corpus;
  corpus.pad_id = vocab.pad_id();
  std::unordered_set<std::string> seen;
  for (const auto& doc : docs) {
    if (!seen.insert(doc.id).second) throw FormatError("duplicate doc_id '" + doc.id + "'");
    std::vector<TokenId> ids;
    for (const auto& tok : tokenize(doc.text, stopwords)) {
      if (auto id = vocab.find(tok); id && *id != vocab.pad_id()) ids.push_back(*id);
    }
    corpus.docs.push_back(std::move(ids));
    corpus.doc_ids.push_back(doc.id);
  }
  return corpus;
}

void attach_associations(EncodedCorpus& corpus,
                         std::span<const std::pair<std::string, std::string>> pairs) {
  std::unordered_map<std::string_view, std::size_t> doc_index;
  for (std::size_t i = 0; i < corpus.doc_ids.size(); ++i) doc_index.emplace(corpus.doc_ids[i], i);

  std::unordered_map<std::string, std::size_t> obj_index;
  for (std::size_t i = 0; i < corpus.object_ids.size(); ++i) obj_index.emplace(corpus.object_ids[i], i);

  for (const auto& [obj, doc] : pairs) {
    auto d = doc_index.find(doc);
    if (d == doc_index.end()) throw FormatError("association references unknown doc_id '" + doc + "'");
    auto [it, inserted] = obj_index.emplace(obj, corpus.object_ids.size());
    if (inserted) {
      corpus.object_ids.push_back(obj);
      corpus.object_docs.emplace_back();
    }
    auto& list = corpus.object_docs[it->second];
    if (std::find(list.begin(), list.end(), d->second) == list.end()) list.push_back(d->second);
  }
  for (auto& list : corpus.object_docs) std::sort(list.begin(), list.end());
}

std::vector<RawDocument> read_raw_corpus(std::istream& in) {
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError("corpus line " + std::to_string(lineno) + " lacks '<doc_id>\\t<text>'");
    }
    docs.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return docs;
}

std::vector<std::pair<std::string, std::string>> read_associations(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw FormatError("association line needs '<object_id>\\t<doc_id>': " + line);
    }
    pairs.emplace_back(std::string(fields[0]), std::string(fields[1]));
  }
  return pairs;
}

StopwordSet read_stopwords(std::istream& in) {
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& tok : tokenize(line)) words.insert(std::move(tok));
  }
  return words;
}

void write_encoded_docs(std::ostream& out, const EncodedCorpus& corpus) {
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    out << corpus.doc_ids[i] << '\t';
    for (std::size_t j = 0; j < corpus.docs[i].size(); ++j) {
      if (j) out << ' ';
      out << corpus.docs[i][j];
    }
    out << '\n';
  }
}

EncodedCorpus read_encoded_docs(std::istream& in) {
  EncodedCorpus corpus;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError("encoded doc line lacks a tab: " + line);
    corpus.doc_ids.push_back(line.substr(0, tab));
    std::vector<TokenId> ids;
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    while (!rest.empty()) {
      auto sp = rest.find(' ');
      auto tok = rest.substr(0, sp);
      if (!tok.empty()) ids.push_back(parse_int<TokenId>(tok, "token id"));
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp + 1);
    }
    corpus.docs.push_back(std::move(ids));
  }
  return corpus;
}

std::size_t batches_per_epoch(const EncodedCorpus& corpus, std::size_t n, std::size_t m) {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be >= 1");
  const std::size_t total = clamped_window_total(corpus, n);
  return (total + m - 1) / m;
}

std::size_t ngrams_per_entity(const EncodedCorpus& corpus, std::size_t n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (corpus.num_objects() == 0) throw std::invalid_argument("corpus has no entities");
  const std::size_t total = clamped_window_total(corpus, n);
  return (total + corpus.num_objects() - 1) / corpus.num_objects();
}

void extract_window(std::span<const TokenId> doc, std::size_t start, std::size_t n,
                    TokenId pad_id, std::span<TokenId> out) {
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = start + k < doc.size() ? doc[start + k] : pad_id;
  }
}

DocumentSampler::DocumentSampler(const EncodedCorpus& corpus, WindowStride stride,
                                 std::span<const std::size_t> doc_pool)
    : corpus_(&corpus), stride_(stride) {
  auto consider = [&](std::size_t d) {
    if (d >= corpus.num_docs()) throw std::out_of_range("document pool index out of range");
    if (!corpus.docs[d].empty()) usable_.push_back(d);
  };
  if (doc_pool.empty()) {
    for (std::size_t d = 0; d < corpus.num_docs(); ++d) consider(d);
  } else {
    for (auto d : doc_pool) consider(d);
  }
  if (usable_.empty()) throw Error("every candidate document is empty");
}

Batch DocumentSampler::sample(std::size_t n, std::size_t m, Rng& rng) const {
  check_batch_shape(n, m);
  Batch batch;
  batch.n = n;
  batch.tokens.resize(n * m);
  batch.targets.resize(m);
  std::uniform_int_distribution<std::size_t> pick(0, usable_.size() - 1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t d = usable_[pick(rng)];
    sample_ngram(corpus_->docs[d], n, stride_, corpus_->pad_id, rng,
                 std::span<TokenId>(batch.tokens).subspan(i * n, n));
    batch.targets[i] = d;
  }
  return batch;
}

EntitySampler::EntitySampler(const EncodedCorpus& corpus, WindowStride stride)
    : corpus_(&corpus), stride_(stride) {
  if (!corpus.has_associations()) throw std::invalid_argument("corpus has no entity associations");
  std::size_t skipped = 0;
  for (std::size_t e = 0; e < corpus.num_objects(); ++e) {
    std::vector<std::size_t> usable;
    for (auto d : corpus.object_docs[e]) {
      if (!corpus.docs[d].empty()) usable.push_back(d);
    }
    if (usable.empty()) {
      ++skipped;
      continue;
    }
    entities_.push_back(e);
    docs_.push_back(std::move(usable));
  }
  if (skipped > 0) {
    warn(std::to_string(skipped) + " entities have no non-empty documents and are skipped");
  }
  if (entities_.empty()) throw Error("no entity has a usable document");
}

Batch EntitySampler::sample(std::size_t n, std::size_t m, Rng& rng) const {
  check_batch_shape(n, m);
  Batch batch;
  batch.n = n;
  batch.tokens.resize(n * m);
  batch.targets.resize(m);
  std::uniform_int_distribution<std::size_t> pick(0, entities_.size() - 1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t slot = pick(rng);
    const auto& docs = docs_[slot];
    const std::size_t d =
        docs[std::uniform_int_distribution<std::size_t>(0, docs.size() - 1)(rng)];
    sample_ngram(corpus_->docs[d], n, stride_, corpus_->pad_id, rng,
                 std::span<TokenId>(batch.tokens).subspan(i * n, n));
    batch.targets[i] = entities_[slot];
  }
  return batch;
}

Batch sample_batch(const EncodedCorpus& corpus, std::size_t n, std::size_t m, Rng& rng,
                   WindowStride stride) {
  return DocumentSampler(corpus, stride).sample(n, m, rng);
}

Batch sample_entity_batch(const EncodedCorpus& corpus, std::size_t n, std::size_t m, Rng& rng,
                          WindowStride stride) {
  return EntitySampler(corpus, stride).sample(n, m, rng);
}

std::vector<TokenId> encode_query(std::string_view text, const Vocabulary& vocab,
                                  const StopwordSet& stopwords) {
  auto tokens = tokenize(text, stopwords);
  if (tokens.empty()) throw EmptyQueryError("query has no tokens");
  std::vector<TokenId> ids;
  for (const auto& tok : tokens) {
    if (auto id = vocab.find(tok); id && *id != vocab.pad_id()) ids.push_back(*id);
  }
  if (ids.empty()) throw OutOfVocabularyQueryError("no query term is in the vocabulary");
  return ids;
}

}  // namespace vsir
