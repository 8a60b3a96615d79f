#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace synth {

Corpus topic_corpus(std::size_t topics, std::size_t docs_per_topic, std::size_t doc_len,
                    std::size_t words_per_topic, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Corpus c;
  for (std::size_t t = 0; t < topics; ++t) {
    auto& words = c.topic_words.emplace_back();
    for (std::size_t w = 0; w < words_per_topic; ++w) words.push_back("topic" + std::to_string(t) + "w" + std::to_string(w));
  }
  std::uniform_int_distribution<std::size_t> pick(0, words_per_topic - 1);
  for (std::size_t t = 0; t < topics; ++t) {
    for (std::size_t d = 0; d < docs_per_topic; ++d) {
      std::string text;
      for (std::size_t i = 0; i < doc_len; ++i) {
        if (i > 0) text += ' ';
        text += c.topic_words[t][pick(rng)];
      }
      c.docs.push_back({"doc" + std::to_string(t) + "x" + std::to_string(d), std::move(text)});
      c.doc_topic.push_back(t);
    }
  }
  return c;
}

Corpus zipf_corpus(const ZipfSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double harmonic = 0.0;
  for (std::size_t r = 1; r <= spec.vocab; ++r) harmonic += 1.0 / std::pow(static_cast<double>(r), spec.exponent);

  Corpus c;
  c.topic_words.resize(spec.topics);
  std::vector<std::vector<std::string>> tokens(spec.docs);
  const std::size_t high_end = spec.vocab / 4;
  const std::size_t mid_end = spec.vocab - spec.vocab / 4;
  std::uniform_int_distribution<std::size_t> any_doc(0, spec.docs - 1);
  const std::size_t per_topic = spec.docs / spec.topics;
  std::uniform_int_distribution<std::size_t> topic_slot(0, per_topic - 1);

  for (std::size_t r = 1; r <= spec.vocab; ++r) {
    const auto count = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::lround(static_cast<double>(spec.tokens) /
                                                (harmonic * std::pow(static_cast<double>(r), spec.exponent)))));
    std::string word;
    if (r <= high_end) {
      word = "common" + std::to_string(r);
    } else if (r <= mid_end) {
      word = "topical" + std::to_string(r);
      c.topic_words[r % spec.topics].push_back(word);
    } else {
      word = "rare" + std::to_string(r);
    }
    for (std::size_t i = 0; i < count; ++i) {
      // Documents d with d % topics == t belong to topic t.
      const std::size_t doc = (r > high_end && r <= mid_end)
                                  ? topic_slot(rng) * spec.topics + r % spec.topics
                                  : any_doc(rng);
      tokens[doc].push_back(word);
    }
  }
  for (std::size_t d = 0; d < spec.docs; ++d) {
    std::shuffle(tokens[d].begin(), tokens[d].end(), rng);
    std::string text;
    for (const auto& t : tokens[d]) {
      if (!text.empty()) text += ' ';
      text += t;
    }
    c.docs.push_back({"doc" + std::to_string(d), std::move(text)});
    c.doc_topic.push_back(d % spec.topics);
  }
  return c;
}

vsir::Batch random_batch(std::size_t vocab, std::size_t objects, std::size_t n, std::size_t m,
                         vsir::Rng& rng) {
  std::uniform_int_distribution<vsir::TokenId> word(0, static_cast<vsir::TokenId>(vocab - 1));
  std::uniform_int_distribution<std::size_t> object(0, objects - 1);
  vsir::Batch b;
  b.n = n;
  for (std::size_t i = 0; i < m * n; ++i) b.tokens.push_back(word(rng));
  for (std::size_t i = 0; i < m; ++i) b.targets.push_back(object(rng));
  return b;
}

void randomize(vsir::ModelParams& params, double scale, vsir::Rng& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& t : params.tensors) {
    for (auto& v : t.data()) v = static_cast<float>(u(rng));
  }
}

Prepared prepare(const std::vector<vsir::RawDocument>& docs, std::size_t max_vocab) {
  std::vector<std::vector<std::string>> streams;
  for (const auto& d : docs) streams.push_back(vsir::tokenize(d.text));
  Prepared p;
  p.vocab = vsir::build_vocabulary(streams, max_vocab);
  p.corpus = vsir::encode(docs, p.vocab);
  return p;
}

}  // namespace synth
