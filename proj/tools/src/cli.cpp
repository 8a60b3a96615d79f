#include "vsir/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "vsir/analysis.hpp"
#include "vsir/corpus.hpp"
#include "vsir/error.hpp"
#include "vsir/evaluation.hpp"
#include "vsir/log.hpp"
#include "vsir/loglinear.hpp"
#include "vsir/lse.hpp"
#include "vsir/model_io.hpp"
#include "vsir/nvsm.hpp"
#include "vsir/params.hpp"
#include "vsir/retrieval.hpp"
#include "vsir/trec.hpp"

namespace vsir::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kVocabFile = "vocab.tsv";
constexpr const char* kDocsFile = "docs.tsv";

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

struct Query {
  std::string id;
  std::string text;
};

std::vector<Query> read_queries(const fs::path& path) {
  auto in = open_in(path);
  std::vector<Query> queries;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected query_id<TAB>text");
    }
    Query q{line.substr(0, tab), line.substr(tab + 1)};
    if (!seen.insert(q.id).second) throw FormatError("duplicate query id " + q.id);
    queries.push_back(std::move(q));
  }
  return queries;
}

std::vector<TokenId> query_ids(const Query& q, const Vocabulary& vocab) {
  try {
    return encode_query(q.text, vocab);
  } catch (const EmptyQueryError&) {
    return {};
  } catch (const OutOfVocabularyQueryError&) {
    return {};
  }
}

// Ranks every query, splitting them over `threads` workers. The result does
// not depend on the thread count.
template <typename RankFn>
Run rank_all(const std::vector<Query>& queries, std::size_t threads, RankFn rank_one) {
  std::vector<std::vector<RunEntry>> results(queries.size());
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](std::size_t worker) {
    try {
      for (std::size_t i = worker; i < queries.size(); i += threads) results[i] = rank_one(queries[i]);
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Run run;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (!results[i].empty()) run.emplace(queries[i].id, std::move(results[i]));
  }
  return run;
}

void write_run_file(const fs::path& path, const Run& run, const std::string& tag) {
  auto out = open_out(path);
  write_run(out, run, tag);
  close_out(out, path);
}

Run read_run_file(const fs::path& path) {
  auto in = open_in(path);
  return read_run(in);
}

// prepare

struct PrepareArgs {
  std::string corpus;
  std::string stopwords;
  std::size_t max_vocab = 60000;
  std::string out;
};

int run_prepare(const PrepareArgs& a) {
  StopwordSet stop;
  if (!a.stopwords.empty()) {
    auto in = open_in(a.stopwords);
    stop = read_stopwords(in);
  }
  std::vector<RawDocument> docs;
  {
    auto in = open_in(a.corpus);
    docs = read_raw_corpus(in);
  }
  std::vector<std::vector<std::string>> streams;
  streams.reserve(docs.size());
  for (const auto& d : docs) streams.push_back(tokenize(d.text, stop));
  const auto vocab = build_vocabulary(streams, a.max_vocab, stop);
  const auto corpus = encode(docs, vocab, stop);

  fs::create_directories(a.out);
  const fs::path dir(a.out);
  auto vout = open_out(dir / kVocabFile);
  vocab.save(vout);
  close_out(vout, dir / kVocabFile);
  auto dout = open_out(dir / kDocsFile);
  write_encoded_docs(dout, corpus);
  close_out(dout, dir / kDocsFile);
  std::cerr << "prepared " << corpus.num_docs() << " documents, vocabulary of " << vocab.size() << " terms\n";
  return 0;
}

// train

struct TrainArgs {
  std::string model;
  std::string corpus_dir;
  std::string assoc;
  std::optional<std::size_t> n;
  std::optional<std::size_t> m;
  std::optional<std::size_t> z;
  std::optional<double> lambda;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> kw;
  std::optional<std::size_t> kd;
  std::optional<std::uint64_t> seed;
  bool non_overlapping = false;
  std::string out;
};

std::optional<std::uint64_t> seed_from_env() {
  const char* env = std::getenv("VSIR_SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  const std::string_view text(env);
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("VSIR_SEED must be a non-negative integer, got '" + std::string(text) + "'");
  }
  return seed;
}

int run_train(const TrainArgs& a) {
  const auto kind = parse_model_kind(a.model);
  TrainConfig cfg = kind == ModelKind::nvsm  ? TrainConfig::nvsm_defaults()
                    : kind == ModelKind::lse ? TrainConfig::lse_defaults()
                                             : TrainConfig::loglinear_defaults();
  if (a.n) cfg.n = *a.n;
  if (a.m) cfg.m = *a.m;
  if (a.z) cfg.z = *a.z;
  if (a.lambda) cfg.lambda = *a.lambda;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.kw) cfg.k_w = *a.kw;
  if (a.kd) cfg.k_d = *a.kd;
  if (a.seed) cfg.seed = *a.seed;
  if (const auto env = seed_from_env()) cfg.seed = *env;
  if (a.non_overlapping) cfg.stride = WindowStride::non_overlapping;
  cfg.validate();

  const fs::path dir(a.corpus_dir);
  Vocabulary vocab;
  {
    auto in = open_in(dir / kVocabFile);
    vocab = Vocabulary::load(in);
  }
  EncodedCorpus corpus;
  {
    auto in = open_in(dir / kDocsFile);
    corpus = read_encoded_docs(in);
  }
  if (kind == ModelKind::nvsm) {
    if (!a.assoc.empty()) warn("--assoc is ignored for nvsm");
  } else {
    if (a.assoc.empty()) throw ConfigError(a.model + " training requires --assoc");
    auto in = open_in(a.assoc);
    attach_associations(corpus, read_associations(in));
  }

  std::cerr << "epoch,loss\n";
  const EpochCallback log_epoch = [](std::size_t epoch, double loss) {
    std::cerr << epoch << ',' << std::setprecision(10) << loss << '\n';
  };
  TrainResult result;
  switch (kind) {
    case ModelKind::nvsm:
      result = nvsm::train(corpus, vocab.size(), cfg, log_epoch);
      break;
    case ModelKind::lse:
      result = lse::train(corpus, vocab.size(), cfg, log_epoch);
      break;
    case ModelKind::loglinear:
      result = loglinear::train(corpus, vocab.size(), cfg, log_epoch);
      break;
  }

  ModelMetadata meta;
  meta.vocab_hash = vocab.hash();
  meta.hyperparams = {
      {"n", cfg.n},           {"m", cfg.m},   {"z", cfg.z},   {"lambda", cfg.lambda},
      {"epochs", cfg.epochs}, {"kw", cfg.k_w}, {"kd", cfg.k_d}, {"seed", cfg.seed},
      {"stride", cfg.stride == WindowStride::overlapping ? "overlapping" : "non_overlapping"},
  };
  meta.vocabulary = vocab;
  meta.object_ids = kind == ModelKind::nvsm ? corpus.doc_ids : corpus.object_ids;
  save_model(fs::path(a.out), result.params, meta);
  return 0;
}

// rank / ensemble

struct RankArgs {
  std::string model;
  std::string queries;
  std::size_t cutoff = 1000;
  std::string tag = "vsir";
  std::string out;
  std::size_t threads = 1;
};

int run_rank(const RankArgs& a) {
  if (a.threads < 1) throw ConfigError("--threads must be at least 1");
  const auto model = load_model(fs::path(a.model));
  const auto queries = read_queries(a.queries);
  const auto run = rank_all(queries, a.threads, [&](const Query& q) {
    const auto ids = query_ids(q, model.meta.vocabulary);
    return rank_documents(model.params, model.meta.object_ids, ids, q.id, a.cutoff);
  });
  write_run_file(a.out, run, a.tag);
  return 0;
}

struct EnsembleArgs {
  std::vector<std::string> models;
  std::string queries;
  std::size_t cutoff = 1000;
  std::string tag = "vsir-ensemble";
  std::string out;
  std::size_t threads = 1;
};

int run_ensemble(const EnsembleArgs& a) {
  if (a.models.empty()) throw ConfigError("--models needs at least one model file");
  if (a.threads < 1) throw ConfigError("--threads must be at least 1");
  std::vector<ModelParams> params;
  ModelMetadata meta;
  for (std::size_t i = 0; i < a.models.size(); ++i) {
    auto model = load_model(fs::path(a.models[i]));
    if (i == 0) {
      meta = std::move(model.meta);
    } else if (model.meta.vocab_hash != meta.vocab_hash || model.meta.object_ids != meta.object_ids) {
      throw ConfigError(a.models[i] + " does not share the vocabulary and documents of " + a.models[0]);
    }
    params.push_back(std::move(model.params));
  }
  const auto queries = read_queries(a.queries);
  const auto run = rank_all(queries, a.threads, [&](const Query& q) {
    const auto ids = query_ids(q, meta.vocabulary);
    return ensemble_rank(params, meta.object_ids, ids, q.id, a.cutoff);
  });
  write_run_file(a.out, run, a.tag);
  return 0;
}

// eval / fuse-rr / analyze

struct EvalArgs {
  std::string run;
  std::string qrels;
  std::string metrics = "map,ndcg@100,p@10,mrr";
  bool per_query = false;
};

int run_eval(const EvalArgs& a) {
  const auto metrics = parse_metric_list(a.metrics);
  const auto run = read_run_file(a.run);
  Qrels qrels;
  {
    auto in = open_in(a.qrels);
    qrels = read_qrels(in);
  }
  const auto ev = evaluate_run(run, qrels, metrics);
  std::cout << std::fixed << std::setprecision(4);
  if (a.per_query) {
    for (const auto& [qid, values] : ev.per_query) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        std::cout << ev.metric_names[i] << '\t' << qid << '\t' << values[i] << '\n';
      }
    }
  }
  for (std::size_t i = 0; i < ev.means.size(); ++i) {
    std::cout << ev.metric_names[i] << "\tall\t" << ev.means[i] << '\n';
  }
  std::cout << "num_q\tall\t" << ev.per_query.size() << '\n';
  return 0;
}

struct FuseArgs {
  std::string run_a;
  std::string run_b;
  std::string tag = "vsir-fuse-rr";
  std::string out;
};

int run_fuse(const FuseArgs& a) {
  const auto fused = loglinear::reciprocal_rank_ensemble(read_run_file(a.run_a), read_run_file(a.run_b));
  write_run_file(a.out, fused, a.tag);
  return 0;
}

struct AnalyzeArgs {
  std::string model;
  std::string out;
};

int run_analyze(const AnalyzeArgs& a) {
  const auto model = load_model(fs::path(a.model));
  const auto report = term_norm_report(model.params, model.meta.vocabulary);
  auto out = open_out(a.out);
  write_report_csv(out, report);
  close_out(out, a.out);
  std::cerr << std::setprecision(6) << "mean l2 norm low=" << report.mean_low << " mid=" << report.mean_mid
            << " high=" << report.mean_high << "; mid vs high p=" << report.mid_vs_high.p << '\n';
  return 0;
}

struct EntropyArgs {
  std::string model;
  std::string queries;
  std::string qrels;
  std::string out;
};

// Per-query normalized posterior entropy next to average precision, for
// log-linear models.
int run_entropy(const EntropyArgs& a) {
  const auto model = load_model(fs::path(a.model));
  if (model.params.kind != ModelKind::loglinear) throw ConfigError("entropy needs a loglinear model");
  Qrels qrels;
  {
    auto in = open_in(a.qrels);
    qrels = read_qrels(in);
  }
  auto out = open_out(a.out);
  out << "query_id,entropy,ap\n" << std::setprecision(17);
  for (const auto& q : read_queries(a.queries)) {
    const auto judged = qrels.find(q.id);
    if (judged == qrels.end()) continue;
    const auto ids = query_ids(q, model.meta.vocabulary);
    if (ids.empty()) {
      warn("query " + q.id + " has no in-vocabulary terms; skipped");
      continue;
    }
    const auto posterior = loglinear::query_posterior(ids, model.params);
    const auto ranked = rank_scores(posterior, model.meta.object_ids, q.id, 1000);
    try {
      const double ap = average_precision(ranked, judged->second);
      out << q.id << ',' << loglinear::normalized_entropy(posterior) << ',' << ap << '\n';
    } catch (const std::invalid_argument&) {
      warn("query " + q.id + " has no relevant candidates; skipped");
    }
  }
  close_out(out, a.out);
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Unsupervised neural vector space models for retrieval", "vsir"};
  app.require_subcommand(1);

  PrepareArgs prepare;
  auto* prep = app.add_subcommand("prepare", "Tokenize a raw corpus and build the vocabulary");
  prep->add_option("--corpus", prepare.corpus, "Raw corpus, doc_id<TAB>text per line")->required();
  prep->add_option("--stopwords", prepare.stopwords, "Stopword list, one per line");
  prep->add_option("--max-vocab", prepare.max_vocab, "Maximum number of non-reserved terms")
      ->capture_default_str();
  prep->add_option("--out", prepare.out, "Output directory")->required();

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "Train a model");
  tr->add_option("--model", train.model, "nvsm, lse or loglinear")->required();
  tr->add_option("--corpus", train.corpus_dir, "Directory written by prepare")->required();
  tr->add_option("--assoc", train.assoc, "object_id<TAB>doc_id associations (lse, loglinear)");
  tr->add_option("--n", train.n, "n-gram window (default 4)");
  tr->add_option("--m", train.m, "Batch size (default 51200 for nvsm, 4096 otherwise)");
  tr->add_option("--z", train.z, "Negative samples (default 10)");
  tr->add_option("--lambda", train.lambda, "Weight decay (default 0.01)");
  tr->add_option("--epochs", train.epochs, "Epochs (default 15)");
  tr->add_option("--kw", train.kw, "Word representation size (default 300)");
  tr->add_option("--kd", train.kd, "Document/entity representation size (default 128)");
  tr->add_option("--seed", train.seed, "RNG seed (default 1; VSIR_SEED overrides)");
  tr->add_flag("--non-overlapping", train.non_overlapping, "Sample windows at multiples of n");
  tr->add_option("--out", train.out, "Model file")->required();

  RankArgs rank;
  auto* rk = app.add_subcommand("rank", "Rank documents or objects for a query file");
  rk->add_option("--model", rank.model, "Model file")->required();
  rk->add_option("--queries", rank.queries, "query_id<TAB>text per line")->required();
  rk->add_option("--cutoff", rank.cutoff, "Results per query")->capture_default_str();
  rk->add_option("--tag", rank.tag, "Run tag")->capture_default_str();
  rk->add_option("--out", rank.out, "Output run file")->required();
  rk->add_option("--threads", rank.threads, "Worker threads")->capture_default_str();

  EnsembleArgs ens;
  auto* en = app.add_subcommand("ensemble", "Rank with a standardized-score ensemble of models");
  en->add_option("--models", ens.models, "Comma-separated model files")->required()->delimiter(',');
  en->add_option("--queries", ens.queries, "query_id<TAB>text per line")->required();
  en->add_option("--cutoff", ens.cutoff, "Results per query and per-model pool size")->capture_default_str();
  en->add_option("--tag", ens.tag, "Run tag")->capture_default_str();
  en->add_option("--out", ens.out, "Output run file")->required();
  en->add_option("--threads", ens.threads, "Worker threads")->capture_default_str();

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Evaluate a run against qrels");
  ev->add_option("--run", eval.run, "TREC run file")->required();
  ev->add_option("--qrels", eval.qrels, "TREC qrels file")->required();
  ev->add_option("--metrics", eval.metrics, "Comma-separated metrics")->capture_default_str();
  ev->add_flag("--per-query", eval.per_query, "Also print per-query values");

  FuseArgs fuse;
  auto* fu = app.add_subcommand("fuse-rr", "Fuse two runs by the product of reciprocal ranks");
  fu->add_option("--run-a", fuse.run_a, "First run")->required();
  fu->add_option("--run-b", fuse.run_b, "Second run")->required();
  fu->add_option("--tag", fuse.tag, "Run tag")->capture_default_str();
  fu->add_option("--out", fuse.out, "Output run file")->required();

  AnalyzeArgs analyze;
  auto* an = app.add_subcommand("analyze", "Relate word embedding norms to collection frequency");
  an->add_option("--model", analyze.model, "Model file")->required();
  an->add_option("--out", analyze.out, "Output CSV")->required();

  EntropyArgs entropy;
  auto* et = app.add_subcommand("entropy", "Per-query posterior entropy and AP of a loglinear model");
  et->add_option("--model", entropy.model, "Model file")->required();
  et->add_option("--queries", entropy.queries, "query_id<TAB>text per line")->required();
  et->add_option("--qrels", entropy.qrels, "Candidate-level qrels")->required();
  et->add_option("--out", entropy.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*prep) return run_prepare(prepare);
    if (*tr) return run_train(train);
    if (*rk) return run_rank(rank);
    if (*en) return run_ensemble(ens);
    if (*ev) return run_eval(eval);
    if (*fu) return run_fuse(fuse);
    if (*an) return run_analyze(analyze);
    if (*et) return run_entropy(entropy);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace vsir::cli
