// wdemb: command-line front end for embedding training, feature extraction,
// CRF tagging, evaluation, queries and l/d sweeps.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "wdemb/discretize.hpp"
#include "wdemb/pipeline.hpp"

using namespace wdemb;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes through a temp file in the target directory, then renames into place.
void write_atomic(const std::string& path, const std::string& header, const std::function<void(std::ostream&)>& body,
                  bool binary = false) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, binary ? std::ios::binary : std::ios::out);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    if (!binary) out << header;
    body(out);
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("write failed for " + path);
    }
  }
  fs::rename(tmp, path);
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::vector<ParsedSentence> read_corpus(const std::string& path) {
  auto in = open_in(path);
  auto result = parse_conllu(in);
  for (const auto& d : result.diagnostics)
    std::cerr << path << ":" << d.line << ": skipped sentence: " << d.message << '\n';
  if (result.sentences.empty()) throw Error(path + ": no usable sentences");
  return result.sentences;
}

// Provenance header: the subcommand and every option value, one per line.
std::string provenance(const CLI::App& sub) {
  std::ostringstream out;
  out << "# wdemb " << sub.get_name() << '\n';
  std::istringstream flags(sub.config_to_str(true, false));
  std::string line;
  while (std::getline(flags, line))
    if (!line.empty() && line[0] != '[') out << "# " << line << '\n';
  return out.str();
}

int default_threads() {
  const char* env = std::getenv("WDEMB_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw UsageError("WDEMB_THREADS must be a positive integer, got '" + std::string(env) + "'");
  return static_cast<int>(v);
}

// Embedding artifacts share a prefix.
struct ModelFiles {
  std::string prefix;
  std::string vocab() const { return prefix + ".vocab"; }
  std::string target() const { return prefix + ".target.txt"; }
  std::string context() const { return prefix + ".context.txt"; }
  std::string relations() const { return prefix + ".rel.txt"; }
  std::string composer() const { return prefix + ".composer.bin"; }
};

std::string disc_file(const std::string& prefix, char block) { return prefix + "." + block + ".disc"; }

EmbeddingModel load_model(const std::string& prefix) {
  ModelFiles f{prefix};
  EmbeddingModel m;
  {
    auto in = open_in(f.vocab());
    m.vocab = Vocabulary::load(in);
  }
  auto read_matrix = [](const std::string& path, const std::vector<std::string>& expect) {
    auto in = open_in(path);
    std::vector<std::string> names;
    auto mat = read_text_matrix(in, &names);
    if (names != expect) throw Error(path + ": rows do not match the vocabulary");
    return mat;
  };
  const auto words = word_names(m.vocab);
  m.params.target_words = read_matrix(f.target(), words);
  m.params.context_words = read_matrix(f.context(), words);
  m.params.relations = read_matrix(f.relations(), relation_names(m.vocab));
  {
    auto in = open_in(f.composer(), true);
    m.params.composer = read_composer(in);
  }
  m.params.dim = m.params.target_words.cols();
  if (m.params.context_words.cols() != m.params.dim || m.params.relations.cols() != m.params.dim ||
      m.params.composer.rows() != m.params.dim)
    throw Error(prefix + ": embedding files disagree on the dimension");
  return m;
}

void save_model(const EmbeddingModel& m, const std::string& prefix, const std::string& header) {
  ModelFiles f{prefix};
  write_atomic(f.vocab(), header, [&](std::ostream& o) { m.vocab.save(o); });
  const auto words = word_names(m.vocab);
  write_atomic(f.target(), header, [&](std::ostream& o) { write_text_matrix(o, m.params.target_words, words); });
  write_atomic(f.context(), header, [&](std::ostream& o) { write_text_matrix(o, m.params.context_words, words); });
  write_atomic(f.relations(), header,
               [&](std::ostream& o) { write_text_matrix(o, m.params.relations, relation_names(m.vocab)); });
  write_atomic(f.composer(), "", [&](std::ostream& o) { write_composer(o, m.params.composer); }, true);
}

FeatureDiscretizers load_discretizers(const std::string& prefix, const FeatureSets& sets) {
  FeatureDiscretizers d;
  auto load = [&](char block) {
    auto in = open_in(disc_file(prefix, block));
    return Discretizer::load(in);
  };
  if (sets.word) d.word = load('W');
  if (sets.linear) d.linear = load('L');
  if (sets.dependency) d.dependency = load('D');
  return d;
}

std::vector<FeatureSentence> read_features(const std::string& path) {
  auto in = open_in(path);
  return read_feature_file(in);
}

SpanSet read_span_file(const std::string& path) {
  auto in = open_in(path);
  return read_spans(in);
}

// Options shared by every subcommand that trains embeddings.
struct EmbedFlags {
  TrainConfig cfg;
  int min_count = 1;

  void add(CLI::App* sub) {
    sub->add_option("--dim", cfg.dim, "embedding dimension")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--window", cfg.window, "linear context window")->capture_default_str();
    sub->add_option("--neg-w", cfg.neg_words, "negative words per context pair")->capture_default_str();
    sub->add_option("--neg-r", cfg.neg_paths, "negative paths per hop count, e.g. 5,3,2")
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--lr", cfg.initial_lr, "initial learning rate")->capture_default_str();
    sub->add_option("--epochs", cfg.epochs, "passes over the corpus")->capture_default_str();
    sub->add_option("--max-hops", cfg.max_hops, "longest dependency path")->capture_default_str();
    sub->add_option("--min-count", min_count, "drop words rarer than this")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "training threads (default $WDEMB_THREADS or 1)")->capture_default_str();
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wdemb: dependency-path word embeddings for aspect term extraction"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with flag values");

  int threads_default = 1;
  try {
    threads_default = default_threads();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  // train-emb
  auto* train_emb = app.add_subcommand("train-emb", "train word, relation and composition embeddings");
  std::string te_conllu, te_out;
  EmbedFlags te;
  te.cfg.threads = threads_default;
  train_emb->add_option("--conllu", te_conllu, "parsed corpus")->required()->check(CLI::ExistingFile);
  train_emb->add_option("--out", te_out, "output prefix")->required();
  te.add(train_emb);

  // discretize
  auto* discretize = app.add_subcommand("discretize", "fit per-block discretizers on a corpus");
  std::string di_model, di_conllu, di_out, di_sets = "W+L+D";
  int di_bins = kDefaultBins;
  FeatureOptions di_opt;
  discretize->add_option("--model", di_model, "embedding prefix")->required();
  discretize->add_option("--conllu", di_conllu, "corpus the ranges are fitted on")->required()->check(CLI::ExistingFile);
  discretize->add_option("--sets", di_sets, "feature blocks, e.g. W+L+D")->capture_default_str();
  discretize->add_option("--l", di_bins, "bins per dimension")->capture_default_str();
  discretize->add_option("--window", di_opt.linear_window, "linear context length")->capture_default_str();
  discretize->add_option("--max-hops", di_opt.max_hops, "dependency context radius")->capture_default_str();
  discretize->add_option("--out", di_out, "output prefix")->required();

  // features
  auto* features = app.add_subcommand("features", "write discrete CRF features for a corpus");
  std::string fe_model, fe_disc, fe_conllu, fe_out, fe_sets = "W+L+D";
  FeatureOptions fe_opt;
  features->add_option("--model", fe_model, "embedding prefix (needed unless --sets none)");
  features->add_option("--disc", fe_disc, "discretizer prefix (needed unless --sets none)");
  features->add_option("--conllu", fe_conllu, "corpus, BIO labels read from MISC")->required()->check(CLI::ExistingFile);
  features->add_option("--sets", fe_sets, "feature blocks, e.g. W+L+D or none")->capture_default_str();
  features->add_flag("--baseline", fe_opt.baseline, "append baseline templates");
  features->add_option("--window", fe_opt.linear_window, "linear context length")->capture_default_str();
  features->add_option("--max-hops", fe_opt.max_hops, "dependency context radius")->capture_default_str();
  features->add_option("--out", fe_out, "feature file")->required();

  // train-tagger
  auto* train_tagger = app.add_subcommand("train-tagger", "train the CRF tagger");
  std::string tt_feat, tt_out;
  CrfTrainConfig tt_cfg;
  train_tagger->add_option("--feat", tt_feat, "labelled feature file")->required()->check(CLI::ExistingFile);
  train_tagger->add_option("--l1", tt_cfg.l1_lambda, "L1 strength")->capture_default_str();
  train_tagger->add_option("--epochs", tt_cfg.epochs, "SGD epochs")->capture_default_str();
  train_tagger->add_option("--lr", tt_cfg.initial_lr, "initial learning rate")->capture_default_str();
  train_tagger->add_option("--decay", tt_cfg.decay, "learning rate decay per epoch")->capture_default_str();
  train_tagger->add_option("--seed", tt_cfg.seed, "shuffle seed")->capture_default_str();
  train_tagger->add_option("--out", tt_out, "model file")->required();

  // tag
  auto* tag = app.add_subcommand("tag", "decode a feature file");
  std::string tg_model, tg_feat, tg_out, tg_gold, tg_format = "spans";
  bool tg_strict = false;
  tag->add_option("--model", tg_model, "CRF model file")->required()->check(CLI::ExistingFile);
  tag->add_option("--feat", tg_feat, "feature file")->required()->check(CLI::ExistingFile);
  tag->add_option("--out", tg_out, "predicted labels")->required();
  tag->add_option("--format", tg_format, "spans or bio")->check(CLI::IsMember({"spans", "bio"}))->capture_default_str();
  tag->add_option("--gold-out", tg_gold, "also write the gold spans of a labelled feature file");
  tag->add_flag("--strict", tg_strict, "strict BIO decoding for span output");

  // eval
  auto* eval = app.add_subcommand("eval", "score predicted spans, optionally against a second system");
  std::string ev_pred, ev_gold, ev_compare, ev_out;
  int ev_iters = 1000;
  std::uint64_t ev_seed = 1;
  eval->add_option("--pred", ev_pred, "predicted spans")->required()->check(CLI::ExistingFile);
  eval->add_option("--gold", ev_gold, "gold spans")->required()->check(CLI::ExistingFile);
  eval->add_option("--compare", ev_compare, "second system's spans")->check(CLI::ExistingFile);
  eval->add_option("--iters", ev_iters, "randomization iterations")->capture_default_str();
  eval->add_option("--seed", ev_seed, "randomization seed")->capture_default_str();
  eval->add_option("--out", ev_out, "write the TSV here instead of stdout");

  // query
  auto* query = app.add_subcommand("query", "nearest words to a word or a word plus a path");
  std::string qu_model, qu_word, qu_path;
  int qu_k = 6;
  query->add_option("--model", qu_model, "embedding prefix")->required();
  query->add_option("--word", qu_word, "query word")->required();
  query->add_option("--path", qu_path, "dependency path, e.g. amod:u or conj:u/dep:d");
  query->add_option("--k", qu_k, "neighbours to list")->capture_default_str()->check(CLI::PositiveNumber);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "F1 over an l/d grid on an 80/20 sentence split");
  std::string sw_conllu, sw_out, sw_l = "15", sw_d = "100", sw_sets = "W+L+D";
  double sw_ratio = 0.8;
  std::uint64_t sw_split_seed = 1;
  EmbedFlags sw;
  sw.cfg.threads = threads_default;
  FeatureOptions sw_opt;
  CrfTrainConfig sw_crf;
  sweep->add_option("--conllu", sw_conllu, "labelled parsed corpus")->required()->check(CLI::ExistingFile);
  sweep->add_option("--l", sw_l, "bin grid, start:stop:step or a,b,c")->capture_default_str();
  sweep->add_option("--d", sw_d, "dimension grid")->capture_default_str();
  sweep->add_option("--sets", sw_sets, "feature blocks")->capture_default_str();
  sweep->add_flag("--baseline", sw_opt.baseline, "append baseline templates");
  sweep->add_option("--ratio", sw_ratio, "training share of sentences")->capture_default_str();
  sweep->add_option("--split-seed", sw_split_seed, "split shuffle seed")->capture_default_str();
  sweep->add_option("--l1", sw_crf.l1_lambda, "CRF L1 strength")->capture_default_str();
  sweep->add_option("--crf-epochs", sw_crf.epochs, "CRF epochs")->capture_default_str();
  sweep->add_option("--out", sw_out, "TSV output")->required();
  sw.add(sweep);
  sweep->remove_option(sweep->get_option("--dim"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train_emb) {
      te.cfg.validate();
      auto sentences = read_corpus(te_conllu);
      TrainStats stats;
      auto model = train_embeddings(sentences, te.min_count, te.cfg, &stats);
      save_model(model, te_out, provenance(*train_emb));
      std::cerr << "trained " << model.vocab.num_words() << " words, " << model.vocab.num_directed_relations()
                << " relation rows, " << stats.total_instances << " instances over " << te.cfg.epochs << " epoch(s)\n";
      if (!stats.loss_trace.empty())
        std::cerr << "mean loss first block " << stats.loss_trace.front() << ", last block " << stats.loss_trace.back()
                  << '\n';
    } else if (*discretize) {
      di_opt.sets = FeatureSets::parse(di_sets);
      if (di_opt.sets.none()) throw UsageError("--sets must name at least one of W, L, D");
      auto model = load_model(di_model);
      auto sentences = read_corpus(di_conllu);
      auto fitted = fit_feature_discretizers(sentences, model, di_opt, di_bins);
      const auto header = provenance(*discretize);
      auto save = [&](const std::optional<Discretizer>& d, char block) {
        if (d) write_atomic(disc_file(di_out, block), header, [&](std::ostream& o) { d->save(o); });
      };
      save(fitted.word, 'W');
      save(fitted.linear, 'L');
      save(fitted.dependency, 'D');
    } else if (*features) {
      fe_opt.sets = FeatureSets::parse(fe_sets);
      EmbeddingModel model;
      FeatureDiscretizers disc;
      if (!fe_opt.sets.none()) {
        if (fe_model.empty() || fe_disc.empty()) throw UsageError("--model and --disc are required for W, L or D");
        model = load_model(fe_model);
        disc = load_discretizers(fe_disc, fe_opt.sets);
      }
      auto sentences = read_corpus(fe_conllu);
      std::vector<FeatureSentence> rows;
      for (const auto& s : sentences) rows.push_back(assemble_features(s, gold_labels(s), model, disc, fe_opt));
      write_atomic(fe_out, provenance(*features), [&](std::ostream& o) { write_feature_file(o, rows); });
    } else if (*train_tagger) {
      auto data = read_features(tt_feat);
      CrfTrainStats stats;
      auto model = train_crf(data, tt_cfg, &stats);
      write_atomic(tt_out, provenance(*train_tagger), [&](std::ostream& o) { model.save(o); });
      for (std::size_t e = 0; e < stats.objective.size(); ++e)
        std::cerr << "epoch " << e + 1 << " objective " << stats.objective[e] << '\n';
    } else if (*tag) {
      CrfModel model;
      {
        auto in = open_in(tg_model);
        model = CrfModel::load(in);
      }
      auto data = read_features(tg_feat);
      auto labels = decode_all(model, data);
      const auto header = provenance(*tag);
      if (tg_format == "spans") {
        write_atomic(tg_out, header, [&](std::ostream& o) { write_spans(o, label_spans(labels, tg_strict)); });
      } else {
        write_atomic(tg_out, header, [&](std::ostream& o) {
          for (const auto& s : labels) {
            for (char c : s) o << c << '\n';
            o << '\n';
          }
        });
      }
      if (!tg_gold.empty())
        write_atomic(tg_gold, header,
                     [&](std::ostream& o) { write_spans(o, label_spans(gold_label_rows(data), tg_strict)); });
    } else if (*eval) {
      const auto pred = read_span_file(ev_pred);
      const auto gold = read_span_file(ev_gold);
      std::ostringstream tsv;
      tsv.precision(6);
      tsv << "system\tprecision\trecall\tf1\n";
      auto line = [&](const std::string& name, const Prf& p) {
        tsv << name << '\t' << p.precision << '\t' << p.recall << '\t' << p.f1 << '\n';
      };
      line(ev_pred, span_f1(pred, gold));
      if (!ev_compare.empty()) {
        const auto other = read_span_file(ev_compare);
        line(ev_compare, span_f1(other, gold));
        tsv << "p_value\t" << approx_randomization(pred, other, gold, ev_iters, ev_seed) << '\n';
      }
      if (ev_out.empty())
        std::cout << tsv.str();
      else
        write_atomic(ev_out, provenance(*eval), [&](std::ostream& o) { o << tsv.str(); });
    } else if (*query) {
      auto model = load_model(qu_model);
      auto id = model.vocab.word_id(to_lower(qu_word));
      if (!id) throw Error("'" + qu_word + "' is not in the vocabulary");
      auto hits = qu_path.empty()
                      ? nearest_neighbors(*id, qu_k, model.params)
                      : nearest_neighbors(*id, parse_path(qu_path, model.vocab), qu_k, model.params);
      std::cout.precision(6);
      for (std::size_t r = 0; r < hits.size(); ++r)
        std::cout << r + 1 << '\t' << model.vocab.word(hits[r].word) << '\t' << hits[r].cosine << '\n';
    } else if (*sweep) {
      sw_opt.sets = FeatureSets::parse(sw_sets);
      const auto l_grid = parse_grid(sw_l);
      const auto d_grid = parse_grid(sw_d);
      auto sentences = read_corpus(sw_conllu);
      auto [train, dev] = split_sentences(sentences, sw_ratio, sw_split_seed);
      std::ostringstream tsv;
      tsv.precision(6);
      tsv << "d\tl\tprecision\trecall\tf1\n";
      for (int d : d_grid) {
        if (d < 1) throw UsageError("--d values must be positive");
        auto cfg = sw.cfg;
        cfg.dim = static_cast<std::size_t>(d);
        cfg.validate();
        // embeddings see every sentence, labels are only used on the train side
        auto model = train_embeddings(sentences, sw.min_count, cfg);
        for (int l : l_grid) {
          auto r = run_tagging(train, dev, model, sw_opt, l, sw_crf);
          tsv << d << '\t' << l << '\t' << r.score.precision << '\t' << r.score.recall << '\t' << r.score.f1 << '\n';
          std::cerr << "d=" << d << " l=" << l << " f1=" << r.score.f1 << '\n';
        }
      }
      write_atomic(sw_out, provenance(*sweep), [&](std::ostream& o) { o << tsv.str(); });
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
