// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"
#include "wdemb/discretize.hpp"
#include "wdemb/pipeline.hpp"

using namespace wdemb;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void run(int id, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0 && secs >= limit_seconds) {
    o.pass = false;
    o.detail += fmt("; over the %.0f s limit", limit_seconds);
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d: %s  %s  [%.2f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
  std::fflush(stdout);
}

Outcome gradients() {
  Rng rng(2024);
  const std::size_t dims[] = {3, 5, 10};
  double worst_path = 0.0, worst_ctx = 0.0;
  for (std::size_t hops = 1; hops <= 3; ++hops)
    for (int i = 0; i < 100; ++i) {
      auto inst = testing::random_path_instance(dims[i % 3], hops, rng);
      worst_path = std::max(worst_path, testing::check_path_gradient(inst).relative_error);
    }
  for (int i = 0; i < 100; ++i) {
    auto inst = testing::random_context_instance(dims[i % 3], rng);
    worst_ctx = std::max(worst_ctx, testing::check_context_gradient(inst).relative_error);
  }
  return {worst_path < 1e-4 && worst_ctx < 1e-4,
          fmt("max rel err path %.2e", worst_path) + fmt(", context %.2e", worst_ctx)};
}

Outcome composition() {
  Rng rng(3);
  bool ok = true;
  std::size_t checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 9);
    auto p = ModelParams::zeros(1, 8, d);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (auto& v : p.relations.data()) v = u(rng);
    for (auto& v : p.composer.data()) v = u(rng);
    DepPath path;
    const std::size_t hops = 1 + static_cast<std::size_t>(trial % 3);
    for (std::size_t h = 0; h < hops; ++h) path.steps.push_back(DirectedRelation::from_row(rng() % 8));
    auto out = compose_path(path, p);
    if (hops == 1) {
      auto row = p.relations.row(path.steps[0].row());
      ok = ok && std::equal(out.begin(), out.end(), row.begin(), row.end());
    } else {
      for (double v : out) ok = ok && v >= -1.0 && v <= 1.0;
    }
    ++checked;
  }
  return {ok, std::to_string(checked) + " random paths, 1-hop exact, multi-hop within [-1, 1]"};
}

Outcome viterbi() {
  Rng rng(4);
  int exact = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 6);
    auto inst = testing::random_crf(n, 8, rng);
    auto c = inst.model.compile(inst.rows);
    auto oracle = testing::enumerate_crf(inst.model, c);
    if (viterbi_decode(inst.model, c) == oracle.best) ++exact;
    auto fb = forward_backward(inst.model, c);
    for (std::size_t i = 0; i < n; ++i)
      for (int y = 0; y < kNumLabels; ++y) worst = std::max(worst, std::abs(fb.marginals[i][y] - oracle.marginals[i][y]));
  }
  return {exact == 100 && worst < 1e-9, std::to_string(exact) + "/100 exact decodes" + fmt(", max marginal err %.1e", worst)};
}

// Mann-Whitney AUC with ties counted half.
double auc(std::vector<double> pos, std::vector<double> neg) {
  std::sort(neg.begin(), neg.end());
  double wins = 0.0;
  for (double p : pos) {
    auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    auto hi = std::upper_bound(neg.begin(), neg.end(), p);
    wins += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

constexpr int kPlantedEpochs = 1;

Outcome planted() {
  auto corpus = testing::planted_corpus(5000, 7);
  TrainConfig cfg;
  cfg.dim = 25;
  cfg.threads = 1;
  cfg.seed = 11;
  cfg.epochs = kPlantedEpochs;
  TrainStats stats;
  auto model = train_embeddings(corpus.sentences, 1, cfg, &stats);
  const auto& vocab = model.vocab;

  // true triples: every amod arc, adjective to noun; negatives swap in another
  // one-hop path drawn from the same table the trainer uses
  const auto amod = parse_path("amod:u", vocab);
  std::vector<double> pos, neg;
  Rng rng(12);
  for (const auto& s : corpus.sentences)
    for (const auto& t : extract_triples(s, vocab, 1))
      if (t.path == amod) {
        pos.push_back(ranking_score(t.w1, t.w2, t.path, model.params));
        for (const auto& p : sample_negative_paths(1, 1, amod, vocab, rng))
          neg.push_back(ranking_score(t.w1, t.w2, p, model.params));
      }
  const double a = auc(pos, neg);

  std::set<WordId> class_b;
  for (const auto& w : corpus.class_b) class_b.insert(*vocab.word_id(w));
  int hits = 0;
  for (const auto& w : corpus.class_a) {
    auto top = nearest_neighbors(*vocab.word_id(w), amod, 5, model.params);
    if (std::any_of(top.begin(), top.end(), [&](const Neighbor& n) { return class_b.count(n.word) > 0; })) ++hits;
  }
  const double frac = hits / static_cast<double>(corpus.class_a.size());
  const bool trend = stats.loss_trace.size() >= 2 && stats.loss_trace.back() < stats.loss_trace.front();
  return {a >= 0.95 && frac >= 0.8,
          fmt("AUC %.4f", a) + fmt(", class-B in top-5 for %.0f%% of class-A", 100 * frac) +
              fmt(", vocab %.0f", static_cast<double>(vocab.num_words())) +
              fmt(", loss trace %.4f", stats.loss_trace.empty() ? 0.0 : stats.loss_trace.front()) +
              fmt(" -> %.4f", stats.loss_trace.empty() ? 0.0 : stats.loss_trace.back()) + (trend ? "" : " (no descent)")};
}

Outcome discretization() {
  Rng rng(6);
  constexpr std::size_t d = 8;
  constexpr int bins = 15;
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::vector<std::vector<double>> cols(10000, std::vector<double>(d));
  for (auto& c : cols)
    for (std::size_t k = 0; k < d; ++k) c[k] = u(rng) * static_cast<double>(k + 1);
  auto table = fit_discretizer(cols, bins);
  const auto& disc = table.discretizer;
  bool range = true, ends = true, mono = true;
  for (const auto& c : table.codes)
    for (int v : c) range = range && v >= 0 && v < bins;
  for (std::size_t k = 0; k < d; ++k)
    ends = ends && disc.code(k, disc.mins()[k]) == 0 && disc.code(k, disc.maxs()[k]) == bins - 1;
  // monotonicity on 10k random comparable pairs
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> x(d), y(d);
    for (std::size_t k = 0; k < d; ++k) {
      x[k] = u(rng) * 2.0 * static_cast<double>(k + 1);
      y[k] = x[k] + std::abs(u(rng));
    }
    auto cx = disc.apply(x), cy = disc.apply(y);
    for (std::size_t k = 0; k < d; ++k) {
      mono = mono && cx[k] <= cy[k];
      range = range && cx[k] >= 0 && cx[k] < bins && cy[k] >= 0 && cy[k] < bins;
    }
  }
  return {range && ends && mono, std::string("range ") + (range ? "ok" : "violated") + ", endpoints " +
                                     (ends ? "ok" : "wrong") + ", monotone " + (mono ? "ok" : "violated")};
}

struct ToyConfig {
  std::size_t sentences = 2000;
  std::size_t dim = 25;
  int emb_epochs = 1;
  double emb_lr = 0.001;
  int bins = kDefaultBins;
  CrfTrainConfig crf;
};

struct ToyRun {
  EmbeddingModel model;
  std::map<std::string, TaggingResult> results;
};

ToyRun toy_pipeline(const ToyConfig& c, const std::vector<std::string>& sets) {
  auto corpus = testing::aspect_corpus(c.sentences, 21);
  auto [train, test] = split_sentences(corpus, 0.8, 22);
  TrainConfig cfg;
  cfg.dim = c.dim;
  cfg.epochs = c.emb_epochs;
  cfg.initial_lr = c.emb_lr;
  cfg.seed = 23;
  ToyRun run{train_embeddings(corpus, 1, cfg), {}};
  for (const auto& s : sets) {
    FeatureOptions opt;
    opt.sets = FeatureSets::parse(s);
    run.results[s] = run_tagging(train, test, run.model, opt, c.bins, c.crf);
  }
  return run;
}

// Embedding lr and epochs are raised from the CLI defaults: at lr 0.001 a
// single pass leaves the dependency block close to noise on this corpus size.
ToyConfig toy_config() {
  ToyConfig c;
  c.sentences = 6000;
  c.dim = 25;
  c.emb_epochs = 5;
  c.emb_lr = 0.025;
  return c;
}

Outcome toy() {
  auto run = toy_pipeline(toy_config(), {"W", "W+L", "W+L+D"});
  const double w = run.results["W"].score.f1, wl = run.results["W+L"].score.f1, wld = run.results["W+L+D"].score.f1;
  return {wld >= 0.90 && wld >= wl && wl >= w,
          fmt("F1 W %.4f", w) + fmt(", W+L %.4f", wl) + fmt(", W+L+D %.4f", wld)};
}

Outcome significance() {
  SpanSet gold, a, b;
  Rng rng(8);
  for (int s = 0; s < 10; ++s) {
    const auto id = std::to_string(s);
    for (int k = 1; k <= 3; ++k) {
      const Span sp{2 * k, 2 * k + static_cast<int>(rng() % 2)};
      gold[id].insert(sp);
      if (rng() % 4) a[id].insert(sp); else a[id].insert({sp.start, sp.start});
      if (rng() % 2) b[id].insert(sp); else b[id].insert({sp.start + 1, sp.start + 1});
    }
  }
  const double same = approx_randomization(a, a, gold, 10000, 1);
  const double exact = testing::exact_randomization(a, b, gold);
  const double mc = approx_randomization(a, b, gold, 10000, 2);
  return {same == 1.0 && std::abs(mc - exact) <= 0.02,
          fmt("identical p %.4f", same) + fmt(", exact %.4f", exact) + fmt(" vs Monte-Carlo %.4f", mc)};
}

Outcome determinism() {
  ToyConfig c;
  c.sentences = 300;
  c.dim = 10;
  c.crf.epochs = 3;
  auto snapshot = [&] {
    auto corpus = testing::aspect_corpus(c.sentences, 31);
    TrainConfig cfg;
    cfg.dim = c.dim;
    cfg.seed = 32;
    cfg.threads = 1;
    auto model = train_embeddings(corpus, 1, cfg);
    FeatureOptions opt;
    opt.sets = FeatureSets::parse("W+L+D");
    opt.baseline = true;
    auto disc = fit_feature_discretizers(corpus, model, opt, c.bins);
    auto rows = build_feature_rows(corpus, model, disc, opt, true);
    auto tagger = train_crf(rows, c.crf);
    auto score = span_f1(label_spans(decode_all(tagger, rows)), label_spans(gold_label_rows(rows)));
    std::ostringstream out;
    write_text_matrix(out, model.params.target_words, word_names(model.vocab));
    write_text_matrix(out, model.params.context_words, word_names(model.vocab));
    write_text_matrix(out, model.params.relations, relation_names(model.vocab));
    write_composer(out, model.params.composer);
    write_feature_file(out, rows);
    tagger.save(out);
    out << fmt("%.17g", score.f1);
    return std::make_pair(model.params, out.str());
  };
  auto first = snapshot();
  auto second = snapshot();
  const bool same = first.first == second.first && first.second == second.second;
  return {same, same ? "embeddings, features, model and scores bit-identical across two runs"
                     : "runs differ"};
}

}  // namespace

int main() {
  std::printf("criterion 1: not run (needs full-size benchmark data)\n");
  run(2, 10, gradients);
  run(3, 0, composition);
  run(4, 5, viterbi);
  run(5, 60, planted);
  run(6, 0, discretization);
  run(7, 120, toy);
  run(8, 0, significance);
  run(9, 0, determinism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
