#include "wdemb/embed.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace wdemb {

ModelParams ModelParams::zeros(std::size_t num_words, std::size_t num_directed_relations, std::size_t dim) {
  ModelParams p;
  p.dim = dim;
  p.target_words = Matrix(num_words, dim);
  p.context_words = Matrix(num_words, dim);
  p.relations = Matrix(num_directed_relations, dim);
  p.composer = Matrix(dim, 2 * dim);
  return p;
}

ModelParams ModelParams::initialize(std::size_t num_words, std::size_t num_directed_relations, std::size_t dim,
                                    Rng& rng) {
  if (dim == 0) throw Error("embedding dimension must be >= 1");
  auto p = zeros(num_words, num_directed_relations, dim);
  const double word_range = 0.5 / static_cast<double>(dim);
  std::uniform_real_distribution<double> word_init(-word_range, word_range);
  for (auto& v : p.target_words.data()) v = word_init(rng);
  for (auto& v : p.relations.data()) v = word_init(rng);
  const double w_range = std::sqrt(6.0 / (3.0 * static_cast<double>(dim)));
  std::uniform_real_distribution<double> w_init(-w_range, w_range);
  for (auto& v : p.composer.data()) v = w_init(rng);
  return p;
}

bool ModelParams::all_finite() const {
  auto finite = [](const Matrix& m) {
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
  };
  return finite(target_words) && finite(context_words) && finite(relations) && finite(composer);
}

namespace {

std::span<const double> relation_row(const ModelParams& params, const DirectedRelation& rel) {
  if (rel.label < 0 || rel.row() >= params.relations.rows())
    throw Error("unknown relation id " + std::to_string(rel.label));
  return params.relations.row(rel.row());
}

std::span<const double> target_row(const ModelParams& params, WordId w) {
  if (w < 0 || static_cast<std::size_t>(w) >= params.target_words.rows())
    throw Error("unknown word id " + std::to_string(w));
  return params.target_words.row(static_cast<std::size_t>(w));
}

std::span<const double> context_row(const ModelParams& params, WordId w) {
  if (w < 0 || static_cast<std::size_t>(w) >= params.context_words.rows())
    throw Error("unknown word id " + std::to_string(w));
  return params.context_words.row(static_cast<std::size_t>(w));
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// Pushes `upstream` (dL/dh_n) back through the composition of `path`.
void backprop_path(const DepPath& path, const CompositionTrace& trace, std::vector<double> upstream,
                   const ModelParams& params, SparseGradient& grad) {
  const std::size_t d = params.dim;
  const std::size_t n = path.hops();
  std::vector<double> dz(d);
  for (std::size_t i = n - 1; i >= 1; --i) {
    const auto& z = trace.preactivation[i];
    for (std::size_t r = 0; r < d; ++r) dz[r] = std::abs(z[r]) < 1.0 ? upstream[r] : 0.0;
    const auto& h_prev = trace.hidden[i - 1];
    auto g = relation_row(params, path.steps[i]);
    if (grad.composer.rows() == 0) grad.composer = Matrix(d, 2 * d);
    std::vector<double> dh_prev(d, 0.0);
    auto& dg = SparseGradient::row_for(grad.relation, path.steps[i].row(), d);
    for (std::size_t r = 0; r < d; ++r) {
      if (dz[r] == 0.0) continue;
      auto w_row = params.composer.row(r);
      auto gw_row = grad.composer.row(r);
      for (std::size_t c = 0; c < d; ++c) {
        gw_row[c] += dz[r] * h_prev[c];
        gw_row[d + c] += dz[r] * g[c];
        dh_prev[c] += w_row[c] * dz[r];
        dg[c] += w_row[d + c] * dz[r];
      }
    }
    upstream = std::move(dh_prev);
  }
  auto& dg0 = SparseGradient::row_for(grad.relation, path.steps[0].row(), d);
  axpy(1.0, upstream, dg0);
}

}  // namespace

CompositionTrace compose_path_traced(const DepPath& path, const ModelParams& params) {
  if (path.empty()) throw Error("cannot compose an empty path");
  const std::size_t d = params.dim;
  CompositionTrace trace;
  auto g0 = relation_row(params, path.steps[0]);
  trace.hidden.emplace_back(g0.begin(), g0.end());
  trace.preactivation.emplace_back();
  for (std::size_t i = 1; i < path.hops(); ++i) {
    auto g = relation_row(params, path.steps[i]);
    const auto& h = trace.hidden.back();
    std::vector<double> z(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
      auto w_row = params.composer.row(r);
      z[r] = dot(w_row.subspan(0, d), h) + dot(w_row.subspan(d, d), g);
    }
    std::vector<double> next(d);
    std::transform(z.begin(), z.end(), next.begin(), htanh);
    trace.preactivation.push_back(std::move(z));
    trace.hidden.push_back(std::move(next));
  }
  return trace;
}

std::vector<double> compose_path(const DepPath& path, const ModelParams& params) {
  return compose_path_traced(path, params).output();
}

std::vector<double>& SparseGradient::row_for(Rows& rows, std::size_t index, std::size_t dim) {
  for (auto& [i, v] : rows)
    if (i == index) return v;
  rows.emplace_back(index, std::vector<double>(dim, 0.0));
  return rows.back().second;
}

LossAndGradient path_loss_and_grads(const Triple& triple, std::span<const DepPath> negatives,
                                    const ModelParams& params) {
  if (negatives.empty()) throw Error("path loss needs at least one negative");
  const std::size_t d = params.dim;
  auto w1 = target_row(params, triple.w1);
  auto w2 = target_row(params, triple.w2);
  std::vector<double> u(d);
  for (std::size_t i = 0; i < d; ++i) u[i] = w2[i] - w1[i];

  const auto positive = compose_path_traced(triple.path, params);
  const double pos_score = dot(u, positive.output());

  LossAndGradient out;
  std::vector<double> du(d, 0.0);
  int active = 0;
  for (const auto& neg : negatives) {
    if (neg.hops() != triple.path.hops()) throw Error("negative path hop count differs from the triple's");
    auto trace = compose_path_traced(neg, params);
    const double margin = 1.0 - pos_score + dot(u, trace.output());
    if (margin <= 0.0) continue;
    out.loss += margin;
    ++active;
    const auto& r_neg = trace.output();
    for (std::size_t i = 0; i < d; ++i) du[i] += r_neg[i] - positive.output()[i];
    backprop_path(neg, trace, u, params, out.grad);
  }
  if (active == 0) return out;

  std::vector<double> up_pos(d);
  for (std::size_t i = 0; i < d; ++i) up_pos[i] = -static_cast<double>(active) * u[i];
  backprop_path(triple.path, positive, std::move(up_pos), params, out.grad);

  axpy(1.0, du, SparseGradient::row_for(out.grad.target, static_cast<std::size_t>(triple.w2), d));
  axpy(-1.0, du, SparseGradient::row_for(out.grad.target, static_cast<std::size_t>(triple.w1), d));
  return out;
}

LossAndGradient context_loss_and_grads(const ContextPair& pair, std::span<const WordId> negatives,
                                       const ModelParams& params) {
  if (negatives.empty()) throw Error("context loss needs at least one negative");
  const std::size_t d = params.dim;
  auto w = target_row(params, pair.target);
  auto c = context_row(params, pair.context);
  const double pos = dot(w, c);

  LossAndGradient out;
  std::vector<double> dw(d, 0.0);
  int active = 0;
  for (WordId neg : negatives) {
    if (neg == pair.context) throw Error("negative context equals the true context");
    auto cn = context_row(params, neg);
    const double margin = 1.0 - pos + dot(w, cn);
    if (margin <= 0.0) continue;
    out.loss += margin;
    ++active;
    for (std::size_t i = 0; i < d; ++i) dw[i] += cn[i] - c[i];
    axpy(1.0, w, SparseGradient::row_for(out.grad.context, static_cast<std::size_t>(neg), d));
  }
  if (active == 0) return out;
  axpy(-static_cast<double>(active), w,
       SparseGradient::row_for(out.grad.context, static_cast<std::size_t>(pair.context), d));
  axpy(1.0, dw, SparseGradient::row_for(out.grad.target, static_cast<std::size_t>(pair.target), d));
  return out;
}

void apply_gradient(ModelParams& params, const SparseGradient& grad, double lr) {
  for (const auto& [row, g] : grad.target) axpy(-lr, g, params.target_words.row(row));
  for (const auto& [row, g] : grad.context) axpy(-lr, g, params.context_words.row(row));
  for (const auto& [row, g] : grad.relation) axpy(-lr, g, params.relations.row(row));
  if (grad.composer.rows() != 0) axpy(-lr, grad.composer.data(), params.composer.data());
}

std::vector<DepPath> sample_negative_paths(std::size_t hop, int k, const DepPath& exclude,
                                           const Vocabulary& vocab, Rng& rng) {
  const auto& table = vocab.path_table().table(hop);
  const auto& paths = vocab.path_table().paths(hop);
  if (table.empty()) throw Error("no " + std::to_string(hop) + "-hop paths to sample from");
  constexpr int kRedraws = 10;
  std::vector<DepPath> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    std::size_t pick = table.sample(rng);
    for (int t = 0; t < kRedraws && paths[pick] == exclude; ++t) pick = table.sample(rng);
    out.push_back(paths[pick]);
  }
  return out;
}

std::vector<WordId> sample_negative_words(int k, WordId exclude, const Vocabulary& vocab, Rng& rng) {
  const auto& table = vocab.word_table();
  const bool exclude_in_vocab = exclude >= 0 && static_cast<std::size_t>(exclude) < table.size();
  if (table.size() < 2 && (table.empty() || exclude_in_vocab))
    throw Error("need at least two words to sample negatives");
  std::vector<WordId> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    WordId pick;
    do {
      pick = static_cast<WordId>(table.sample(rng));
    } while (pick == exclude);
    out.push_back(pick);
  }
  return out;
}

void TrainConfig::validate() const {
  if (dim < 1) throw Error("dim must be >= 1");
  if (neg_words < 1) throw Error("neg_words must be >= 1");
  if (max_hops < 1) throw Error("max_hops must be >= 1");
  if (neg_paths.size() < static_cast<std::size_t>(max_hops))
    throw Error("neg_paths needs one entry per hop count up to max_hops");
  for (int k : neg_paths)
    if (k < 1) throw Error("neg_paths entries must be >= 1");
  if (!(initial_lr > 0.0)) throw Error("initial_lr must be > 0");
  if (window < 1) throw Error("window must be >= 1");
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (threads < 1) throw Error("threads must be >= 1");
}

std::vector<ContextPair> linear_context_pairs(const std::vector<std::optional<WordId>>& ids, int window) {
  std::vector<ContextPair> pairs;
  const auto n = static_cast<long>(ids.size());
  for (long i = 0; i < n; ++i) {
    if (!ids[static_cast<std::size_t>(i)]) continue;
    for (long j = std::max(0L, i - window); j <= std::min(n - 1, i + window); ++j) {
      if (j == i || !ids[static_cast<std::size_t>(j)]) continue;
      pairs.push_back({*ids[static_cast<std::size_t>(i)], *ids[static_cast<std::size_t>(j)]});
    }
  }
  return pairs;
}

namespace {

std::vector<std::optional<WordId>> sentence_ids(const ParsedSentence& s, const Vocabulary& vocab) {
  std::vector<std::optional<WordId>> ids;
  ids.reserve(s.size());
  for (const auto& t : s.tokens) ids.push_back(vocab.word_id(t.form));
  return ids;
}

// A sentence's training instances in corpus order: for each token, its linear
// context pairs and then the triples starting at it.
struct Instance {
  std::optional<ContextPair> pair;
  Triple triple;
};

std::vector<Instance> instances_of(const ParsedSentence& s, const Vocabulary& vocab, const TrainConfig& cfg) {
  auto ids = sentence_ids(s, vocab);
  std::vector<Instance> out;
  const auto n = static_cast<long>(s.size());
  for (long i = 0; i < n; ++i) {
    const auto& w = ids[static_cast<std::size_t>(i)];
    if (!w) continue;
    for (long j = std::max(0L, i - cfg.window); j <= std::min(n - 1, i + cfg.window); ++j) {
      const auto& c = ids[static_cast<std::size_t>(j)];
      if (j != i && c) out.push_back({ContextPair{*w, *c}, {}});
    }
    for (auto& ctx : dependency_context(s, vocab, static_cast<std::size_t>(i), cfg.max_hops))
      if (ctx.word) out.push_back({std::nullopt, Triple{*w, *ctx.word, std::move(ctx.path)}});
  }
  return out;
}

}  // namespace

ModelParams train(const std::vector<ParsedSentence>& sentences, const Vocabulary& vocab, const TrainConfig& config,
                  TrainStats* stats) {
  config.validate();
  if (vocab.num_words() < 2) throw Error("vocabulary needs at least two words");
  if (vocab.path_table().empty()) throw Error("path tables are empty; index the corpus first");

  std::size_t per_epoch = 0;
  for (const auto& s : sentences) per_epoch += instances_of(s, vocab, config).size();
  if (per_epoch == 0) throw Error("no trainable instances");
  const std::size_t total = per_epoch * static_cast<std::size_t>(config.epochs);

  Rng init_rng(config.seed);
  ModelParams params = ModelParams::initialize(vocab.num_words(), vocab.num_directed_relations(), config.dim, init_rng);

  std::atomic<std::size_t> processed{0};
  std::mutex stats_mutex;
  TrainStats local_stats;
  local_stats.total_instances = total;

  const auto n_threads = static_cast<std::size_t>(config.threads);
  auto worker = [&](std::size_t tid) {
    Rng rng(config.seed + 0x9e3779b97f4a7c15ull * (tid + 1));
    const std::size_t begin = sentences.size() * tid / n_threads;
    const std::size_t end = sentences.size() * (tid + 1) / n_threads;
    double block_loss = 0.0;
    std::size_t block_count = 0;

    auto step = [&](const LossAndGradient& lg) {
      const std::size_t done = processed.fetch_add(1, std::memory_order_relaxed);
      const double frac = static_cast<double>(done) / static_cast<double>(total);
      const double lr = config.initial_lr * std::max(1e-4, 1.0 - frac);
      apply_gradient(params, lg.grad, lr);
      block_loss += lg.loss;
      if (++block_count == TrainStats::kLossBlock) {
        std::lock_guard lock(stats_mutex);
        local_stats.loss_trace.push_back(block_loss / static_cast<double>(block_count));
        block_loss = 0.0;
        block_count = 0;
      }
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      for (std::size_t si = begin; si < end; ++si) {
        for (const auto& inst : instances_of(sentences[si], vocab, config)) {
          if (inst.pair) {
            auto negs = sample_negative_words(config.neg_words, inst.pair->context, vocab, rng);
            step(context_loss_and_grads(*inst.pair, negs, params));
          } else {
            const std::size_t hop = inst.triple.path.hops();
            auto negs = sample_negative_paths(hop, config.neg_paths[hop - 1], inst.triple.path, vocab, rng);
            step(path_loss_and_grads(inst.triple, negs, params));
          }
        }
      }
    }
    std::lock_guard lock(stats_mutex);
    if (block_count > 0) local_stats.loss_trace.push_back(block_loss / static_cast<double>(block_count));
  };

  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
  }
  local_stats.updates = processed.load();
  if (stats) *stats = std::move(local_stats);
  return params;
}

double ranking_score(WordId w1, WordId w2, const DepPath& path, const ModelParams& params) {
  auto a = target_row(params, w1);
  auto b = target_row(params, w2);
  auto r = compose_path(path, params);
  double s = 0.0;
  for (std::size_t i = 0; i < params.dim; ++i) s += (b[i] - a[i]) * r[i];
  return s;
}

std::vector<Neighbor> nearest_neighbors(std::span<const double> query, int k, const ModelParams& params,
                                        std::optional<WordId> exclude) {
  if (k < 1) throw Error("k must be >= 1");
  if (query.size() != params.dim) throw Error("query dimension mismatch");
  const double qn = std::sqrt(dot(query, query));
  if (!(qn > 0.0)) throw Error("undefined cosine: zero-norm query");
  std::vector<Neighbor> all;
  for (std::size_t w = 0; w < params.target_words.rows(); ++w) {
    if (exclude && static_cast<std::size_t>(*exclude) == w) continue;
    auto row = params.target_words.row(w);
    const double rn = std::sqrt(dot(row, row));
    const double cos = rn > 0.0 ? dot(query, row) / (qn * rn) : 0.0;
    all.push_back({static_cast<WordId>(w), cos});
  }
  const auto top = std::min(all.size(), static_cast<std::size_t>(k));
  std::partial_sort(all.begin(), all.begin() + static_cast<long>(top), all.end(), [](const auto& a, const auto& b) {
    return a.cosine != b.cosine ? a.cosine > b.cosine : a.word < b.word;
  });
  all.resize(top);
  return all;
}

std::vector<Neighbor> nearest_neighbors(WordId word, int k, const ModelParams& params) {
  return nearest_neighbors(target_row(params, word), k, params, word);
}

std::vector<Neighbor> nearest_neighbors(WordId word, const DepPath& path, int k, const ModelParams& params) {
  auto w = target_row(params, word);
  auto q = compose_path(path, params);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] += w[i];
  return nearest_neighbors(q, k, params, word);
}

void write_text_matrix(std::ostream& out, const Matrix& m, const std::vector<std::string>& names) {
  if (names.size() != m.rows()) throw Error("row name count does not match matrix");
  out << m.rows() << ' ' << m.cols() << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << names[r];
    for (double v : m.row(r)) out << ' ' << v;
    out << '\n';
  }
}

Matrix read_text_matrix(std::istream& in, std::vector<std::string>* names) {
  std::string line;
  while (std::getline(in, line) && !line.empty() && line[0] == '#') {
  }
  std::istringstream header(line);
  std::size_t rows = 0, cols = 0;
  if (!(header >> rows >> cols)) throw Error("embedding file: bad header '" + line + "'");
  Matrix m(rows, cols);
  if (names) names->clear();
  for (std::size_t r = 0; r < rows; ++r) {
    std::string name;
    if (!(in >> name)) throw Error("embedding file: truncated at row " + std::to_string(r));
    for (std::size_t c = 0; c < cols; ++c)
      if (!(in >> m(r, c))) throw Error("embedding file: bad value in row " + std::to_string(r));
    if (names) names->push_back(std::move(name));
  }
  return m;
}

namespace {
constexpr char kComposerMagic[8] = {'W', 'D', 'E', 'M', 'B', 'W', '0', '1'};
static_assert(std::endian::native == std::endian::little, "composer files are little-endian");
}  // namespace

void write_composer(std::ostream& out, const Matrix& composer) {
  const std::uint64_t d = composer.rows();
  if (composer.cols() != 2 * d) throw Error("composer must be d x 2d");
  out.write(kComposerMagic, sizeof kComposerMagic);
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  out.write(reinterpret_cast<const char*>(composer.data().data()),
            static_cast<std::streamsize>(composer.data().size() * sizeof(double)));
}

Matrix read_composer(std::istream& in) {
  char magic[8];
  std::uint64_t d = 0;
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kComposerMagic, sizeof magic) != 0)
    throw Error("composer file: bad magic");
  if (!in.read(reinterpret_cast<char*>(&d), sizeof d) || d == 0 || d > (1u << 16))
    throw Error("composer file: bad dimension");
  Matrix m(d, 2 * d);
  if (!in.read(reinterpret_cast<char*>(m.data().data()), static_cast<std::streamsize>(m.data().size() * sizeof(double))))
    throw Error("composer file: truncated");
  return m;
}

std::vector<std::string> word_names(const Vocabulary& vocab) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < vocab.num_words(); ++i) names.push_back(vocab.word(static_cast<WordId>(i)));
  return names;
}

std::vector<std::string> relation_names(const Vocabulary& vocab) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < vocab.num_directed_relations(); ++i) {
    auto rel = DirectedRelation::from_row(i);
    names.push_back(vocab.relation(rel.label) + (rel.dir == Direction::kUp ? ":u" : ":d"));
  }
  return names;
}

}  // namespace wdemb
