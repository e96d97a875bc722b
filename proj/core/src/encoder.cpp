#include "fsmirl/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <utility>

#include <nlohmann/json.hpp>

#include "fsmirl/rng.hpp"
#include "fsmirl/types.hpp"

namespace fsmirl {

EncoderParams init_params(Eigen::Index d_in, Eigen::Index hidden,
                          Eigen::Index num_classes, std::uint64_t seed) {
  if (d_in <= 0 || hidden <= 0 || num_classes <= 0)
    throw ConfigError("init_params: dimensions must be positive");
  rng::Engine eng(rng::derive(seed, rng::kInit));
  auto fill = [&eng](Eigen::MatrixXd& m) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        m(r, c) = eng.uniform(-bound, bound);
  };
  EncoderParams p;
  p.w1.resize(2 * d_in, hidden);
  p.w2.resize(2 * hidden, hidden);
  p.wc.resize(hidden, num_classes);
  fill(p.w1);
  fill(p.w2);
  fill(p.wc);
  p.b1 = Eigen::VectorXd::Zero(hidden);
  p.b2 = Eigen::VectorXd::Zero(hidden);
  p.bc = Eigen::VectorXd::Zero(num_classes);
  return p;
}

std::vector<NodeId> UniformSampler::draw(NodeId v, std::size_t s,
                                         std::uint64_t seed) const {
  const auto nbrs = g_->neighbors(v);
  if (nbrs.empty() || s == 0) return {};
  rng::Engine eng(seed);
  std::vector<NodeId> out;
  out.reserve(s);
  if (nbrs.size() < s) {
    for (std::size_t k = 0; k < s; ++k)
      out.push_back(nbrs[eng.uniform_int(nbrs.size())]);
  } else {
    for (std::size_t i : eng.sample_indices(nbrs.size(), s))
      out.push_back(nbrs[i]);
  }
  return out;
}

std::vector<NodeId> ProfileSampler::draw(NodeId v, std::size_t s,
                                         std::uint64_t seed) const {
  const auto& profile = profiles_.at(static_cast<std::size_t>(v));
  if (profile.empty() || s == 0) return {};
  return sample_neighbors(profile, s, seed).nodes;
}

namespace {

struct ForwardCache {
  std::vector<NodeId> need;               // nodes requiring h1, ascending
  std::vector<Eigen::Index> batch_pos;    // row in need per batch node
  std::vector<std::vector<Eigen::Index>> outer_pos;  // rows in need
  Eigen::MatrixXd c1, a1, h1;             // |need| rows
  Eigen::MatrixXd c2, a2, h2, logits;     // |batch| rows
};

void check_shapes(const Graph& g, const EncoderParams& p) {
  if (p.w1.rows() != 2 * g.feature_dim() || p.b1.size() != p.w1.cols())
    throw ShapeError("layer 1: weight/bias shapes do not fit input dim " +
                     std::to_string(g.feature_dim()));
  if (p.w2.rows() != 2 * p.w1.cols() || p.b2.size() != p.w2.cols())
    throw ShapeError("layer 2: weight/bias shapes do not fit hidden dim " +
                     std::to_string(p.w1.cols()));
  if (p.wc.rows() != p.w2.cols() || p.bc.size() != p.wc.cols())
    throw ShapeError("classifier: weight/bias shapes do not fit hidden dim " +
                     std::to_string(p.w2.cols()));
}

ForwardCache run_forward(const Graph& g, std::span<const NodeId> batch,
                         const EncoderParams& p, const NeighborSampler& sampler,
                         int s, std::uint64_t seed) {
  if (batch.empty()) throw ValidationError("forward: empty batch");
  if (s < 0) throw ConfigError("forward: negative sample size");
  check_shapes(g, p);
  for (NodeId v : batch) g.degree(v);  // validates the id range

  const auto su = static_cast<std::size_t>(s);
  ForwardCache cache;
  std::vector<std::vector<NodeId>> outer(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k)
    outer[k] = sampler.draw(batch[k], su,
                            rng::derive(seed, rng::kSampleLayer2, batch[k]));

  std::vector<NodeId> need(batch.begin(), batch.end());
  for (const auto& o : outer) need.insert(need.end(), o.begin(), o.end());
  std::sort(need.begin(), need.end());
  need.erase(std::unique(need.begin(), need.end()), need.end());
  cache.need = std::move(need);

  std::vector<Eigen::Index> pos(static_cast<std::size_t>(g.num_nodes()), -1);
  for (std::size_t i = 0; i < cache.need.size(); ++i)
    pos[static_cast<std::size_t>(cache.need[i])] =
        static_cast<Eigen::Index>(i);
  cache.batch_pos.reserve(batch.size());
  for (NodeId v : batch)
    cache.batch_pos.push_back(pos[static_cast<std::size_t>(v)]);
  cache.outer_pos.resize(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    cache.outer_pos[k].reserve(outer[k].size());
    for (NodeId u : outer[k])
      cache.outer_pos[k].push_back(pos[static_cast<std::size_t>(u)]);
  }

  const Eigen::Index d = g.feature_dim();
  const Eigen::Index h = p.w1.cols();
  const auto rows = static_cast<Eigen::Index>(cache.need.size());
  cache.c1.setZero(rows, 2 * d);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const NodeId u = cache.need[static_cast<std::size_t>(i)];
    cache.c1.row(i).head(d) = g.features().row(u);
    const auto inner =
        sampler.draw(u, su, rng::derive(seed, rng::kSampleLayer1, u));
    if (!inner.empty()) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d);
      for (NodeId t : inner) mean += g.features().row(t);
      cache.c1.row(i).tail(d) = mean / static_cast<double>(inner.size());
    }
  }
  cache.a1 = (cache.c1 * p.w1).rowwise() + p.b1.transpose();
  cache.h1 = cache.a1.cwiseMax(0.0);

  const auto b = static_cast<Eigen::Index>(batch.size());
  cache.c2.setZero(b, 2 * h);
  for (Eigen::Index k = 0; k < b; ++k) {
    cache.c2.row(k).head(h) =
        cache.h1.row(cache.batch_pos[static_cast<std::size_t>(k)]);
    const auto& opos = cache.outer_pos[static_cast<std::size_t>(k)];
    if (!opos.empty()) {
      Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(h);
      for (Eigen::Index i : opos) mean += cache.h1.row(i);
      cache.c2.row(k).tail(h) = mean / static_cast<double>(opos.size());
    }
  }
  cache.a2 = (cache.c2 * p.w2).rowwise() + p.b2.transpose();
  cache.h2 = cache.a2.cwiseMax(0.0);
  cache.logits = (cache.h2 * p.wc).rowwise() + p.bc.transpose();
  return cache;
}

EncoderParams zeros_like(const EncoderParams& p) {
  EncoderParams z;
  z.w1 = Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols());
  z.b1 = Eigen::VectorXd::Zero(p.b1.size());
  z.w2 = Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols());
  z.b2 = Eigen::VectorXd::Zero(p.b2.size());
  z.wc = Eigen::MatrixXd::Zero(p.wc.rows(), p.wc.cols());
  z.bc = Eigen::VectorXd::Zero(p.bc.size());
  return z;
}

}  // namespace

ForwardResult forward(const Graph& g, std::span<const NodeId> batch,
                      const EncoderParams& params,
                      const NeighborSampler& sampler, int s,
                      std::uint64_t seed) {
  ForwardCache cache = run_forward(g, batch, params, sampler, s, seed);
  return {std::move(cache.logits), std::move(cache.h2)};
}

LossGrads loss_and_grads(const Graph& g, std::span<const NodeId> batch,
                         std::span<const std::int32_t> labels,
                         const EncoderParams& params,
                         const NeighborSampler& sampler,
                         std::span<const double> w2, double l2, int s,
                         std::uint64_t seed) {
  if (labels.size() != batch.size() || w2.size() != batch.size())
    throw ShapeError("loss_and_grads: batch/label/weight lengths differ");
  if (l2 < 0.0) throw ConfigError("loss_and_grads: negative l2");
  ForwardCache cache = run_forward(g, batch, params, sampler, s, seed);

  const auto b = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index c = params.num_classes();
  const double inv_b = 1.0 / static_cast<double>(b);
  double loss = 0.0;
  Eigen::MatrixXd dlogits(b, c);
  for (Eigen::Index k = 0; k < b; ++k) {
    const std::int32_t y = labels[static_cast<std::size_t>(k)];
    if (y < 0 || y >= c)
      throw ValidationError("loss_and_grads: label out of range for node " +
                            std::to_string(batch[static_cast<std::size_t>(k)]));
    const auto row = cache.logits.row(k);
    const double mx = row.maxCoeff();
    const double lse = mx + std::log((row.array() - mx).exp().sum());
    const double wk = w2[static_cast<std::size_t>(k)];
    loss += wk * (lse - row[y]);
    dlogits.row(k) = wk * inv_b * (row.array() - lse).exp();
    dlogits(k, y) -= wk * inv_b;
  }
  loss *= inv_b;
  double sq = 0.0;
  params.visit([&sq](const auto& blk) { sq += blk.squaredNorm(); });
  loss += l2 * sq;
  if (!std::isfinite(loss))
    throw NumericError("loss_and_grads: non-finite loss in batch starting at node " +
                       std::to_string(batch[0]));

  LossGrads out;
  out.loss = loss;
  out.grads = zeros_like(params);
  const Eigen::Index h = params.hidden_dim();

  out.grads.wc = cache.h2.transpose() * dlogits;
  out.grads.bc = dlogits.colwise().sum().transpose();
  const Eigen::MatrixXd dh2 = dlogits * params.wc.transpose();
  const Eigen::MatrixXd da2 =
      ((cache.a2.array() > 0.0).cast<double>() * dh2.array()).matrix();
  out.grads.w2 = cache.c2.transpose() * da2;
  out.grads.b2 = da2.colwise().sum().transpose();
  const Eigen::MatrixXd dc2 = da2 * params.w2.transpose();

  Eigen::MatrixXd dh1 =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cache.need.size()), h);
  for (Eigen::Index k = 0; k < b; ++k) {
    dh1.row(cache.batch_pos[static_cast<std::size_t>(k)]) +=
        dc2.row(k).head(h);
    const auto& opos = cache.outer_pos[static_cast<std::size_t>(k)];
    if (!opos.empty()) {
      const double inv_m = 1.0 / static_cast<double>(opos.size());
      for (Eigen::Index i : opos) dh1.row(i) += dc2.row(k).tail(h) * inv_m;
    }
  }
  const Eigen::MatrixXd da1 =
      ((cache.a1.array() > 0.0).cast<double>() * dh1.array()).matrix();
  out.grads.w1 = cache.c1.transpose() * da1;
  out.grads.b1 = da1.colwise().sum().transpose();

  auto add_l2 = [l2](auto& gblk, const auto& pblk) { gblk += 2.0 * l2 * pblk; };
  add_l2(out.grads.w1, params.w1);
  add_l2(out.grads.b1, params.b1);
  add_l2(out.grads.w2, params.w2);
  add_l2(out.grads.b2, params.b2);
  add_l2(out.grads.wc, params.wc);
  add_l2(out.grads.bc, params.bc);
  return out;
}

namespace {

struct AdamState {
  EncoderParams m, v;
  long t = 0;
};

void adam_step(EncoderParams& p, const EncoderParams& g, AdamState& st,
               double lr) {
  ++st.t;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const double corr1 = 1.0 - std::pow(kBeta1, static_cast<double>(st.t));
  const double corr2 = 1.0 - std::pow(kBeta2, static_cast<double>(st.t));
  auto upd = [&](auto& theta, const auto& grad, auto& m, auto& v) {
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = (kBeta2 * v.array() + (1.0 - kBeta2) * grad.array().square()).matrix();
    theta.array() -=
        lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + kEps);
  };
  upd(p.w1, g.w1, st.m.w1, st.v.w1);
  upd(p.b1, g.b1, st.m.b1, st.v.b1);
  upd(p.w2, g.w2, st.m.w2, st.v.w2);
  upd(p.b2, g.b2, st.m.b2, st.v.b2);
  upd(p.wc, g.wc, st.m.wc, st.v.wc);
  upd(p.bc, g.bc, st.m.bc, st.v.bc);
}

void check_train_config(const TrainConfig& cfg) {
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0) ||
      cfg.l2 < 0.0 || cfg.sample_size < 1 || cfg.hidden < 1 ||
      cfg.weight_update_period < 1)
    throw ConfigError("train: invalid config");
}

}  // namespace

TrainResult train(const Graph& g, const SplitAssignment& split,
                  const TrainConfig& cfg) {
  check_train_config(cfg);
  if (static_cast<Eigen::Index>(split.size()) != g.num_nodes())
    throw ShapeError("train: split size does not match graph");
  const std::vector<NodeId> train_nodes = split.nodes_with(Role::Train);
  if (train_nodes.empty())
    throw ValidationError("train: empty train split");

  const KnownLabels known = KnownLabels::from_split(g, split, Role::Train);
  EncoderParams params =
      init_params(g.feature_dim(), cfg.hidden, g.num_classes(), cfg.seed);

  std::unique_ptr<NeighborSampler> sampler;
  if (cfg.use_ca_sampling) {
    const SignatureTable table = SignatureTable::build(g, known);
    const AttentionProjection proj =
        AttentionProjection::init(g.feature_dim(), cfg.seed);
    sampler = std::make_unique<ProfileSampler>(
        build_profiles(g, known, table, proj));
  } else {
    sampler = std::make_unique<UniformSampler>(g);
  }

  const std::vector<NodeId> val_nodes = split.nodes_with(Role::Validation);
  std::vector<std::int32_t> val_labels;
  val_labels.reserve(val_nodes.size());
  for (NodeId v : val_nodes) val_labels.push_back(g.label(v));

  std::vector<Eigen::Index> train_pos(static_cast<std::size_t>(g.num_nodes()),
                                      -1);
  for (std::size_t i = 0; i < train_nodes.size(); ++i)
    train_pos[static_cast<std::size_t>(train_nodes[i])] =
        static_cast<Eigen::Index>(i);

  Eigen::VectorXd w2 =
      Eigen::VectorXd::Ones(static_cast<Eigen::Index>(train_nodes.size()));
  AdamState adam{zeros_like(params), zeros_like(params), 0};

  TrainResult result;
  if (cfg.epochs == 0) {
    result.params = std::move(params);
    return result;
  }

  EncoderParams best = params;
  double best_val = -1.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.use_hsic_weights && epoch % cfg.weight_update_period == 0) {
      const Eigen::MatrixXd emb =
          forward(g, train_nodes, params, *sampler, cfg.sample_size,
                  rng::derive(cfg.seed, rng::kReweight,
                              static_cast<std::uint64_t>(epoch), 1))
              .embeddings;
      ReweightConfig rcfg = cfg.reweight;
      rcfg.seed = rng::derive(cfg.seed, rng::kReweight,
                              static_cast<std::uint64_t>(epoch), 2);
      w2 = optimize_weights(emb, rcfg).weights.w;
    }

    std::vector<NodeId> order = train_nodes;
    rng::Engine shuffle_eng(rng::derive(cfg.seed, rng::kShuffle,
                                        static_cast<std::uint64_t>(epoch)));
    shuffle_eng.shuffle(order);
    const std::uint64_t fseed = rng::derive(
        cfg.seed, rng::kEpoch, static_cast<std::uint64_t>(epoch));

    double loss_sum = 0.0;
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t len = std::min(bs, order.size() - start);
      const std::span<const NodeId> chunk(order.data() + start, len);
      std::vector<std::int32_t> chunk_labels(len);
      std::vector<double> chunk_w2(len);
      for (std::size_t i = 0; i < len; ++i) {
        chunk_labels[i] = known.label(chunk[i]).value();
        chunk_w2[i] = w2[train_pos[static_cast<std::size_t>(chunk[i])]];
      }
      LossGrads lg;
      try {
        lg = loss_and_grads(g, chunk, chunk_labels, params, *sampler,
                            chunk_w2, cfg.l2, cfg.sample_size, fseed);
      } catch (const NumericError& e) {
        result.aborted = true;
        result.abort_reason = e.what();
        result.params = best_val >= 0.0 ? std::move(best) : std::move(params);
        return result;
      }
      adam_step(params, lg.grads, adam, cfg.learning_rate);
      loss_sum += lg.loss * static_cast<double>(len);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    if (!val_nodes.empty()) {
      const Metrics m = evaluate(
          params, g, val_nodes, val_labels, *sampler, cfg.sample_size,
          rng::derive(cfg.seed, rng::kEval, static_cast<std::uint64_t>(epoch)));
      rec.val_accuracy = m.accuracy;
      rec.val_macro_f1 = m.macro_f1;
      if (m.accuracy > best_val) {
        best_val = m.accuracy;
        best = params;
      }
    }
    result.history.push_back(rec);
  }

  result.params = val_nodes.empty() ? std::move(params) : std::move(best);
  return result;
}

Metrics evaluate(const EncoderParams& params, const Graph& g,
                 std::span<const NodeId> nodes,
                 std::span<const std::int32_t> labels,
                 const NeighborSampler& sampler, int s, std::uint64_t seed) {
  if (nodes.empty()) throw ValidationError("evaluate: empty node set");
  if (labels.size() != nodes.size())
    throw ShapeError("evaluate: node/label lengths differ");
  const ForwardResult fr = forward(g, nodes, params, sampler, s, seed);
  std::vector<std::int32_t> predicted(nodes.size());
  for (Eigen::Index k = 0; k < fr.logits.rows(); ++k) {
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < fr.logits.cols(); ++j)
      if (fr.logits(k, j) > fr.logits(k, arg)) arg = j;
    predicted[static_cast<std::size_t>(k)] = static_cast<std::int32_t>(arg);
  }
  return compute_metrics(predicted, labels,
                         static_cast<std::int32_t>(params.num_classes()));
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                 Eigen::Index cols, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ValidationError("checkpoint: bad row count for " + name);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError("checkpoint: bad column count for " + name);
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index n,
                                 const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    throw ValidationError("checkpoint: bad length for " + name);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const EncoderParams& params,
                     std::uint64_t seed, const std::string& config_hash) {
  nlohmann::json j{
      {"format", 1},
      {"dims",
       {{"input", params.input_dim()},
        {"hidden", params.hidden_dim()},
        {"classes", params.num_classes()}}},
      {"seed", seed},
      {"config_hash", config_hash},
      {"params",
       {{"w1", matrix_to_json(params.w1)},
        {"b1", vector_to_json(params.b1)},
        {"w2", matrix_to_json(params.w2)},
        {"b2", vector_to_json(params.b2)},
        {"wc", matrix_to_json(params.wc)},
        {"bc", vector_to_json(params.bc)}}}};
  std::ofstream out(path);
  if (!out) throw ValidationError("save_checkpoint: cannot open " + path);
  out << j.dump(1);
  out << '\n';
  if (!out) throw ValidationError("save_checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("load_checkpoint: " + path + ": " + e.what());
  }
  try {
    if (j.at("format").get<int>() != 1)
      throw ValidationError("load_checkpoint: unsupported format in " + path);
    const auto& dims = j.at("dims");
    const auto d_in = dims.at("input").get<Eigen::Index>();
    const auto h = dims.at("hidden").get<Eigen::Index>();
    const auto c = dims.at("classes").get<Eigen::Index>();
    if (d_in <= 0 || h <= 0 || c <= 0)
      throw ValidationError("load_checkpoint: bad dims in " + path);
    Checkpoint ck;
    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.config_hash = j.at("config_hash").get<std::string>();
    const auto& p = j.at("params");
    ck.params.w1 = matrix_from_json(p.at("w1"), 2 * d_in, h, "w1");
    ck.params.b1 = vector_from_json(p.at("b1"), h, "b1");
    ck.params.w2 = matrix_from_json(p.at("w2"), 2 * h, h, "w2");
    ck.params.b2 = vector_from_json(p.at("b2"), h, "b2");
    ck.params.wc = matrix_from_json(p.at("wc"), h, c, "wc");
    ck.params.bc = vector_from_json(p.at("bc"), c, "bc");
    bool finite = true;
    ck.params.visit([&finite](const auto& blk) {
      finite = finite && blk.allFinite();
    });
    if (!finite)
      throw ValidationError("load_checkpoint: non-finite entries in " + path);
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("load_checkpoint: " + path + ": " + e.what());
  }
}

void write_history_csv(const std::string& path,
                       std::span<const EpochRecord> history) {
  std::ofstream out(path);
  if (!out) throw ValidationError("write_history_csv: cannot open " + path);
  out << "epoch,train_loss,val_acc,val_macro_f1\n";
  char buf[128];
  for (const auto& rec : history) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f\n", rec.epoch,
                  rec.train_loss, rec.val_accuracy, rec.val_macro_f1);
    out << buf;
  }
  if (!out) throw ValidationError("write_history_csv: write failed: " + path);
}

}  // namespace fsmirl
