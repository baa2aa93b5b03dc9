#include "geopath/blocknet.hpp"

#include <stdexcept>
#include <string>

namespace geopath {

BlockNet::BlockNet(int n_blocks, int feature_dim, int hidden, int classes, Rng& rng)
    : n_blocks_(n_blocks),
      feature_dim_(feature_dim),
      hidden_(hidden),
      classes_(classes),
      stem_("recognition.stem", feature_dim, hidden, rng),
      head_("recognition.head", hidden, classes, rng) {
  if (n_blocks < 1) throw std::invalid_argument("BlockNet: n_blocks must be >= 1");
  if (classes < 1) throw std::invalid_argument("BlockNet: classes must be >= 1");
  blocks_.reserve(static_cast<std::size_t>(n_blocks));
  for (int n = 0; n < n_blocks; ++n)
    blocks_.emplace_back("recognition.block" + std::to_string(n), hidden, rng);
}

ValueId BlockNet::infer(Tape& tape, ValueId x, const Tensor2& gates) {
  const Tensor2& xv = tape.value(x);
  if (xv.cols != feature_dim_)
    throw std::invalid_argument("infer: expected " + std::to_string(feature_dim_) +
                                " feature columns, got " + xv.shape_str());
  if (gates.rows != xv.rows || gates.cols != n_blocks_)
    throw std::invalid_argument("infer: gate matrix must be " + std::to_string(xv.rows) + "x" +
                                std::to_string(n_blocks_) + ", got " + gates.shape_str());

  ValueId h = tape.relu(tape.affine(x, tape.param(stem_.weight), tape.param(stem_.bias)));
  for (int n = 0; n < n_blocks_; ++n) {
    std::vector<double> col(static_cast<std::size_t>(gates.rows));
    bool any_active = false;
    for (int i = 0; i < gates.rows; ++i) {
      col[static_cast<std::size_t>(i)] = gates.at(i, n);
      any_active = any_active || gates.at(i, n) != 0.0;
    }
    if (!any_active) continue;  // skipped for every row: exact identity
    Block& blk = blocks_[static_cast<std::size_t>(n)];
    ValueId f = tape.affine(h, tape.param(blk.fc1.weight), tape.param(blk.fc1.bias));
    f = tape.relu(f);
    f = tape.affine(f, tape.param(blk.fc2.weight), tape.param(blk.fc2.bias));
    h = tape.add(h, tape.row_scale(f, std::move(col)));
  }
  return tape.affine(h, tape.param(head_.weight), tape.param(head_.bias));
}

Tensor2 BlockNet::gates_for(const Policy& p, int batch) const {
  if (static_cast<int>(p.bits.size()) != n_blocks_)
    throw std::invalid_argument("gates_for: policy has " + std::to_string(p.bits.size()) +
                                " bits, network has " + std::to_string(n_blocks_) + " blocks");
  Tensor2 g(batch, n_blocks_);
  for (int i = 0; i < batch; ++i)
    for (int n = 0; n < n_blocks_; ++n)
      g.at(i, n) = p.bits[static_cast<std::size_t>(n)] ? 1.0 : 0.0;
  return g;
}

Tensor2 BlockNet::gates_from(const std::vector<Policy>& policies) {
  if (policies.empty()) throw std::invalid_argument("gates_from: empty policy list");
  const int n = static_cast<int>(policies.front().bits.size());
  Tensor2 g(static_cast<int>(policies.size()), n);
  for (int i = 0; i < g.rows; ++i) {
    const Policy& p = policies[static_cast<std::size_t>(i)];
    if (static_cast<int>(p.bits.size()) != n)
      throw std::invalid_argument("gates_from: ragged policy lengths");
    for (int j = 0; j < n; ++j) g.at(i, j) = p.bits[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  }
  return g;
}

double BlockNet::stem_cost() const {
  return static_cast<double>(feature_dim_) * static_cast<double>(hidden_);
}

double BlockNet::block_cost() const {
  return 2.0 * static_cast<double>(hidden_) * static_cast<double>(hidden_);
}

double BlockNet::head_cost() const {
  return static_cast<double>(hidden_) * static_cast<double>(classes_);
}

CostReport BlockNet::sparsity(const Policy& p) const {
  if (static_cast<int>(p.bits.size()) != n_blocks_)
    throw std::invalid_argument("sparsity: policy has " + std::to_string(p.bits.size()) +
                                " bits, network has " + std::to_string(n_blocks_) + " blocks");
  CostReport r;
  r.active_blocks = p.active_blocks();
  r.pr = static_cast<double>(r.active_blocks) / static_cast<double>(n_blocks_);
  r.cost_units = stem_cost() + static_cast<double>(r.active_blocks) * block_cost() + head_cost();
  return r;
}

int BlockNet::predict_row(const Tensor2& logits, int row) {
  if (row < 0 || row >= logits.rows) throw std::out_of_range("predict_row: bad row");
  if (logits.cols < 1) throw std::invalid_argument("predict_row: no classes");
  int best = 0;
  for (int j = 1; j < logits.cols; ++j)
    if (logits.at(row, j) > logits.at(row, best)) best = j;
  return best;
}

std::vector<Parameter*> BlockNet::parameters() {
  std::vector<Parameter*> ps{&stem_.weight, &stem_.bias};
  for (auto& b : blocks_) {
    ps.push_back(&b.fc1.weight);
    ps.push_back(&b.fc1.bias);
    ps.push_back(&b.fc2.weight);
    ps.push_back(&b.fc2.bias);
  }
  ps.push_back(&head_.weight);
  ps.push_back(&head_.bias);
  return ps;
}

}  // namespace geopath
