#pragma once

#include <limits>
#include <string>
#include <vector>

#include "favd/avlformer/features.hpp"
#include "favd/avlformer/model.hpp"
#include "favd/avlformer/training.hpp"
#include "favd/avlformer/vocab.hpp"
#include "favd/text.hpp"

namespace favd::avl {

struct Generation {
  std::vector<int> ids;  // generated tokens, without [BOS], with [EOS] if emitted
  std::string text;
  bool stopped_at_eos = false;
};

// Read-only wrapper around a checkpoint; generate() is safe to call from
// several threads at once.
class Generator {
 public:
  explicit Generator(Checkpoint ck)
      : vocab_(std::move(ck.vocab)), model_(ck.config, std::move(ck.params)), mask_(model_.default_mask()) {
    if (model_.config().vocab_size != vocab_.size()) {
      throw VersionError("checkpoint vocabulary does not match its config");
    }
  }

  const Model& model() const { return model_; }
  const Vocabulary& vocab() const { return vocab_; }

  // Greedy next-token decoding from [BOS]. At most max_len tokens are
  // produced, and never more than the text segment can hold.
  Generation generate(const ModalityFeatures& features, int max_len = 300) const {
    features.check(model_.config());
    const int n_text = model_.config().n_text;
    const int limit = std::min(std::max(max_len, 0), n_text - 1);
    std::vector<int> ids(static_cast<std::size_t>(n_text), Vocabulary::kPad);
    ids[0] = Vocabulary::kBos;
    Generation g;
    for (int pos = 0; pos < limit; ++pos) {
      const auto out = model_.forward({&ids, &features}, mask_);
      const int next = argmax(out.logits.row(pos));
      ids[static_cast<std::size_t>(pos + 1)] = next;
      g.ids.push_back(next);
      if (next == Vocabulary::kEos) {
        g.stopped_at_eos = true;
        break;
      }
    }
    g.text = text::detokenize(decode(vocab_, g.ids));
    return g;
  }

 private:
  // [BOS], [MASK] and [PAD] are never emitted.
  static int argmax(const Eigen::RowVectorXd& row) {
    int best = -1;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < static_cast<int>(row.size()); ++j) {
      if (j == Vocabulary::kBos || j == Vocabulary::kMask || j == Vocabulary::kPad) continue;
      if (best < 0 || row(j) > best_v) {
        best = j;
        best_v = row(j);
      }
    }
    return best;
  }

  Vocabulary vocab_;
  Model model_;
  AttentionMask mask_;
};

inline Generation generate(const ModalityFeatures& features, const Checkpoint& ck, int max_len = 300) {
  return Generator(ck).generate(features, max_len);
}

}  // namespace favd::avl
