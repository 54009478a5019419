#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "favd/avlformer/config.hpp"
#include "favd/error.hpp"

namespace favd::avl {

enum class Modality { text = 0, vision = 1, audio = 2 };

inline constexpr std::array kModalities = {Modality::text, Modality::vision, Modality::audio};

inline std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::text: return "text";
    case Modality::vision: return "vision";
    case Modality::audio: return "audio";
  }
  return "?";
}

// Half-open position range of one modality in the fused sequence.
struct Span {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
  bool contains(int i) const { return i >= begin && i < end; }
};

// Segments laid out text, vision, audio; contiguous and non-overlapping.
struct ModalityTokenLayout {
  std::array<Span, 3> spans;

  static ModalityTokenLayout make(int n_text, int n_vision, int n_audio) {
    if (n_text < 0 || n_vision < 0 || n_audio < 0) throw ConfigError("layout: negative length");
    ModalityTokenLayout l;
    l.spans[0] = {0, n_text};
    l.spans[1] = {n_text, n_text + n_vision};
    l.spans[2] = {n_text + n_vision, n_text + n_vision + n_audio};
    return l;
  }
  static ModalityTokenLayout of(const ModelConfig& c) {
    return make(c.n_text, c.n_vision, c.n_audio);
  }

  const Span& span(Modality m) const { return spans[static_cast<std::size_t>(m)]; }
  int total() const { return spans[2].end; }

  Modality modality_of(int pos) const {
    for (auto m : kModalities) {
      if (span(m).contains(pos)) return m;
    }
    throw ConfigError("layout: position " + std::to_string(pos) + " out of range");
  }
};

enum class Visibility : std::uint8_t { none, full, causal };

// Visibility per (query modality, key modality) block.
struct AttentionMaskSpec {
  std::array<std::array<Visibility, 3>, 3> block{};

  Visibility& at(Modality q, Modality k) {
    return block[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)];
  }
  Visibility at(Modality q, Modality k) const {
    return block[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)];
  }

  // Causal order only makes sense inside one segment.
  void check() const {
    for (auto q : kModalities) {
      for (auto k : kModalities) {
        if (at(q, k) == Visibility::causal && q != k) {
          throw ConfigError("mask spec: causal visibility across modalities");
        }
      }
    }
  }
};

// Type I:   text causal; text sees vision and audio; vision and audio see each
//           other; neither sees text.
// Type II:  Type I plus vision/audio see text.
// Type III: block-causal in layout order: each segment sees itself and the
//           segments before it (text causal).
// Type IV:  Type I with vision blind to audio.
// Type V:   Type I with vision and audio mutually blind.
inline AttentionMaskSpec mask_spec(MaskType type) {
  using enum Visibility;
  constexpr auto T = Modality::text;
  constexpr auto V = Modality::vision;
  constexpr auto A = Modality::audio;
  AttentionMaskSpec s;
  s.at(T, T) = causal;
  s.at(T, V) = full;
  s.at(T, A) = full;
  s.at(V, V) = full;
  s.at(V, A) = full;
  s.at(A, V) = full;
  s.at(A, A) = full;
  s.at(V, T) = none;
  s.at(A, T) = none;
  switch (type) {
    case MaskType::I:
      break;
    case MaskType::II:
      s.at(V, T) = full;
      s.at(A, T) = full;
      break;
    case MaskType::III:
      s.at(T, V) = none;
      s.at(T, A) = none;
      s.at(V, T) = full;
      s.at(V, A) = none;
      s.at(A, T) = full;
      break;
    case MaskType::IV:
      s.at(V, A) = none;
      break;
    case MaskType::V:
      s.at(V, A) = none;
      s.at(A, V) = none;
      break;
    default:
      throw ConfigError("unknown mask type");
  }
  return s;
}

// Dense boolean matrix; visible(q, k) means query q may attend to key k.
class AttentionMask {
 public:
  AttentionMask() = default;
  explicit AttentionMask(int n) : n_(n), bits_(static_cast<std::size_t>(n) * n, 0) {}

  int size() const { return n_; }
  bool visible(int q, int k) const { return bits_[index(q, k)] != 0; }
  void set(int q, int k, bool v) { bits_[index(q, k)] = v ? 1 : 0; }

  // Every entry visible here is visible in `other`.
  bool subset_of(const AttentionMask& other) const {
    if (n_ != other.n_) return false;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i] && !other.bits_[i]) return false;
    }
    return true;
  }

  friend bool operator==(const AttentionMask&, const AttentionMask&) = default;

 private:
  std::size_t index(int q, int k) const {
    return static_cast<std::size_t>(q) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(k);
  }

  int n_ = 0;
  std::vector<std::uint8_t> bits_;
};

inline AttentionMask expand(const AttentionMaskSpec& spec, const ModalityTokenLayout& layout) {
  spec.check();
  AttentionMask m(layout.total());
  for (auto q : kModalities) {
    for (auto k : kModalities) {
      const auto vis = spec.at(q, k);
      if (vis == Visibility::none) continue;
      const auto& qs = layout.span(q);
      const auto& ks = layout.span(k);
      for (int i = qs.begin; i < qs.end; ++i) {
        for (int j = ks.begin; j < ks.end; ++j) {
          if (vis == Visibility::full || (j - ks.begin) <= (i - qs.begin)) m.set(i, j, true);
        }
      }
    }
  }
  return m;
}

inline AttentionMask build_attention_mask(const ModalityTokenLayout& layout, MaskType type) {
  return expand(mask_spec(type), layout);
}

// Positions whose inputs can reach each query after `layers` attention steps
// (residual paths included). With one layer this is the mask plus the
// diagonal.
inline AttentionMask reachability(const AttentionMask& mask, int layers) {
  const int n = mask.size();
  AttentionMask reach(n);
  for (int i = 0; i < n; ++i) reach.set(i, i, true);
  for (int step = 0; step < layers; ++step) {
    AttentionMask next = reach;
    for (int q = 0; q < n; ++q) {
      for (int mid = 0; mid < n; ++mid) {
        if (!mask.visible(q, mid)) continue;
        for (int k = 0; k < n; ++k) {
          if (reach.visible(mid, k)) next.set(q, k, true);
        }
      }
    }
    reach = std::move(next);
  }
  return reach;
}

}  // namespace favd::avl
