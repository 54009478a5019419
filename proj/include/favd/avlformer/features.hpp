#pragma once

#include <string>

#include <Eigen/Dense>

#include "favd/avlformer/config.hpp"
#include "favd/avlformer/container.hpp"
#include "favd/rng.hpp"

namespace favd::avl {

using Mat = Eigen::MatrixXd;

// Encoder outputs for one clip: vision tokens x d_vision_in and audio tokens
// x d_audio_in.
struct ModalityFeatures {
  Mat vision;
  Mat audio;
  std::string source_id;

  void check(const ModelConfig& cfg) const {
    if (vision.rows() != cfg.n_vision || vision.cols() != cfg.d_vision_in) {
      throw ShapeError("vision features are " + std::to_string(vision.rows()) + "x" +
                           std::to_string(vision.cols()) + ", expected " +
                           std::to_string(cfg.n_vision) + "x" + std::to_string(cfg.d_vision_in),
                       "vision");
    }
    if (audio.rows() != cfg.n_audio || audio.cols() != cfg.d_audio_in) {
      throw ShapeError("audio features are " + std::to_string(audio.rows()) + "x" +
                           std::to_string(audio.cols()) + ", expected " +
                           std::to_string(cfg.n_audio) + "x" + std::to_string(cfg.d_audio_in),
                       "audio");
    }
    if (!vision.allFinite()) throw ShapeError("vision features contain non-finite values", "vision");
    if (!audio.allFinite()) throw ShapeError("audio features contain non-finite values", "audio");
  }
};

// Deterministic stand-in for backbone outputs: truncated standard normal in
// [-3, 3], seeded by the FNV-1a hash of the video id.
inline ModalityFeatures toy_features(const std::string& video_id, const ModelConfig& cfg) {
  Rng rng(fnv1a64(video_id));
  ModalityFeatures f;
  f.source_id = video_id;
  f.vision.resize(cfg.n_vision, cfg.d_vision_in);
  f.audio.resize(cfg.n_audio, cfg.d_audio_in);
  for (Eigen::Index i = 0; i < f.vision.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.vision.cols(); ++j) f.vision(i, j) = rng.truncated_normal(3.0);
  }
  for (Eigen::Index i = 0; i < f.audio.rows(); ++i) {
    for (Eigen::Index j = 0; j < f.audio.cols(); ++j) f.audio(i, j) = rng.truncated_normal(3.0);
  }
  return f;
}

inline NamedArray to_array(const std::string& name, const Mat& m) {
  NamedArray a;
  a.name = name;
  a.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
  a.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.data.push_back(static_cast<float>(m(i, j)));
  }
  return a;
}

inline Mat to_matrix(const NamedArray& a) {
  if (a.shape.size() != 2) throw ShapeError("array '" + a.name + "' is not two-dimensional", a.name);
  Mat m(static_cast<Eigen::Index>(a.shape[0]), static_cast<Eigen::Index>(a.shape[1]));
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = a.data[k++];
  }
  return m;
}

// Feature files hold two arrays, "vision" and "audio".
inline void save_features(const std::string& path, const ModalityFeatures& f) {
  Container c;
  c.arrays.push_back(to_array("vision", f.vision));
  c.arrays.push_back(to_array("audio", f.audio));
  write_container(path, c);
}

inline ModalityFeatures load_features(const std::string& path, std::string source_id = {}) {
  const auto c = read_container(path);
  ModalityFeatures f;
  f.vision = to_matrix(c.at("vision"));
  f.audio = to_matrix(c.at("audio"));
  f.source_id = std::move(source_id);
  return f;
}

}  // namespace favd::avl
