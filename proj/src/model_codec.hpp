#pragma once

// Field codecs shared by the model and ensemble blob formats. Every container
// is a u64 length followed by its elements; matrices are u64 rows, u64 cols,
// then row-major values.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "binary_io.hpp"
#include "castguard/dataset.hpp"
#include "castguard/mlp.hpp"
#include "castguard/standardize.hpp"

namespace castguard::detail {

inline constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

inline std::uint64_t checked_count(std::uint64_t a, std::uint64_t b = 1) {
  if (a > kMaxElements || b > kMaxElements || (b != 0 && a > kMaxElements / b)) {
    throw DataError("truncated/corrupt input: implausible element count");
  }
  return a * b;
}

inline void put_vector(BinaryWriter& w, const Eigen::VectorXd& v) {
  w.put<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) w.put(v(i));
}

inline Eigen::VectorXd get_vector(BinaryReader& r) {
  const auto n = checked_count(r.get<std::uint64_t>());
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = r.get<double>();
  return v;
}

inline void put_doubles(BinaryWriter& w, const std::vector<double>& v) {
  w.put<std::uint64_t>(v.size());
  w.put_all(v);
}

inline std::vector<double> get_doubles(BinaryReader& r) {
  std::vector<double> v(checked_count(r.get<std::uint64_t>()));
  for (auto& x : v) x = r.get<double>();
  return v;
}

template <typename Matrix>
void put_matrix(BinaryWriter& w, const Matrix& m) {
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.put(m(i, j));
  }
}

template <typename Matrix>
Matrix get_matrix(BinaryReader& r) {
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint64_t>();
  checked_count(rows, cols);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.get<typename Matrix::Scalar>();
  }
  return m;
}

inline void put_labels(BinaryWriter& w, const Labels& labels) {
  w.put<std::uint64_t>(labels.size());
  w.put_bytes(labels.data(), labels.size());
}

inline Labels get_labels(BinaryReader& r) {
  Labels labels(checked_count(r.get<std::uint64_t>()));
  if (!labels.empty()) r.read_exact(reinterpret_cast<char*>(labels.data()), labels.size());
  return labels;
}

inline void put_sizes(BinaryWriter& w, const std::vector<std::size_t>& v) {
  w.put<std::uint64_t>(v.size());
  for (auto x : v) w.put<std::uint64_t>(x);
}

inline std::vector<std::size_t> get_sizes(BinaryReader& r) {
  std::vector<std::size_t> v(checked_count(r.get<std::uint64_t>()));
  for (auto& x : v) x = static_cast<std::size_t>(r.get<std::uint64_t>());
  return v;
}

inline void put_standardizer(BinaryWriter& w, const Standardizer& s) {
  put_vector(w, s.mean);
  put_vector(w, s.inv_std);
}

inline Standardizer get_standardizer(BinaryReader& r) {
  Standardizer s;
  s.mean = get_vector(r);
  s.inv_std = get_vector(r);
  if (s.mean.size() != s.inv_std.size()) throw DataError("truncated/corrupt input: standardizer shape");
  return s;
}

inline void put_train_config(BinaryWriter& w, const TrainConfig& c) {
  w.put<std::uint64_t>(c.epochs);
  w.put<std::uint64_t>(c.batch_size);
  w.put(c.learning_rate);
  w.put(static_cast<std::uint8_t>(c.optimizer));
  w.put(c.beta1);
  w.put(c.beta2);
  w.put(c.epsilon);
  w.put(c.shuffle_seed);
}

inline TrainConfig get_train_config(BinaryReader& r) {
  TrainConfig c;
  c.epochs = static_cast<std::size_t>(r.get<std::uint64_t>());
  c.batch_size = static_cast<std::size_t>(r.get<std::uint64_t>());
  c.learning_rate = r.get<double>();
  c.optimizer = static_cast<Optimizer>(r.get<std::uint8_t>());
  c.beta1 = r.get<double>();
  c.beta2 = r.get<double>();
  c.epsilon = r.get<double>();
  c.shuffle_seed = r.get<std::uint64_t>();
  return c;
}

inline void put_mlp(BinaryWriter& w, const MlpModel& m) {
  put_sizes(w, m.architecture.layer_sizes);
  w.put(static_cast<std::uint8_t>(m.architecture.activation));
  w.put(m.architecture.seed);
  w.put<std::uint64_t>(m.layers.size());
  for (const auto& layer : m.layers) {
    put_matrix(w, layer.weights);
    put_vector(w, layer.bias);
  }
  put_doubles(w, m.training_log);
}

inline MlpModel get_mlp(BinaryReader& r) {
  MlpModel m;
  m.architecture.layer_sizes = get_sizes(r);
  m.architecture.activation = static_cast<Activation>(r.get<std::uint8_t>());
  m.architecture.seed = r.get<std::uint64_t>();
  m.layers.resize(checked_count(r.get<std::uint64_t>()));
  for (auto& layer : m.layers) {
    layer.weights = get_matrix<Eigen::MatrixXd>(r);
    layer.bias = get_vector(r);
  }
  m.training_log = get_doubles(r);
  const auto& sizes = m.architecture.layer_sizes;
  bool ok = sizes.size() == m.layers.size() + 1;
  for (std::size_t i = 0; ok && i < m.layers.size(); ++i) {
    ok = static_cast<std::size_t>(m.layers[i].weights.rows()) == sizes[i] &&
         static_cast<std::size_t>(m.layers[i].weights.cols()) == sizes[i + 1] &&
         static_cast<std::size_t>(m.layers[i].bias.size()) == sizes[i + 1];
  }
  if (!ok) throw DataError("truncated/corrupt input: network layer shapes do not match");
  return m;
}

}  // namespace castguard::detail
