#include "soebm/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "soebm/error.hpp"

namespace soebm {

namespace {

constexpr const char* kParamsMagic = "soebm-params";
constexpr const char* kTrainingMagic = "soebm-training";
constexpr int kFormatVersion = 1;

void write_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << (c == 0 ? "" : " ") << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_vector(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i == 0 ? "" : " ") << format_double(v(i));
  out << '\n';
}

double read_value(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw IoError("checkpoint: unexpected end of data");
  return parse_double(token);
}

void expect_token(std::istream& in, const std::string& expected) {
  std::string token;
  if (!(in >> token) || token != expected) {
    throw IoError("checkpoint: expected '" + expected + "', found '" + token + "'");
  }
}

template <typename T>
T read_integer(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw IoError("checkpoint: unexpected end of data");
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw IoError("checkpoint: bad integer '" + token + "'");
  }
  return value;
}

void write_layers(std::ostream& out, const LayerSet& layers) {
  out << "layers " << layers.size() << '\n';
  for (const auto& layer : layers) {
    out << "layer " << layer.weight.rows() << ' ' << layer.weight.cols() << '\n';
    write_matrix(out, layer.weight);
    write_vector(out, layer.bias);
  }
}

LayerSet read_layers(std::istream& in) {
  expect_token(in, "layers");
  const auto n = read_integer<std::size_t>(in);
  LayerSet layers;
  for (std::size_t l = 0; l < n; ++l) {
    expect_token(in, "layer");
    const auto rows = read_integer<Eigen::Index>(in);
    const auto cols = read_integer<Eigen::Index>(in);
    if (rows <= 0 || cols <= 0) throw IoError("checkpoint: bad layer shape");
    DenseLayer layer{Matrix(rows, cols), Vector(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = read_value(in);
    }
    for (Eigen::Index r = 0; r < rows; ++r) layer.bias(r) = read_value(in);
    layers.push_back(std::move(layer));
  }
  return layers;
}

bool same_shapes(const LayerSet& a, const LayerSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l].weight.rows() != b[l].weight.rows() || a[l].weight.cols() != b[l].weight.cols()) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

void write_params(std::ostream& out, const MlpParams& params) {
  out << kParamsMagic << ' ' << kFormatVersion << '\n';
  out << "label_dim " << params.label_dim << '\n';
  out << "dropout " << format_double(params.dropout_rate) << '\n';
  write_layers(out, params.layers);
}

MlpParams read_params(std::istream& in) {
  expect_token(in, kParamsMagic);
  if (read_integer<int>(in) != kFormatVersion) throw IoError("checkpoint: unsupported version");
  MlpParams params;
  expect_token(in, "label_dim");
  params.label_dim = read_integer<std::size_t>(in);
  expect_token(in, "dropout");
  params.dropout_rate = read_value(in);
  params.layers = read_layers(in);
  if (params.layers.empty() ||
      params.layers.back().weight.rows() != static_cast<Eigen::Index>(2 * params.label_dim)) {
    throw IoError("checkpoint: output layer width does not equal 2 * label_dim");
  }
  for (std::size_t l = 1; l < params.layers.size(); ++l) {
    if (params.layers[l].weight.cols() != params.layers[l - 1].weight.rows()) {
      throw IoError("checkpoint: inconsistent layer widths");
    }
  }
  if (!all_finite(params.layers)) throw IoError("checkpoint: non-finite parameter");
  return params;
}

void save_params(const std::filesystem::path& path, const MlpParams& params) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_params(out, params);
  if (!out) throw IoError("write failed: " + path.string());
}

MlpParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_params(in);
}

void save_training_checkpoint(const std::filesystem::path& path, const TrainingCheckpoint& ckpt) {
  std::ostringstream out;
  out << kTrainingMagic << ' ' << kFormatVersion << '\n';
  out << "mode " << ckpt.mode << '\n';
  out << "epochs_done " << ckpt.epochs_done << '\n';
  write_params(out, ckpt.params);
  out << "adam " << (ckpt.adam ? 1 : 0) << '\n';
  if (ckpt.adam) {
    const auto& a = *ckpt.adam;
    out << "step " << a.step << '\n';
    out << "hyper " << format_double(a.learning_rate) << ' ' << format_double(a.beta1) << ' '
        << format_double(a.beta2) << ' ' << format_double(a.epsilon) << '\n';
    write_layers(out, a.first_moment);
    write_layers(out, a.second_moment);
  }
  // Write then rename so an interrupted save never clobbers the last good state.
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream file(tmp);
    if (!file) throw IoError("cannot open " + tmp + " for writing");
    file << out.str();
    if (!file) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + ": " + ec.message());
}

TrainingCheckpoint load_training_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  expect_token(in, kTrainingMagic);
  if (read_integer<int>(in) != kFormatVersion) throw IoError("checkpoint: unsupported version");
  TrainingCheckpoint ckpt;
  expect_token(in, "mode");
  in >> ckpt.mode;
  expect_token(in, "epochs_done");
  ckpt.epochs_done = read_integer<std::uint64_t>(in);
  ckpt.params = read_params(in);
  expect_token(in, "adam");
  if (read_integer<int>(in) == 1) {
    AdamState a;
    expect_token(in, "step");
    a.step = read_integer<std::uint64_t>(in);
    expect_token(in, "hyper");
    a.learning_rate = read_value(in);
    a.beta1 = read_value(in);
    a.beta2 = read_value(in);
    a.epsilon = read_value(in);
    a.first_moment = read_layers(in);
    a.second_moment = read_layers(in);
    if (!same_shapes(a.first_moment, ckpt.params.layers) ||
        !same_shapes(a.second_moment, ckpt.params.layers)) {
      throw IoError("checkpoint: optimizer state shape mismatch");
    }
    ckpt.adam = std::move(a);
  }
  return ckpt;
}

}  // namespace soebm
