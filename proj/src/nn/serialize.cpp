#include "culprit/nn/serialize.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "culprit/errors.hpp"

namespace culprit::nn {

namespace {

std::string expect_token(std::istream& is, const char* what) {
  std::string tok;
  if (!(is >> tok)) throw LoadError(fmt::format("mlp: unexpected end of input reading {}", what));
  return tok;
}

void expect_keyword(std::istream& is, const std::string& keyword) {
  const std::string tok = expect_token(is, keyword.c_str());
  if (tok != keyword) {
    throw LoadError(fmt::format("mlp: expected '{}', found '{}'", keyword, tok));
  }
}

std::size_t read_count(std::istream& is, const char* what) {
  const std::string tok = expect_token(is, what);
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw LoadError(fmt::format("mlp: bad {} '{}'", what, tok));
  }
}

double read_real(std::istream& is) {
  const std::string tok = expect_token(is, "parameter");
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw LoadError(fmt::format("mlp: bad parameter value '{}'", tok));
  }
}

}  // namespace

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

void write_mlp(std::ostream& os, const Mlp& mlp) {
  os << "mlp v1\n";
  os << "layers " << mlp.layers().size() << '\n';
  for (const auto& l : mlp.layers()) {
    os << "layer " << l.out_dim() << ' ' << l.in_dim() << ' ' << to_string(l.activation) << '\n';
    os << 'w';
    for (double v : l.weights.data()) os << ' ' << format_real(v);
    os << "\nb";
    for (double v : l.biases) os << ' ' << format_real(v);
    os << '\n';
  }
  os << "end\n";
}

Mlp read_mlp(std::istream& is) {
  expect_keyword(is, "mlp");
  const std::string version = expect_token(is, "version");
  if (version != "v1") throw LoadError(fmt::format("mlp: unsupported version '{}'", version));
  expect_keyword(is, "layers");
  const std::size_t n = read_count(is, "layer count");
  if (n == 0 || n > 1024) throw LoadError(fmt::format("mlp: implausible layer count {}", n));

  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < n; ++i) {
    expect_keyword(is, "layer");
    const std::size_t out = read_count(is, "output size");
    const std::size_t in = read_count(is, "input size");
    if (out == 0 || in == 0 || out * in > (std::size_t{1} << 28)) {
      throw LoadError(fmt::format("mlp: implausible layer shape {}x{}", out, in));
    }
    Activation act;
    try {
      act = parse_activation(expect_token(is, "activation"));
    } catch (const ConfigError& e) {
      throw LoadError(fmt::format("mlp: {}", e.what()));
    }
    expect_keyword(is, "w");
    std::vector<double> w(out * in);
    for (double& v : w) v = read_real(is);
    expect_keyword(is, "b");
    Vector b(out);
    for (double& v : b) v = read_real(is);
    layers.push_back({Matrix(out, in, std::move(w)), std::move(b), act});
  }
  expect_keyword(is, "end");
  try {
    return Mlp(std::move(layers));
  } catch (const Error& e) {
    throw LoadError(fmt::format("mlp: {}", e.what()));
  }
}

void save_mlp(const std::string& path, const Mlp& mlp) {
  std::ofstream os(path);
  if (!os) throw IoError(fmt::format("cannot open '{}' for writing", path));
  write_mlp(os, mlp);
}

Mlp load_mlp(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError(fmt::format("cannot open '{}'", path));
  return read_mlp(is);
}

}  // namespace culprit::nn
