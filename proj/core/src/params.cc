#include "spanparse/params.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "spanparse/errors.h"

namespace spanparse {

Parameter& ParamRegistry::add(std::string name, Tensor init) {
  if (index_.count(name) != 0) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->index = params_.size();
  p->value = std::move(init);
  index_.emplace(std::move(name), params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParamRegistry::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

const Parameter* ParamRegistry::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

Parameter& ParamRegistry::get(const std::string& name) {
  Parameter* p = find(name);
  if (p == nullptr) throw std::out_of_range("unknown parameter: " + name);
  return *p;
}

const Parameter& ParamRegistry::get(const std::string& name) const {
  const Parameter* p = find(name);
  if (p == nullptr) throw std::out_of_range("unknown parameter: " + name);
  return *p;
}

std::vector<std::string> ParamRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->name);
  return out;
}

std::size_t ParamRegistry::total_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

std::vector<Tensor> ParamRegistry::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value);
  return out;
}

void ParamRegistry::restore(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) {
    throw std::invalid_argument("restore: snapshot has " + std::to_string(values.size()) +
                                " tensors, registry has " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i].same_shape(params_[i]->value)) {
      throw ShapeError("restore: shape mismatch for " + params_[i]->name);
    }
    params_[i]->value = values[i];
  }
}

void Gradients::accumulate(std::size_t i, const Tensor& g) {
  if (i >= grads_.size()) grads_.resize(i + 1);
  if (grads_[i].empty()) {
    grads_[i] = g;
  } else {
    grads_[i].add_inplace(g);
  }
}

void Gradients::merge(const Gradients& other) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    if (other.has(i)) accumulate(i, other.at(i));
  }
}

void Gradients::scale(double factor) {
  for (auto& g : grads_) {
    for (double& v : g.values()) v *= factor;
  }
}

double Gradients::global_norm() const {
  double sq = 0.0;
  for (const auto& g : grads_) {
    for (double v : g.values()) sq += v * v;
  }
  return std::sqrt(sq);
}

void Gradients::clear() {
  for (auto& g : grads_) g = Tensor();
}

Tensor Initializer::uniform(std::size_t rows, std::size_t cols, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(rows, cols);
  for (double& v : t.values()) v = dist(rng_);
  return t;
}

Tensor Initializer::glorot(std::size_t rows, std::size_t cols) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform(rows, cols, -limit, limit);
}

namespace {

constexpr char kMagic[8] = {'S', 'P', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamRegistry& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::uint64_t>(out, params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = params[i];
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    const auto shape = p.value.shape();
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) write_pod<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(double)));
  }
  if (!out) throw DataError("failed writing checkpoint: " + path);
}

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a spanparse checkpoint: " + path);
  }
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
  }
  const auto count = read_pod<std::uint64_t>(in, path);
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(count);
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto name_len = read_pod<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rank = read_pod<std::uint32_t>(in, path);
    if (rank == 0 || rank > 2) throw DataError("bad rank for " + name + " in " + path);
    std::vector<std::uint64_t> dims(rank);
    for (auto& d : dims) d = read_pod<std::uint64_t>(in, path);
    const std::size_t rows = rank == 2 ? dims[0] : 1;
    const std::size_t cols = rank == 2 ? dims[1] : dims[0];
    std::vector<double> values(rows * cols);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw DataError("truncated checkpoint: " + path);
    out.emplace_back(std::move(name), Tensor(rows, cols, std::move(values)));
  }
  return out;
}

void load_checkpoint(const std::string& path, ParamRegistry& params) {
  auto entries = read_checkpoint(path);
  if (entries.size() != params.size()) {
    throw DataError("checkpoint " + path + " has " + std::to_string(entries.size()) +
                    " parameters, model expects " + std::to_string(params.size()));
  }
  for (auto& [name, value] : entries) {
    Parameter* p = params.find(name);
    if (p == nullptr) throw DataError("checkpoint parameter not in model: " + name);
    if (!p->value.same_shape(value)) {
      throw DataError("checkpoint shape " + value.shape_string() + " for " + name +
                      " does not match model shape " + p->value.shape_string());
    }
    p->value = std::move(value);
  }
}

}  // namespace spanparse
