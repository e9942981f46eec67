#ifndef SPANPARSE_PARAMS_H_
#define SPANPARSE_PARAMS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "spanparse/tensor.h"

namespace spanparse {

struct Parameter {
  std::string name;
  std::size_t index = 0;  // position in the owning registry
  Tensor value;
};

// Named trainable tensors with deterministic (insertion) iteration order.
// Parameter addresses are stable for the lifetime of the registry.
class ParamRegistry {
 public:
  ParamRegistry() = default;
  ParamRegistry(const ParamRegistry&) = delete;
  ParamRegistry& operator=(const ParamRegistry&) = delete;
  ParamRegistry(ParamRegistry&&) = default;
  ParamRegistry& operator=(ParamRegistry&&) = default;

  // Throws std::invalid_argument if the name is already registered.
  Parameter& add(std::string name, Tensor init);

  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  std::vector<std::string> names() const;
  std::size_t total_values() const;

  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, std::size_t> index_;
};

// Per-parameter gradient buffers, indexed like the registry they belong to.
// Buffers are allocated lazily; an unallocated buffer means "no gradient".
class Gradients {
 public:
  explicit Gradients(std::size_t count = 0) : grads_(count) {}

  void resize(std::size_t count) { grads_.resize(count); }
  std::size_t size() const { return grads_.size(); }
  bool has(std::size_t i) const { return i < grads_.size() && !grads_[i].empty(); }
  Tensor& at(std::size_t i) { return grads_[i]; }
  const Tensor& at(std::size_t i) const { return grads_[i]; }

  // grads_[i] += g, allocating on first use.
  void accumulate(std::size_t i, const Tensor& g);
  void merge(const Gradients& other);
  void scale(double factor);
  double global_norm() const;
  void clear();

 private:
  std::vector<Tensor> grads_;
};

// Seeded parameter initialization.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  Tensor uniform(std::size_t rows, std::size_t cols, double lo, double hi);
  // Glorot-uniform for a (fan_out x fan_in) weight matrix.
  Tensor glorot(std::size_t rows, std::size_t cols);

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Binary checkpoint container:
//   magic "SPCKPT01", u32 format version, u64 entry count, then per entry
//   u32 name length, name bytes, u32 rank, u64 dims[rank], f64 values
//   (row-major, little-endian IEEE-754).
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const ParamRegistry& params);
std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::string& path);
// Loads values into an already-constructed registry; names and shapes must
// match exactly.
void load_checkpoint(const std::string& path, ParamRegistry& params);

}  // namespace spanparse

#endif  // SPANPARSE_PARAMS_H_
