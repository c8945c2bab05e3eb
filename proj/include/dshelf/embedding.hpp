#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "dshelf/error.hpp"
#include "dshelf/text.hpp"

namespace dshelf {

template <typename Scalar>
using Embedding = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Unit-norm (or exactly zero) dense text embedding.
using EmbeddingVector = Embedding<double>;

inline constexpr int kDefaultEmbeddingDim = 64;

/// 64-bit FNV-1a over the raw bytes.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Where one trigram lands in a hashed embedding of dimension `dim`:
/// bucket = h mod dim, sign = -1 when the top bit of h is set.
struct HashedFeature {
  Eigen::Index bucket;
  int sign;
};

inline HashedFeature hash_feature(std::string_view trigram, Eigen::Index dim) noexcept {
  const std::uint64_t h = fnv1a64(trigram);
  return {static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim)),
          (h >> 63) ? -1 : 1};
}

/// Signed feature-hashing embedding of the character trigrams of
/// canonicalize(text). Trigrams are taken over UTF-8 code points without
/// padding, so text shorter than three characters embeds to the zero vector.
/// The signed count vector is L2-normalized; if it cancels to zero the zero
/// vector is returned.
template <typename Scalar = double>
Embedding<Scalar> embed_text(std::string_view text, Eigen::Index dim = kDefaultEmbeddingDim) {
  if (dim < 2) throw std::invalid_argument("embed_text: dim must be >= 2");
  Embedding<Scalar> v = Embedding<Scalar>::Zero(dim);
  const std::string canonical = canonicalize(text);
  const auto cps = utf8_code_points(canonical);
  if (cps.size() < 3) return v;
  for (std::size_t i = 0; i + 2 < cps.size(); ++i) {
    const char* begin = cps[i].data();
    const char* end = cps[i + 2].data() + cps[i + 2].size();
    const auto f = hash_feature(std::string_view(begin, static_cast<std::size_t>(end - begin)), dim);
    v[f.bucket] += static_cast<Scalar>(f.sign);
  }
  const Scalar norm = v.norm();
  if (norm == Scalar(0)) return v;
  v /= norm;
  return v;
}

/// Cosine of the angle between a and b, clamped to [-1, 1]. Zero if either
/// operand is the zero vector.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_similarity: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  const Scalar c = a.dot(b) / (na * nb);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

/// True when v has unit L2 norm within tol or is exactly zero.
template <typename Derived>
bool is_unit_or_zero(const Eigen::MatrixBase<Derived>& v, double tol = 1e-6) {
  if ((v.array() == 0).all()) return true;
  return std::abs(static_cast<double>(v.norm()) - 1.0) <= tol;
}

}  // namespace dshelf
