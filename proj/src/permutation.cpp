#include "sofic/permutation.hpp"

#include <sstream>

#include "sofic/errors.hpp"

namespace sofic {

Permutation::Permutation(std::vector<std::uint32_t> image) : image_(std::move(image)) {
  std::vector<bool> hit(image_.size(), false);
  for (auto v : image_) {
    if (v >= image_.size() || hit[v])
      throw InvalidArgument("image table is not a bijection");
    hit[v] = true;
  }
}

Permutation Permutation::identity(std::size_t degree) {
  std::vector<std::uint32_t> image(degree);
  for (std::size_t i = 0; i < degree; ++i)
    image[i] = static_cast<std::uint32_t>(i);
  Permutation p;
  p.image_ = std::move(image);
  return p;
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < image_.size(); ++i)
    if (image_[i] != i)
      return false;
  return true;
}

Permutation Permutation::inverse() const {
  std::vector<std::uint32_t> inv(image_.size());
  for (std::size_t i = 0; i < image_.size(); ++i)
    inv[image_[i]] = static_cast<std::uint32_t>(i);
  Permutation p;
  p.image_ = std::move(inv);
  return p;
}

std::vector<std::vector<std::uint32_t>> Permutation::cycles() const {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<bool> seen(image_.size(), false);
  for (std::uint32_t start = 0; start < image_.size(); ++start) {
    if (seen[start])
      continue;
    std::vector<std::uint32_t> cycle;
    for (auto p = start; !seen[p]; p = image_[p]) {
      seen[p] = true;
      cycle.push_back(p);
    }
    out.push_back(std::move(cycle));
  }
  return out;
}

int Permutation::sign() const {
  std::size_t even = 0;
  for (const auto &c : cycles())
    if (c.size() % 2 == 0)
      ++even;
  return even % 2 == 0 ? 1 : -1;
}

std::string Permutation::to_string() const {
  std::ostringstream os;
  for (const auto &c : cycles()) {
    if (c.size() < 2)
      continue;
    os << '(';
    for (std::size_t i = 0; i < c.size(); ++i)
      os << (i ? " " : "") << c[i];
    os << ')';
  }
  auto s = os.str();
  return s.empty() ? "()" : s;
}

Permutation compose(const Permutation &outer, const Permutation &inner) {
  if (outer.degree() != inner.degree())
    throw InvalidArgument("composing permutations of different degree");
  std::vector<std::uint32_t> image(inner.degree());
  for (std::size_t i = 0; i < image.size(); ++i)
    image[i] = outer(inner(static_cast<std::uint32_t>(i)));
  return Permutation(std::move(image));
}

std::size_t PermutationHash::operator()(const Permutation &p) const noexcept {
  // FNV-1a over the image table.
  std::uint64_t h = 1469598103934665603ull;
  for (auto v : p.image()) {
    h ^= v;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

} // namespace sofic
