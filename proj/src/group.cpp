#include "sofic/group.hpp"

#include <cctype>
#include <deque>
#include <sstream>

#include "sofic/errors.hpp"

namespace sofic {

namespace {

// 'e' is reserved for the identity.
constexpr std::string_view kLetters = "abcdfghijklmnopqrstuvwxyz";

GroupElement from_perm(const Permutation &p) {
  GroupElement g;
  g.data.assign(p.image().begin(), p.image().end());
  return g;
}

Permutation to_perm(const GroupElement &g) {
  std::vector<std::uint32_t> image(g.data.begin(), g.data.end());
  return Permutation(std::move(image));
}

} // namespace

std::size_t GroupElementHash::operator()(const GroupElement &g) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (auto v : g.data) {
    h ^= static_cast<std::uint32_t>(v);
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h ^ g.data.size());
}

std::vector<Label> reduce_word(std::span<const Label> letters, int generator_count) {
  const int k = 2 * generator_count;
  std::vector<Label> out;
  out.reserve(letters.size());
  for (Label x : letters) {
    if (x < 0 || x >= k)
      throw InvalidArgument("unknown generator label " + std::to_string(x));
    const Label inv = (x + generator_count) % k;
    if (!out.empty() && out.back() == inv)
      out.pop_back();
    else
      out.push_back(x);
  }
  return out;
}

std::string default_label_name(Label label, int generator_count) {
  if (generator_count > static_cast<int>(kLetters.size()))
    throw InvalidArgument("at most 25 base generators are supported");
  if (label < 0 || label >= 2 * generator_count)
    throw InvalidArgument("unknown generator label " + std::to_string(label));
  if (label < generator_count)
    return std::string(1, kLetters[label]);
  return std::string(1, static_cast<char>(std::toupper(kLetters[label - generator_count])));
}

Group Group::free(int rank) {
  if (rank < 1)
    throw InvalidArgument("free group rank must be >= 1");
  Group g;
  g.kind_ = GroupKind::Free;
  g.rank_ = rank;
  for (Label l = 0; l < 2 * rank; ++l)
    g.names_.push_back(default_label_name(l, rank));
  return g;
}

Group Group::abelian(int dimension) {
  if (dimension < 1)
    throw InvalidArgument("lattice dimension must be >= 1");
  Group g;
  g.kind_ = GroupKind::Abelian;
  g.rank_ = dimension;
  for (Label l = 0; l < 2 * dimension; ++l)
    g.names_.push_back(default_label_name(l, dimension));
  return g;
}

Group Group::permutation(std::vector<Permutation> generators, std::size_t max_order) {
  if (generators.empty())
    throw InvalidArgument("permutation group needs at least one generator");
  const auto degree = generators.front().degree();
  for (const auto &p : generators)
    if (p.degree() != degree)
      throw InvalidArgument("permutation generators must share one degree");
  Group g;
  g.kind_ = GroupKind::Permutation;
  g.rank_ = static_cast<int>(generators.size());
  g.degree_ = degree;
  for (Label l = 0; l < 2 * g.rank_; ++l)
    g.names_.push_back(default_label_name(l, g.rank_));
  g.perms_ = generators;
  for (const auto &p : generators)
    g.perms_.push_back(p.inverse());

  auto table = std::make_shared<FiniteTable>();
  std::deque<GroupElement> queue;
  auto id = from_perm(Permutation::identity(degree));
  table->distance.emplace(id, 0);
  table->word.emplace(id, std::vector<Label>{});
  queue.push_back(id);
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    const int d = table->distance.at(cur);
    const auto word = table->word.at(cur);
    for (Label l = 0; l < g.label_count(); ++l) {
      auto next = g.left_multiply(l, cur);
      if (table->distance.count(next))
        continue;
      if (table->distance.size() >= max_order)
        throw ResourceLimit("permutation group order exceeds cap " + std::to_string(max_order));
      std::vector<Label> w;
      w.reserve(word.size() + 1);
      w.push_back(l);
      w.insert(w.end(), word.begin(), word.end());
      table->distance.emplace(next, d + 1);
      table->word.emplace(next, std::move(w));
      queue.push_back(std::move(next));
    }
  }
  g.table_ = std::move(table);
  return g;
}

Label Group::inverse_label(Label label) const {
  if (label < 0 || label >= label_count())
    throw InvalidArgument("unknown generator label " + std::to_string(label));
  return (label + rank_) % label_count();
}

const std::string &Group::label_name(Label label) const {
  if (label < 0 || label >= label_count())
    throw InvalidArgument("unknown generator label " + std::to_string(label));
  return names_[static_cast<std::size_t>(label)];
}

Label Group::parse_label(char c) const {
  for (Label l = 0; l < label_count(); ++l)
    if (names_[static_cast<std::size_t>(l)].size() == 1 && names_[static_cast<std::size_t>(l)][0] == c)
      return l;
  throw InvalidArgument(std::string("unknown generator letter '") + c + "' for " + describe());
}

GroupElement Group::identity() const {
  switch (kind_) {
  case GroupKind::Free:
    return {};
  case GroupKind::Abelian:
    return GroupElement{std::vector<std::int32_t>(static_cast<std::size_t>(rank_), 0)};
  case GroupKind::Permutation:
    return from_perm(Permutation::identity(degree_));
  }
  return {};
}

GroupElement Group::generator(Label label) const { return left_multiply(label, identity()); }

GroupElement Group::left_multiply(Label label, const GroupElement &g) const {
  const Label inv = inverse_label(label);
  switch (kind_) {
  case GroupKind::Free: {
    GroupElement out;
    if (!g.data.empty() && g.data.front() == inv) {
      out.data.assign(g.data.begin() + 1, g.data.end());
    } else {
      out.data.reserve(g.data.size() + 1);
      out.data.push_back(label);
      out.data.insert(out.data.end(), g.data.begin(), g.data.end());
    }
    return out;
  }
  case GroupKind::Abelian: {
    GroupElement out = g;
    if (label < rank_)
      ++out.data[static_cast<std::size_t>(label)];
    else
      --out.data[static_cast<std::size_t>(label - rank_)];
    return out;
  }
  case GroupKind::Permutation: {
    const auto &p = perms_[static_cast<std::size_t>(label)];
    GroupElement out;
    out.data.resize(g.data.size());
    for (std::size_t i = 0; i < g.data.size(); ++i)
      out.data[i] = static_cast<std::int32_t>(p(static_cast<std::uint32_t>(g.data[i])));
    return out;
  }
  }
  return {};
}

GroupElement Group::multiply(const GroupElement &a, const GroupElement &b) const {
  switch (kind_) {
  case GroupKind::Free: {
    std::vector<Label> word(a.data.begin(), a.data.end());
    word.insert(word.end(), b.data.begin(), b.data.end());
    return GroupElement{reduce_word(word, rank_)};
  }
  case GroupKind::Abelian: {
    GroupElement out = a;
    for (std::size_t i = 0; i < out.data.size(); ++i)
      out.data[i] += b.data[i];
    return out;
  }
  case GroupKind::Permutation:
    return from_perm(compose(to_perm(a), to_perm(b)));
  }
  return {};
}

GroupElement Group::inverse(const GroupElement &a) const {
  switch (kind_) {
  case GroupKind::Free: {
    GroupElement out;
    out.data.reserve(a.data.size());
    for (auto it = a.data.rbegin(); it != a.data.rend(); ++it)
      out.data.push_back(inverse_label(*it));
    return out;
  }
  case GroupKind::Abelian: {
    GroupElement out = a;
    for (auto &v : out.data)
      v = -v;
    return out;
  }
  case GroupKind::Permutation:
    return from_perm(to_perm(a).inverse());
  }
  return {};
}

GroupElement Group::evaluate(std::span<const Label> word) const {
  GroupElement g = identity();
  for (auto it = word.rbegin(); it != word.rend(); ++it)
    g = left_multiply(*it, g);
  return g;
}

int Group::length(const GroupElement &g) const {
  switch (kind_) {
  case GroupKind::Free:
    return static_cast<int>(g.data.size());
  case GroupKind::Abelian: {
    int n = 0;
    for (auto v : g.data)
      n += v < 0 ? -v : v;
    return n;
  }
  case GroupKind::Permutation: {
    auto it = table_->distance.find(g);
    if (it == table_->distance.end())
      throw InvalidArgument("element is not in the permutation group");
    return it->second;
  }
  }
  return 0;
}

std::vector<Label> Group::word(const GroupElement &g) const {
  std::vector<Label> out;
  switch (kind_) {
  case GroupKind::Free:
    out.assign(g.data.begin(), g.data.end());
    break;
  case GroupKind::Abelian:
    for (int i = 0; i < rank_; ++i) {
      const auto c = g.data[static_cast<std::size_t>(i)];
      out.insert(out.end(), static_cast<std::size_t>(c < 0 ? -c : c), c >= 0 ? i : i + rank_);
    }
    break;
  case GroupKind::Permutation: {
    auto it = table_->word.find(g);
    if (it == table_->word.end())
      throw InvalidArgument("element is not in the permutation group");
    out = it->second;
    break;
  }
  }
  return out;
}

std::string Group::format(const GroupElement &g) const {
  std::string out;
  for (auto l : word(g))
    out += label_name(l);
  return out.empty() ? "e" : out;
}

GroupElement Group::parse(std::string_view word) const {
  std::vector<Label> letters;
  if (!(word.empty() || word == "e" || word == "1" || word == "\xce\xb5")) {
    for (char c : word) {
      if (std::isspace(static_cast<unsigned char>(c)))
        continue;
      letters.push_back(parse_label(c));
    }
  }
  return evaluate(letters);
}

std::string Group::describe() const {
  std::ostringstream os;
  switch (kind_) {
  case GroupKind::Free:
    os << "F_" << rank_;
    break;
  case GroupKind::Abelian:
    os << "Z^" << rank_;
    break;
  case GroupKind::Permutation:
    os << "permutation group of degree " << degree_ << " with " << rank_ << " generators";
    break;
  }
  return os.str();
}

const Permutation &Group::permutation(Label label) const {
  if (kind_ != GroupKind::Permutation)
    throw InvalidArgument("not a permutation group");
  return perms_.at(static_cast<std::size_t>(label));
}

std::size_t Group::order() const {
  if (kind_ != GroupKind::Permutation)
    throw InvalidArgument("group is infinite");
  return table_->distance.size();
}

} // namespace sofic
