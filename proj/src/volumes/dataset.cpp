// Copyright 2026 The planret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "planret/volumes/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <thread>

#include "planret/error.hpp"
#include "planret/rng.hpp"

namespace planret::volumes {
namespace {

void check_fractions(const std::array<double, 3>& f) {
  const double sum = f[0] + f[1] + f[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions sum to " + std::to_string(sum) + ", expected 1");
  }
  for (const double v : f) {
    if (v < 0.0) throw ConfigError("split fractions must be non-negative");
  }
}

std::array<std::size_t, 3> largest_remainder(std::size_t n, const std::array<double, 3>& f) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = static_cast<double>(n) * f[s];
    counts[s] = static_cast<std::size_t>(std::floor(exact));
    rem[s] = exact - std::floor(exact);
    assigned += counts[s];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[order[i % 3]];
  return counts;
}

}  // namespace

std::vector<Split> assign_splits(std::span<const int> class_ids,
                                 const std::array<double, 3>& fractions, std::uint64_t seed) {
  check_fractions(fractions);
  const std::size_t n = class_ids.size();
  const auto totals = largest_remainder(n, fractions);

  int max_class = 0;
  for (const int c : class_ids) max_class = std::max(max_class, c);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_class) + 1);
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(class_ids[i])].push_back(i);

  std::vector<std::size_t> class_rank(members.size());
  std::iota(class_rank.begin(), class_rank.end(), 0);
  Rng order_rng(derive_seed(seed, 0x5eed));
  order_rng.shuffle(std::span<std::size_t>(class_rank));

  struct Item {
    double key;
    std::size_t rank;
    std::size_t index;
  };
  std::vector<Item> items;
  items.reserve(n);
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    Rng rng(derive_seed(seed, 0x10000 + c));
    rng.shuffle(std::span<std::size_t>(m));
    for (std::size_t j = 0; j < m.size(); ++j) {
      items.push_back({(static_cast<double>(j) + 0.5) / static_cast<double>(m.size()),
                       class_rank[c], m[j]});
    }
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.rank < b.rank;
  });
  std::vector<Split> splits(n, Split::kTest);
  for (std::size_t i = 0; i < items.size(); ++i) {
    splits[items[i].index] = i < totals[0]              ? Split::kTrain
                             : i < totals[0] + totals[1] ? Split::kValidation
                                                         : Split::kTest;
  }
  return splits;
}

std::vector<Case> make_dataset(const DatasetConfig& config) {
  if (config.per_class < 3) {
    throw ConfigError("per_class must be >= 3 (got " + std::to_string(config.per_class) +
                      "); triplet sampling needs at least two training cases per class");
  }
  check_fractions(config.split_fractions);
  const std::size_t total = static_cast<std::size_t>(config.per_class) * kNumClasses;
  std::vector<Case> cases(total);
  std::vector<std::exception_ptr> errors(total);

  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < total; i += stride) {
      try {
        PhantomSpec spec = config.phantom;
        spec.criteria = criteria_from_class(static_cast<int>(i) / config.per_class);
        spec.seed = derive_seed(config.seed, i);
        char id[32];
        std::snprintf(id, sizeof(id), "case_%04zu", i);
        cases[i] = generate_phantom(spec, id);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(config.threads, 1)), 1, total);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<int> class_ids(total);
  for (std::size_t i = 0; i < total; ++i) class_ids[i] = cases[i].meta.class_id;
  const auto splits = assign_splits(class_ids, config.split_fractions, config.seed);
  for (std::size_t i = 0; i < total; ++i) cases[i].meta.split = splits[i];
  return cases;
}

}  // namespace planret::volumes
