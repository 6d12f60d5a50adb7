#include "ctxrec/stimulus/selection.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "ctxrec/rng.hpp"
#include "max_flow.hpp"

namespace ctxrec::stimulus {

namespace {

struct Cell {
  SizeBin size;
  std::string category;
  int quota = 0;
  // image_id -> indices of eligible annotations in this cell
  std::map<std::int64_t, std::vector<std::size_t>> images;
};

std::vector<int> spread_quota(int total, std::size_t buckets, Rng& rng) {
  std::vector<int> quota(buckets, buckets ? total / static_cast<int>(buckets) : 0);
  if (buckets == 0) return quota;
  std::vector<std::size_t> order(buckets);
  for (std::size_t i = 0; i < buckets; ++i) order[i] = i;
  rng.shuffle(std::span(order));
  const auto extra = static_cast<std::size_t>(total % static_cast<int>(buckets));
  for (std::size_t i = 0; i < extra; ++i) ++quota[order[i]];
  return quota;
}

}  // namespace

ManifestSkeleton select_targets(std::span<const TargetAnnotation> annotations, const SelectionConfig& config,
                                std::uint64_t seed) {
  Rng rng(derive_seed(seed, "select_targets"));

  std::set<std::string> categories(config.categories.begin(), config.categories.end());
  const std::set<SizeBin> sizes(config.sizes.begin(), config.sizes.end());
  if (categories.empty()) {
    for (const auto& a : annotations) {
      if (sizes.contains(a.size_bin)) categories.insert(a.category);
    }
  }

  std::vector<Cell> cells;
  std::map<std::pair<SizeBin, std::string>, std::size_t> cell_index;
  for (SizeBin size : sizes) {
    for (const auto& cat : categories) {
      cell_index[{size, cat}] = cells.size();
      cells.push_back({size, cat, 0, {}});
    }
  }
  if (cells.empty()) {
    throw InfeasibleSelection("no (size, category) cells to select from", {});
  }

  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    if (config.exclude_border && a.touches_border) continue;
    auto it = cell_index.find({a.size_bin, a.category});
    if (it == cell_index.end()) continue;
    cells[it->second].images[a.image_id].push_back(i);
  }

  const auto quotas = spread_quota(config.total_targets, cells.size(), rng);
  std::vector<DeficientCell> deficient;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    cells[c].quota = quotas[c];
    const int available = static_cast<int>(cells[c].images.size());
    if (available < cells[c].quota) {
      deficient.push_back({cells[c].size, cells[c].category, cells[c].quota, available});
    }
  }
  if (!deficient.empty()) {
    throw InfeasibleSelection("not enough binned annotations for the requested balance", std::move(deficient));
  }

  detail::FlowNetwork net;
  const int source = net.add_node();
  const int sink = net.add_node();

  std::vector<std::int64_t> image_ids;
  for (const auto& cell : cells) {
    for (const auto& [id, _] : cell.images) image_ids.push_back(id);
  }
  std::sort(image_ids.begin(), image_ids.end());
  image_ids.erase(std::unique(image_ids.begin(), image_ids.end()), image_ids.end());
  rng.shuffle(std::span(image_ids));
  std::map<std::int64_t, int> image_node;
  for (auto id : image_ids) {
    image_node[id] = net.add_node();
    net.add_edge(image_node[id], sink, 1);
  }

  struct Link {
    std::size_t cell;
    std::int64_t image_id;
    std::size_t handle;
  };
  std::vector<Link> links;
  std::vector<std::size_t> cell_handles;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const int node = net.add_node();
    cell_handles.push_back(net.add_edge(source, node, cells[c].quota));
    std::vector<std::int64_t> ids;
    for (const auto& [id, _] : cells[c].images) ids.push_back(id);
    rng.shuffle(std::span(ids));
    for (auto id : ids) links.push_back({c, id, net.add_edge(node, image_node[id], 1)});
  }

  const long flow = net.solve(source, sink);
  if (flow < config.total_targets) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const long got = net.flow(cell_handles[c]);
      if (got < cells[c].quota) {
        deficient.push_back({cells[c].size, cells[c].category, cells[c].quota, static_cast<int>(got)});
      }
    }
    throw InfeasibleSelection("one-target-per-image constraint cannot be met", std::move(deficient));
  }

  ManifestSkeleton skeleton;
  skeleton.config = config;
  skeleton.seed = seed;
  for (const auto& link : links) {
    if (net.flow(link.handle) == 0) continue;
    const auto& choices = cells[link.cell].images.at(link.image_id);
    skeleton.targets.push_back(annotations[choices[rng.below(choices.size())]]);
  }
  std::sort(skeleton.targets.begin(), skeleton.targets.end(),
            [](const TargetAnnotation& a, const TargetAnnotation& b) { return a.image_id < b.image_id; });
  return skeleton;
}

std::vector<std::size_t> balance_session(std::span<const SessionCandidate> candidates, int count,
                                         int max_per_category, std::uint64_t seed) {
  if (count <= 0) return {};
  Rng rng(derive_seed(seed, "balance_session"));

  std::map<std::int64_t, std::vector<std::size_t>> by_image;
  std::set<std::string> categories;
  std::set<SizeBin> sizes;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    by_image[candidates[i].image_id].push_back(i);
    categories.insert(candidates[i].category);
    sizes.insert(candidates[i].size);
  }

  const std::vector<SizeBin> size_list(sizes.begin(), sizes.end());
  const auto quotas = spread_quota(count, size_list.size(), rng);

  detail::FlowNetwork net;
  const int source = net.add_node();
  const int sink = net.add_node();
  std::map<std::string, int> cat_node;
  for (const auto& c : categories) {
    cat_node[c] = net.add_node();
    net.add_edge(source, cat_node[c], max_per_category);
  }
  std::map<SizeBin, int> size_node;
  std::map<SizeBin, std::size_t> size_handle;
  for (std::size_t s = 0; s < size_list.size(); ++s) {
    size_node[size_list[s]] = net.add_node();
    size_handle[size_list[s]] = net.add_edge(size_node[size_list[s]], sink, quotas[s]);
  }

  std::vector<std::int64_t> image_ids;
  for (const auto& [id, _] : by_image) image_ids.push_back(id);
  rng.shuffle(std::span(image_ids));
  std::vector<std::pair<std::int64_t, std::size_t>> image_links;
  for (auto id : image_ids) {
    const auto& first = candidates[by_image[id].front()];
    const int node = net.add_node();
    net.add_edge(cat_node[first.category], node, 1);
    image_links.emplace_back(id, net.add_edge(node, size_node[first.size], 1));
  }

  const long flow = net.solve(source, sink);
  if (flow < count) {
    std::ostringstream msg;
    msg << "session of " << count << " trials infeasible: at most " << flow << " achievable ("
        << categories.size() << " categories x " << max_per_category << " per category";
    for (std::size_t s = 0; s < size_list.size(); ++s) {
      msg << "; " << to_string(size_list[s]) << " " << net.flow(size_handle[size_list[s]]) << "/" << quotas[s];
    }
    msg << ")";
    throw SessionInfeasible(msg.str());
  }

  // One trial per chosen image; conditions spread by least-used-first.
  std::map<std::string, int> condition_use;
  std::vector<std::size_t> chosen;
  for (const auto& [id, handle] : image_links) {
    if (net.flow(handle) == 0) continue;
    auto options = by_image[id];
    rng.shuffle(std::span(options));
    const auto best = std::min_element(options.begin(), options.end(), [&](std::size_t a, std::size_t b) {
      return condition_use[candidates[a].condition_key] < condition_use[candidates[b].condition_key];
    });
    ++condition_use[candidates[*best].condition_key];
    chosen.push_back(*best);
  }
  rng.shuffle(std::span(chosen));
  return chosen;
}

}  // namespace ctxrec::stimulus
