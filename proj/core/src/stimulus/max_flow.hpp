#pragma once

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/push_relabel_max_flow.hpp>

#include <vector>

namespace ctxrec::stimulus::detail {

/// Thin wrapper over Boost.Graph push-relabel for small assignment networks.
class FlowNetwork {
 public:
  int add_node() { return static_cast<int>(boost::add_vertex(graph_)); }

  /// Returns a handle usable with flow().
  std::size_t add_edge(int from, int to, long capacity) {
    auto [fwd, ok1] = boost::add_edge(from, to, graph_);
    auto [rev, ok2] = boost::add_edge(to, from, graph_);
    auto cap = boost::get(boost::edge_capacity, graph_);
    auto reverse = boost::get(boost::edge_reverse, graph_);
    cap[fwd] = capacity;
    cap[rev] = 0;
    reverse[fwd] = rev;
    reverse[rev] = fwd;
    edges_.push_back(fwd);
    return edges_.size() - 1;
  }

  long solve(int source, int sink) {
    return boost::push_relabel_max_flow(graph_, boost::vertex(source, graph_), boost::vertex(sink, graph_));
  }

  [[nodiscard]] long flow(std::size_t handle) const {
    const auto e = edges_[handle];
    return boost::get(boost::edge_capacity, graph_, e) - boost::get(boost::edge_residual_capacity, graph_, e);
  }

 private:
  using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS, boost::no_property,
      boost::property<boost::edge_capacity_t, long,
                      boost::property<boost::edge_residual_capacity_t, long,
                                      boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;
  Graph graph_;
  std::vector<Graph::edge_descriptor> edges_;
};

}  // namespace ctxrec::stimulus::detail
