#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxrec/stimulus/annotation.hpp"

namespace ctxrec::stimulus {

struct SelectionConfig {
  int total_targets = 0;
  std::vector<SizeBin> sizes{SizeBin::S1, SizeBin::S2, SizeBin::S4, SizeBin::S8};
  /// Empty means every category seen among the annotations.
  std::vector<std::string> categories;
  bool exclude_border = false;
};

/// Selected targets, one per image, before any condition is rendered.
struct ManifestSkeleton {
  std::vector<TargetAnnotation> targets;
  SelectionConfig config;
  std::uint64_t seed = 0;
};

struct DeficientCell {
  SizeBin size = SizeBin::Unbinned;
  std::string category;
  int required = 0;
  int available = 0;
};

class InfeasibleSelection : public std::runtime_error {
 public:
  InfeasibleSelection(const std::string& what, std::vector<DeficientCell> cells)
      : std::runtime_error(what), cells_(std::move(cells)) {}
  [[nodiscard]] const std::vector<DeficientCell>& cells() const { return cells_; }

 private:
  std::vector<DeficientCell> cells_;
};

/// Picks targets uniformly over (size, category) cells, each cell within one of
/// every other, never two from the same image. Deterministic in `seed`.
[[nodiscard]] ManifestSkeleton select_targets(std::span<const TargetAnnotation> annotations,
                                              const SelectionConfig& config, std::uint64_t seed);

/// A trial offered to the session balancer.
struct SessionCandidate {
  std::int64_t image_id = 0;
  std::string category;
  SizeBin size = SizeBin::Unbinned;
  std::string condition_key;  // used to spread conditions evenly
};

class SessionInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Returns indices into `candidates` forming one subject session of `count`
/// trials: at most `max_per_category` per category, one trial per image, size
/// bins within one of each other, order shuffled under `seed`.
[[nodiscard]] std::vector<std::size_t> balance_session(std::span<const SessionCandidate> candidates,
                                                       int count, int max_per_category,
                                                       std::uint64_t seed);

}  // namespace ctxrec::stimulus
