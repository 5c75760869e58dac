#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace ctxsearch {

enum class Algo { Active, Passive };

inline const char* to_string(Algo a) { return a == Algo::Active ? "active" : "passive"; }

/// One trial's outcome. n_labeled and m_total cover the whole run, trisection
/// included; labels_al1 + labels_al2 is the learning-phase label count.
struct RunRecord {
  std::string study;
  Algo algo = Algo::Active;
  std::size_t d = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t n_labeled = 0;
  std::size_t m_total = 0;
  std::optional<double> rho_configured;
  double err = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  std::size_t labels_trisection = 0;
  std::size_t labels_al1 = 0;
  std::size_t labels_al2 = 0;
  std::size_t wall_ms = 0;

  std::size_t learning_labels() const noexcept { return labels_al1 + labels_al2; }
};

}  // namespace ctxsearch
