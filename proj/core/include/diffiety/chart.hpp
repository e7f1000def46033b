#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "diffiety/common.hpp"

namespace diffiety {

using CoordId = std::uint32_t;
using JetOrders = std::vector<int>;

enum class CoordKind : std::uint8_t { Independent, Plain, Jet };

struct Coordinate {
  CoordKind kind{};
  std::string name;
  int indep_index = -1;  // Independent
  int dep_index = -1;    // Jet
  JetOrders orders;      // Jet: length == number of independents
  int total_order() const {
    return std::accumulate(orders.begin(), orders.end(), 0);
  }
};

struct Dependent {
  std::string name;
  // Maximal jet order kept in the chart; -1 means the full infinite tail.
  // Resolved dependents of an ODE system keep only order 0.
  int max_order = -1;
};

// Coordinate chart of the underlying space. Jet coordinates are interned on
// demand, so the chart can serve any finite window of the infinite space.
class Chart {
 public:
  CoordId add_independent(const std::string& name);
  int add_dependent(const std::string& name);
  void set_dependent_max_order(int dep, int max_order);
  CoordId add_plain(const std::string& name);

  CoordId independent(int i) const;
  // Interns the jet coordinate w^dep_orders on demand.
  CoordId jet(int dep, const JetOrders& orders) const;
  // Single-independent-variable helper: w^dep_s.
  CoordId jet1(int dep, int s) const { return jet(dep, JetOrders{s}); }
  CoordId plain(const std::string& name) const;

  bool has_jet(int dep, const JetOrders& orders) const;

  const Coordinate& coord(CoordId id) const;
  const std::string& name(CoordId id) const { return coord(id).name; }
  const Dependent& dependent(int dep) const;
  int find_dependent(const std::string& name) const;  // -1 if absent

  int num_independents() const;
  int num_dependents() const;
  std::size_t size() const;

  // Canonical coordinate order: independents, then plain coordinates by
  // name, then jets graded by total order, multi-index, dependent index.
  bool coord_less(CoordId a, CoordId b) const;

 private:
  std::string jet_name(int dep, const JetOrders& orders) const;
  CoordId insert(Coordinate c) const;

  mutable std::mutex mu_;
  mutable std::deque<Coordinate> coords_;  // stable references under growth
  mutable std::map<std::string, CoordId> by_name_;
  std::vector<CoordId> indeps_;
  std::vector<Dependent> deps_;
  mutable std::map<std::pair<int, JetOrders>, CoordId> jets_;
};

}  // namespace diffiety
