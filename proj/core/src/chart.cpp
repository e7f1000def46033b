#include "diffiety/chart.hpp"

#include <algorithm>
#include <sstream>

namespace diffiety {

CoordId Chart::insert(Coordinate c) const {
  if (by_name_.count(c.name))
    throw Error("chart: duplicate coordinate name '" + c.name + "'");
  coords_.push_back(std::move(c));
  CoordId id = static_cast<CoordId>(coords_.size() - 1);
  by_name_[coords_.back().name] = id;
  return id;
}

CoordId Chart::add_independent(const std::string& name) {
  std::lock_guard<std::mutex> lk(mu_);
  Coordinate c;
  c.kind = CoordKind::Independent;
  c.name = name;
  c.indep_index = static_cast<int>(indeps_.size());
  CoordId id = insert(std::move(c));
  indeps_.push_back(id);
  return id;
}

int Chart::add_dependent(const std::string& name) {
  std::lock_guard<std::mutex> lk(mu_);
  for (const auto& d : deps_)
    if (d.name == name) throw Error("chart: duplicate dependent '" + name + "'");
  deps_.push_back(Dependent{name, -1});
  return static_cast<int>(deps_.size() - 1);
}

void Chart::set_dependent_max_order(int dep, int max_order) {
  std::lock_guard<std::mutex> lk(mu_);
  deps_.at(dep).max_order = max_order;
}

CoordId Chart::add_plain(const std::string& name) {
  std::lock_guard<std::mutex> lk(mu_);
  Coordinate c;
  c.kind = CoordKind::Plain;
  c.name = name;
  return insert(std::move(c));
}

CoordId Chart::independent(int i) const {
  std::lock_guard<std::mutex> lk(mu_);
  return indeps_.at(i);
}

std::string Chart::jet_name(int dep, const JetOrders& orders) const {
  std::ostringstream os;
  os << deps_.at(dep).name << "_";
  if (orders.size() == 1) {
    os << orders[0];
  } else {
    os << "(";
    for (std::size_t i = 0; i < orders.size(); ++i)
      os << (i ? "," : "") << orders[i];
    os << ")";
  }
  return os.str();
}

CoordId Chart::jet(int dep, const JetOrders& orders) const {
  std::lock_guard<std::mutex> lk(mu_);
  if (dep < 0 || dep >= static_cast<int>(deps_.size()))
    throw Error("chart: no such dependent index " + std::to_string(dep));
  if (orders.size() != indeps_.size())
    throw Error("chart: jet multi-index length mismatch");
  for (int s : orders)
    if (s < 0) throw Error("chart: negative jet order");
  int total = std::accumulate(orders.begin(), orders.end(), 0);
  int cap = deps_[dep].max_order;
  if (cap >= 0 && total > cap)
    throw Error("chart: jet order " + std::to_string(total) + " exceeds cap for '" +
                deps_[dep].name + "'");
  auto key = std::make_pair(dep, orders);
  auto it = jets_.find(key);
  if (it != jets_.end()) return it->second;
  Coordinate c;
  c.kind = CoordKind::Jet;
  c.name = jet_name(dep, orders);
  c.dep_index = dep;
  c.orders = orders;
  CoordId id = insert(std::move(c));
  jets_[key] = id;
  return id;
}

bool Chart::has_jet(int dep, const JetOrders& orders) const {
  std::lock_guard<std::mutex> lk(mu_);
  return jets_.count(std::make_pair(dep, orders)) > 0;
}

CoordId Chart::plain(const std::string& name) const {
  std::lock_guard<std::mutex> lk(mu_);
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw Error("chart: unknown coordinate '" + name + "'");
  return it->second;
}

const Coordinate& Chart::coord(CoordId id) const {
  std::lock_guard<std::mutex> lk(mu_);
  return coords_.at(id);
}

const Dependent& Chart::dependent(int dep) const {
  std::lock_guard<std::mutex> lk(mu_);
  return deps_.at(dep);
}

int Chart::find_dependent(const std::string& name) const {
  std::lock_guard<std::mutex> lk(mu_);
  for (std::size_t i = 0; i < deps_.size(); ++i)
    if (deps_[i].name == name) return static_cast<int>(i);
  return -1;
}

int Chart::num_independents() const {
  std::lock_guard<std::mutex> lk(mu_);
  return static_cast<int>(indeps_.size());
}

int Chart::num_dependents() const {
  std::lock_guard<std::mutex> lk(mu_);
  return static_cast<int>(deps_.size());
}

std::size_t Chart::size() const {
  std::lock_guard<std::mutex> lk(mu_);
  return coords_.size();
}

bool Chart::coord_less(CoordId a, CoordId b) const {
  if (a == b) return false;
  const Coordinate& ca = coord(a);
  const Coordinate& cb = coord(b);
  auto rank = [](CoordKind k) {
    switch (k) {
      case CoordKind::Independent: return 0;
      case CoordKind::Plain: return 1;
      case CoordKind::Jet: return 2;
    }
    return 3;
  };
  if (rank(ca.kind) != rank(cb.kind)) return rank(ca.kind) < rank(cb.kind);
  switch (ca.kind) {
    case CoordKind::Independent:
      return ca.indep_index < cb.indep_index;
    case CoordKind::Plain:
      return ca.name < cb.name;
    case CoordKind::Jet: {
      int ta = ca.total_order(), tb = cb.total_order();
      if (ta != tb) return ta < tb;
      if (ca.orders != cb.orders) return ca.orders < cb.orders;
      return ca.dep_index < cb.dep_index;
    }
  }
  return false;
}

}  // namespace diffiety
