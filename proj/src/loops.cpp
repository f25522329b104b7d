#include "ergo/loops.hpp"

#include "ergo/error.hpp"

#include <algorithm>

namespace ergo {

int LoopForest::loop_of_header(int n) const {
  for (std::size_t i = 0; i < loops.size(); ++i)
    if (loops[i].header == n) return static_cast<int>(i);
  return -1;
}

int LoopForest::innermost_containing(int n) const {
  int best = -1;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    if (!loops[i].body.count(n)) continue;
    if (best < 0 || loops[i].body.size() < loops[best].body.size())
      best = static_cast<int>(i);
  }
  return best;
}

namespace {

/// Reverse postorder from the entry node.
std::vector<int> reverse_postorder(const Cfg& g) {
  std::vector<int> order;
  std::vector<int> state(g.nodes.size(), 0);  // 0 unseen, 1 open, 2 done
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  state[0] = 1;
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < g.succ[n].size()) {
      int s = g.succ[n][next++];
      if (state[s] == 0) {
        state[s] = 1;
        stack.push_back({s, 0});
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace

std::vector<int> immediate_dominators(const Cfg& g) {
  // Cooper-Harvey-Kennedy iterative dominators over reverse postorder.
  std::vector<int> rpo = reverse_postorder(g);
  std::vector<int> rpo_pos(g.nodes.size(), -1);
  for (std::size_t i = 0; i < rpo.size(); ++i) rpo_pos[rpo[i]] = static_cast<int>(i);

  std::vector<int> idom(g.nodes.size(), -1);
  idom[0] = 0;
  auto intersect = [&](int a, int b) {
    while (a != b) {
      while (rpo_pos[a] > rpo_pos[b]) a = idom[a];
      while (rpo_pos[b] > rpo_pos[a]) b = idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int n : rpo) {
      if (n == 0) continue;
      int new_idom = -1;
      for (int p : g.pred[n]) {
        if (idom[p] < 0) continue;
        new_idom = new_idom < 0 ? p : intersect(new_idom, p);
      }
      if (new_idom >= 0 && idom[n] != new_idom) {
        idom[n] = new_idom;
        changed = true;
      }
    }
  }
  return idom;
}

bool dominates(const std::vector<int>& idom, int a, int b) {
  while (true) {
    if (a == b) return true;
    if (b == 0) return false;
    b = idom[b];
  }
}

namespace {

/// Any retreating DFS edge whose target does not dominate its source marks an
/// irreducible region.
void check_reducible(const Cfg& g, const std::vector<int>& idom) {
  std::vector<int> state(g.nodes.size(), 0);
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  state[0] = 1;
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < g.succ[n].size()) {
      int s = g.succ[n][next++];
      if (state[s] == 0) {
        state[s] = 1;
        stack.push_back({s, 0});
      } else if (state[s] == 1 && !dominates(idom, s, n)) {
        throw AnalysisError(ErrorKind::IrreducibleLoop,
                            "cycle through " + g.nodes[s] + " in @" + g.fn +
                                " has no single dominating header");
      }
    } else {
      state[n] = 2;
      stack.pop_back();
    }
  }
}

/// Body of the natural loop of back edge latch->header: header plus all nodes
/// reaching the latch without passing through the header.
void grow_loop(const Cfg& g, int header, int latch, std::set<int>& body) {
  body.insert(header);
  if (body.count(latch)) return;
  std::vector<int> work{latch};
  body.insert(latch);
  while (!work.empty()) {
    int n = work.back();
    work.pop_back();
    for (int p : g.pred[n])
      if (!body.count(p)) {
        body.insert(p);
        work.push_back(p);
      }
  }
}

}  // namespace

LoopForest find_loops(const Cfg& g) {
  std::vector<int> idom = immediate_dominators(g);
  check_reducible(g, idom);

  // back edges grouped by header
  std::map<int, std::vector<int>> latches_by_header;
  for (const auto& e : g.edges)
    if (dominates(idom, e.to, e.from)) latches_by_header[e.to].push_back(e.from);

  LoopForest forest;
  for (auto& [header, latches] : latches_by_header) {
    Loop loop;
    loop.header = header;
    std::sort(latches.begin(), latches.end());
    latches.erase(std::unique(latches.begin(), latches.end()), latches.end());
    loop.latches = latches;
    for (int latch : latches) grow_loop(g, header, latch, loop.body);
    for (const auto& e : g.edges) {
      bool from_in = loop.body.count(e.from) != 0;
      bool to_in = loop.body.count(e.to) != 0;
      if (from_in && !to_in) loop.exits.push_back({e.from, e.to});
      if (!from_in && to_in && e.to != header) loop.reentries.push_back({e.from, e.to});
    }
    std::sort(loop.exits.begin(), loop.exits.end());
    loop.exits.erase(std::unique(loop.exits.begin(), loop.exits.end()), loop.exits.end());
    forest.loops.push_back(std::move(loop));
  }

  // nesting: the parent is the smallest other loop whose body holds the header
  for (std::size_t i = 0; i < forest.loops.size(); ++i) {
    int parent = -1;
    for (std::size_t j = 0; j < forest.loops.size(); ++j) {
      if (i == j || !forest.loops[j].body.count(forest.loops[i].header)) continue;
      if (parent < 0 || forest.loops[j].body.size() < forest.loops[parent].body.size())
        parent = static_cast<int>(j);
    }
    forest.loops[i].parent = parent;
    if (parent >= 0)
      forest.loops[parent].children.push_back(static_cast<int>(i));
    else
      forest.roots.push_back(static_cast<int>(i));
  }
  return forest;
}

}  // namespace ergo
