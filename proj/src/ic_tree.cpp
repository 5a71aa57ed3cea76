#include "icterm/ic_tree.hpp"

#include <deque>
#include <sstream>

namespace icterm {

IcTree build_ic_tree(const ModedProgram& p, const Query& q,
                     std::size_t node_budget) {
  IcTree t;
  t.nodes.push_back({canonical(q), 0, {}});
  std::deque<int> frontier{0};
  while (!frontier.empty()) {
    int id = frontier.front();
    frontier.pop_front();
    Query cur = t.nodes[id].query;  // copy: nodes vector reallocates below
    int depth = t.nodes[id].depth;
    VarSet avoid = vars_of(cur);
    for (const IcOption& opt : ic_options(p, cur, avoid)) {
      if (t.nodes.size() >= node_budget) {
        t.complete = false;
        return t;
      }
      VarSet step_avoid = avoid;
      DerivationStep s =
          ic_step(p, cur, opt.atom_index, opt.clause_ordinal, step_avoid);
      int child = static_cast<int>(t.nodes.size());
      t.nodes.push_back({canonical(s.resolvent), depth + 1, {}});
      t.max_depth = std::max(t.max_depth, depth + 1);
      t.nodes[id].children.push_back(
          {opt.atom_index, opt.clause_ordinal,
           s.mgu.restricted_to(vars_of(cur)), child});
      frontier.push_back(child);
    }
  }
  return t;
}

std::optional<std::size_t> nodes_count(const IcTree& t) {
  if (!t.complete) return std::nullopt;
  return t.nodes.size();
}

Atom freshen_outputs(const Atom& a, const ModedProgram& p) {
  const Mode& m = p.mode_of(a.pred);
  VarGen gen = gen_above(vars_of(a));
  Atom out = a;
  for (std::size_t i = 0; i < out.args.size(); ++i)
    if (m.flows[i] == Flow::Out) out.args[i] = Term::var(gen.fresh());
  return out;
}

std::optional<std::size_t> ictree_level(const ModedProgram& p, const Atom& a,
                                        std::size_t node_budget) {
  return nodes_count(build_ic_tree(p, {freshen_outputs(a, p)}, node_budget));
}

std::string render_tree(const IcTree& t) {
  std::ostringstream os;
  struct Item {
    int id;
    int indent;
    std::string label;
  };
  std::vector<Item> stack{{0, 0, ""}};
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    for (int i = 0; i < it.indent; ++i) os << "  ";
    if (!it.label.empty()) os << it.label << ' ';
    os << to_string(t.nodes[it.id].query) << '\n';
    const auto& edges = t.nodes[it.id].children;
    for (auto e = edges.rbegin(); e != edges.rend(); ++e) {
      std::ostringstream label;
      label << "[atom " << e->atom_index << ", "
            << (e->clause_ordinal < 0
                    ? std::string("builtin")
                    : "clause " + std::to_string(e->clause_ordinal))
            << "]";
      stack.push_back({e->child, it.indent + 1, label.str()});
    }
  }
  if (!t.complete) os << "... (cut at node budget)\n";
  return os.str();
}

}  // namespace icterm
